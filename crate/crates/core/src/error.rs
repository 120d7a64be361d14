use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An intermediate iterated logarithm was not positive, so the next
    /// logarithm cannot be taken.
    #[error("iterated logarithm undefined: level {level} has value {value}")]
    UndefinedIterate { level: u32, value: f64 },

    #[error("result does not fit in native integer width: {0}")]
    Overflow(String),

    #[error("normalizer '{name}' decreases: f({at}) = {value} < {previous}")]
    NonMonotone {
        name: String,
        at: u64,
        value: f64,
        previous: f64,
    },

    #[error("range of {requested} entries exceeds the budget of {budget}")]
    RangeTooLarge { requested: u64, budget: u64 },

    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("could not factor {0} within the trial-division and rho budget")]
    FactorBudgetExceeded(String),

    #[error("no prime placement satisfies the window constraints: {0}")]
    NoPlacement(String),

    #[error("threshold ordering violated (v = {v}, y = {y}, L = {l}, U = {u}): {reason}")]
    OrderingViolated {
        l: u64,
        v: f64,
        y: f64,
        u: f64,
        reason: String,
    },

    #[error("{s} has no admissible factorization shape under this configuration")]
    UnclassifiableForm { s: u64 },

    #[error("every residue class modulo {p} is forbidden by the tuple")]
    NoAllowedClass { p: u64 },

    #[error("tuple element {h} is not coprime to W (gcd = {gcd})")]
    HViolation { h: u64, gcd: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Serialize(String),
}

impl Error {
    /// Budget and overflow failures, as opposed to plain validation errors.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::RangeTooLarge { .. }
                | Error::BudgetExceeded(_)
                | Error::FactorBudgetExceeded(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
