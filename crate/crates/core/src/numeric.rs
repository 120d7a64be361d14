//! Iterated logarithms, the Rankin normalizer and its relatives.
//!
//! Logarithms are natural. `log_ν x` is the ν-fold iterate, so
//! `log_2 x = ln ln x`. Every evaluator has a `_ln` twin that takes `ln x`
//! instead of `x`, which is how towers such as `e^(e^(e^e))` are reached
//! without overflowing an `f64`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes;

/// ν-fold natural logarithm of `x`.
///
/// Only the final level may come out non-positive.
pub fn iter_log(x: f64, nu: u32) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::UndefinedIterate { level: 0, value: x });
    }
    if nu == 0 {
        return Err(Error::Invalid("iteration count must be positive".into()));
    }
    iter_log_ln(x.ln(), nu)
}

/// Same as [`iter_log`] but the caller supplies `ln x`.
pub fn iter_log_ln(ln_x: f64, nu: u32) -> Result<f64> {
    if nu == 0 {
        return Err(Error::Invalid("iteration count must be positive".into()));
    }
    let mut value = ln_x;
    for level in 1..nu {
        if !(value > 0.0) {
            return Err(Error::UndefinedIterate { level, value });
        }
        value = value.ln();
    }
    Ok(value)
}

/// Value of the Rankin function together with a regime marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankinG {
    pub value: f64,
    /// `log_4 x < 0`: the formula evaluates but lies outside the region
    /// where it describes anything asymptotic.
    pub negative_regime: bool,
}

/// `g(x) = log_2 x · log_4 x / (log_3 x)^2`.
pub fn rankin_g(x: f64) -> Result<RankinG> {
    if !(x > 1.0) {
        return Err(Error::UndefinedIterate { level: 0, value: x });
    }
    rankin_g_ln(x.ln())
}

pub fn rankin_g_ln(ln_x: f64) -> Result<RankinG> {
    let l2 = iter_log_ln(ln_x, 2)?;
    let l3 = iter_log_ln(ln_x, 3)?;
    if !(l3 > 0.0) {
        return Err(Error::UndefinedIterate {
            level: 3,
            value: l3,
        });
    }
    let l4 = l3.ln();
    Ok(RankinG {
        value: l2 * l4 / (l3 * l3),
        negative_regime: l4 < 0.0,
    })
}

/// The slowly growing factor ω₀ in `g₀ = ω₀ · g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Omega0 {
    /// `log_2 x`.
    #[default]
    LogLog,
    /// `log_3 x`.
    LogLogLog,
    Constant(f64),
}

impl Omega0 {
    pub fn eval_ln(self, ln_x: f64) -> Result<f64> {
        match self {
            Omega0::LogLog => iter_log_ln(ln_x, 2),
            Omega0::LogLogLog => iter_log_ln(ln_x, 3),
            Omega0::Constant(c) => Ok(c),
        }
    }
}

/// Unpinned growth constants. All default to 1 except `c7`, which is
/// calibrated so that `k_for_m(2)` and the exponential schedule agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub c7: f64,
    pub omega0: Omega0,
    pub c0: f64,
    pub c9: f64,
    pub c10: f64,
}

impl Default for GrowthConstants {
    fn default() -> Self {
        Self {
            c7: 50.0 * (-10.0f64).exp(),
            omega0: Omega0::default(),
            c0: 1.0,
            c9: 1.0,
            c10: 1.0,
        }
    }
}

impl GrowthConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c7", self.c7),
            ("c0", self.c0),
            ("c9", self.c9),
            ("c10", self.c10),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Invalid(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if let Omega0::Constant(c) = self.omega0 {
            if !(c > 0.0) {
                return Err(Error::Invalid(format!(
                    "constant ω₀ must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// `g₀(x) = ω₀(x) g(x)`.
pub fn rankin_g0(x: f64, constants: &GrowthConstants) -> Result<RankinG> {
    if !(x > 1.0) {
        return Err(Error::UndefinedIterate { level: 0, value: x });
    }
    rankin_g0_ln(x.ln(), constants)
}

pub fn rankin_g0_ln(ln_x: f64, constants: &GrowthConstants) -> Result<RankinG> {
    let g = rankin_g_ln(ln_x)?;
    let omega = constants.omega0.eval_ln(ln_x)?;
    Ok(RankinG {
        value: omega * g.value,
        negative_regime: g.negative_regime,
    })
}

/// Tuple size needed to force `m` primes: 50 for pairs, `⌈C₇ e^{5m}⌉` beyond.
pub fn k_for_m(m: u32, constants: &GrowthConstants) -> Result<u64> {
    match m {
        0 | 1 => Err(Error::Invalid(format!("m must be at least 2, got {m}"))),
        2 => Ok(50),
        _ => {
            let k = (constants.c7 * (5.0 * f64::from(m)).exp()).ceil();
            // 2^64 is exactly representable; anything at or above it overflows.
            if !k.is_finite() || k >= 18_446_744_073_709_551_616.0 {
                return Err(Error::Overflow(format!("k_{m} = {k:e}")));
            }
            Ok(k as u64)
        }
    }
}

type EvalFn = dyn Fn(u64) -> f64 + Send + Sync;

/// A monotone normalizer `f` applied to prime gaps.
#[derive(Clone)]
pub struct NormalizerSpec {
    eval: Arc<EvalFn>,
    pub name: String,
    /// Slow-variation tolerance.
    pub epsilon: f64,
    /// Start of the region where slow variation has been checked.
    pub n0: u64,
}

impl fmt::Debug for NormalizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormalizerSpec")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("n0", &self.n0)
            .finish()
    }
}

impl NormalizerSpec {
    pub fn new<F>(name: impl Into<String>, epsilon: f64, eval: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            name: name.into(),
            epsilon,
            n0: 2,
        }
    }

    /// `f(n) = ln n`.
    pub fn log() -> Self {
        Self::new("log", 0.1, |n| (n as f64).ln())
    }

    /// `f(n) = g(n) ln n`, the Rankin scale. Negative below `e^(e^e)`.
    pub fn rankin_log() -> Self {
        Self::new("g-log", 0.1, |n| {
            let ln = (n as f64).ln();
            match rankin_g_ln(ln) {
                Ok(g) => g.value * ln,
                Err(_) => f64::NAN,
            }
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), 0.1, move |_| c)
    }

    pub fn identity() -> Self {
        Self::new("identity", 0.1, |n| n as f64)
    }

    pub fn with_n0(mut self, n0: u64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn eval(&self, n: u64) -> f64 {
        (self.eval)(n)
    }
}

/// Outcome of a slow-variation check on `[N, 2N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowVariation {
    pub holds: bool,
    /// Sampled maximum of `|f(n)/f(N) − 1|`.
    pub deviation: f64,
    pub samples: usize,
}

pub const DEFAULT_SLOW_VARIATION_GRID: usize = 1024;

pub fn validate_slow_variation(f: &NormalizerSpec, n: u64, eps: f64) -> Result<SlowVariation> {
    validate_slow_variation_with_grid(f, n, eps, DEFAULT_SLOW_VARIATION_GRID)
}

/// Samples `f` on a log-spaced integer grid over `[N, 2N]`, endpoints included.
pub fn validate_slow_variation_with_grid(
    f: &NormalizerSpec,
    n: u64,
    eps: f64,
    grid: usize,
) -> Result<SlowVariation> {
    if n < 2 {
        return Err(Error::Invalid(format!("N must be at least 2, got {n}")));
    }
    let top = n
        .checked_mul(2)
        .ok_or_else(|| Error::Overflow(format!("2N for N = {n}")))?;
    let mut points: Vec<u64> = (0..=grid.max(1))
        .map(|i| {
            let t = i as f64 / grid.max(1) as f64;
            ((n as f64) * 2f64.powf(t)).round() as u64
        })
        .map(|p| p.clamp(n, top))
        .collect();
    points.push(n);
    points.push(top);
    points.sort_unstable();
    points.dedup();

    let base = f.eval(n);
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::Invalid(format!(
            "normalizer '{}' is not positive at {n}: {base}",
            f.name
        )));
    }
    let mut previous = base;
    let mut deviation = 0.0f64;
    for &p in &points {
        let value = f.eval(p);
        if !value.is_finite() {
            return Err(Error::Invalid(format!(
                "normalizer '{}' is not finite at {p}",
                f.name
            )));
        }
        if value < previous {
            return Err(Error::NonMonotone {
                name: f.name.clone(),
                at: p,
                value,
                previous,
            });
        }
        previous = value;
        deviation = deviation.max((value / base - 1.0).abs());
    }
    Ok(SlowVariation {
        holds: deviation <= eps,
        deviation,
        samples: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MertensRatio {
    /// `∏_{v < p ≤ y} (1 − 1/p)` over actual primes.
    pub exact: f64,
    /// `ln v / ln y`.
    pub surrogate: f64,
}

pub fn mertens_ratio(v: f64, y: f64) -> Result<MertensRatio> {
    if !(v >= 2.0 && y >= v && y.is_finite()) {
        return Err(Error::Invalid(format!(
            "need 2 ≤ v ≤ y, got v = {v}, y = {y}"
        )));
    }
    let top = y.floor() as u64;
    let exact = primes::primes_up_to(top)?
        .into_iter()
        .filter(|&p| p as f64 > v)
        .map(|p| 1.0 - 1.0 / p as f64)
        .product();
    Ok(MertensRatio {
        exact,
        surrogate: v.ln() / y.ln(),
    })
}
