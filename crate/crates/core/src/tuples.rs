//! Admissible tuples and prime placement inside target windows.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{is_prime, prime_factors, primes_up_to};

/// Node budget for the placement backtracking search.
pub const DEFAULT_PLACEMENT_BUDGET: u64 = 50_000_000;
/// Trial-division bound used by [`radical`] before falling back to rho.
pub const RADICAL_TRIAL_BOUND: u64 = 1 << 20;

/// `true` iff no prime `p` has every residue class hit by `h`.
///
/// Only `p ≤ h.len()` can be fully covered, so those are the only ones checked.
pub fn is_admissible(h: &[u64]) -> bool {
    let k = h.len() as u64;
    if k < 2 {
        return true;
    }
    let primes = primes_up_to(k).expect("k fits comfortably in the sieve");
    primes.into_iter().all(|p| {
        let mut seen = vec![false; p as usize];
        for &x in h {
            seen[(x % p) as usize] = true;
        }
        seen.iter().any(|&s| !s)
    })
}

/// `∏_{i<j} (h_j − h_i)`. Empty and singleton tuples give 1.
pub fn delta(h: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    for (j, &hj) in h.iter().enumerate() {
        for &hi in &h[..j] {
            acc *= BigUint::from(hj.abs_diff(hi));
        }
    }
    acc
}

/// Distinct primes dividing `Δ(h)`, read off the pairwise differences.
pub fn delta_prime_divisors(h: &[u64]) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for (j, &hj) in h.iter().enumerate() {
        for &hi in &h[..j] {
            let d = hj.abs_diff(hi);
            if d > 1 {
                out.extend(prime_factors(d).into_iter().map(|(p, _)| p));
            }
        }
    }
    out
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: &BigUint) -> Result<BigUint> {
    if n == &BigUint::ZERO {
        return Err(Error::Invalid("radical of 0".into()));
    }
    let mut rest = n.clone();
    let mut rad = BigUint::one();
    for p in primes_up_to(RADICAL_TRIAL_BOUND)? {
        let bp = BigUint::from(p);
        if (&rest % &bp) == BigUint::ZERO {
            rad *= &bp;
            while (&rest % &bp) == BigUint::ZERO {
                rest /= &bp;
            }
        }
        if rest.is_one() {
            return Ok(rad);
        }
    }
    // a perfect power has the same radical as its root
    for k in (2..=rest.bits() as u32).rev() {
        let root = rest.nth_root(k);
        if root.pow(k) == rest {
            rest = root;
            break;
        }
    }
    if let Ok(small) = u64::try_from(&rest) {
        for (p, _) in prime_factors(small) {
            rad *= BigUint::from(p);
        }
        return Ok(rad);
    }
    let bound = BigUint::from(RADICAL_TRIAL_BOUND);
    if rest < &bound * &bound {
        // no factor below the trial bound, so what is left is prime
        return Ok(rad * rest);
    }
    Err(Error::FactorBudgetExceeded(n.to_str_radix(10)))
}

/// A strictly increasing tuple with its difference product and certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleTuple {
    pub h: Vec<u64>,
    pub k: usize,
    #[serde(with = "crate::bigint_serde")]
    pub delta: BigUint,
    #[serde(with = "crate::bigint_serde")]
    pub delta_radical: BigUint,
    pub admissible: bool,
}

impl AdmissibleTuple {
    pub fn new(h: Vec<u64>) -> Result<Self> {
        if h.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!(
                "tuple must be strictly increasing: {h:?}"
            )));
        }
        let delta_radical = delta_prime_divisors(&h)
            .into_iter()
            .fold(BigUint::one(), |acc, p| acc * BigUint::from(p));
        Ok(Self {
            k: h.len(),
            delta: delta(&h),
            delta_radical,
            admissible: is_admissible(&h),
            h,
        })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new()).expect("empty tuple is increasing")
    }

    pub fn contains(&self, s: u64) -> bool {
        self.h.binary_search(&s).is_ok()
    }

    pub fn delta_prime_divisors(&self) -> BTreeSet<u64> {
        delta_prime_divisors(&self.h)
    }
}

/// Closed real interval a placed element must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    fn integers(&self) -> std::ops::RangeInclusive<u64> {
        let lo = self.lo.max(0.0).ceil() as u64;
        let hi = self.hi.max(0.0).floor() as u64;
        lo..=hi
    }
}

/// `[(c + δ/2)(1 + ε)·scale, (c + δ)(1 − ε)·scale]`, the inner part of a
/// scaled interval `[c, c + δ]` that survives a relative error of ε.
pub fn shrunken_interval(c: f64, delta: f64, eps: f64, scale: f64) -> Window {
    Window {
        lo: (c + delta / 2.0) * (1.0 + eps) * scale,
        hi: (c + delta) * (1.0 - eps) * scale,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementConstraint {
    pub windows: Vec<Window>,
    /// Excluded prime: must not divide any pairwise difference.
    pub q0: Option<u64>,
    pub require_prime: bool,
    /// Upper bound on every placed element.
    pub cap: Option<u64>,
}

impl PlacementConstraint {
    /// Windows `[ξ_i, ξ_i(1 + η)]` around increasing targets.
    pub fn relative(targets: &[f64], eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Invalid(format!("eta must be positive, got {eta}")));
        }
        if targets.windows(2).any(|w| w[0] >= w[1]) || targets.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Invalid(format!(
                "targets must be positive and strictly increasing: {targets:?}"
            )));
        }
        Ok(Self::from_windows(
            targets
                .iter()
                .map(|&t| Window {
                    lo: t,
                    hi: t * (1.0 + eta),
                })
                .collect(),
        ))
    }

    pub fn from_windows(windows: Vec<Window>) -> Self {
        Self {
            windows,
            q0: None,
            require_prime: true,
            cap: None,
        }
    }

    pub fn with_q0(mut self, q0: Option<u64>) -> Self {
        self.q0 = q0;
        self
    }

    pub fn with_cap(mut self, cap: Option<u64>) -> Self {
        self.cap = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        for w in &self.windows {
            if !(w.lo.is_finite() && w.hi.is_finite()) || w.lo > w.hi {
                return Err(Error::Invalid(format!("malformed window {w:?}")));
            }
        }
        if self.windows.windows(2).any(|p| p[0].hi >= p[1].lo) {
            return Err(Error::Invalid(
                "windows must be ascending and pairwise disjoint".into(),
            ));
        }
        Ok(())
    }
}

/// One element per window, smallest first, backtracking when a later window
/// cannot be completed. The result satisfies: `q0 ∤ h_j − h_i`,
/// `h_t ∤ h_j − h_i` for every `t` and `i < j`, and admissibility.
pub fn place_prime_tuple(c: &PlacementConstraint) -> Result<AdmissibleTuple> {
    place_prime_tuple_with_budget(c, DEFAULT_PLACEMENT_BUDGET)
}

pub fn place_prime_tuple_with_budget(
    c: &PlacementConstraint,
    budget: u64,
) -> Result<AdmissibleTuple> {
    c.validate()?;
    let candidates: Vec<Vec<u64>> = c
        .windows
        .iter()
        .map(|w| {
            w.integers()
                .filter(|&n| c.cap.is_none_or(|cap| n <= cap))
                .filter(|&n| !c.require_prime || is_prime(n))
                .collect()
        })
        .collect();
    if let Some(i) = candidates.iter().position(Vec::is_empty) {
        return Err(Error::NoPlacement(format!(
            "window {i} {:?} holds no candidate",
            c.windows[i]
        )));
    }

    let mut chosen: Vec<u64> = Vec::with_capacity(candidates.len());
    let mut cursor = vec![0usize; candidates.len()];
    let mut nodes = 0u64;
    let mut level = 0usize;
    while level < candidates.len() {
        let mut advanced = false;
        while cursor[level] < candidates[level].len() {
            let x = candidates[level][cursor[level]];
            cursor[level] += 1;
            nodes += 1;
            if nodes > budget {
                return Err(Error::BudgetExceeded(format!(
                    "placement search exceeded {budget} nodes"
                )));
            }
            if extends(&chosen, x, c.q0) {
                chosen.push(x);
                advanced = true;
                break;
            }
        }
        if advanced {
            level += 1;
            if level < candidates.len() {
                cursor[level] = 0;
            }
        } else {
            if level == 0 {
                return Err(Error::NoPlacement(
                    "backtracking exhausted every window".into(),
                ));
            }
            chosen.pop();
            level -= 1;
        }
    }
    AdmissibleTuple::new(chosen)
}

fn extends(chosen: &[u64], x: u64, q0: Option<u64>) -> bool {
    let divides = |t: u64, d: u64| t != 0 && d.is_multiple_of(t);
    for &h in chosen {
        let d = x - h;
        if q0.is_some_and(|q| divides(q, d)) {
            return false;
        }
        if divides(x, d) || chosen.iter().any(|&t| divides(t, d)) {
            return false;
        }
    }
    let mut next = chosen.to_vec();
    next.push(x);
    is_admissible(&next)
}

/// `i · U/(k + 1)` for `i = 1..=k`.
pub fn equal_spaced_targets(u: f64, k: usize) -> Result<Vec<f64>> {
    if !(u > 0.0) || k == 0 {
        return Err(Error::Invalid(format!(
            "need U > 0 and k ≥ 1, got U = {u}, k = {k}"
        )));
    }
    let step = u / (k as f64 + 1.0);
    Ok((1..=k).map(|i| i as f64 * step).collect())
}

/// Guaranteed size of each of the gaps between equally spaced elements,
/// `U / (2(k + 1))`.
pub fn equal_spacing_gap_floor(u: f64, k: usize) -> f64 {
    u / (2.0 * (k as f64 + 1.0))
}

/// `β_i · scale`.
pub fn scaled_targets(betas: &[f64], scale: f64) -> Vec<f64> {
    betas.iter().map(|b| b * scale).collect()
}
