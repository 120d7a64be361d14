//! Counting y-smooth integers.
//!
//! `Ψ(x, y)` counts `1 ≤ n ≤ x` with every prime factor `≤ y`; `n = 1` is
//! counted. Two independent counters are provided (a depth-first walk over
//! prime-power products and a smallest-prime-factor sieve) together with the
//! de Bruijn-type upper bound and the Dickman function for comparison.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::iter_log;
use crate::primes::primes_up_to;

/// Node budget for the depth-first counter.
pub const DEFAULT_PSI_BUDGET: u64 = 2_000_000_000;
/// Largest `x` the sieve counter will allocate for.
pub const MAX_SIEVE_X: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothCount {
    pub x: u64,
    pub y: u64,
    pub exact: u64,
    /// Upper bound with the caller's `o(1)` surrogate; `None` when `y ≤ e^e`.
    /// Asymptotic: may fall below `exact` at desk scale.
    pub bound: Option<f64>,
    /// `x · ρ(ln x / ln y)`.
    pub rho_estimate: f64,
}

pub fn smooth_count(x: u64, y: u64, o1: f64) -> Result<SmoothCount> {
    let exact = psi_exact(x, y)?;
    let bound = match psi_bound(x as f64, y as f64, o1) {
        Ok(b) => Some(b),
        Err(Error::UndefinedIterate { .. }) => None,
        Err(e) => return Err(e),
    };
    let u = if x <= 1 {
        0.0
    } else {
        (x as f64).ln() / (y as f64).ln()
    };
    Ok(SmoothCount {
        x,
        y,
        exact,
        bound,
        rho_estimate: x as f64 * dickman_rho(u),
    })
}

/// `Ψ(x, y)` by depth-first enumeration of prime-power products.
pub fn psi_exact(x: u64, y: u64) -> Result<u64> {
    psi_exact_with_budget(x, y, DEFAULT_PSI_BUDGET)
}

pub fn psi_exact_with_budget(x: u64, y: u64, budget: u64) -> Result<u64> {
    check_args(x, y)?;
    if y >= x {
        return Ok(x);
    }
    let primes = primes_up_to(y)?;
    let mut walk = Walk {
        primes: &primes,
        nodes: 0,
        budget,
    };
    walk.count(x, 0)
}

fn check_args(x: u64, y: u64) -> Result<()> {
    if x < 1 || y < 2 {
        return Err(Error::Invalid(format!(
            "need x ≥ 1 and y ≥ 2, got x = {x}, y = {y}"
        )));
    }
    Ok(())
}

struct Walk<'a> {
    primes: &'a [u64],
    nodes: u64,
    budget: u64,
}

impl Walk<'_> {
    /// Integers `≤ bound` built from `primes[from..]`, including 1.
    fn count(&mut self, bound: u64, from: usize) -> Result<u64> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "smooth-number walk exceeded {} nodes",
                self.budget
            )));
        }
        let mut total = 1;
        for (j, &p) in self.primes.iter().enumerate().skip(from) {
            if p > bound {
                break;
            }
            if p > bound / p {
                // every remaining prime ≤ bound contributes exactly itself
                let upto = self.primes.partition_point(|&q| q <= bound);
                total += (upto - j) as u64;
                break;
            }
            total += self.count(bound / p, j)?;
        }
        Ok(total)
    }
}

/// All y-smooth integers `≤ x` in ascending order.
pub fn smooth_numbers(x: u64, y: u64) -> Result<Vec<u64>> {
    check_args(x, y)?;
    if x > MAX_SIEVE_X {
        return Err(Error::BudgetExceeded(format!(
            "listing smooth numbers up to {x}"
        )));
    }
    let primes = primes_up_to(y.min(x))?;
    let mut out = Vec::new();
    let mut stack = vec![(1u64, 0usize)];
    while let Some((n, from)) = stack.pop() {
        out.push(n);
        for (j, &p) in primes.iter().enumerate().skip(from) {
            match n.checked_mul(p) {
                Some(m) if m <= x => stack.push((m, j)),
                _ => break,
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Smallest-prime-factor table up to a fixed limit.
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u64) -> Result<Self> {
        if limit > MAX_SIEVE_X {
            return Err(Error::BudgetExceeded(format!("factor table up to {limit}")));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] != 0 {
                continue;
            }
            spf[i] = i as u32;
            let mut j = i.saturating_mul(i);
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        Ok(Self { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Largest prime factor of `n`, with `gpf(1) = 1`.
    pub fn largest_prime_factor(&self, mut n: u64) -> u64 {
        let mut largest = 1;
        while n > 1 {
            let p = u64::from(self.spf[n as usize]);
            largest = largest.max(p);
            n /= p;
        }
        largest
    }
}

/// `Ψ(x, y)` by filtering `1..=x` through a smallest-prime-factor table.
pub fn psi_exact_sieve(x: u64, y: u64) -> Result<u64> {
    check_args(x, y)?;
    let table = SpfSieve::new(x)?;
    Ok((1..=x)
        .filter(|&n| table.largest_prime_factor(n) <= y)
        .count() as u64)
}

/// `x · exp(−ln x · log₃y / ln y + (1 + o1) · log₂y)`.
pub fn psi_bound(x: f64, y: f64, o1: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::Invalid(format!("x must be at least 1, got {x}")));
    }
    if !(o1 >= 0.0) {
        return Err(Error::Invalid(format!(
            "o(1) surrogate must be nonnegative, got {o1}"
        )));
    }
    let l1 = iter_log(y, 1)?;
    let l2 = iter_log(y, 2)?;
    let l3 = iter_log(y, 3)?;
    if !(l3 > 0.0) {
        return Err(Error::UndefinedIterate {
            level: 3,
            value: l3,
        });
    }
    Ok(x * (-x.ln() * l3 / l1 + (1.0 + o1) * l2).exp())
}

const RHO_TERMS: usize = 64;
// ρ(170) is far below the smallest positive f64.
const RHO_INTERVALS: usize = 170;

/// Power-series coefficients of ρ on each unit interval: on `[k−1, k]`,
/// `ρ(u) = Σ c[k][i] (k − u)^i`.
fn rho_table() -> &'static [[f64; RHO_TERMS]] {
    static TABLE: OnceLock<Vec<[f64; RHO_TERMS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(RHO_INTERVALS + 1);
        table.push([0.0; RHO_TERMS]);
        let mut first = [0.0; RHO_TERMS];
        first[0] = 1.0;
        table.push(first);
        for k in 2..=RHO_INTERVALS {
            let prev = table[k - 1];
            let kf = k as f64;
            let mut c = [0.0; RHO_TERMS];
            // u ρ'(u) = −ρ(u − 1) with u = k − ξ gives
            // k (j+1) c[j+1] − j c[j] = prev[j].
            for j in 0..RHO_TERMS - 1 {
                c[j + 1] = (prev[j] + j as f64 * c[j]) / (kf * (j + 1) as f64);
            }
            // continuity at u = k − 1
            c[0] = prev[0] - c[1..].iter().sum::<f64>();
            table.push(c);
        }
        table
    })
}

/// Dickman's ρ: `ρ = 1` on `[0, 1]`, `u ρ′(u) = −ρ(u − 1)` beyond.
pub fn dickman_rho(u: f64) -> f64 {
    assert!(u >= 0.0, "dickman_rho needs u ≥ 0, got {u}");
    if u <= 1.0 {
        return 1.0;
    }
    let k = u.ceil() as usize;
    if k > RHO_INTERVALS {
        return 0.0;
    }
    let xi = k as f64 - u;
    rho_table()[k]
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * xi + c)
}
