//! Independent check of a finished construction by direct gcds.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    /// Largest `U′ ≤ U` with every `s ∈ (1, U′]` conforming.
    pub covered_prefix: u64,
    /// `s ∈ (1, U]` outside the tuple with `gcd(z + s, W) = 1`.
    pub violations: Vec<u64>,
}

/// Requires `gcd(z + s, W) > 1` for `s ∉ H` and `= 1` for `h ∈ H`.
pub fn verify_construction(z: &BigUint, w: &BigUint, u: u64, h: &[u64]) -> Result<Verification> {
    if z >= w {
        return Err(Error::Invalid("z must lie in [0, W)".into()));
    }
    for &x in h {
        let g = (z + x).gcd(w);
        if !g.is_one() {
            return Err(Error::HViolation {
                h: x,
                gcd: g.to_str_radix(10),
            });
        }
    }
    let mut violations = Vec::new();
    for s in 2..=u {
        if h.contains(&s) {
            continue;
        }
        if (z + s).gcd(w).is_one() {
            violations.push(s);
        }
    }
    let covered_prefix = violations.first().map_or(u.max(1), |&s| s - 1);
    Ok(Verification {
        covered_prefix,
        violations,
    })
}
