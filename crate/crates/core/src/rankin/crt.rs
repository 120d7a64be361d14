//! Chinese remaindering over distinct prime moduli.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{is_prime, pow_mod};

/// `z ∈ [0, W)` with `z ≡ z_p (mod p)` for every assigned prime; `W = ∏ p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtSolution {
    #[serde(with = "crate::bigint_serde")]
    pub z: BigUint,
    #[serde(rename = "W", with = "crate::bigint_serde")]
    pub w: BigUint,
}

impl CrtSolution {
    pub fn residue(&self, p: u64) -> u64 {
        (&self.z % p).to_u64().expect("remainder is below p")
    }
}

/// Incremental Garner-style combination, one prime at a time.
pub fn assemble_crt(assignments: &BTreeMap<u64, u64>) -> Result<CrtSolution> {
    let mut z = BigUint::zero();
    let mut w = BigUint::one();
    for (&p, &a) in assignments {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("modulus {p} is not prime")));
        }
        if a >= p {
            return Err(Error::Invalid(format!(
                "residue {a} is not reduced modulo {p}"
            )));
        }
        let z_mod = (&z % p).to_u64().expect("remainder is below p");
        let w_mod = (&w % p).to_u64().expect("remainder is below p");
        // W is a product of other primes, so it is invertible mod p
        let inv = pow_mod(w_mod, p - 2, p);
        let t = ((a + p - z_mod) as u128 * inv as u128 % p as u128) as u64;
        if t != 0 {
            z += &w * t;
        }
        w *= p;
    }
    Ok(CrtSolution { z, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Scans `0..W` for the common solution.
    fn brute_crt(pairs: &[(u64, u64)]) -> (u64, u64) {
        let w: u64 = pairs.iter().map(|&(p, _)| p).product();
        let z = (0..w)
            .find(|z| pairs.iter().all(|&(p, a)| z % p == a))
            .unwrap();
        (z, w)
    }

    fn map(pairs: &[(u64, u64)]) -> BTreeMap<u64, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn crt_examples() {
        let pairs = [(2, 0), (3, 0), (5, 3), (7, 0)];
        assert_eq!(brute_crt(&pairs), (168, 210));
        let s = assemble_crt(&map(&pairs)).unwrap();
        assert_eq!(s.z, BigUint::from(168u32));
        assert_eq!(s.w, BigUint::from(210u32));

        let s = assemble_crt(&map(&[(13, 9)])).unwrap();
        assert_eq!((s.z, s.w), (BigUint::from(9u32), BigUint::from(13u32)));

        let s = assemble_crt(&map(&[(2, 1), (3, 2)])).unwrap();
        assert_eq!((s.z, s.w), (BigUint::from(5u32), BigUint::from(6u32)));

        let s = assemble_crt(&BTreeMap::new()).unwrap();
        assert_eq!((s.z, s.w), (BigUint::zero(), BigUint::one()));
    }

    #[test]
    fn crt_rejects_bad_input() {
        assert!(assemble_crt(&map(&[(4, 1)])).is_err());
        assert!(assemble_crt(&map(&[(5, 5)])).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force(residues in proptest::collection::vec(0u64..1000, 1..5)) {
            let primes = [2u64, 3, 5, 7, 11];
            let pairs: Vec<(u64, u64)> = primes.iter().zip(&residues).map(|(&p, &r)| (p, r % p)).collect();
            let s = assemble_crt(&map(&pairs)).unwrap();
            let (z, w) = brute_crt(&pairs);
            prop_assert_eq!(s.z, BigUint::from(z));
            prop_assert_eq!(s.w, BigUint::from(w));
        }
    }
}
