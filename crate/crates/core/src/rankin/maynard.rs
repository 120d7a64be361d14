//! Alternative residue skeleton: class 1 modulo every prime up to `y`,
//! class 0 modulo every prime in `(y, zbound]`.
//!
//! In the `z + s ≡ 0` convention used throughout this crate, removing
//! `s ≡ a (mod p)` means `z_p = −a mod p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::RankinConfig;
use super::stages::{ResidueSystem, Stage, SurvivorSet};
use crate::error::{Error, Result};
use crate::primes::{prime_factors, primes_up_to};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "set")]
pub enum MaynardClass {
    /// `s = m p`, `p > zbound`, `m` y-smooth.
    R { m: u64, p: u64 },
    /// `s = m p q₀`.
    RTilde { m: u64, p: u64 },
    /// `s = m`, y-smooth.
    RPrime { m: u64 },
    /// `s = m q₀`.
    RTildePrime { m: u64 },
}

impl MaynardClass {
    pub fn smooth_part(&self) -> u64 {
        match *self {
            MaynardClass::R { m, .. }
            | MaynardClass::RTilde { m, .. }
            | MaynardClass::RPrime { m }
            | MaynardClass::RTildePrime { m } => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MaynardSets {
    pub r: Vec<u64>,
    pub r_tilde: Vec<u64>,
    pub r_prime: Vec<u64>,
    pub r_tilde_prime: Vec<u64>,
    /// `ℛ_m`, keyed by the smooth part.
    pub fibers: BTreeMap<u64, Vec<u64>>,
    pub tilde_fibers: BTreeMap<u64, Vec<u64>>,
    /// Survivors fitting none of the four shapes (only possible when `U` is
    /// large against `zbound²`).
    pub unclassifiable: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaynardSkeleton {
    pub system: ResidueSystem,
    pub survivors: SurvivorSet,
    pub sets: MaynardSets,
}

fn thresholds(config: &RankinConfig) -> Result<(u64, u64)> {
    let zbound = config
        .zbound
        .ok_or_else(|| Error::Invalid("this strategy needs zbound".into()))?;
    Ok((config.params.y, zbound))
}

pub fn classify_maynard(s: u64, config: &RankinConfig) -> Result<MaynardClass> {
    let (y, zbound) = thresholds(config)?;
    let (rest, tilde) = match config.q0 {
        Some(q) if s.is_multiple_of(q) => (s / q, true),
        _ => (s, false),
    };
    let mut large = Vec::new();
    for (p, e) in prime_factors(rest) {
        if p <= y {
            continue;
        }
        if p <= zbound {
            return Err(Error::UnclassifiableForm { s });
        }
        large.push((p, e));
    }
    match (large.as_slice(), tilde) {
        ([], false) => Ok(MaynardClass::RPrime { m: rest }),
        ([], true) => Ok(MaynardClass::RTildePrime { m: rest }),
        ([(p, 1)], false) => Ok(MaynardClass::R { m: rest / p, p: *p }),
        ([(p, 1)], true) => Ok(MaynardClass::RTilde { m: rest / p, p: *p }),
        _ => Err(Error::UnclassifiableForm { s }),
    }
}

/// Fixed classes below `zbound` plus the residual sets, tolerating
/// unclassifiable survivors.
pub fn maynard_skeleton(config: &RankinConfig) -> Result<MaynardSkeleton> {
    let (y, zbound) = thresholds(config)?;
    let excluded = config.excluded();
    let mut system = ResidueSystem::default();
    let mut survivors = SurvivorSet::full(config.u());
    for p in primes_up_to(zbound)? {
        if excluded.contains(&p) {
            continue;
        }
        let z_p = if p <= y { p - 1 } else { 0 };
        if let Some(&h) = config.h().iter().find(|&&h| (h + z_p) % p == 0) {
            return Err(Error::Invalid(format!(
                "tuple element {h} falls in the removed class modulo {p}"
            )));
        }
        system.assign(p, z_p)?;
        survivors.sieve(Stage::Fixed, p, z_p);
    }

    let mut sets = MaynardSets::default();
    for &s in &survivors.survivors {
        match classify_maynard(s, config) {
            Ok(MaynardClass::R { m, .. }) => {
                sets.r.push(s);
                sets.fibers.entry(m).or_default().push(s);
            }
            Ok(MaynardClass::RTilde { m, .. }) => {
                sets.r_tilde.push(s);
                sets.tilde_fibers.entry(m).or_default().push(s);
            }
            Ok(MaynardClass::RPrime { .. }) => sets.r_prime.push(s),
            Ok(MaynardClass::RTildePrime { .. }) => sets.r_tilde_prime.push(s),
            Err(Error::UnclassifiableForm { s }) => sets.unclassifiable.push(s),
            Err(e) => return Err(e),
        }
    }
    Ok(MaynardSkeleton {
        system,
        survivors,
        sets,
    })
}

/// Like [`maynard_skeleton`] but every survivor must fit one of the shapes.
pub fn maynard_residues(config: &RankinConfig) -> Result<MaynardSkeleton> {
    let skeleton = maynard_skeleton(config)?;
    if let Some(&s) = skeleton.sets.unclassifiable.first() {
        return Err(Error::UnclassifiableForm { s });
    }
    Ok(skeleton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankin::params::RankinParams;
    use crate::tuples::AdmissibleTuple;
    use num_integer::Integer;

    fn config(u: u64, h: Vec<u64>, q0: Option<u64>) -> RankinConfig {
        let k = h.len();
        RankinConfig::new(
            RankinParams::explicit(30, k, 3, 7, u).unwrap(),
            AdmissibleTuple::new(h).unwrap(),
            q0,
        )
        .unwrap()
        .with_zbound(Some(13))
        .unwrap()
    }

    #[test]
    fn fixed_classes() {
        let sk = maynard_residues(&config(150, vec![], None)).unwrap();
        assert_eq!(sk.system.get(11), Some(0));
        assert_eq!(sk.system.get(13), Some(0));
        // a_p = 1, i.e. z_p = p − 1
        assert_eq!(sk.system.get(2), Some(1));
        assert_eq!(sk.system.get(3), Some(2));
        assert_eq!(sk.system.get(5), Some(4));
        assert_eq!(sk.system.get(7), Some(6));
        assert_eq!(sk.system.len(), 6);
    }

    #[test]
    fn survivors_fit_the_shapes() {
        let c = config(150, vec![], None);
        let sk = maynard_residues(&c).unwrap();
        let p_y: u64 = 2 * 3 * 5 * 7;
        for &s in &sk.survivors.survivors {
            assert_eq!((s - 1).gcd(&p_y), 1, "{s}");
            assert!(s % 11 != 0 && s % 13 != 0);
        }
        for &s in &sk.sets.r {
            let class = classify_maynard(s, &c).unwrap();
            let MaynardClass::R { m, p } = class else {
                panic!("{s} should be in R")
            };
            assert!(p > 13 && m * p == s);
            assert!(prime_factors(m).iter().all(|&(q, _)| q <= 7));
        }
        let total = sk.sets.r.len() + sk.sets.r_prime.len();
        assert_eq!(total, sk.survivors.len());
    }

    #[test]
    fn fibers_partition_r() {
        let sk = maynard_residues(&config(150, vec![], None)).unwrap();
        let mut seen: Vec<u64> = sk.sets.fibers.values().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, sk.sets.r);
        for (m, members) in &sk.sets.fibers {
            assert!(members.iter().all(|s| s % m == 0));
        }
    }

    #[test]
    fn q0_factors_go_to_tilde_sets() {
        // q0 = 17 is skipped by the fixed classes
        let c = config(200, vec![], Some(17));
        let sk = maynard_skeleton(&c).unwrap();
        assert!(sk.system.get(17).is_none());
        assert_eq!(
            classify_maynard(17 * 2, &c).unwrap(),
            MaynardClass::RTildePrime { m: 2 }
        );
        assert_eq!(
            classify_maynard(17 * 19, &c).unwrap(),
            MaynardClass::RTilde { m: 1, p: 19 }
        );
    }

    #[test]
    fn tuple_conflicts_are_rejected() {
        // 15 ≡ 1 (mod 7) lies in the removed class
        let params = RankinParams::explicit(30, 1, 3, 7, 100).unwrap();
        let c = RankinConfig::new(params, AdmissibleTuple::new(vec![29]).unwrap(), None)
            .unwrap()
            .with_zbound(Some(13))
            .unwrap();
        assert!(maynard_skeleton(&c).is_err());
    }

    #[test]
    fn shapes_break_when_u_is_large() {
        let c = config(30 * 30, vec![], None);
        assert!(matches!(
            maynard_residues(&c),
            Err(Error::UnclassifiableForm { .. })
        ));
        assert!(!maynard_skeleton(&c).unwrap().sets.unclassifiable.is_empty());
    }
}
