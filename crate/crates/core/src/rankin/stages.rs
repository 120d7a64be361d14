//! Residue assignment stages and the survivor bookkeeping they share.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::{PrimePartition, RankinConfig};
use crate::error::{Error, Result};
use crate::primes::prime_factors;

/// `p → z_p`, each `z_p ∈ [0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResidueSystem {
    pub assignments: BTreeMap<u64, u64>,
}

impl ResidueSystem {
    pub fn assign(&mut self, p: u64, z_p: u64) -> Result<()> {
        debug_assert!(z_p < p);
        if let Some(old) = self.assignments.insert(p, z_p) {
            return Err(Error::Invalid(format!(
                "prime {p} assigned twice ({old} then {z_p})"
            )));
        }
        Ok(())
    }

    pub fn get(&self, p: u64) -> Option<u64> {
        self.assignments.get(&p).copied()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.assignments.contains_key(&p)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Zero,
    Fixed,
    Greedy,
    Cleanup,
    Remaining,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Zero => "zero",
            Stage::Fixed => "fixed",
            Stage::Greedy => "greedy",
            Stage::Cleanup => "cleanup",
            Stage::Remaining => "remaining",
        }
    }
}

/// One entry of the `A′_j` trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveStep {
    pub stage: Stage,
    pub p: u64,
    pub z_p: u64,
    pub removed: u64,
    /// Survivors after this step.
    pub remaining: u64,
}

/// Integers `s ∈ (1, U]` with `z + s` still coprime to every assigned prime.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurvivorSet {
    pub survivors: Vec<u64>,
    pub history: Vec<SieveStep>,
    /// `S′`: survivors outside `H` when the cleanup stage began.
    pub exceptional: Vec<u64>,
}

impl SurvivorSet {
    pub fn full(u: u64) -> Self {
        Self {
            survivors: (2..=u).collect(),
            ..Self::default()
        }
    }

    pub fn from_sorted(survivors: Vec<u64>) -> Self {
        debug_assert!(survivors.windows(2).all(|w| w[0] < w[1]));
        Self {
            survivors,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.survivors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survivors.is_empty()
    }

    /// Drops every `s ≡ −z_p (mod p)` and records the step.
    pub fn sieve(&mut self, stage: Stage, p: u64, z_p: u64) -> u64 {
        let before = self.survivors.len();
        self.survivors.retain(|&s| !(s % p + z_p).is_multiple_of(p));
        let removed = (before - self.survivors.len()) as u64;
        self.history.push(SieveStep {
            stage,
            p,
            z_p,
            removed,
            remaining: self.survivors.len() as u64,
        });
        removed
    }

    /// Survivors that are not tuple elements.
    pub fn outside(&self, h: &[u64]) -> Vec<u64> {
        self.survivors
            .iter()
            .copied()
            .filter(|s| h.binary_search(s).is_err())
            .collect()
    }
}

/// Classes `z` with `z ≡ −h (mod p)` for some tuple element.
pub fn forbidden_classes(p: u64, h: &[u64]) -> Vec<bool> {
    let mut forbidden = vec![false; p as usize];
    for &x in h {
        forbidden[((p - x % p) % p) as usize] = true;
    }
    forbidden
}

/// `z` among the allowed classes hitting the most of `items`; smallest on ties.
/// Returns `None` when every class is forbidden.
pub fn best_class(items: &[u64], p: u64, h: &[u64]) -> Option<(u64, u64)> {
    let forbidden = forbidden_classes(p, h);
    let mut census = vec![0u64; p as usize];
    for &s in items {
        census[(s % p) as usize] += 1;
    }
    let mut best: Option<(u64, u64)> = None;
    for z in 0..p {
        if forbidden[z as usize] {
            continue;
        }
        let hits = census[((p - z) % p) as usize];
        if best.is_none_or(|(_, b)| hits > b) {
            best = Some((z, hits));
        }
    }
    best
}

pub fn stage_zero(
    config: &RankinConfig,
    partition: &PrimePartition,
) -> (ResidueSystem, SurvivorSet) {
    stage_zero_on(partition, config.u())
}

/// Class 0 for every prime in `P1 ∪ P3`.
pub fn stage_zero_on(partition: &PrimePartition, u: u64) -> (ResidueSystem, SurvivorSet) {
    let mut system = ResidueSystem::default();
    let mut survivors = SurvivorSet::full(u);
    for p in partition.zero_class() {
        system.assign(p, 0).expect("partition primes are distinct");
        survivors.sieve(Stage::Zero, p, 0);
    }
    (system, survivors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurvivorClass {
    /// `p · q₀^α · ∏ h_i^{α_i}` with a single prime `p > L/2` outside `H′`.
    TypeA { p: u64 },
    /// Composed only of primes in `P2 ∪ {q₀} ∪ H`.
    TypeB,
    /// Shares a factor with `P1 · P3`.
    Sieved,
}

pub fn classify_survivor(s: u64, config: &RankinConfig) -> Result<SurvivorClass> {
    if s < 2 || s > config.u() {
        return Err(Error::Invalid(format!(
            "{s} is outside (1, {}]",
            config.u()
        )));
    }
    let excluded = config.excluded();
    let params = &config.params;
    let mut large = Vec::new();
    let mut smooth = false;
    for (p, e) in prime_factors(s) {
        if excluded.contains(&p) {
            continue;
        }
        if p <= params.v || (p > params.y && 2 * p <= params.l) {
            return Ok(SurvivorClass::Sieved);
        }
        if p <= params.y {
            smooth = true;
        } else {
            large.push((p, e));
        }
    }
    match (large.as_slice(), smooth) {
        ([], _) => Ok(SurvivorClass::TypeB),
        ([(p, 1)], false) => Ok(SurvivorClass::TypeA { p: *p }),
        _ => Err(Error::UnclassifiableForm { s }),
    }
}

/// Counts of the two surviving shapes after stage zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    pub type_a: u64,
    pub type_b: u64,
    pub unclassifiable: u64,
}

pub fn type_counts(survivors: &[u64], config: &RankinConfig) -> TypeCounts {
    let mut counts = TypeCounts::default();
    for &s in survivors {
        match classify_survivor(s, config) {
            Ok(SurvivorClass::TypeA { .. }) => counts.type_a += 1,
            Ok(SurvivorClass::TypeB) => counts.type_b += 1,
            Ok(SurvivorClass::Sieved) => {}
            Err(_) => counts.unclassifiable += 1,
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyChoice {
    pub z_p: u64,
    pub removed: u64,
}

/// Census of one prime: the allowed class that removes the most survivors.
pub fn greedy_step(survivors: &[u64], p: u64, h: &[u64]) -> Result<GreedyChoice> {
    let (z_p, removed) = best_class(survivors, p, h).ok_or(Error::NoAllowedClass { p })?;
    Ok(GreedyChoice { z_p, removed })
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub residues: BTreeMap<u64, u64>,
    /// Primes left unassigned by the stopping rule.
    pub skipped: Vec<u64>,
}

/// Walks `primes` in ascending order, taking the greedy class for each until
/// at most `stop_at` survivors remain.
pub fn greedy_stage(
    survivors: &mut SurvivorSet,
    primes: &[u64],
    h: &[u64],
    stop_at: u64,
) -> Result<GreedyOutcome> {
    let mut outcome = GreedyOutcome::default();
    for (i, &p) in primes.iter().enumerate() {
        if survivors.len() as u64 <= stop_at {
            outcome.skipped.extend_from_slice(&primes[i..]);
            break;
        }
        let choice = greedy_step(&survivors.survivors, p, h)?;
        let removed = survivors.sieve(Stage::Greedy, p, choice.z_p);
        debug_assert_eq!(removed, choice.removed);
        outcome.residues.insert(p, choice.z_p);
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleanupOutcome {
    pub residues: BTreeMap<u64, u64>,
    pub unused: Vec<u64>,
    /// Elements of `S′` still uncovered when the primes ran out.
    pub uncovered: Vec<u64>,
}

/// Covers the leftover `S′ = survivors \ H` with one class per prime, each
/// prime taking the allowed class that covers the most of what is left.
pub fn cleanup_stage(
    survivors: &mut SurvivorSet,
    primes: &[u64],
    h: &[u64],
) -> Result<CleanupOutcome> {
    let mut pending = survivors.outside(h);
    survivors.exceptional = pending.clone();
    let mut outcome = CleanupOutcome::default();
    for &p in primes {
        if pending.is_empty() {
            outcome.unused.push(p);
            continue;
        }
        match best_class(&pending, p, h) {
            Some((z_p, hits)) if hits > 0 => {
                pending.retain(|&s| (s % p + z_p) % p != 0);
                survivors.sieve(Stage::Cleanup, p, z_p);
                outcome.residues.insert(p, z_p);
            }
            Some(_) => outcome.unused.push(p),
            None => return Err(Error::NoAllowedClass { p }),
        }
    }
    outcome.uncovered = pending;
    Ok(outcome)
}

/// Smallest class avoiding every `−h`.
pub fn smallest_allowed_class(p: u64, h: &[u64]) -> Result<u64> {
    let forbidden = forbidden_classes(p, h);
    (0..p)
        .find(|&z| !forbidden[z as usize])
        .ok_or(Error::NoAllowedClass { p })
}

/// Gives every leftover prime its smallest allowed class.
pub fn assign_remaining(system: &mut ResidueSystem, h: &[u64], leftover: &[u64]) -> Result<()> {
    for &p in leftover {
        system.assign(p, smallest_allowed_class(p, h)?)?;
    }
    Ok(())
}
