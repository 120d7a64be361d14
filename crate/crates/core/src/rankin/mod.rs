//! The covering construction: choose `z_p` for every prime `p ≤ L` so that
//! `z + s` has a small prime factor for each `s ∈ (1, U]` outside a tuple
//! `H`, while every `z + h` stays coprime to `W`.
//!
//! ```
//! use gapforge::rankin::{run_construction, RankinConfig, RankinParams, Strategy};
//! use gapforge::tuples::AdmissibleTuple;
//!
//! let params = RankinParams::explicit(20, 0, 3, 7, 40).unwrap();
//! let config = RankinConfig::new(params, AdmissibleTuple::empty(), None).unwrap();
//! let c = run_construction(&config, Strategy::ErdosRankin).unwrap();
//! assert_eq!(c.claimed_coverage, c.verification.covered_prefix);
//! ```

mod crt;
mod maynard;
mod params;
mod stages;
mod verify;

pub use crt::{assemble_crt, CrtSolution};
pub use maynard::{
    classify_maynard, maynard_residues, maynard_skeleton, MaynardClass, MaynardSets,
    MaynardSkeleton,
};
pub use params::{
    check_ordering, derive_params, partition_primes, schedule, stopping_threshold, v_threshold,
    y_threshold, PartitionSizes, PrimePartition, RankinConfig, RankinParams, Schedule, Strategy,
};
pub use stages::{
    assign_remaining, best_class, classify_survivor, cleanup_stage, forbidden_classes,
    greedy_stage, greedy_step, smallest_allowed_class, stage_zero, stage_zero_on, type_counts,
    CleanupOutcome, GreedyChoice, GreedyOutcome, ResidueSystem, SieveStep, Stage, SurvivorClass,
    SurvivorSet, TypeCounts,
};
pub use verify::{verify_construction, Verification};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::primes::primes_up_to;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MaynardCounts {
    pub r: usize,
    pub r_tilde: usize,
    pub r_prime: usize,
    pub r_tilde_prime: usize,
    pub fibers: usize,
    pub unclassifiable: usize,
}

impl From<&MaynardSets> for MaynardCounts {
    fn from(sets: &MaynardSets) -> Self {
        Self {
            r: sets.r.len(),
            r_tilde: sets.r_tilde.len(),
            r_prime: sets.r_prime.len(),
            r_tilde_prime: sets.r_tilde_prime.len(),
            fibers: sets.fibers.len(),
            unclassifiable: sets.unclassifiable.len(),
        }
    }
}

/// Everything a run produces, ready for JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub strategy: Strategy,
    pub params: RankinParams,
    pub q0: Option<u64>,
    pub zbound: Option<u64>,
    #[serde(rename = "H")]
    pub h: Vec<u64>,
    pub partition: PartitionSizes,
    pub stop_at: u64,
    pub history: Vec<SieveStep>,
    /// Survivors after the first fixed stage.
    pub initial_survivors: u64,
    pub type_counts: Option<TypeCounts>,
    pub maynard: Option<MaynardCounts>,
    /// `|S′|`, the survivors outside `H` entering cleanup.
    pub exceptional: usize,
    /// Size of the prime pool available to cleanup.
    pub cleanup_pool: usize,
    pub uncovered: Vec<u64>,
    pub residues: ResidueSystem,
    #[serde(flatten)]
    pub solution: CrtSolution,
    /// Coverage implied by the tracked survivor set.
    pub claimed_coverage: u64,
    #[serde(flatten)]
    pub verification: Verification,
    pub flags: Vec<String>,
}

struct Tail {
    system: ResidueSystem,
    survivors: SurvivorSet,
    flags: Vec<String>,
}

/// Assigns the tuple's difference primes not covered yet, skipping `q₀`.
fn finish(config: &RankinConfig, mut tail: Tail, leftover: Vec<u64>) -> Result<Tail> {
    let h = config.h();
    let delta_primes = config.tuple.delta_prime_divisors();
    if let Some(q) = config.q0 {
        if delta_primes.contains(&q) {
            tail.flags.push("q0-divides-delta".into());
        }
    }
    let mut rest = leftover;
    rest.extend(
        delta_primes
            .into_iter()
            .filter(|&p| Some(p) != config.q0 && !tail.system.contains(p)),
    );
    rest.sort_unstable();
    rest.dedup();
    assign_remaining(&mut tail.system, h, &rest)?;
    for &p in &rest {
        let z_p = tail.system.get(p).expect("just assigned");
        tail.survivors.sieve(Stage::Remaining, p, z_p);
    }
    Ok(tail)
}

pub fn run_construction(config: &RankinConfig, strategy: Strategy) -> Result<Construction> {
    let h = config.h().to_vec();
    let partition = partition_primes(config)?;
    let stop_at = stopping_threshold(config.l());
    let mut flags = Vec::new();
    if config.params.u_fallback {
        flags.push("u-fallback".into());
    }
    if stop_at == 0 {
        flags.push("stopping-disabled".into());
    }

    let (tail, initial, types, maynard, cleanup, pool, zbound) = match strategy {
        Strategy::ErdosRankin => {
            config.check_zero_class()?;
            let (mut system, mut survivors) = stage_zero(config, &partition);
            let initial = survivors.len() as u64;
            let types = type_counts(&survivors.survivors, config);
            if types.type_b > types.type_a {
                flags.push("type-b-exceeds-type-a".into());
            }
            let greedy = greedy_stage(&mut survivors, &partition.p2, &h, stop_at)?;
            let cleanup = cleanup_stage(&mut survivors, &partition.p4, &h)?;
            for (&p, &z) in greedy.residues.iter().chain(&cleanup.residues) {
                system.assign(p, z)?;
            }
            let mut leftover = greedy.skipped;
            leftover.extend_from_slice(&cleanup.unused);
            let tail = finish(
                config,
                Tail {
                    system,
                    survivors,
                    flags,
                },
                leftover,
            )?;
            (
                tail,
                initial,
                Some(types),
                None,
                cleanup,
                partition.p4.len(),
                config.zbound,
            )
        }
        Strategy::Maynard => {
            let config = if config.zbound.is_some() {
                config.clone()
            } else {
                config.clone().with_zbound(None)?
            };
            let zbound = config.zbound.expect("set above");
            let skeleton = maynard_skeleton(&config)?;
            let counts = MaynardCounts::from(&skeleton.sets);
            if counts.unclassifiable > 0 {
                flags.push("unclassifiable-survivors".into());
            }
            let MaynardSkeleton {
                mut system,
                mut survivors,
                ..
            } = skeleton;
            let initial = survivors.len() as u64;
            let excluded = config.excluded();
            let upper: Vec<u64> = primes_up_to(config.l())?
                .into_iter()
                .filter(|&p| p > zbound && !excluded.contains(&p))
                .collect();
            let greedy = greedy_stage(&mut survivors, &upper, &h, stop_at)?;
            let cleanup = cleanup_stage(&mut survivors, &greedy.skipped, &h)?;
            for (&p, &z) in greedy.residues.iter().chain(&cleanup.residues) {
                system.assign(p, z)?;
            }
            let pool = greedy.skipped.len();
            let leftover = cleanup.unused.clone();
            let tail = finish(
                &config,
                Tail {
                    system,
                    survivors,
                    flags,
                },
                leftover,
            )?;
            (
                tail,
                initial,
                None,
                Some(counts),
                cleanup,
                pool,
                Some(zbound),
            )
        }
    };

    let Tail {
        system,
        survivors,
        mut flags,
    } = tail;
    if survivors.exceptional.len() > pool {
        flags.push("exceptional-exceeds-pool".into());
    }
    let solution = assemble_crt(&system.assignments)?;
    let claimed_coverage = survivors
        .outside(&h)
        .first()
        .map_or(config.u().max(1), |&s| s - 1);
    let verification = verify_construction(&solution.z, &solution.w, config.u(), &h)?;
    if verification.covered_prefix != claimed_coverage {
        flags.push("coverage-mismatch".into());
    }
    Ok(Construction {
        strategy,
        params: config.params,
        q0: config.q0,
        zbound,
        h,
        partition: partition.sizes(),
        stop_at,
        history: survivors.history,
        initial_survivors: initial,
        type_counts: types,
        maynard,
        exceptional: survivors.exceptional.len(),
        cleanup_pool: pool,
        uncovered: cleanup.uncovered,
        residues: system,
        solution,
        claimed_coverage,
        verification,
        flags,
    })
}

/// Writes the `A′_j` trace as CSV: `stage,p,z_p,removed,remaining`.
pub fn write_trace<W: Write>(history: &[SieveStep], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for step in history {
        writer.serialize(step)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuples::AdmissibleTuple;
    use num_integer::Integer;
    use num_traits::One;

    fn desk(u: u64, h: Vec<u64>, q0: Option<u64>) -> RankinConfig {
        let k = h.len();
        RankinConfig::new(
            RankinParams::explicit(20, k, 3, 7, u).unwrap(),
            AdmissibleTuple::new(h).unwrap(),
            q0,
        )
        .unwrap()
    }

    /// Recomputes the survivors from the residues alone.
    fn simulate(residues: &ResidueSystem, u: u64, h: &[u64]) -> Vec<u64> {
        (2..=u)
            .filter(|s| !h.contains(s))
            .filter(|&s| {
                residues
                    .assignments
                    .iter()
                    .all(|(&p, &z)| (s % p + z) % p != 0)
            })
            .collect()
    }

    #[test]
    fn desk_instance() {
        for u in [20, 30, 40, 60, 100] {
            let c = run_construction(&desk(u, vec![], None), Strategy::ErdosRankin).unwrap();
            let left = simulate(&c.residues, u, &[]);
            let expected = left.first().map_or(u, |&s| s - 1);
            assert_eq!(c.claimed_coverage, expected, "U = {u}");
            assert_eq!(c.verification.covered_prefix, expected, "U = {u}");
            assert_eq!(c.verification.violations, left);
            assert!(c.flags.iter().all(|f| f != "coverage-mismatch"));
        }
    }

    #[test]
    fn desk_instance_with_tuple() {
        let config = desk(60, vec![11, 13], Some(23));
        let c = run_construction(&config, Strategy::ErdosRankin).unwrap();
        assert_eq!(c.claimed_coverage, c.verification.covered_prefix);
        assert!(c.residues.get(23).is_none());
        assert!(c.residues.get(11).is_none());
        for &h in &[11u64, 13] {
            assert!((&c.solution.z + h).gcd(&c.solution.w).is_one());
        }
        // Δ = 2 is already assigned
        assert_eq!(c.residues.get(2), Some(0));
    }

    #[test]
    fn history_is_consistent() {
        let c = run_construction(&desk(100, vec![], None), Strategy::ErdosRankin).unwrap();
        let mut prev = 99u64;
        for step in &c.history {
            assert_eq!(step.remaining, prev - step.removed);
            prev = step.remaining;
        }
        assert_eq!(c.history[0].stage, Stage::Zero);
        assert_eq!(c.history[1].stage, Stage::Zero);
        assert_eq!(c.initial_survivors, c.history[1].remaining);
    }

    #[test]
    fn w_is_product_of_assigned_primes() {
        let c = run_construction(&desk(50, vec![], None), Strategy::ErdosRankin).unwrap();
        let w: u64 = c.residues.assignments.keys().product();
        assert_eq!(c.solution.w, w.into());
        assert_eq!(c.residues.len(), 8);
        for (&p, &z) in &c.residues.assignments {
            assert_eq!(c.solution.residue(p), z);
        }
    }

    #[test]
    fn maynard_pipeline() {
        let params = RankinParams::explicit(30, 1, 3, 7, 100).unwrap();
        // 12 avoids 1 mod 2, 3, 5, 7 and 0 mod 11, 13
        let config = RankinConfig::new(params, AdmissibleTuple::new(vec![12]).unwrap(), None)
            .unwrap()
            .with_zbound(Some(13))
            .unwrap();
        let c = run_construction(&config, Strategy::Maynard).unwrap();
        assert_eq!(c.zbound, Some(13));
        assert_eq!(c.residues.get(2), Some(1));
        assert_eq!(c.residues.get(11), Some(0));
        assert_eq!(c.claimed_coverage, c.verification.covered_prefix);
        assert!(c.maynard.is_some());
        let left = simulate(&c.residues, 100, &[12]);
        assert_eq!(c.verification.violations, left);
    }

    #[test]
    fn trace_csv() {
        let c = run_construction(&desk(30, vec![], None), Strategy::ErdosRankin).unwrap();
        let mut buf = Vec::new();
        write_trace(&c.history, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("stage,p,z_p,removed,remaining"));
        assert_eq!(lines.next(), Some("zero,2,0,15,14"));
        assert_eq!(text.lines().count(), c.history.len() + 1);
    }

    #[test]
    fn record_serializes_big_values_as_strings() {
        let c = run_construction(&desk(30, vec![], None), Strategy::ErdosRankin).unwrap();
        let json = serde_json::to_value(&c).unwrap();
        assert!(json["z"].is_string());
        assert!(json["W"].is_string());
        assert_eq!(json["params"]["L"], 20);
        assert!(json["covered_prefix"].is_u64());
        let back: Construction = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }
}
