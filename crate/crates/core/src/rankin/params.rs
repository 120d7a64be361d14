//! Threshold schedule and the prime partition it induces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rankin_g_ln, GrowthConstants};
use crate::primes::primes_up_to;
use crate::tuples::AdmissibleTuple;

/// `v = (ln L)^3`.
pub fn v_threshold(l: f64) -> f64 {
    l.ln().powi(3)
}

/// `y = exp(ln L · log₃L / ((k + 5) log₂L))`.
pub fn y_threshold(l: f64, k: usize) -> f64 {
    let l1 = l.ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    (l1 * l3 / l2 / (k as f64 + 5.0)).exp()
}

/// `⌊L / (5 ln L)⌋`: the greedy stage stops once this few survivors remain.
pub fn stopping_threshold(l: u64) -> u64 {
    let lf = l as f64;
    (lf / (5.0 * lf.ln())).floor().max(0.0) as u64
}

/// Unrounded formula values, before any override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub v: f64,
    pub y: f64,
    pub u: f64,
    /// `g(e^L)` was undefined or gave `U < L`, so `U = L·⌈c₁₀⌉` was used.
    pub u_fallback: bool,
}

pub fn schedule(l: u64, k: usize, constants: &GrowthConstants) -> Result<Schedule> {
    constants.validate()?;
    if l < 16 {
        return Err(Error::Invalid(format!("L must be at least 16, got {l}")));
    }
    let lf = l as f64;
    let formula_u = rankin_g_ln(lf)
        .ok()
        .filter(|g| !g.negative_regime)
        .map(|g| constants.c10 * g.value * lf)
        .filter(|&u| u >= lf);
    let (u, u_fallback) = match formula_u {
        Some(u) => (u, false),
        None => (lf * constants.c10.ceil(), true),
    };
    Ok(Schedule {
        v: v_threshold(lf),
        y: y_threshold(lf, k),
        u,
        u_fallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankinParams {
    #[serde(rename = "L")]
    pub l: u64,
    pub k: usize,
    pub v: u64,
    pub y: u64,
    #[serde(rename = "U")]
    pub u: u64,
    pub u_fallback: bool,
}

impl RankinParams {
    /// Explicit desk-scale thresholds.
    pub fn explicit(l: u64, k: usize, v: u64, y: u64, u: u64) -> Result<Self> {
        check_ordering(l, v as f64, y as f64, u as f64)?;
        Ok(Self {
            l,
            k,
            v,
            y,
            u,
            u_fallback: false,
        })
    }
}

pub fn check_ordering(l: u64, v: f64, y: f64, u: f64) -> Result<()> {
    let fail = |reason: &str| Error::OrderingViolated {
        l,
        v,
        y,
        u,
        reason: reason.into(),
    };
    if l < 4 {
        return Err(fail("L must be at least 4"));
    }
    if v < 2.0 {
        return Err(fail("v must be at least 2"));
    }
    if v >= y {
        return Err(fail("need v < y"));
    }
    if 2.0 * y > l as f64 {
        return Err(fail("need y ≤ L/2"));
    }
    if u < l as f64 {
        return Err(fail("need U ≥ L"));
    }
    Ok(())
}

/// Thresholds from the asymptotic formulas, floored. Fails instead of
/// guessing when the formulas are out of order, which is the normal
/// outcome for small `L`.
pub fn derive_params(l: u64, k: usize, constants: &GrowthConstants) -> Result<RankinParams> {
    let s = schedule(l, k, constants)?;
    check_ordering(l, s.v, s.y, s.u)?;
    let (v, y, u) = (s.v.floor() as u64, s.y.floor() as u64, s.u.floor() as u64);
    check_ordering(l, v as f64, y as f64, u as f64)?;
    Ok(RankinParams {
        l,
        k,
        v,
        y,
        u,
        u_fallback: s.u_fallback,
    })
}

/// Primes `≤ L` minus `H ∪ {q₀}`, split at `v`, `y` and `L/2`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrimePartition {
    pub p1: Vec<u64>,
    pub p2: Vec<u64>,
    pub p3: Vec<u64>,
    pub p4: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSizes {
    pub p1: usize,
    pub p2: usize,
    pub p3: usize,
    pub p4: usize,
}

impl PrimePartition {
    pub fn sizes(&self) -> PartitionSizes {
        PartitionSizes {
            p1: self.p1.len(),
            p2: self.p2.len(),
            p3: self.p3.len(),
            p4: self.p4.len(),
        }
    }

    /// `P1 ∪ P3`, the primes fixed to class 0 up front.
    pub fn zero_class(&self) -> impl Iterator<Item = u64> + '_ {
        self.p1.iter().chain(&self.p3).copied()
    }

    pub fn all(&self) -> impl Iterator<Item = u64> + '_ {
        self.p1
            .iter()
            .chain(&self.p2)
            .chain(&self.p3)
            .chain(&self.p4)
            .copied()
    }
}

/// Which residue strategy drives the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Class 0 on `P1 ∪ P3`, greedy on `P2`, cleanup on `P4`.
    #[default]
    ErdosRankin,
    /// Class 1 below `y`, class 0 on `(y, zbound]`, greedy above.
    Maynard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankinConfig {
    pub params: RankinParams,
    pub tuple: AdmissibleTuple,
    pub q0: Option<u64>,
    /// Upper end of the class-0 range for [`Strategy::Maynard`].
    pub zbound: Option<u64>,
}

impl RankinConfig {
    pub fn new(params: RankinParams, tuple: AdmissibleTuple, q0: Option<u64>) -> Result<Self> {
        if params.k != tuple.k {
            return Err(Error::Invalid(format!(
                "k = {} but the tuple has {} elements",
                params.k, tuple.k
            )));
        }
        if !tuple.admissible {
            return Err(Error::Invalid(format!(
                "tuple {:?} is not admissible",
                tuple.h
            )));
        }
        if let Some(q) = q0 {
            if !crate::primes::is_prime(q) {
                return Err(Error::Invalid(format!("q0 = {q} is not prime")));
            }
        }
        Ok(Self {
            params,
            tuple,
            q0,
            zbound: None,
        })
    }

    /// Rejects tuples hit by the class-0 stage of the Erdős–Rankin strategy.
    pub fn check_zero_class(&self) -> Result<()> {
        let partition = partition_primes(self)?;
        for &h in &self.tuple.h {
            if let Some(p) = partition.zero_class().find(|&p| h % p == 0) {
                return Err(Error::Invalid(format!(
                    "tuple element {h} is divisible by {p}, which is fixed to class 0"
                )));
            }
        }
        Ok(())
    }

    /// `zbound` defaults to `⌊L / log₂L⌋`.
    pub fn with_zbound(mut self, zbound: Option<u64>) -> Result<Self> {
        let l = self.params.l;
        let zb = zbound.unwrap_or_else(|| {
            let lf = l as f64;
            (lf / lf.ln().ln()).floor() as u64
        });
        if zb <= self.params.y || zb > l {
            return Err(Error::OrderingViolated {
                l,
                v: self.params.v as f64,
                y: self.params.y as f64,
                u: self.params.u as f64,
                reason: format!("need y < zbound ≤ L, got zbound = {zb}"),
            });
        }
        self.zbound = Some(zb);
        Ok(self)
    }

    pub fn l(&self) -> u64 {
        self.params.l
    }

    pub fn u(&self) -> u64 {
        self.params.u
    }

    pub fn h(&self) -> &[u64] {
        &self.tuple.h
    }

    /// `H ∪ {q₀}`.
    pub fn excluded(&self) -> BTreeSet<u64> {
        let mut out: BTreeSet<u64> = self.tuple.h.iter().copied().collect();
        out.extend(self.q0);
        out
    }
}

pub fn partition_primes(config: &RankinConfig) -> Result<PrimePartition> {
    let excluded = config.excluded();
    let RankinParams { l, v, y, .. } = config.params;
    let mut part = PrimePartition::default();
    for p in primes_up_to(l)? {
        if excluded.contains(&p) {
            continue;
        }
        if p <= v {
            part.p1.push(p);
        } else if p <= y {
            part.p2.push(p);
        } else if 2 * p <= l {
            part.p3.push(p);
        } else {
            part.p4.push(p);
        }
    }
    Ok(part)
}
