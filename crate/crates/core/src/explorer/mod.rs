//! Empirical views of normalized prime gaps and prime clusters.
//!
//! Everything here is finite data: a histogram cell with hits shows that a
//! ratio was attained, not that it is a limit point.

mod report;

pub use report::{emit_report, render_report, Report, ReportFormat};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rankin_g_ln, NormalizerSpec};
use crate::primes::{gaps_in, gaps_starting_in, is_prime, SieveConfig};
use crate::tuples::AdmissibleTuple;

/// Where a normalizer is evaluated: at the prime `p_n`, not the ordinal `n`.
pub const EVALUATED_AT: &str = "p_n";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedGap {
    pub p: u64,
    pub d: u64,
    pub ratio: f64,
}

/// Serializable description of a [`NormalizerSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerInfo {
    pub name: String,
    pub epsilon: f64,
    pub n0: u64,
    pub evaluated_at: String,
}

impl From<&NormalizerSpec> for NormalizerInfo {
    fn from(f: &NormalizerSpec) -> Self {
        Self {
            name: f.name.clone(),
            epsilon: f.epsilon,
            n0: f.n0,
            evaluated_at: EVALUATED_AT.into(),
        }
    }
}

/// `f(n) = scale · (ln n)^log_power · (ln ln n)^loglog_power · g(n)^rankin_power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizerFile {
    pub name: Option<String>,
    pub scale: f64,
    pub log_power: f64,
    pub loglog_power: f64,
    pub rankin_power: f64,
    pub epsilon: f64,
}

impl Default for NormalizerFile {
    fn default() -> Self {
        Self {
            name: None,
            scale: 1.0,
            log_power: 1.0,
            loglog_power: 0.0,
            rankin_power: 0.0,
            epsilon: 0.1,
        }
    }
}

impl NormalizerFile {
    pub fn into_spec(self) -> Result<NormalizerSpec> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Invalid(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        let name = self.name.clone().unwrap_or_else(|| {
            format!(
                "{}*log^{}*loglog^{}*g^{}",
                self.scale, self.log_power, self.loglog_power, self.rankin_power
            )
        });
        let Self {
            scale,
            log_power,
            loglog_power,
            rankin_power,
            epsilon,
            ..
        } = self;
        Ok(NormalizerSpec::new(name, epsilon, move |n| {
            let ln = (n as f64).ln();
            let mut v = scale * ln.powf(log_power);
            if loglog_power != 0.0 {
                v *= ln.ln().powf(loglog_power);
            }
            if rankin_power != 0.0 {
                v *= match rankin_g_ln(ln) {
                    Ok(g) => g.value.powf(rankin_power),
                    Err(_) => f64::NAN,
                };
            }
            v
        }))
    }
}

/// Parses `log`, `g-log`, `const`, `const:<c>`, `identity` or `file:<path>`.
pub fn parse_normalizer(spec: &str) -> Result<NormalizerSpec> {
    match spec {
        "log" | "ln" => return Ok(NormalizerSpec::log()),
        "g-log" => return Ok(NormalizerSpec::rankin_log()),
        "const" => return Ok(NormalizerSpec::constant(1.0)),
        "identity" => return Ok(NormalizerSpec::identity()),
        _ => {}
    }
    if let Some(c) = spec.strip_prefix("const:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Error::Invalid(format!("bad constant {c:?}")))?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Invalid(format!(
                "constant must be positive, got {c}"
            )));
        }
        return Ok(NormalizerSpec::constant(c));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(Path::new(path))?;
        let file: NormalizerFile = serde_json::from_str(&text)?;
        return file.into_spec();
    }
    Err(Error::Invalid(format!("unknown normalizer {spec:?}")))
}

fn normalize(p: u64, d: u64, f: &NormalizerSpec) -> Result<NormalizedGap> {
    let v = f.eval(p);
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Invalid(format!(
            "normalizer '{}' is not positive at {p}: {v}",
            f.name
        )));
    }
    Ok(NormalizedGap {
        p,
        d,
        ratio: d as f64 / v,
    })
}

/// `(p, d, d/f(p))` for each gap with both primes in `[lo, hi]`.
pub fn normalized_gaps(lo: u64, hi: u64, f: &NormalizerSpec) -> Result<Vec<NormalizedGap>> {
    gaps_in(lo, hi)?
        .into_iter()
        .map(|g| normalize(g.p, g.d, f))
        .collect()
}

/// Same as [`normalized_gaps`], computed over `shards` pieces in parallel.
pub fn normalized_gaps_sharded(
    lo: u64,
    hi: u64,
    f: &NormalizerSpec,
    shards: u64,
) -> Result<Vec<NormalizedGap>> {
    if hi <= lo {
        return Err(Error::Invalid(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let end = hi
        .checked_add(1)
        .ok_or_else(|| Error::Overflow("normalized_gaps upper bound".into()))?;
    let shards = shards.clamp(1, end - lo);
    let step = (end - lo).div_ceil(shards);
    let config = SieveConfig::default();
    let parts: Vec<Vec<NormalizedGap>> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let a = lo + i * step;
            let b = (a + step).min(end);
            if a >= b {
                return Ok(Vec::new());
            }
            gaps_starting_in(a, b, hi, &config)?
                .into_iter()
                .map(|g| normalize(g.p, g.d, f))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Histogram of ratios over cells `[jδ, (j+1)δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetEstimate {
    pub normalizer: Option<NormalizerInfo>,
    pub grid_step: f64,
    pub cells: BTreeMap<u64, u64>,
    /// Minimum count for a cell to be marked hit.
    pub hit_threshold: u64,
    pub range: Option<(u64, u64)>,
    pub sample_count: u64,
    /// Always true: the estimate records attained values only.
    pub non_asymptotic: bool,
}

impl LimitSetEstimate {
    pub fn hit_cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.cells
            .iter()
            .filter(|&(_, &c)| c >= self.hit_threshold)
            .map(|(&j, _)| j)
    }

    /// Total length of the hit cells.
    pub fn hit_measure(&self) -> f64 {
        self.hit_cells().count() as f64 * self.grid_step
    }

    pub fn with_hit_threshold(mut self, threshold: u64) -> Self {
        self.hit_threshold = threshold.max(1);
        self
    }
}

pub fn empirical_limit_set(samples: &[f64], grid_step: f64) -> Result<LimitSetEstimate> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Invalid(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let mut cells = BTreeMap::new();
    for &r in samples {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Invalid(format!(
                "sample {r} is not a finite non-negative ratio"
            )));
        }
        *cells.entry((r / grid_step).floor() as u64).or_insert(0) += 1;
    }
    Ok(LimitSetEstimate {
        normalizer: None,
        grid_step,
        cells,
        hit_threshold: 1,
        range: None,
        sample_count: samples.len() as u64,
        non_asymptotic: true,
    })
}

/// Minimum of `d/f(p)` over gaps starting in `(N, 2N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicMinimum {
    pub n: u64,
    pub min_ratio: Option<f64>,
    pub at: Option<u64>,
    /// Minimum over all blocks so far.
    pub running_min: Option<f64>,
}

/// Splits the gaps into blocks `(N, 2N]` with `N = lo, 2lo, …`.
pub fn dyadic_minima(gaps: &[NormalizedGap], lo: u64, hi: u64) -> Vec<DyadicMinimum> {
    let mut out = Vec::new();
    let mut n = lo.max(1);
    let mut running: Option<f64> = None;
    let mut i = gaps.partition_point(|g| g.p <= n);
    while n < hi {
        let top = n.saturating_mul(2).min(hi);
        let mut best: Option<(f64, u64)> = None;
        while i < gaps.len() && gaps[i].p <= top {
            let g = gaps[i];
            if best.is_none_or(|(r, _)| g.ratio < r) {
                best = Some((g.ratio, g.p));
            }
            i += 1;
        }
        if let Some((r, _)) = best {
            running = Some(running.map_or(r, |m: f64| m.min(r)));
        }
        out.push(DyadicMinimum {
            n,
            min_ratio: best.map(|b| b.0),
            at: best.map(|b| b.1),
            running_min: running,
        });
        n = top;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreReport {
    pub range: (u64, u64),
    pub normalizer: NormalizerInfo,
    pub estimate: LimitSetEstimate,
    pub hit_measure: f64,
    pub max_ratio: Option<f64>,
    pub dyadic: Vec<DyadicMinimum>,
}

pub fn explore(lo: u64, hi: u64, f: &NormalizerSpec, grid_step: f64) -> Result<ExploreReport> {
    let gaps = normalized_gaps(lo, hi, f)?;
    let ratios: Vec<f64> = gaps.iter().map(|g| g.ratio).collect();
    let mut estimate = empirical_limit_set(&ratios, grid_step)?;
    let info = NormalizerInfo::from(f);
    estimate.normalizer = Some(info.clone());
    estimate.range = Some((lo, hi));
    Ok(ExploreReport {
        range: (lo, hi),
        normalizer: info,
        hit_measure: estimate.hit_measure(),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        estimate,
        dyadic: dyadic_minima(&gaps, lo, hi),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterHit {
    pub n: u64,
    /// `is_prime(n + h_i)` for each tuple element.
    pub mask: Vec<bool>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterScanResult {
    pub z: u64,
    #[serde(rename = "W")]
    pub w: u64,
    #[serde(rename = "H")]
    pub h: AdmissibleTuple,
    /// `(N_lo, N_hi]`.
    pub range: (u64, u64),
    pub m: usize,
    pub hits: Vec<ClusterHit>,
}

/// Every `n ≡ z (mod W)` in `(lo, hi]` with at least `m` primes among `n + H`.
pub fn cluster_scan(
    z: u64,
    w: u64,
    h: &AdmissibleTuple,
    lo: u64,
    hi: u64,
    m: usize,
) -> Result<ClusterScanResult> {
    if w == 0 || z >= w {
        return Err(Error::Invalid(format!(
            "need 0 ≤ z < W, got z = {z}, W = {w}"
        )));
    }
    if hi <= lo {
        return Err(Error::Invalid(format!(
            "need N_lo < N_hi, got ({lo}, {hi}]"
        )));
    }
    let top = h.h.last().copied().unwrap_or(0);
    hi.checked_add(top)
        .ok_or_else(|| Error::Overflow(format!("{hi} + {top}")))?;
    let offset = (z + w - lo % w) % w;
    let first = match lo.checked_add(if offset == 0 { w } else { offset }) {
        Some(n) if n <= hi => n,
        _ => {
            return Ok(ClusterScanResult {
                z,
                w,
                h: h.clone(),
                range: (lo, hi),
                m,
                hits: Vec::new(),
            })
        }
    };
    let count = (hi - first) / w + 1;
    let hits = (0..count)
        .into_par_iter()
        .filter_map(|i| {
            let n = first + i * w;
            let mask: Vec<bool> = h.h.iter().map(|&x| is_prime(n + x)).collect();
            let primes = mask.iter().filter(|&&b| b).count();
            (primes >= m).then_some(ClusterHit {
                n,
                mask,
                count: primes,
            })
        })
        .collect();
    Ok(ClusterScanResult {
        z,
        w,
        h: h.clone(),
        range: (lo, hi),
        m,
        hits,
    })
}

/// `m` consecutive gaps, each with ratio at least the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWindow {
    pub start: u64,
    pub end: u64,
    pub gaps: Vec<NormalizedGap>,
    pub min_ratio: f64,
}

pub fn consecutive_gap_cluster(
    lo: u64,
    hi: u64,
    m: usize,
    threshold: f64,
    f: &NormalizerSpec,
) -> Result<Vec<GapWindow>> {
    if m == 0 {
        return Err(Error::Invalid("window length m must be at least 1".into()));
    }
    let gaps = normalized_gaps(lo, hi, f)?;
    Ok(gaps
        .windows(m)
        .filter(|w| w.iter().all(|g| g.ratio >= threshold))
        .map(|w| GapWindow {
            start: w[0].p,
            end: w[m - 1].p + w[m - 1].d,
            gaps: w.to_vec(),
            min_ratio: w.iter().map(|g| g.ratio).fold(f64::INFINITY, f64::min),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalized_gap_examples() {
        let g = normalized_gaps(100, 130, &NormalizerSpec::log()).unwrap();
        let at = g.iter().find(|x| x.p == 113).unwrap();
        assert_eq!(at.d, 14);
        assert!((at.ratio - 2.962).abs() < 1e-3);

        let raw = normalized_gaps(100, 130, &NormalizerSpec::constant(1.0)).unwrap();
        assert!(raw.iter().all(|x| x.ratio == x.d as f64));

        let one = normalized_gaps(2, 4, &NormalizerSpec::log()).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!((one[0].p, one[0].d), (2, 1));
        assert!((one[0].ratio - 1.0 / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rankin_scale_fails_loudly_at_small_primes() {
        assert!(normalized_gaps(2, 100, &NormalizerSpec::rankin_log()).is_err());
    }

    #[test]
    fn limit_set_examples() {
        let e = empirical_limit_set(&[], 0.5).unwrap();
        assert!(e.cells.is_empty());
        assert_eq!(e.sample_count, 0);

        let e = empirical_limit_set(&[0.5, 0.5, 1.7], 1.0).unwrap();
        assert_eq!(e.cells.get(&0), Some(&2));
        assert_eq!(e.cells.get(&1), Some(&1));
        assert_eq!(e.cells.values().sum::<u64>(), 3);
        assert_eq!(e.hit_measure(), 2.0);
        assert_eq!(
            e.with_hit_threshold(2).hit_cells().collect::<Vec<_>>(),
            vec![0]
        );

        assert!(empirical_limit_set(&[1.0], 0.0).is_err());
    }

    #[test]
    fn cluster_scan_examples() {
        let twins = AdmissibleTuple::new(vec![0, 2]).unwrap();
        let r = cluster_scan(5, 6, &twins, 10, 100, 2).unwrap();
        let ns: Vec<u64> = r.hits.iter().map(|x| x.n).collect();
        assert_eq!(ns, vec![11, 17, 29, 41, 59, 71]);

        let all = cluster_scan(5, 6, &twins, 10, 100, 0).unwrap();
        assert_eq!(all.hits.len(), 15);
        assert_eq!(all.hits[0].n, 11);

        let single = AdmissibleTuple::new(vec![0]).unwrap();
        let r = cluster_scan(1, 4, &single, 0, 50, 1).unwrap();
        let ns: Vec<u64> = r.hits.iter().map(|x| x.n).collect();
        assert_eq!(ns, vec![5, 13, 17, 29, 37, 41]);

        assert!(cluster_scan(6, 6, &twins, 10, 100, 2).is_err());
        assert!(cluster_scan(5, 6, &twins, 11, 16, 2)
            .unwrap()
            .hits
            .is_empty());
    }

    #[test]
    fn gap_window_examples() {
        let w = consecutive_gap_cluster(100, 130, 1, 2.9, &NormalizerSpec::log()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].start, 113);
        assert!((w[0].min_ratio - 2.962).abs() < 1e-3);

        let every = consecutive_gap_cluster(100, 130, 2, 0.0, &NormalizerSpec::log()).unwrap();
        let n = normalized_gaps(100, 130, &NormalizerSpec::log())
            .unwrap()
            .len();
        assert_eq!(every.len(), n - 1);

        let none = consecutive_gap_cluster(2, 30, 2, 5.0, &NormalizerSpec::constant(1.0)).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn running_minimum_never_increases() {
        let r = explore(10, 1 << 20, &NormalizerSpec::log(), 0.25).unwrap();
        let mins: Vec<f64> = r.dyadic.iter().filter_map(|d| d.running_min).collect();
        assert!(mins.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(
            r.estimate.sample_count,
            r.estimate.cells.values().sum::<u64>()
        );
        assert!(r.estimate.non_asymptotic);
    }

    #[test]
    fn normalizer_file() {
        let file: NormalizerFile =
            serde_json::from_str(r#"{"scale": 2.0, "log_power": 2.0}"#).unwrap();
        let f = file.into_spec().unwrap();
        assert!((f.eval(100) - 2.0 * 100f64.ln().powi(2)).abs() < 1e-9);
        assert!(serde_json::from_str::<NormalizerFile>(r#"{"scal": 2.0}"#).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        std::fs::write(&path, r#"{"log_power": 1.0, "loglog_power": 1.0}"#).unwrap();
        let f = parse_normalizer(&format!("file:{}", path.display())).unwrap();
        let ln = 1000f64.ln();
        assert!((f.eval(1000) - ln * ln.ln()).abs() < 1e-9);
        assert!(parse_normalizer("const:0").is_err());
        assert!(parse_normalizer("sqrt").is_err());
        assert_eq!(parse_normalizer("const:2.5").unwrap().eval(7), 2.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn shards_match_single_range(lo in 2u64..5000, len in 1u64..20_000, shards in 1u64..9) {
            let f = NormalizerSpec::log();
            let whole = normalized_gaps(lo, lo + len, &f).unwrap();
            let split = normalized_gaps_sharded(lo, lo + len, &f, shards).unwrap();
            prop_assert_eq!(whole, split);
        }

        #[test]
        fn hits_match_primality(z in 0u64..30, lo in 0u64..10_000, m in 0usize..3) {
            let h = AdmissibleTuple::new(vec![0, 2, 6]).unwrap();
            let r = cluster_scan(z, 30, &h, lo, lo + 3000, m).unwrap();
            for hit in &r.hits {
                prop_assert_eq!(hit.n % 30, z);
                prop_assert!(hit.n > lo && hit.n <= lo + 3000);
                for (bit, &x) in hit.mask.iter().zip(&h.h) {
                    prop_assert_eq!(*bit, is_prime(hit.n + x));
                }
                prop_assert!(hit.count >= m);
            }
        }
    }
}
