//! JSON and CSV output for every result type the command line produces.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClusterScanResult, ExploreReport, GapWindow, LimitSetEstimate, NormalizedGap};
use crate::error::{Error, Result};
use crate::primes::GapSample;
use crate::rankin::{write_trace, Construction};
use crate::smooth::SmoothCount;
use crate::tuples::AdmissibleTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Invalid(format!("unknown format {s:?}"))),
        }
    }
}

/// A result with a JSON form (via serde) and a CSV table with a header row.
pub trait Report: Serialize {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()>;
}

pub fn render_report<R: Report + ?Sized>(
    report: &R,
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        ReportFormat::Csv => report.write_csv(out)?,
    }
    out.flush()?;
    Ok(())
}

pub fn emit_report<R: Report + ?Sized>(
    report: &R,
    format: ReportFormat,
    path: &Path,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    render_report(report, format, &mut out)
}

fn table(
    out: &mut dyn Write,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report for [NormalizedGap] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["p", "d", "ratio"],
            self.iter()
                .map(|g| vec![g.p.to_string(), g.d.to_string(), g.ratio.to_string()]),
        )
    }
}

impl Report for Vec<NormalizedGap> {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        self.as_slice().write_csv(out)
    }
}

impl Report for [GapSample] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["n", "p", "d"],
            self.iter()
                .map(|g| vec![opt(g.index_hint), g.p.to_string(), g.d.to_string()]),
        )
    }
}

impl Report for Vec<GapSample> {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        self.as_slice().write_csv(out)
    }
}

impl Report for LimitSetEstimate {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["cell", "lo", "hi", "count", "hit"],
            self.cells.iter().map(|(&j, &c)| {
                vec![
                    j.to_string(),
                    (j as f64 * self.grid_step).to_string(),
                    ((j + 1) as f64 * self.grid_step).to_string(),
                    c.to_string(),
                    (c >= self.hit_threshold).to_string(),
                ]
            }),
        )
    }
}

impl Report for ExploreReport {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        self.estimate.write_csv(out)
    }
}

impl Report for ClusterScanResult {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["n", "mask", "count"],
            self.hits.iter().map(|hit| {
                let mask: String = hit
                    .mask
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                vec![hit.n.to_string(), mask, hit.count.to_string()]
            }),
        )
    }
}

impl Report for [GapWindow] {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["start", "end", "min_ratio", "gaps"],
            self.iter().map(|w| {
                let gaps: Vec<String> = w.gaps.iter().map(|g| g.d.to_string()).collect();
                vec![
                    w.start.to_string(),
                    w.end.to_string(),
                    w.min_ratio.to_string(),
                    gaps.join(" "),
                ]
            }),
        )
    }
}

impl Report for Vec<GapWindow> {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        self.as_slice().write_csv(out)
    }
}

impl Report for SmoothCount {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["x", "y", "exact", "bound", "rho_estimate"],
            [vec![
                self.x.to_string(),
                self.y.to_string(),
                self.exact.to_string(),
                opt(self.bound),
                self.rho_estimate.to_string(),
            ]],
        )
    }
}

impl Report for AdmissibleTuple {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        table(
            out,
            &["i", "h"],
            self.h
                .iter()
                .enumerate()
                .map(|(i, h)| vec![i.to_string(), h.to_string()]),
        )
    }
}

impl Report for Construction {
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        write_trace(&self.history, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::{cluster_scan, empirical_limit_set, normalized_gaps};
    use crate::numeric::NormalizerSpec;

    fn render<R: Report + ?Sized>(r: &R, format: ReportFormat) -> String {
        let mut buf = Vec::new();
        render_report(r, format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_estimate_is_valid_json() {
        let e = empirical_limit_set(&[], 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&render(&e, ReportFormat::Json)).unwrap();
        assert_eq!(v["sample_count"], 0);
        assert_eq!(render(&e, ReportFormat::Csv).lines().count(), 1);
    }

    #[test]
    fn cluster_scan_round_trip() {
        let h = AdmissibleTuple::new(vec![0, 2, 6]).unwrap();
        let r = cluster_scan(11, 30, &h, 0, 5000, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.json");
        emit_report(&r, ReportFormat::Json, &path).unwrap();
        let back: ClusterScanResult =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert!(v["H"]["delta"].is_string());
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let g = normalized_gaps(1000, 5000, &NormalizerSpec::log()).unwrap();
        let text = render(&g, ReportFormat::Csv);
        assert_eq!(text.lines().count(), g.len() + 1);
        assert_eq!(text.lines().next(), Some("p,d,ratio"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let e = empirical_limit_set(&[], 1.0).unwrap();
        let err = emit_report(&e, ReportFormat::Json, Path::new("/nonexistent/dir/x.json"));
        assert!(matches!(err, Err(Error::Io(_))));
    }
}
