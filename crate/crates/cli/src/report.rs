//! Report writers: a CSV with one row per (n, statistic) at full float
//! precision, and a JSON sidecar embedding the resolved configuration,
//! seed, library version, and a content hash of the inputs. The CSV is
//! byte-identical across runs of the same configuration; wall time lives
//! only in the sidecar.

use crate::config::{Bound, RunConfig};
use equizero_core::experiments::{FitSummary, ReportRow};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// 17 significant digits, locale-independent.
fn fmt(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn write_csv(path: &Path, experiment: &str, rows: &[ReportRow]) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "experiment,n,statistic,value,std_error,samples")?;
    for r in rows {
        writeln!(
            file,
            "{experiment},{},{},{},{},{}",
            r.n,
            r.statistic,
            fmt(r.value),
            fmt(r.std_error),
            r.samples
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct BoundVerdict {
    pub description: String,
    pub value: f64,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct Sidecar<'a> {
    pub schema: u32,
    pub experiment: &'a str,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub threads: usize,
    pub block_size: usize,
    pub version: &'a str,
    pub input_hash: String,
    pub wall_time_s: f64,
    pub rows: &'a [ReportRow],
    pub fits: &'a [FitSummary],
    pub bounds: Vec<BoundVerdict>,
    pub bounds_violated: bool,
}

pub fn write_json(path: &Path, sidecar: &Sidecar) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(sidecar).expect("report serialization");
    std::fs::write(path, text)
}

/// Evaluate the configured bounds against rows and fits. A bound that
/// matches nothing is an operational error.
pub fn check_bounds(
    bounds: &[Bound],
    rows: &[ReportRow],
    fits: &[FitSummary],
) -> Result<Vec<BoundVerdict>, String> {
    let mut verdicts = Vec::with_capacity(bounds.len());
    for bound in bounds {
        let (value, description) = match (&bound.statistic, &bound.fit) {
            (Some(stat), None) => {
                let matched: Vec<&ReportRow> = rows
                    .iter()
                    .filter(|r| {
                        r.statistic == *stat && bound.n.map(|n| r.n == n as u64).unwrap_or(true)
                    })
                    .collect();
                if matched.is_empty() {
                    return Err(format!("bounds: no row matches statistic `{stat}`"));
                }
                // bound applies to every matching row; report the worst
                let worst = matched
                    .iter()
                    .map(|r| r.value)
                    .fold(f64::NAN, |acc, v| {
                        if acc.is_nan() {
                            v
                        } else {
                            let lo_bad = bound.min.map(|m| v < m).unwrap_or(false);
                            let acc_lo_bad = bound.min.map(|m| acc < m).unwrap_or(false);
                            if lo_bad && !acc_lo_bad {
                                v
                            } else if bound.max.map(|m| v > m).unwrap_or(false) {
                                acc.max(v)
                            } else {
                                acc
                            }
                        }
                    });
                (worst, format!("statistic `{stat}`"))
            }
            (None, Some(name)) => {
                let found = fits
                    .iter()
                    .find(|f| f.name == *name)
                    .ok_or_else(|| format!("bounds: no fit named `{name}`"))?;
                (found.value, format!("fit `{name}`"))
            }
            _ => {
                return Err("bounds: each bound names exactly one of `statistic` or `fit`".into())
            }
        };
        let ok = bound.min.map(|m| value >= m).unwrap_or(true)
            && bound.max.map(|m| value <= m).unwrap_or(true);
        verdicts.push(BoundVerdict {
            description,
            value,
            ok,
        });
    }
    Ok(verdicts)
}
