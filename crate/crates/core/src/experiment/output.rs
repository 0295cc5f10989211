use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::{columns, Row};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::report::{BoundReport, Method, Regime};
use crate::sdp::SolverOptions;

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub(super) fn write_csv(path: &Path, kind: ExperimentKind, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns(kind))?;
    for row in rows {
        let r = &row.report;
        let mut rec = row.key.clone();
        rec.extend([
            opt(r.bound),
            r.regime.as_str().to_string(),
            r.e.to_string(),
            r.j.to_string(),
            r.method.as_str().to_string(),
        ]);
        match kind {
            ExperimentKind::IsoNshotEmax => rec.push(opt(row.per_copy_bound)),
            ExperimentKind::ErasureNshot => {
                rec.push(opt(row.alpha));
                rec.push(opt(row.per_copy_bound));
            }
            _ => {}
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub(super) fn write_manifest(
    path: &Path,
    cfg: &ExperimentConfig,
    csv_path: &Path,
    rows: usize,
    wall_clock_seconds: f64,
) -> Result<()> {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let solver = SolverOptions::with_tol(cfg.tol);
    let manifest = json!({
        "experiment": cfg.experiment.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "grid": cfg.grid()?,
        "columns": columns(cfg.experiment),
        "csv": csv_path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "rows": rows,
        "solver": { "tol": solver.tol, "max_iter": solver.max_iter, "step_factor": solver.step_factor },
        "execution": cfg.execution,
        "parallel_available": Execution::parallel_available(),
        "wall_clock_seconds": wall_clock_seconds,
        "timestamp_unix": timestamp,
    });
    std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// A CSV row read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    /// Grid columns as `(name, raw value)`.
    pub grid: Vec<(String, String)>,
    pub report: BoundReport,
    pub alpha: Option<f64>,
    pub per_copy_bound: Option<f64>,
}

impl CsvRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.grid.iter().find(|(k, _)| k == name).and_then(|(_, v)| v.parse().ok())
    }

    /// Re-derives the regime and bound from `(method, J, ε)` and the per-copy
    /// rate from `n`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        self.report.validate(tol)?;
        if let Some(pc) = self.per_copy_bound {
            let b = self.report.bound.ok_or_else(|| Error::Numerical("per-copy bound without bound".into()))?;
            let want = b / f64::from(self.report.n);
            if (pc - want).abs() > tol * want.abs().max(1.0) {
                return Err(Error::Numerical(format!("per-copy bound {pc} differs from {want}")));
            }
        }
        Ok(())
    }
}

fn parse_f(field: &str, name: &str) -> Result<f64> {
    field.parse().map_err(|_| Error::Config(format!("column {name}: cannot parse {field:?}")))
}

fn parse_opt(field: &str, name: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f(field, name).map(Some)
    }
}

/// Reads an experiment CSV written by [`super::run_experiment`].
pub fn read_csv(path: &Path) -> Result<Vec<CsvRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let pos = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("missing column {name}")))
    };
    let (ib, ir, ie, ij, im) = (pos("bound")?, pos("regime")?, pos("E")?, pos("J")?, pos("method")?);
    let ieps = pos("epsilon")?;
    let i_n = header.iter().position(|h| h == "n");
    let i_alpha = header.iter().position(|h| h == "alpha");
    let i_pc = header.iter().position(|h| h == "per_copy_bound");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let grid = header[..ib].iter().enumerate().map(|(i, h)| (h.clone(), field(i).to_string())).collect();
        let n = match i_n {
            Some(i) => field(i).parse().map_err(|_| Error::Config(format!("bad n {:?}", field(i))))?,
            None => 1,
        };
        let report = BoundReport {
            method: field(im).parse::<Method>()?,
            bound: parse_opt(field(ib), "bound")?,
            regime: field(ir).parse::<Regime>()?,
            e: parse_f(field(ie), "E")?,
            j: parse_f(field(ij), "J")?,
            epsilon: parse_f(field(ieps), "epsilon")?,
            n,
        };
        out.push(CsvRecord {
            grid,
            report,
            alpha: i_alpha.map(|i| parse_opt(field(i), "alpha")).transpose()?.flatten(),
            per_copy_bound: i_pc.map(|i| parse_opt(field(i), "per_copy_bound")).transpose()?.flatten(),
        });
    }
    Ok(out)
}
