//! Declarative parameter sweeps over the state and channel bounds.
//!
//! A run writes `<experiment>.csv` and `<experiment>.manifest.json` to the
//! output directory. CSV columns are the experiment's grid axes in
//! alphabetical order, then `bound, regime, E, J, method`, then any
//! experiment-specific extras (`alpha`, `per_copy_bound`). Rows follow the
//! grid in lexicographic order of the axes, so identical configurations give
//! byte-identical CSV files regardless of the execution strategy.

mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{
    Axis, AxisName, ExperimentConfig, ExperimentKind, GeoSource, Grid, GridSpec, OUTPUT_DIR_ENV,
};
pub use output::{read_csv, CsvRecord};

use crate::channel::{
    erasure_geo_unext_analytic, geo_unext_ent_channel, j_min_channel, nshot_geo_report,
};
use crate::closed_form::alpha_of_ell;
use crate::error::Result;
use crate::quantum::{erasure_channel, isotropic, BipartiteState};
use crate::report::{BoundReport, Method};
use crate::state::{j_min, max_unext_ent, nshot_max_report};

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Grid coordinates in column order, already formatted.
    pub key: Vec<String>,
    pub report: BoundReport,
    pub alpha: Option<f64>,
    pub per_copy_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: Vec<Row>,
    pub wall_clock_seconds: f64,
}

/// Extra trailing columns beyond the fixed schema.
pub fn extra_columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::IsoNshotEmax => &["per_copy_bound"],
        ExperimentKind::ErasureNshot => &["alpha", "per_copy_bound"],
        _ => &[],
    }
}

/// Full CSV header of an experiment.
pub fn columns(kind: ExperimentKind) -> Vec<&'static str> {
    let mut cols: Vec<&str> = kind.axes().iter().map(|a| a.as_str()).collect();
    cols.extend(["bound", "regime", "E", "J", "method"]);
    cols.extend(extra_columns(kind));
    cols
}

/// Computes the rows of an experiment without writing anything.
pub fn compute_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let grid = cfg.grid()?;
    let tol = cfg.tol;
    let exec = cfg.execution;
    let fmt_u = |x: u32| x.to_string();
    let fmt_f = |x: f64| x.to_string();
    let mut rows = Vec::new();
    match cfg.experiment {
        ExperimentKind::IsoOneshot | ExperimentKind::IsoRelaxed => {
            let points = product3(&grid.f, &grid.d, &grid.epsilon);
            let js = exec.map(&points, |&(f, d, eps)| j_min(&isotropic(f, d as usize)?, eps, tol));
            let methods: &[Method] = if cfg.experiment == ExperimentKind::IsoOneshot {
                &[Method::SmoothMin]
            } else {
                &[Method::SmoothMin, Method::RelaxedAlg, Method::RelaxedTd]
            };
            for (&(f, d, eps), j) in points.iter().zip(js) {
                let j = j?;
                for &m in methods {
                    rows.push(Row {
                        key: vec![fmt_f(f), fmt_u(d), fmt_f(eps)],
                        report: BoundReport::new(m, -0.5 * j.log2(), j, eps, 1)?,
                        alpha: None,
                        per_copy_bound: None,
                    });
                }
            }
        }
        ExperimentKind::IsoTwoCopy => {
            let points = product3(&grid.f, &grid.copies, &grid.epsilon);
            let js = exec.map(&points, |&(f, copies, eps)| {
                let rho = isotropic(f, 2)?;
                let state: BipartiteState = if copies == 2 { rho.tensor(&rho) } else { rho };
                j_min(&state, eps, tol)
            });
            for (&(f, copies, eps), j) in points.iter().zip(js) {
                let j = j?;
                rows.push(Row {
                    key: vec![fmt_f(f), fmt_u(copies), fmt_f(eps)],
                    report: BoundReport::new(Method::SmoothMin, -0.5 * j.log2(), j, eps, 1)?,
                    alpha: None,
                    per_copy_bound: None,
                });
            }
        }
        ExperimentKind::IsoNshotEmax => {
            let states: Vec<(f64, u32)> =
                grid.f.iter().flat_map(|&f| grid.d.iter().map(move |&d| (f, d))).collect();
            let emax = exec.map(&states, |&(f, d)| max_unext_ent(&isotropic(f, d as usize)?, tol));
            for (&(f, d), e) in states.iter().zip(emax) {
                let e = e?;
                for &eps in &grid.epsilon {
                    for &n in &grid.n {
                        let report = nshot_max_report(e, eps, n)?;
                        rows.push(Row {
                            key: vec![fmt_f(f), fmt_u(d), fmt_f(eps), fmt_u(n)],
                            per_copy_bound: report.bound.map(|b| b / f64::from(n)),
                            report,
                            alpha: None,
                        });
                    }
                }
            }
        }
        ExperimentKind::ErasureOneshot => {
            let points = product3(&grid.d, &grid.epsilon, &grid.p);
            let js = exec.map(&points, |&(d, eps, p)| j_min_channel(&erasure_channel(p, d as usize)?, eps, tol));
            for (&(d, eps, p), j) in points.iter().zip(js) {
                let j = j?;
                rows.push(Row {
                    key: vec![fmt_u(d), fmt_f(eps), fmt_f(p)],
                    report: BoundReport::new(Method::SmoothMin, -0.5 * j.log2(), j, eps, 1)?,
                    alpha: None,
                    per_copy_bound: None,
                });
            }
        }
        ExperimentKind::ErasureNshot => {
            let channels = product3(&grid.d, &grid.ell, &grid.p);
            let source = cfg.geo_source;
            let geo = exec.map(&channels, |&(d, ell, p)| match source {
                GeoSource::Sdp => geo_unext_ent_channel(&erasure_channel(p, d as usize)?, ell, tol),
                GeoSource::Analytic => erasure_geo_unext_analytic(p, d as usize, alpha_of_ell(ell)),
            });
            let geo: Vec<f64> = geo.into_iter().collect::<Result<_>>()?;
            for (ci, &(d, ell, p)) in channels.iter().enumerate() {
                for &eps in &grid.epsilon {
                    for &n in &grid.n {
                        let r = nshot_geo_report(geo[ci], eps, n, ell)?;
                        rows.push(Row {
                            key: vec![fmt_u(d), fmt_u(ell), fmt_f(eps), fmt_u(n), fmt_f(p)],
                            report: r.base,
                            alpha: r.alpha,
                            per_copy_bound: r.per_copy_bound,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn product3<A: Copy, B: Copy, C: Copy>(a: &[A], b: &[B], c: &[C]) -> Vec<(A, B, C)> {
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for &x in a {
        for &y in b {
            for &z in c {
                out.push((x, y, z));
            }
        }
    }
    out
}

/// Runs an experiment and writes its CSV and manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let rows = compute_rows(cfg)?;
    let wall_clock_seconds = start.elapsed().as_secs_f64();
    let csv_path = dir.join(format!("{}.csv", cfg.experiment));
    output::write_csv(&csv_path, cfg.experiment, &rows)?;
    let manifest_path = dir.join(format!("{}.manifest.json", cfg.experiment));
    output::write_manifest(&manifest_path, cfg, &csv_path, rows.len(), wall_clock_seconds)?;
    Ok(RunOutput { csv_path, manifest_path, rows, wall_clock_seconds })
}
