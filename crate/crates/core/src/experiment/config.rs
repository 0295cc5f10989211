use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::MAX_ELL;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::state::DEFAULT_TOL;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "UNEXT_OUTPUT_DIR";
const FALLBACK_OUTPUT_DIR: &str = "unext-output";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    IsoOneshot,
    IsoTwoCopy,
    IsoRelaxed,
    IsoNshotEmax,
    ErasureOneshot,
    ErasureNshot,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::IsoOneshot,
        ExperimentKind::IsoTwoCopy,
        ExperimentKind::IsoRelaxed,
        ExperimentKind::IsoNshotEmax,
        ExperimentKind::ErasureOneshot,
        ExperimentKind::ErasureNshot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::IsoOneshot => "iso-oneshot",
            ExperimentKind::IsoTwoCopy => "iso-two-copy",
            ExperimentKind::IsoRelaxed => "iso-relaxed",
            ExperimentKind::IsoNshotEmax => "iso-nshot-emax",
            ExperimentKind::ErasureOneshot => "erasure-oneshot",
            ExperimentKind::ErasureNshot => "erasure-nshot",
        }
    }

    /// Grid axes of the experiment, in CSV column order.
    pub fn axes(self) -> &'static [AxisName] {
        use AxisName::*;
        match self {
            ExperimentKind::IsoOneshot | ExperimentKind::IsoRelaxed => &[F, D, Epsilon],
            ExperimentKind::IsoTwoCopy => &[F, Copies, Epsilon],
            ExperimentKind::IsoNshotEmax => &[F, D, Epsilon, N],
            ExperimentKind::ErasureOneshot => &[D, Epsilon, P],
            ExperimentKind::ErasureNshot => &[D, Ell, Epsilon, N, P],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Grid axis identifiers; `as_str` gives the CSV column name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisName {
    F,
    Copies,
    D,
    Ell,
    Epsilon,
    N,
    P,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::F => "F",
            AxisName::Copies => "copies",
            AxisName::D => "d",
            AxisName::Ell => "ell",
            AxisName::Epsilon => "epsilon",
            AxisName::N => "n",
            AxisName::P => "p",
        }
    }
}

/// A parameter axis: an explicit list, or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis<T> {
    List(Vec<T>),
    Range { start: T, stop: T, step: T },
}

impl Axis<f64> {
    /// Range points are rounded to 12 decimals so that `0.1 + 2·0.1` prints
    /// as `0.3`.
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Axis::List(v) => Ok(v.clone()),
            &Axis::Range { start, stop, step } => {
                if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
                    return Err(Error::Config(format!("bad range {start}..{stop} step {step}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
            }
        }
    }
}

impl Axis<u32> {
    pub fn values(&self) -> Result<Vec<u32>> {
        match self {
            Axis::List(v) => Ok(v.clone()),
            &Axis::Range { start, stop, step } => {
                if step == 0 || stop < start {
                    return Err(Error::Config(format!("bad range {start}..{stop} step {step}")));
                }
                Ok((start..=stop).step_by(step as usize).collect())
            }
        }
    }
}

/// Grid section of the configuration; omitted axes take per-experiment
/// defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Axis<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Axis<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Axis<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Axis<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Axis<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<Axis<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<Axis<u32>>,
}

/// Source of the single-copy α-geometric value in `erasure-nshot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeoSource {
    #[default]
    Sdp,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Recorded in the manifest; the built-in experiments are deterministic
    /// and draw no random numbers.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub geo_source: GeoSource,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// Fully expanded grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub d: Vec<u32>,
    pub n: Vec<u32>,
    pub ell: Vec<u32>,
    pub copies: Vec<u32>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            grid: GridSpec::default(),
            tol: DEFAULT_TOL,
            output_dir: None,
            seed: 0,
            execution: Execution::default(),
            geo_source: GeoSource::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.grid()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Output directory: the configured one, else `$UNEXT_OUTPUT_DIR`, else
    /// `./unext-output`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR))
    }

    /// Expands and validates the grid. Axes the experiment does not use must
    /// be absent.
    pub fn grid(&self) -> Result<Grid> {
        let kind = self.experiment;
        if !(1e-12..=1e-2).contains(&self.tol) {
            return Err(Error::Config(format!("tol {} outside [1e-12, 1e-2]", self.tol)));
        }
        let g = &self.grid;
        let given = [
            (AxisName::F, g.f.is_some()),
            (AxisName::P, g.p.is_some()),
            (AxisName::Epsilon, g.epsilon.is_some()),
            (AxisName::D, g.d.is_some()),
            (AxisName::N, g.n.is_some()),
            (AxisName::Ell, g.ell.is_some()),
            (AxisName::Copies, g.copies.is_some()),
        ];
        for (axis, present) in given {
            if present && !kind.axes().contains(&axis) {
                return Err(Error::Config(format!("axis {} is not used by {kind}", axis.as_str())));
            }
        }
        let defaults = defaults(kind);
        let pick_f = |a: &Option<Axis<f64>>, d: Axis<f64>| a.clone().unwrap_or(d).values();
        let pick_u = |a: &Option<Axis<u32>>, d: Axis<u32>| a.clone().unwrap_or(d).values();
        let grid = Grid {
            f: pick_f(&g.f, defaults.f)?,
            p: pick_f(&g.p, defaults.p)?,
            epsilon: pick_f(&g.epsilon, defaults.epsilon)?,
            d: pick_u(&g.d, defaults.d)?,
            n: pick_u(&g.n, defaults.n)?,
            ell: pick_u(&g.ell, defaults.ell)?,
            copies: pick_u(&g.copies, defaults.copies)?,
        };
        grid.check(kind)?;
        Ok(grid)
    }
}

struct Defaults {
    f: Axis<f64>,
    p: Axis<f64>,
    epsilon: Axis<f64>,
    d: Axis<u32>,
    n: Axis<u32>,
    ell: Axis<u32>,
    copies: Axis<u32>,
}

fn defaults(kind: ExperimentKind) -> Defaults {
    use ExperimentKind::*;
    let range = |start, stop, step| Axis::Range { start, stop, step };
    let epsilon = match kind {
        IsoOneshot => Axis::List(vec![0.01, 0.05, 0.1]),
        IsoTwoCopy | IsoRelaxed | ErasureOneshot => Axis::List(vec![0.01, 0.05]),
        IsoNshotEmax => Axis::List(vec![0.01]),
        ErasureNshot => Axis::List(vec![1e-7]),
    };
    Defaults {
        f: match kind {
            IsoTwoCopy => range(0.5, 1.0, 0.05),
            IsoNshotEmax => Axis::List(vec![0.8, 0.85, 0.9, 0.95]),
            _ => range(0.5, 1.0, 0.01),
        },
        p: match kind {
            ErasureNshot => Axis::List(vec![0.2, 0.3]),
            _ => range(0.0, 0.5, 0.025),
        },
        epsilon,
        d: match kind {
            ErasureOneshot => Axis::List(vec![2, 3]),
            _ => Axis::List(vec![2]),
        },
        n: match kind {
            ErasureNshot => Axis::Range { start: 1, stop: 30, step: 1 },
            _ => Axis::Range { start: 1, stop: 10, step: 1 },
        },
        ell: Axis::List(vec![0, 1, 2]),
        copies: Axis::List(vec![1, 2]),
    }
}

impl Grid {
    fn check(&self, kind: ExperimentKind) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for &axis in kind.axes() {
            let empty = match axis {
                AxisName::F => self.f.is_empty(),
                AxisName::P => self.p.is_empty(),
                AxisName::Epsilon => self.epsilon.is_empty(),
                AxisName::D => self.d.is_empty(),
                AxisName::N => self.n.is_empty(),
                AxisName::Ell => self.ell.is_empty(),
                AxisName::Copies => self.copies.is_empty(),
            };
            if empty {
                return bad(format!("axis {} is empty", axis.as_str()));
            }
        }
        if let Some(x) = self.f.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return bad(format!("F = {x} outside [0, 1]"));
        }
        if let Some(x) = self.p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return bad(format!("p = {x} outside [0, 1]"));
        }
        if let Some(x) = self.epsilon.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return bad(format!("epsilon = {x} outside [0, 1)"));
        }
        if let Some(x) = self.d.iter().find(|&&x| !(2..=4).contains(&x)) {
            return bad(format!("d = {x} outside 2..=4"));
        }
        if self.n.contains(&0) {
            return bad("n must be at least 1".into());
        }
        if let Some(x) = self.ell.iter().find(|&&x| x > MAX_ELL) {
            return bad(format!("ell = {x} exceeds {MAX_ELL}"));
        }
        if let Some(x) = self.copies.iter().find(|&&x| !(1..=2).contains(&x)) {
            return bad(format!("copies = {x} outside 1..=2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_ranges() {
        let cfg = ExperimentConfig::from_toml(
            r#"
experiment = "iso-oneshot"
tol = 1e-8
[grid]
F = { start = 0.5, stop = 1.0, step = 0.1 }
epsilon = [0.05]
"#,
        )
        .unwrap();
        let g = cfg.grid().unwrap();
        assert_eq!(g.f, vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        assert_eq!(g.epsilon, vec![0.05]);
        assert_eq!(g.d, vec![2]);
        assert_eq!(cfg.execution, Execution::Parallel);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"iso-oneshot\"\n[grid]\np = [0.1]").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"iso-oneshot\"\n[grid]\nF = []").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"erasure-nshot\"\n[grid]\nell = [9]").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"iso-oneshot\"\ncolour = 1").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"iso-oneshot\"\ntol = 0.5").is_err());
    }

    #[test]
    fn integer_ranges() {
        let a: Axis<u32> = Axis::Range { start: 1, stop: 30, step: 1 };
        assert_eq!(a.values().unwrap().len(), 30);
        let e: Axis<f64> = Axis::Range { start: 0.0, stop: 0.5, step: 0.025 };
        let v = e.values().unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(v[4], 0.1);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
