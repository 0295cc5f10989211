//! `unext`: bound calculators and experiment runner.
//!
//! Exit codes: 0 when a bound was produced (Finite or Zero), 2 when the
//! bound's hypothesis fails (NoBound), 1 on runtime errors, 64 on usage errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use unext::channel::{self, DEFAULT_TOL};
use unext::experiment::{read_csv, run_experiment, ExperimentConfig, ExperimentKind};
use unext::quantum::{self, MatrixJson};
use unext::report::{BoundReport, Regime};
use unext::state;
use unext::{BipartiteState, ChannelChoi, Execution};

const EXIT_NO_BOUND: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "unext", version, about = "Unextendibility bounds on distillable key and private capacity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one bound or measure and print it as JSON
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Run a parameter sweep and write CSV plus a JSON manifest
    Run(RunArgs),
    /// Re-validate every row of an experiment CSV
    Check {
        csv: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum BoundCommand {
    /// One-shot key bound of a state
    StateOneshot {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = OneshotMethod::SmoothMin)]
        method: OneshotMethod,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// n-shot key bound of a state from the max-unextendible entanglement
    StateNshot {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// One-shot forward-assisted private-capacity bound of a channel
    ChannelOneshot {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = OneshotMethod::SmoothMin)]
        method: OneshotMethod,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// n-shot private-capacity bound from the α-geometric measure, α = 1 + 2^-ell
    ChannelNshot {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        ell: u32,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// A single unextendible-entanglement measure
    Measure {
        #[arg(long, value_enum)]
        kind: MeasureKind,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        ell: u32,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OneshotMethod {
    SmoothMin,
    RelaxedAlg,
    RelaxedTd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    /// Smooth-min measure of a state
    SmoothMin,
    /// Max measure of a state
    Emax,
    /// Smooth-min measure of a channel
    ChannelSmoothMin,
    /// α-geometric measure of a channel
    ChannelGeo,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Family {
    /// Isotropic state (--F, --d)
    Iso,
    /// Maximally entangled state (--d)
    Maxent,
    /// Erased state (--p, --d)
    Erased,
    /// Erasure channel (--p, --d)
    Erasure,
    /// Identity channel (--d)
    Identity,
    /// State or Choi operator read from --file
    File,
}

#[derive(Args)]
struct Target {
    #[arg(long, value_enum)]
    family: Family,
    /// Isotropic fidelity parameter
    #[arg(long = "F")]
    fid: Option<f64>,
    /// Local dimension
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Erasure probability
    #[arg(long)]
    p: Option<f64>,
    /// JSON matrix file with {"dims", "re", "im"}; a Choi operator has dims [d_in, d_out]
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration
    #[arg(long, conflicts_with = "experiment")]
    config: Option<PathBuf>,
    /// Run a built-in experiment with its default grid
    #[arg(long)]
    experiment: Option<String>,
    /// Output directory (overrides the config and UNEXT_OUTPUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solve grid points one at a time
    #[arg(long)]
    sequential: bool,
}

enum CliError {
    /// Flags are syntactically valid but inconsistent; exits 64.
    Usage(String),
    Runtime(String),
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Runtime(s)
    }
}

/// Out-of-domain parameters and bad configurations are reported as usage
/// errors.
impl From<unext::Error> for CliError {
    fn from(e: unext::Error) -> Self {
        match e {
            unext::Error::Domain(_) | unext::Error::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    match v {
        Some(x) => Ok(x),
        None => usage(format!("missing --{flag}")),
    }
}

fn read_matrix(path: &PathBuf) -> CliResult<MatrixJson> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn build_state(t: &Target) -> CliResult<BipartiteState> {
    let r = match t.family {
        Family::Iso => quantum::isotropic(need(t.fid, "F")?, t.d),
        Family::Maxent => quantum::max_entangled(t.d),
        Family::Erased => quantum::erased_state(need(t.p, "p")?, t.d),
        Family::File => BipartiteState::from_json(&read_matrix(&need(t.file.clone(), "file")?)?),
        Family::Erasure | Family::Identity => return usage("this command takes a state family"),
    };
    Ok(r?)
}

fn build_channel(t: &Target) -> CliResult<ChannelChoi> {
    let r = match t.family {
        Family::Erasure => quantum::erasure_channel(need(t.p, "p")?, t.d),
        Family::Identity => quantum::identity_channel(t.d),
        Family::File => ChannelChoi::from_json(&read_matrix(&need(t.file.clone(), "file")?)?),
        Family::Iso | Family::Maxent | Family::Erased => return usage("this command takes a channel family"),
    };
    Ok(r?)
}

fn state_report(rho: &BipartiteState, eps: f64, method: OneshotMethod, tol: f64) -> unext::Result<BoundReport> {
    match method {
        OneshotMethod::SmoothMin => state::key_bound_oneshot(rho, eps, tol),
        OneshotMethod::RelaxedAlg => state::key_bound_relaxed_alg(rho, eps, tol),
        OneshotMethod::RelaxedTd => state::key_bound_relaxed_td(rho, eps, tol),
    }
}

/// Returns the JSON to print and whether the bound's hypothesis failed.
fn bound(which: BoundCommand) -> CliResult<(Value, bool)> {
    let out = match which {
        BoundCommand::StateOneshot { target, eps, method, tol } => {
            let r = state_report(&build_state(&target)?, eps, method, tol)?;
            (json!(r), r.regime == Regime::NoBound)
        }
        BoundCommand::StateNshot { target, eps, n, tol } => {
            let r = state::key_bound_nshot_max(&build_state(&target)?, eps, n, tol)?;
            (json!(r), r.regime == Regime::NoBound)
        }
        BoundCommand::ChannelOneshot { target, eps, method, tol } => {
            let ch = build_channel(&target)?;
            let r = match method {
                OneshotMethod::SmoothMin => channel::private_capacity_bound_oneshot(&ch, eps, tol)?,
                OneshotMethod::RelaxedAlg => channel::private_capacity_bound_relaxed(&ch, eps, tol)?.alg,
                OneshotMethod::RelaxedTd => channel::private_capacity_bound_relaxed(&ch, eps, tol)?.td,
            };
            (json!(r), r.regime() == Regime::NoBound)
        }
        BoundCommand::ChannelNshot { target, eps, n, ell, tol } => {
            let ch = build_channel(&target)?;
            let r = channel::private_capacity_bound_nshot(&ch, eps, n, ell, tol)?;
            (json!(r), r.regime() == Regime::NoBound)
        }
        BoundCommand::Measure { kind, target, eps, ell, tol } => {
            let (name, value) = match kind {
                MeasureKind::SmoothMin => {
                    ("smooth-min", state::smooth_min_unext_ent(&build_state(&target)?, eps, tol)?)
                }
                MeasureKind::Emax => ("emax", state::max_unext_ent(&build_state(&target)?, tol)?),
                MeasureKind::ChannelSmoothMin => (
                    "channel-smooth-min",
                    channel::smooth_min_unext_ent_channel(&build_channel(&target)?, eps, tol)?,
                ),
                MeasureKind::ChannelGeo => (
                    "channel-geo",
                    channel::geo_unext_ent_channel(&build_channel(&target)?, ell, tol)?,
                ),
            };
            let mut v = json!({ "kind": name, "E": value, "tol": tol });
            match kind {
                MeasureKind::SmoothMin | MeasureKind::ChannelSmoothMin => v["epsilon"] = json!(eps),
                MeasureKind::ChannelGeo => {
                    v["ell"] = json!(ell);
                    v["alpha"] = json!(unext::closed_form::alpha_of_ell(ell));
                }
                MeasureKind::Emax => {}
            }
            (v, false)
        }
    };
    Ok(out)
}

fn run(args: RunArgs) -> CliResult<Value> {
    let mut cfg = match (&args.config, &args.experiment) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::from_toml(&text)?
        }
        (None, Some(name)) => ExperimentConfig::new(name.parse::<ExperimentKind>()?),
        (None, None) => return usage("one of --config or --experiment is required"),
    };
    if let Some(out) = args.out {
        cfg.output_dir = Some(out);
    }
    if args.sequential {
        cfg.execution = Execution::Sequential;
    }
    let out = run_experiment(&cfg)?;
    Ok(json!({
        "experiment": cfg.experiment.as_str(),
        "csv": out.csv_path,
        "manifest": out.manifest_path,
        "rows": out.rows.len(),
        "wall_clock_seconds": out.wall_clock_seconds,
    }))
}

fn check(csv: PathBuf, tol: f64) -> CliResult<Value> {
    let rows = read_csv(&csv)?;
    for (i, r) in rows.iter().enumerate() {
        r.validate(tol).map_err(|e| format!("row {}: {e}", i + 1))?;
    }
    Ok(json!({ "csv": csv, "rows": rows.len(), "valid": true }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Bound { which } => bound(which),
        Command::Run(args) => run(args).map(|v| (v, false)),
        Command::Check { csv, tol } => check(csv, tol).map(|v| (v, false)),
    };
    match result {
        Ok((value, no_bound)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
            if no_bound {
                ExitCode::from(EXIT_NO_BOUND)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
