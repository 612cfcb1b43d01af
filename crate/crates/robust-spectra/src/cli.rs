//! Command-line front end.
//!
//! Subcommands: `estimate` (CSV in → robust covariance CSV + diagnostics
//! JSON), `bounds` (γ/η/B over a t-grid → CSV), `experiment` (config JSON →
//! trial report JSON), `projector-lab` (randomized projector property suite →
//! JSON), `net` (emit a δ-net CSV). Exit codes: 0 success, 1 parameter error,
//! 2 numerical failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimator::{robust_covariance_with, CenteringMode, LambdaMode, RobustOptions};
use crate::harness::{init_threads, run_experiment, ExperimentConfig};
use crate::matrix::Sample;
use crate::net::{build_delta_net, check_covering};
use crate::projector_lab::run_suite;
use crate::spectral::{bound_b, eta, gamma, BoundParams};

#[derive(Parser, Debug)]
#[command(
    name = "robust-spectra",
    about = "Robust covariance eigenvalue estimation and spectral cut-off PCA",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (overrides ROBUST_SPECTRA_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate a robust covariance matrix from a headerless CSV sample.
    Estimate(EstimateArgs),
    /// Evaluate the deviation functions gamma/eta/B over a t-grid.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Run the randomized projector-geometry property suite.
    ProjectorLab(ProjectorLabArgs),
    /// Build a delta-net of the unit sphere and emit it as CSV.
    Net(NetArgs),
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Input CSV: n rows, d numeric columns, no header.
    #[arg(long)]
    input: PathBuf,
    /// Output CSV for the PSD estimate (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Diagnostics JSON path (stderr when omitted).
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// paired | centered
    #[arg(long, default_value = "paired")]
    mode: String,
    /// practical | grid
    #[arg(long = "lambda-mode", default_value = "grid")]
    lambda_mode: String,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Sample size (accepts scientific notation, e.g. 1e6).
    #[arg(long)]
    n: f64,
    #[arg(long)]
    kappa: f64,
    /// Plug-in for Tr(Sigma).
    #[arg(long)]
    trace: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Plug-in for the Frobenius norm of Sigma (defaults to the trace).
    #[arg(long = "hs-norm")]
    hs_norm: Option<f64>,
    /// Threshold sigma (defaults to half the allowed cap).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Evaluation points; repeatable.
    #[arg(long = "t")]
    t: Vec<f64>,
    /// Uniform grid alternative to --t.
    #[arg(long = "t-min")]
    t_min: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long = "t-steps", default_value_t = 50)]
    t_steps: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON config mirroring the experiment configuration schema.
    #[arg(long)]
    config: PathBuf,
    /// Override the trial count from the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Report path; falls back to the config's output_path, then stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProjectorLabArgs {
    /// Comma-separated dimensions.
    #[arg(long, default_value = "2,3,4,5,6,7,8")]
    dims: String,
    #[arg(long, default_value_t = 500)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NetArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probes for the covering check (0 skips the check).
    #[arg(long, default_value_t = 100_000)]
    probes: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Entry point shared by the binary and the integration tests.
pub fn cli_main<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with exit
            // code 0; everything else is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads(cli.threads) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::ProjectorLab(args) => cmd_projector_lab(args),
        Command::Net(args) => cmd_net(args),
    }
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let sample = Sample::read_csv(&args.input)?;
    let mut opts = RobustOptions::new(args.delta, args.eps, args.seed);
    opts.mode = match args.mode.as_str() {
        "paired" => CenteringMode::Paired,
        "centered" => CenteringMode::Centered,
        other => {
            return Err(Error::Parameter(format!(
                "unknown mode {other:?}, expected paired or centered"
            )))
        }
    };
    opts.lambda_mode = match args.lambda_mode.as_str() {
        "practical" => LambdaMode::Practical,
        "grid" => LambdaMode::Grid,
        other => {
            return Err(Error::Parameter(format!(
                "unknown lambda mode {other:?}, expected practical or grid"
            )))
        }
    };
    let (matrix, diagnostics) = robust_covariance_with(&sample, &opts)?;
    write_or_print(&args.output, &matrix.to_csv())?;
    let diag_json = serde_json::to_string_pretty(&diagnostics)?;
    match &args.diagnostics {
        Some(p) => std::fs::write(p, diag_json)?,
        None => eprintln!("{diag_json}"),
    }
    Ok(())
}

fn fmt_maybe_inf(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "inf".to_string()
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    if !(args.n >= 1.0) || !args.n.is_finite() {
        return Err(Error::Parameter(format!("invalid n: {}", args.n)));
    }
    let n = args.n as usize;
    let hs = args.hs_norm.unwrap_or(args.trace);
    let params = match args.sigma {
        Some(s) => BoundParams::new(n, args.eps, args.kappa, args.trace, hs, s, args.delta)?,
        None => BoundParams::with_default_sigma(n, args.eps, args.kappa, args.trace, hs, args.delta)?,
    };

    let mut grid = args.t.clone();
    if let (Some(lo), Some(hi)) = (args.t_min, args.t_max) {
        if !(hi > lo && lo > 0.0) || args.t_steps < 2 {
            return Err(Error::Parameter("need 0 < t-min < t-max and t-steps >= 2".into()));
        }
        let step = (hi - lo) / (args.t_steps as f64 - 1.0);
        grid.extend((0..args.t_steps).map(|k| lo + step * k as f64));
    }
    if grid.is_empty() {
        return Err(Error::Parameter("no evaluation points: pass --t or --t-min/--t-max".into()));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let mut out = String::from("t,gamma,eta,b\n");
    for &t in &grid {
        let g = gamma(t, &params)?;
        let e = eta(t, &params);
        let b = bound_b(t, &params);
        out.push_str(&format!(
            "{t},{},{},{}\n",
            fmt_maybe_inf(g),
            fmt_maybe_inf(e),
            fmt_maybe_inf(b)
        ));
    }
    write_or_print(&args.output, &out)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(t) = args.trials {
        config.trials = t;
        config.validate()?;
    }
    let report = run_experiment(&config)?;
    let json = report.to_json()?;
    let out = args
        .output
        .clone()
        .or_else(|| config.output_path.as_ref().map(PathBuf::from));
    write_or_print(&out, &(json + "\n"))
}

fn cmd_projector_lab(args: ProjectorLabArgs) -> Result<()> {
    let dims: Vec<usize> = args
        .dims
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("bad dimension {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if args.pairs < 1 {
        return Err(Error::Parameter("pairs must be at least 1".into()));
    }
    let report = run_suite(&dims, args.pairs, args.seed)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_or_print(&args.output, &(json + "\n"))
}

fn cmd_net(args: NetArgs) -> Result<()> {
    let net = build_delta_net(args.d, args.delta, args.seed)?;
    if args.probes > 0 {
        let (worst, ok) = check_covering(&net, args.probes, args.seed.wrapping_add(1))?;
        eprintln!(
            "net: {} points, worst probe distance {worst:.6}, covering {}",
            net.len(),
            if ok { "ok" } else { "FAILED" }
        );
    }
    write_or_print(&args.output, &net.to_csv())
}
