//! Command-line front end: `simulate`, `bounds`, `experiment`, `ci`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation error,
//! 4 infeasible confidence interval.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{applicable_bounds, BoundReport};
use crate::chaos::LambdaHat;
use crate::config::RunConfig;
use crate::error::Error;
use crate::experiments::{
    preset, run_bound_vs_empirical_with, run_confidence_interval, run_rate_sweep, Comparison,
    Family, Mode, RateSweep, Scenario, PRESET_NAMES,
};
use crate::simulator::{simulate, SimConfig};
use crate::stats::CiOutcome;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

const DEFAULT_EPS_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Parser)]
#[command(
    name = "hawkes-clt",
    version,
    about = "Gaussian approximation of Hawkes innovations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Number of replications.
    #[arg(long, value_name = "M")]
    pub reps: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long = "burn-in", value_name = "B")]
    pub burn_in: Option<f64>,
    /// rplus (empty history) or stationary (burn-in).
    #[arg(long)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one event stream and write it to DIR/events.txt.
    Simulate(Common),
    /// Evaluate every applicable bound for the configured process and u.
    Bounds(Common),
    /// Run a preset (see `--help`), `config`, `sweep_nonlinear` or `sweep_linear`.
    #[command(
        after_help = "Presets: poisson, linear, low_excitation, box_stationary, nonlinear, poisson_ci"
    )]
    Experiment {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian confidence interval from the smallest applicable bound.
    Ci {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: Option<f64>,
    },
}

/// Failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(e: impl ToString) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: EXIT_SIMULATION,
            message: format!("{}: {e}", path.display()),
        }
    }
}

/// Configuration errors map to 2, everything raised while simulating to 3.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_)
            | Error::Stability(_)
            | Error::Domain(_)
            | Error::MissingL2
            | Error::SupportOutsideWindow { .. } => EXIT_CONFIG,
            _ => EXIT_SIMULATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load(common: &Common) -> CliResult<RunConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config PATH is required"))?;
    let mut cfg = RunConfig::from_path(path)?;
    apply_overrides(&mut cfg, common)?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut RunConfig, common: &Common) -> CliResult<()> {
    if let Some(seed) = common.seed {
        cfg.sim.seed = seed;
    }
    if let Some(reps) = common.reps {
        cfg.sim.reps = reps;
    }
    if let Some(mode) = common.mode {
        cfg.sim.mode = mode;
    }
    if let Some(b) = common.burn_in {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(CliError::config(format!("--burn-in must be >= 0, got {b}")));
        }
        cfg.sim.burn_in = Some(b);
    }
    cfg.validate()?;
    Ok(())
}

fn out_dir(common: &Common, cfg: Option<&RunConfig>) -> CliResult<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| {
            cfg.and_then(|c| c.experiment.out_dir.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

/// `# hawkes-clt VERSION config=HASH seed=SEED`
pub fn provenance_line(cfg: &RunConfig) -> String {
    format!(
        "# hawkes-clt {VERSION} config={} seed={}",
        cfg.hash(),
        cfg.sim.seed
    )
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn bounds_csv(cfg: &RunConfig, reports: &[&BoundReport]) -> String {
    let mut out = provenance_line(cfg);
    out.push_str("\nbound,term_label,value\n");
    for r in reports {
        for (label, v) in &r.terms {
            let _ = writeln!(out, "{},{label},{v}", r.name);
        }
        let _ = writeln!(out, "{},total,{}", r.name, r.total);
        if let Some(se) = r.mc_se {
            let _ = writeln!(out, "{},mc_standard_error,{se}", r.name);
        }
    }
    out
}

/// Parses arguments from the process and runs; returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(common) => cmd_simulate(&common),
        Command::Bounds(common) => cmd_bounds(&common),
        Command::Experiment { name, common } => cmd_experiment(&name, &common),
        Command::Ci { common, beta } => cmd_ci(&common, beta),
    }
}

pub fn cmd_simulate(common: &Common) -> CliResult<()> {
    let cfg = load(common)?;
    let params = cfg.params()?;
    let sim = SimConfig::new(params, cfg.horizon()?, cfg.burn_in()?, cfg.sim.seed)?;
    let (stream, _) = simulate(&sim)?;
    let dir = out_dir(common, Some(&cfg))?;
    let path = dir.join("events.txt");
    write_file(&path, &stream.to_text(&[provenance_line(&cfg)]))?;
    println!(
        "wrote {} events on (0, {}] to {}",
        stream.len(),
        sim.horizon,
        path.display()
    );
    Ok(())
}

pub fn cmd_bounds(common: &Common) -> CliResult<()> {
    let cfg = load(common)?;
    let params = cfg.params()?;
    let u = cfg.test_function()?;
    let (reports, skipped) = applicable_bounds(&params, &u)?;
    for r in &reports {
        print!("{}", r.table());
    }
    for s in &skipped {
        println!("{:<24} not applicable: {}", s.name, s.reason);
    }
    if cfg.sim.mode == Mode::Rplus && reports.iter().any(|r| !r.applicability.rplus) {
        eprintln!(
            "warning: linear bounds assume the stationary process; the configured mode is rplus"
        );
    }
    let dir = out_dir(common, Some(&cfg))?;
    write_file(
        &dir.join("bounds.csv"),
        &bounds_csv(&cfg, &reports.iter().collect::<Vec<_>>()),
    )?;
    Ok(())
}

fn scenario_for(name: &str, common: &Common) -> CliResult<(Scenario, RunConfig)> {
    let mut cfg = if name == "config" {
        load(common)?
    } else {
        let s = preset(name).map_err(CliError::config)?;
        let mut cfg = RunConfig::from_scenario(&s, 1, 10_000);
        if let Some(path) = &common.config {
            // experiment settings (quadrature, out_dir, ...) may still come from a file
            let file = RunConfig::from_path(path)?;
            cfg.experiment = file.experiment;
        }
        apply_overrides(&mut cfg, common)?;
        cfg
    };
    cfg.experiment.name = Some(name.to_string());
    let scenario = cfg.scenario(name)?;
    Ok((scenario, cfg))
}

pub fn cmd_experiment(name: &str, common: &Common) -> CliResult<()> {
    match name {
        "sweep_nonlinear" | "sweep_linear" => return cmd_sweep(name, common),
        "config" => {}
        other if PRESET_NAMES.contains(&other) => {}
        other => {
            return Err(CliError::config(format!(
                "unknown experiment {other:?}; known: {}, config, sweep_nonlinear, sweep_linear",
                PRESET_NAMES.join(", ")
            )))
        }
    }
    let (scenario, cfg) = scenario_for(name, common)?;
    let hat = match cfg.experiment.lambda_hat {
        Some(v) if cfg.experiment.lambda_hat_override => {
            Some(LambdaHat::unchecked(&scenario.params, v)?)
        }
        Some(v) => Some(LambdaHat::checked(&scenario.params, v)?),
        None => None,
    };
    let c = run_bound_vs_empirical_with(
        &scenario,
        cfg.sim.reps,
        cfg.sim.seed,
        &cfg.quadrature(),
        hat,
    )?;
    print!("{}", comparison_table(&c));
    let dir = out_dir(common, Some(&cfg))?;
    write_file(
        &dir.join(format!("{name}_samples.csv")),
        &samples_csv(&cfg, &c),
    )?;
    let mut reports: Vec<&BoundReport> = c.bounds.iter().collect();
    reports.extend(c.resolvent_bound.as_ref());
    write_file(
        &dir.join(format!("{name}_bounds.csv")),
        &bounds_csv(&cfg, &reports),
    )?;
    write_file(
        &dir.join(format!("{name}_summary.csv")),
        &summary_csv(&cfg, &c),
    )?;
    write_file(
        &dir.join(format!("{name}_config.toml")),
        &cfg.to_toml_string(),
    )?;
    Ok(())
}

fn comparison_table(c: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} ({} mode, T = {}, burn-in = {:.3}, M = {}, seed = {})",
        c.scenario, c.mode, c.horizon, c.burn_in, c.reps, c.seed
    );
    for b in &c.bounds {
        let _ = writeln!(out, "  bound {:<24} {:>12.6}", b.name, b.total);
    }
    if let Some(r) = &c.resolvent_bound {
        let _ = writeln!(
            out,
            "  bound {:<24} {:>12.6} (Monte Carlo SE {:.2e})",
            r.name,
            r.total,
            r.mc_se.unwrap_or(0.0)
        );
    }
    for (label, s, bound) in [
        ("delta", &c.delta, c.min_bound_delta),
        ("delta_a", &c.delta_a, c.min_bound_delta_a),
    ] {
        let _ = writeln!(
            out,
            "  {label:<8} W1 = {:.5} (SE {:.5})  KS = {:.5}  mean = {:+.5}  var = {:.5}  min bound = {:.5}  {}",
            s.w1,
            s.w1_se,
            s.ks,
            s.mean,
            s.variance,
            bound,
            if s.respects(bound) { "PASS" } else { "FAIL" }
        );
    }
    if c.flagged > 0 {
        let _ = writeln!(
            out,
            "  {} replications exceeded the quadrature tolerance",
            c.flagged
        );
    }
    out
}

fn samples_csv(cfg: &RunConfig, c: &Comparison) -> String {
    let mut out = provenance_line(cfg);
    out.push_str("\nreplication,delta,event_sum,compensator,quad_err\n");
    for r in &c.records {
        let d = &r.delta;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.replication, d.value, d.event_sum, d.compensator, d.quad_err
        );
    }
    out
}

fn summary_csv(cfg: &RunConfig, c: &Comparison) -> String {
    let mut out = provenance_line(cfg);
    out.push_str("\nstatistic,w1,w1_se,ks,mean,mean_se,variance,min_bound,pass\n");
    for (label, s, bound) in [
        ("delta", &c.delta, c.min_bound_delta),
        ("delta_a", &c.delta_a, c.min_bound_delta_a),
    ] {
        let _ = writeln!(
            out,
            "{label},{},{},{},{},{},{},{},{}",
            s.w1,
            s.w1_se,
            s.ks,
            s.mean,
            s.mean_se,
            s.variance,
            bound,
            s.respects(bound)
        );
    }
    out
}

fn cmd_sweep(name: &str, common: &Common) -> CliResult<()> {
    let file = match &common.config {
        Some(path) => Some(RunConfig::from_path(path)?),
        None => None,
    };
    let grid = file
        .as_ref()
        .and_then(|c| c.experiment.eps_grid.clone())
        .unwrap_or_else(|| DEFAULT_EPS_GRID.to_vec());
    let (family, nu) = match (name, file.as_ref().map(|c| &c.link)) {
        (_, Some(crate::config::LinkSpec::Linear { nu })) => (name, *nu),
        (_, Some(_)) => return Err(CliError::config("sweeps use a linear link")),
        (_, None) => (name, 1.0),
    };
    let family = if family == "sweep_nonlinear" {
        Family::Nonlinear { nu, alpha: 1.0 }
    } else {
        Family::Linear { nu }
    };
    let reps = common
        .reps
        .or(file.as_ref().map(|c| c.sim.reps))
        .unwrap_or(10_000);
    let seed = common
        .seed
        .or(file.as_ref().map(|c| c.sim.seed))
        .unwrap_or(1);
    let sweep = run_rate_sweep(family, &grid, reps, seed)?;
    print!("{}", sweep_table(&sweep));
    // provenance hashes the configuration of the first grid point
    let mut cfg = RunConfig::from_scenario(&family.scenario(grid[0])?, seed, reps);
    cfg.experiment.name = Some(name.to_string());
    cfg.experiment.eps_grid = Some(grid);
    let dir = out_dir(common, file.as_ref())?;
    write_file(&dir.join(format!("{name}.csv")), &sweep_csv(&cfg, &sweep))?;
    Ok(())
}

fn sweep_table(s: &RateSweep) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} sweep", s.family.name());
    for r in &s.rows {
        let bounds: Vec<String> = r
            .bounds
            .iter()
            .map(|b| format!("{}={:.5}", b.name, b.total))
            .collect();
        let _ = writeln!(
            out,
            "  eps = {:<8} W1 = {:.5} (SE {:.5})  {}",
            r.eps,
            r.delta.w1,
            r.delta.w1_se,
            bounds.join("  ")
        );
    }
    for (name, slope) in &s.slopes {
        let _ = writeln!(out, "  log-log slope of {name}: {slope:.4}");
    }
    out
}

fn sweep_csv(cfg: &RunConfig, s: &RateSweep) -> String {
    let mut out = provenance_line(cfg);
    out.push('\n');
    let first = &s.rows[0];
    let mut header = vec![
        "eps", "phi0", "alpha", "mu", "ell", "reps", "horizon", "burn_in",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    header.extend(first.bounds.iter().map(|b| b.name.to_string()));
    header.extend(["w1", "w1_se", "w1_approx", "w1_approx_se"].map(String::from));
    header.extend(first.limits.iter().map(|l| l.0.to_string()));
    let _ = writeln!(out, "{}", header.join(","));
    for r in &s.rows {
        let mut cells: Vec<String> = [
            r.eps,
            r.phi0,
            r.alpha,
            r.mu,
            r.ell,
            r.reps as f64,
            r.horizon,
            r.burn_in,
        ]
        .iter()
        .map(f64::to_string)
        .collect();
        cells.extend(r.bounds.iter().map(|b| b.total.to_string()));
        cells.extend(
            [r.delta.w1, r.delta.w1_se, r.delta_a.w1, r.delta_a.w1_se].map(|v| v.to_string()),
        );
        cells.extend(r.limits.iter().map(|l| l.1.to_string()));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn cmd_ci(common: &Common, beta: Option<f64>) -> CliResult<()> {
    let mut cfg = load(common)?;
    let beta = beta
        .or(cfg.experiment.beta)
        .ok_or_else(|| CliError::config("--beta is required (or experiment.beta in the config)"))?;
    if !(beta > 0.0 && beta < 0.5) {
        return Err(CliError::config(format!(
            "beta must lie in (0, 1/2), got {beta}"
        )));
    }
    cfg.experiment.beta = Some(beta);
    let scenario = cfg.scenario(cfg.experiment.name.as_deref().unwrap_or("config"))?;
    // coverage is simulated only on request
    let reps = common.reps.unwrap_or(0);
    let report = run_confidence_interval(&scenario, beta, reps, cfg.sim.seed)?;
    let dir = out_dir(common, Some(&cfg))?;
    let mut csv = provenance_line(&cfg);
    csv.push_str("\nbeta,bound_name,bound,feasible,lower,upper,coverage_floor,min_beta,coverage,coverage_se,reps\n");
    match report.outcome {
        CiOutcome::Feasible {
            lower,
            upper,
            coverage_floor,
        } => {
            println!("bound {} = {:.6}", report.bound_name, report.bound);
            println!("interval ({lower:.6}, {upper:.6}]  coverage >= {coverage_floor:.4}");
            let (cov, se) = report.coverage.unwrap_or((f64::NAN, f64::NAN));
            if report.coverage.is_some() {
                println!("empirical coverage {cov:.4} (SE {se:.4}, M = {reps})");
            }
            let _ = writeln!(
                csv,
                "{beta},{},{},true,{lower},{upper},{coverage_floor},,{cov},{se},{reps}",
                report.bound_name, report.bound
            );
            write_file(&dir.join("ci.csv"), &csv)?;
            Ok(())
        }
        CiOutcome::Infeasible { min_beta } => {
            let _ = writeln!(
                csv,
                "{beta},{},{},false,,,,{min_beta},,,{reps}",
                report.bound_name, report.bound
            );
            write_file(&dir.join("ci.csv"), &csv)?;
            let hint = if min_beta < 0.5 {
                format!("the smallest feasible beta is {min_beta:.6}")
            } else {
                format!("no beta in (0, 1/2) works (would need {min_beta:.6})")
            };
            Err(CliError {
                code: EXIT_INFEASIBLE,
                message: format!(
                    "confidence interval infeasible: 2 sqrt(bound) = {:.6} exceeds beta / 2 = {:.6} for bound {} = {:.6}; {hint}",
                    2.0 * report.bound.sqrt(),
                    beta / 2.0,
                    report.bound_name,
                    report.bound
                ),
            })
        }
    }
}
