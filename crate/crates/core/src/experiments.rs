//! Replicated experiments: bound-versus-empirical comparisons, epsilon sweeps
//! and the Gaussian confidence interval.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    applicable_bounds, bound_general_resolvent, bound_linear, bound_linear_approx,
    bound_linear_spectral, bound_linear_spectral_approx, bound_nonlinear, bound_nonlinear_approx,
    BoundReport,
};
use crate::chaos::{
    approx_first_chaos, first_chaos_with_moments, InnovationSample, LambdaHat, QuadratureConfig,
};
use crate::error::{Error, Result};
use crate::kernels::{resolvent, DEFAULT_RESOLVENT_STEP};
use crate::model::{normalized_indicator, HawkesParams, Kernel, LinkFunction, TestFunction};
use crate::simulator::{default_burn_in, resolvent_horizon_for, simulate, SimConfig};
use crate::stats::{
    bootstrap_w1_se, confidence_interval, empirical_w1_to_normal, kolmogorov_to_normal, CiOutcome,
    SampleSet,
};

/// Bootstrap resamples behind every reported W1 standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Fixed allowance for quadrature and discretisation error in PASS decisions.
pub const QUADRATURE_BUDGET: f64 = 1e-3;

/// Simulation regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Empty history before time 0, no burn-in.
    Rplus,
    /// Burn-in approximating the stationary process.
    Stationary,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rplus" => Ok(Self::Rplus),
            "stationary" => Ok(Self::Stationary),
            other => Err(Error::Parameter(format!(
                "unknown mode {other:?} (expected rplus or stationary)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rplus => "rplus",
            Self::Stationary => "stationary",
        })
    }
}

/// A process, a test function and a simulation regime.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: HawkesParams,
    pub u: TestFunction,
    pub mode: Mode,
    /// Burn-in override for stationary mode.
    pub burn_in: Option<f64>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        params: HawkesParams,
        u: TestFunction,
        mode: Mode,
    ) -> Result<Self> {
        let (lo, _) = u.support();
        if lo < 0.0 {
            return Err(Error::Parameter(format!(
                "test function must live on t >= 0, starts at {lo}"
            )));
        }
        Ok(Self {
            name: name.into(),
            params,
            u,
            mode,
            burn_in: None,
        })
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Right end of the support of `u`.
    pub fn horizon(&self) -> f64 {
        self.u.support().1
    }

    pub fn effective_burn_in(&self) -> f64 {
        match self.mode {
            Mode::Rplus => 0.0,
            Mode::Stationary => self
                .burn_in
                .unwrap_or_else(|| default_burn_in(&self.params)),
        }
    }

    pub fn sim_config(&self, seed: u64) -> Result<SimConfig> {
        SimConfig::new(
            self.params.clone(),
            self.horizon(),
            self.effective_burn_in(),
            seed,
        )
    }

    /// Whether a bound holds in this scenario's regime.
    pub fn admits(&self, report: &BoundReport) -> bool {
        match self.mode {
            Mode::Rplus => report.applicability.rplus,
            Mode::Stationary => report.applicability.stationary,
        }
    }
}

fn exponential_params(
    nu: f64,
    rate: f64,
    mu: f64,
    link: Option<LinkFunction>,
) -> Result<HawkesParams> {
    HawkesParams::new(
        Kernel::exponential(rate, mu)?,
        link.unwrap_or(LinkFunction::linear(nu)?),
    )
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "poisson",
    "linear",
    "low_excitation",
    "box_stationary",
    "nonlinear",
    "poisson_ci",
];

/// Shipped scenarios.
///
/// * `poisson`: no excitation, `nu = 1`, `u = 1_(0,1]`.
/// * `linear`: `nu = 2`, exponential kernel with `mu = 0.5`, normalised
///   indicator on `(0, 50]`, stationary.
/// * `low_excitation` / `box_stationary`: `phi(0) = 1`, `alpha mu = 0.1` on
///   `(0, 100]` (exponential kernel, linear link, empty history) and
///   `alpha mu = 0.3` (box kernel, linear link, stationary).
/// * `nonlinear`: saturating-exponential link, `alpha mu = 0.3`, `(0, 50]`.
/// * `poisson_ci`: Poisson with `u = 1_(0,160000] / 400`, whose nonlinear bound is `0.0025`.
pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "poisson" => Scenario::new(
            name,
            exponential_params(1.0, 1.0, 0.0, None)?,
            TestFunction::indicator(0.0, 1.0, 1.0)?,
            Mode::Rplus,
        ),
        "linear" => {
            let (nu, mu, ell) = (2.0, 0.5, 50.0);
            let u = TestFunction::indicator(0.0, ell, ((1.0 - mu) / (nu * ell)).sqrt())?;
            Scenario::new(
                name,
                exponential_params(nu, 2.0, mu, None)?,
                u,
                Mode::Stationary,
            )
        }
        "low_excitation" => Scenario::new(
            name,
            exponential_params(1.0, 1.0, 0.1, None)?,
            normalized_indicator(1.0, 0.1, 100.0)?,
            Mode::Rplus,
        ),
        "box_stationary" => Scenario::new(
            name,
            HawkesParams::new(Kernel::boxcar(1.0, 0.3)?, LinkFunction::linear(1.0)?)?,
            normalized_indicator(1.0, 0.3, 100.0)?,
            Mode::Stationary,
        ),
        "nonlinear" => Scenario::new(
            name,
            exponential_params(1.0, 1.0, 0.3, Some(LinkFunction::saturating_exp(1.0, 3.0)?))?,
            normalized_indicator(1.0, 0.3, 50.0)?,
            Mode::Rplus,
        ),
        "poisson_ci" => Scenario::new(
            name,
            exponential_params(1.0, 1.0, 0.0, None)?,
            normalized_indicator(1.0, 0.0, 160_000.0)?,
            Mode::Rplus,
        ),
        other => Err(Error::Parameter(format!(
            "unknown experiment {other:?}; known: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Per-replication output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaRecord {
    pub replication: u64,
    pub delta: InnovationSample,
    pub delta_a: InnovationSample,
    /// `int u^2 lambda`.
    pub second: f64,
    /// `int |u|^3 lambda`.
    pub third: f64,
    pub events: usize,
}

/// Runs `reps` independent replications in parallel; the output is ordered
/// by replication index and does not depend on the thread count.
pub fn replicate(
    scenario: &Scenario,
    reps: usize,
    seed: u64,
    quad: &QuadratureConfig,
    lambda_hat: LambdaHat,
) -> Result<Vec<ReplicaRecord>> {
    let base = scenario.sim_config(seed)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let (stream, path) = simulate(&base.with_replication(rep))?;
            let (delta, m) = first_chaos_with_moments(&stream, &path, &scenario.u, quad)?;
            let delta_a = approx_first_chaos(&stream, &scenario.u, lambda_hat)?;
            Ok(ReplicaRecord {
                replication: rep,
                delta,
                delta_a,
                second: m.second,
                third: m.third,
                events: stream.len(),
            })
        })
        .collect()
}

/// Distance of one replicated statistic to `N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub w1: f64,
    pub w1_se: f64,
    pub ks: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
}

impl SampleSummary {
    pub fn of(values: Vec<f64>, seed: u64) -> Result<Self> {
        let s = SampleSet::new(values)?;
        Ok(Self {
            w1: empirical_w1_to_normal(&s),
            w1_se: bootstrap_w1_se(&s, BOOTSTRAP_RESAMPLES, seed),
            ks: kolmogorov_to_normal(&s),
            mean: s.mean(),
            mean_se: s.standard_error(),
            variance: s.variance(),
        })
    }

    /// `KS <= 2 sqrt(W1)`, which holds for every sample.
    pub fn ks_within_w1(&self) -> bool {
        self.ks <= 2.0 * self.w1.sqrt() + 1e-12
    }

    /// `w1 <= bound + 4 SE + budget`.
    pub fn respects(&self, bound: f64) -> bool {
        self.w1 <= bound + 4.0 * self.w1_se + QUADRATURE_BUDGET
    }
}

/// Empirical distances next to every applicable bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scenario: String,
    pub mode: Mode,
    pub reps: usize,
    pub seed: u64,
    pub horizon: f64,
    pub burn_in: f64,
    pub lambda_hat: f64,
    pub delta: SampleSummary,
    pub delta_a: SampleSummary,
    /// Closed-form bounds valid in the scenario's regime.
    pub bounds: Vec<BoundReport>,
    /// Bound with Monte Carlo expectation terms; reported, not used for PASS.
    pub resolvent_bound: Option<BoundReport>,
    pub min_bound_delta: f64,
    pub min_bound_delta_a: f64,
    /// Replications whose quadrature error estimate exceeded the tolerance.
    pub flagged: usize,
    pub pass: bool,
    pub records: Vec<ReplicaRecord>,
}

fn is_approx_bound(r: &BoundReport) -> bool {
    r.name.ends_with("_approx")
}

/// Resolvent table long enough for `u`, with at most a few hundred thousand nodes.
fn resolvent_for(scenario: &Scenario) -> Result<crate::kernels::ResolventTable> {
    let p = &scenario.params;
    let (lo, hi) = scenario.u.support();
    let horizon = resolvent_horizon_for(p, hi - lo);
    let max_nodes = match p.kernel() {
        Kernel::Exponential { .. } => 200_000.0,
        _ => 20_000.0,
    };
    let step = DEFAULT_RESOLVENT_STEP.max(horizon / max_nodes);
    resolvent(p.kernel(), p.alpha(), step, horizon)
}

/// Simulates `reps` replications and compares the empirical W1 distances of
/// `delta(u)` and `delta_a(u)` with the smallest applicable bound of each.
pub fn run_bound_vs_empirical(scenario: &Scenario, reps: usize, seed: u64) -> Result<Comparison> {
    run_bound_vs_empirical_with(scenario, reps, seed, &QuadratureConfig::default(), None)
}

pub fn run_bound_vs_empirical_with(
    scenario: &Scenario,
    reps: usize,
    seed: u64,
    quad: &QuadratureConfig,
    lambda_hat: Option<LambdaHat>,
) -> Result<Comparison> {
    let lambda_hat = lambda_hat.unwrap_or_else(|| LambdaHat::default_for(&scenario.params));
    let records = replicate(scenario, reps, seed, quad, lambda_hat)?;
    let delta = SampleSummary::of(records.iter().map(|r| r.delta.value).collect(), seed)?;
    let delta_a = SampleSummary::of(
        records.iter().map(|r| r.delta_a.value).collect(),
        seed ^ 0x5eed,
    )?;
    let (all, _) = applicable_bounds(&scenario.params, &scenario.u)?;
    let bounds: Vec<BoundReport> = all.into_iter().filter(|b| scenario.admits(b)).collect();
    let min_of = |approx: bool| {
        bounds
            .iter()
            .filter(|b| is_approx_bound(b) == approx)
            .map(|b| b.total)
            .fold(f64::INFINITY, f64::min)
    };
    let (min_bound_delta, min_bound_delta_a) = (min_of(false), min_of(true));
    let resolvent_bound = if reps >= crate::bounds::MIN_MC_SAMPLES {
        let psi = resolvent_for(scenario)?;
        let second: Vec<f64> = records.iter().map(|r| r.second).collect();
        let third: Vec<f64> = records.iter().map(|r| r.third).collect();
        Some(bound_general_resolvent(
            &scenario.params,
            &scenario.u,
            &psi,
            &second,
            &third,
        )?)
    } else {
        None
    };
    let pass = delta.respects(min_bound_delta) && delta_a.respects(min_bound_delta_a);
    Ok(Comparison {
        scenario: scenario.name.clone(),
        mode: scenario.mode,
        reps,
        seed,
        horizon: scenario.horizon(),
        burn_in: scenario.effective_burn_in(),
        lambda_hat: lambda_hat.value(),
        delta,
        delta_a,
        bounds,
        resolvent_bound,
        min_bound_delta,
        min_bound_delta_a,
        flagged: records.iter().filter(|r| r.delta.flagged).count(),
        pass,
        records,
    })
}

/// Epsilon-indexed families of processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `phi_eps(0) = nu`, Lipschitz constant `alpha`, `mu_eps = eps`,
    /// `I_eps = (0, 1/eps)`; exponential kernel with unit rate and linear
    /// link, so only `alpha = 1` is accepted. Empty history.
    Nonlinear { nu: f64, alpha: f64 },
    /// Linear, `nu_eps = nu`, `mu_eps = eps`, `I_eps = (0, 1/eps)`, kernel
    /// `eps * f` with `f` the unit-rate exponential density. Stationary.
    Linear { nu: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Nonlinear { .. } => "nonlinear",
            Self::Linear { .. } => "linear",
        }
    }

    /// Scenario at one grid point.
    pub fn scenario(&self, eps: f64) -> Result<Scenario> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 1), got {eps}"
            )));
        }
        let ell = 1.0 / eps;
        match *self {
            Self::Nonlinear { nu, alpha } => {
                // every built-in link has Lipschitz constant 1
                if alpha != 1.0 {
                    return Err(Error::Parameter(format!(
                        "built-in links have alpha = 1, got alpha = {alpha}"
                    )));
                }
                let params =
                    HawkesParams::new(Kernel::exponential(1.0, eps)?, LinkFunction::linear(nu)?)?;
                let am = params.stability();
                Scenario::new(
                    format!("nonlinear_eps{eps}"),
                    params,
                    normalized_indicator(nu, am, ell)?,
                    Mode::Rplus,
                )
            }
            Self::Linear { nu } => {
                let params =
                    HawkesParams::new(Kernel::exponential(1.0, eps)?, LinkFunction::linear(nu)?)?;
                let u = TestFunction::indicator(0.0, ell, ((1.0 - eps) / (nu * ell)).sqrt())?;
                Scenario::new(format!("linear_eps{eps}"), params, u, Mode::Stationary)
            }
        }
    }

    /// The bounds tracked along the family, in a fixed order.
    fn bounds(&self, s: &Scenario) -> Result<Vec<BoundReport>> {
        match self {
            Self::Nonlinear { .. } => Ok(vec![
                bound_nonlinear(&s.params, &s.u)?,
                bound_nonlinear_approx(&s.params, &s.u)?,
            ]),
            Self::Linear { nu } => {
                let k = s.params.kernel();
                Ok(vec![
                    bound_linear(*nu, k, &s.u)?,
                    bound_linear_approx(*nu, k, &s.u)?,
                    bound_linear_spectral(*nu, k, &s.u)?,
                    bound_linear_spectral_approx(*nu, k, &s.u)?,
                ])
            }
        }
    }

    /// Quantities that the limit theorem requires to converge, with their targets.
    fn limits(&self, s: &Scenario) -> Vec<(&'static str, f64, f64)> {
        let p = &s.params;
        let (phi0, am, mu) = (p.phi0(), p.stability(), p.mu());
        let u = &s.u;
        let u2 = u.l2_norm_sq();
        match self {
            Self::Nonlinear { .. } => vec![
                ("alpha_mu", am, 0.0),
                ("phi0_u2", phi0 * u2, 1.0),
                ("phi0_u3", phi0 * u.l3_norm_cube(), 0.0),
                (
                    "sqrt_phi0_alpha_mu_usq",
                    phi0.sqrt() * am * u.square().l2_norm(),
                    0.0,
                ),
                ("phi0_alpha_mu_u1", phi0 * am * u.l1_norm(), 0.0),
            ],
            Self::Linear { .. } => vec![
                ("mu", mu, 0.0),
                ("nu_u2", phi0 * u2, 1.0),
                ("nu_u3", phi0 * u.l3_norm_cube(), 0.0),
                ("nu_mu2_usq2", phi0 * mu * mu * u.square().l2_norm_sq(), 0.0),
                ("nu_mu_u1", phi0 * mu * u.l1_norm(), 0.0),
            ],
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSweepRow {
    pub eps: f64,
    pub phi0: f64,
    pub alpha: f64,
    pub mu: f64,
    pub ell: f64,
    pub bounds: Vec<BoundReport>,
    pub delta: SampleSummary,
    pub delta_a: SampleSummary,
    pub reps: usize,
    pub horizon: f64,
    pub burn_in: f64,
    /// `(label, value, limit)`.
    pub limits: Vec<(&'static str, f64, f64)>,
}

/// A full sweep with least-squares log-log slopes of each bound against `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSweep {
    pub family: Family,
    pub rows: Vec<RateSweepRow>,
    pub slopes: Vec<(&'static str, f64)>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Bounds only (no simulation) along a grid.
pub fn sweep_bounds(family: Family, eps_grid: &[f64]) -> Result<Vec<(f64, Vec<BoundReport>)>> {
    check_grid(eps_grid)?;
    eps_grid
        .iter()
        .map(|&eps| {
            let s = family.scenario(eps)?;
            Ok((eps, family.bounds(&s)?))
        })
        .collect()
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.len() < 2 {
        return Err(Error::Parameter(
            "epsilon grid needs at least two points".into(),
        ));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter(
            "epsilon grid must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Minimum replications per sweep row.
pub const MIN_SWEEP_REPS: usize = 1_000;

/// Simulates every grid point and fits the convergence rate of each bound.
pub fn run_rate_sweep(
    family: Family,
    eps_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<RateSweep> {
    check_grid(eps_grid)?;
    if reps < MIN_SWEEP_REPS {
        return Err(Error::InsufficientSamples {
            got: reps,
            need: MIN_SWEEP_REPS,
        });
    }
    let quad = QuadratureConfig::default();
    let mut rows = Vec::with_capacity(eps_grid.len());
    for (i, &eps) in eps_grid.iter().enumerate() {
        let s = family.scenario(eps)?;
        let row_seed = seed.wrapping_add(i as u64);
        let hat = LambdaHat::default_for(&s.params);
        let records = replicate(&s, reps, row_seed, &quad, hat)?;
        let p = &s.params;
        rows.push(RateSweepRow {
            eps,
            phi0: p.phi0(),
            alpha: p.alpha(),
            mu: p.mu(),
            ell: s.horizon() - s.u.support().0,
            bounds: family.bounds(&s)?,
            delta: SampleSummary::of(records.iter().map(|r| r.delta.value).collect(), row_seed)?,
            delta_a: SampleSummary::of(
                records.iter().map(|r| r.delta_a.value).collect(),
                row_seed ^ 0x5eed,
            )?,
            reps,
            horizon: s.horizon(),
            burn_in: s.effective_burn_in(),
            limits: family.limits(&s),
        });
    }
    let slopes = slopes_of(&rows);
    Ok(RateSweep {
        family,
        rows,
        slopes,
    })
}

fn slopes_of(rows: &[RateSweepRow]) -> Vec<(&'static str, f64)> {
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    rows[0]
        .bounds
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let y: Vec<f64> = rows.iter().map(|r| r.bounds[j].total).collect();
            (b.name, loglog_slope(&eps, &y))
        })
        .collect()
}

/// Outcome of the confidence-interval experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CiReport {
    pub scenario: String,
    pub beta: f64,
    /// Smallest applicable bound for `delta(u)`.
    pub bound: f64,
    pub bound_name: &'static str,
    pub outcome: CiOutcome,
    /// Empirical coverage of `(lower, upper]` and its standard error, when simulated.
    pub coverage: Option<(f64, f64)>,
    pub reps: usize,
}

/// Builds the interval from the scenario's smallest bound and, when feasible
/// and `reps > 0`, measures its coverage by simulation.
pub fn run_confidence_interval(
    scenario: &Scenario,
    beta: f64,
    reps: usize,
    seed: u64,
) -> Result<CiReport> {
    let (all, _) = applicable_bounds(&scenario.params, &scenario.u)?;
    let best = all
        .into_iter()
        .filter(|b| scenario.admits(b) && !is_approx_bound(b))
        .min_by(|a, b| a.total.total_cmp(&b.total))
        .ok_or_else(|| Error::Parameter("no applicable bound".into()))?;
    let outcome = confidence_interval(best.total, beta)?;
    let coverage = match outcome {
        CiOutcome::Feasible { lower, upper, .. } if reps > 0 => {
            let hat = LambdaHat::default_for(&scenario.params);
            let records = replicate(scenario, reps, seed, &QuadratureConfig::default(), hat)?;
            let hits = records
                .iter()
                .filter(|r| r.delta.value > lower && r.delta.value <= upper)
                .count() as f64;
            let p = hits / reps as f64;
            Some((p, (p * (1.0 - p) / reps as f64).sqrt()))
        }
        _ => None,
    };
    Ok(CiReport {
        scenario: scenario.name.clone(),
        beta,
        bound: best.total,
        bound_name: best.name,
        outcome,
        coverage,
        reps,
    })
}
