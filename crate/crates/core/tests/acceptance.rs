//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Run alone with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use hawkes_clt::bounds::{
    bound_linear, bound_linear_approx, bound_linear_spectral, bound_linear_spectral_approx,
    bound_nonlinear, compare_conditions,
};
use hawkes_clt::chaos::{LambdaHat, QuadratureConfig};
use hawkes_clt::experiments::{
    preset, replicate, run_bound_vs_empirical, run_confidence_interval, run_rate_sweep, Family,
    Mode, SampleSummary, Scenario,
};
use hawkes_clt::kernels::{default_resolvent_horizon, resolvent};
use hawkes_clt::model::normalized_indicator;
use hawkes_clt::simulator::{simulate, SimConfig};
use hawkes_clt::stats::{sqrt_two_over_pi, CiOutcome};
use hawkes_clt::{HawkesParams, Kernel, LinkFunction, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Every sample summary produced along the way, for the KS/W1 check.
#[derive(Default)]
struct Ledger {
    summaries: Vec<(String, SampleSummary)>,
}

fn linear_exp(nu: f64, rate: f64, mass: f64) -> HawkesParams {
    HawkesParams::new(
        Kernel::exponential(rate, mass).unwrap(),
        LinkFunction::linear(nu).unwrap(),
    )
    .unwrap()
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (
        m,
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

/// Independent long-run rates; returns (mean, standard error).
fn rates(params: &HawkesParams, horizon: f64, burn_in: f64, runs: u64, seed: u64) -> (f64, f64) {
    let cfg = SimConfig::new(params.clone(), horizon, burn_in, seed).unwrap();
    let r: Vec<f64> = (0..runs)
        .map(|i| simulate(&cfg.with_replication(i)).unwrap().0.len() as f64 / horizon)
        .collect();
    let (m, v) = mean_var(&r);
    (m, (v / runs as f64).sqrt())
}

fn poisson_reduction(_: &mut Ledger) -> Outcome {
    let params = linear_exp(1.0, 1.0, 0.0);
    let cfg = SimConfig::new(params, 1000.0, 0.0, 1).unwrap();
    let counts: Vec<f64> = (0..200)
        .map(|i| simulate(&cfg.with_replication(i)).unwrap().0.len() as f64)
        .collect();
    let (m, v) = mean_var(&counts);
    let ratio = v / m;
    let mean_ok = (m - 1000.0).abs() <= 4.0 * (1000.0f64 / 200.0).sqrt();
    // diagnostic only: the dispersion ratio over 200 runs has standard deviation ~0.1
    let wide: Vec<f64> = (0..20_000)
        .map(|i| simulate(&cfg.with_replication(1_000 + i)).unwrap().0.len() as f64)
        .collect();
    let (wm, wv) = mean_var(&wide);
    Outcome {
        pass: (0.85..=1.15).contains(&ratio) && mean_ok,
        detail: format!(
            "mean {m:.2}, variance/mean {ratio:.3} (over 20000 further runs: {:.3})",
            wv / wm
        ),
    }
}

fn stationary_rate(_: &mut Ledger) -> Outcome {
    let (m, se) = rates(&linear_exp(1.0, 2.0, 0.5), 1e4, 50.0, 20, 2);
    Outcome {
        pass: (m - 2.0).abs() <= 3.0 * se,
        detail: format!("rate {m:.4} (SE {se:.4}) vs 2"),
    }
}

fn intensity_bracket(_: &mut Ledger) -> Outcome {
    let params = HawkesParams::new(
        Kernel::exponential(1.0, 0.5).unwrap(),
        LinkFunction::saturating_exp(1.0, 4.0).unwrap(),
    )
    .unwrap();
    let (lo, hi) = (params.phi0(), params.phi0() / (1.0 - params.stability()));
    let (m, se) = rates(&params, 1e4, 50.0, 20, 3);
    Outcome {
        pass: m >= lo - 3.0 * se && m <= hi + 3.0 * se,
        detail: format!("rate {m:.4} (SE {se:.4}) in [{lo}, {hi}]"),
    }
}

fn martingale_isometry(ledger: &mut Ledger) -> Outcome {
    let params = linear_exp(1.0, 1.0, 0.3);
    let s = Scenario::new(
        "isometry",
        params,
        normalized_indicator(1.0, 0.3, 100.0).unwrap(),
        Mode::Stationary,
    )
    .unwrap();
    let hat = LambdaHat::default_for(&s.params);
    let rec = replicate(&s, 10_000, 4, &QuadratureConfig::default(), hat).unwrap();
    let sum = SampleSummary::of(rec.iter().map(|r| r.delta.value).collect(), 4).unwrap();
    ledger.summaries.push(("isometry".into(), sum));
    Outcome {
        pass: sum.mean.abs() <= 4.0 * sum.mean_se && (sum.variance - 1.0).abs() <= 0.05,
        detail: format!(
            "mean {:+.4} (SE {:.4}), variance {:.4}",
            sum.mean, sum.mean_se, sum.variance
        ),
    }
}

fn resolvent_closed_form(_: &mut Ledger) -> Outcome {
    let k = Kernel::exponential(1.0, 0.5).unwrap();
    let t = default_resolvent_horizon(&k, 1.0);
    let psi = resolvent(&k, 1.0, 1e-3, t).unwrap();
    let err = psi
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (v - 0.5 * (-0.5 * i as f64 * psi.step()).exp()).abs())
        .fold(0.0, f64::max);
    let mass = psi.total_mass();
    Outcome {
        pass: err < 1e-4 && (mass - 1.0).abs() <= 1e-3,
        detail: format!("sup error {err:.2e}, mass {mass:.6}"),
    }
}

fn bound_formulas(_: &mut Ledger) -> Outcome {
    let b1 = bound_linear(
        1.0,
        &Kernel::exponential(1.0, 0.0).unwrap(),
        &TestFunction::indicator(0.0, 1.0, 1.0).unwrap(),
    )
    .unwrap()
    .total;
    let (am, phi0, ell) = (0.1f64, 1.0f64, 100.0f64);
    let c = sqrt_two_over_pi();
    let closed = c * am
        + 2.0 * c * am * (2.0 - am) / (1.0 - am)
        + ((1.0 - am) / (phi0 * ell)).sqrt()
        + am / (phi0 * ell * (1.0 - am)).sqrt();
    let n = bound_nonlinear(
        &linear_exp(phi0, 1.0, am),
        &normalized_indicator(phi0, am, ell).unwrap(),
    )
    .unwrap()
    .total;
    Outcome {
        pass: b1 == 1.0 && (n - closed).abs() <= 1e-12 && (n - 0.522).abs() <= 1e-3,
        detail: format!("Poisson bound {b1}, example bound {n:.6} (closed form {closed:.6})"),
    }
}

fn random_kernel(rng: &mut ChaCha8Rng, mass: f64) -> Kernel {
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    if rng.random_bool(0.5) {
        Kernel::exponential(scale, mass).unwrap()
    } else {
        Kernel::boxcar(scale, mass).unwrap()
    }
}

fn random_u(rng: &mut ChaCha8Rng) -> TestFunction {
    let pieces = rng.random_range(1..=6);
    let mut b = vec![rng.random_range(0.0..5.0)];
    for _ in 0..pieces {
        let last = *b.last().unwrap();
        b.push(last + 10f64.powf(rng.random_range(-1.0..2.0)));
    }
    let mut v: Vec<f64> = (0..pieces).map(|_| rng.random_range(-2.0..2.0)).collect();
    v[0] = v[0].signum() * v[0].abs().max(0.05);
    TestFunction::new(b, v).unwrap()
}

fn comparison_sweep(_: &mut Ledger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut hits_i, mut hits_ii, mut bad) = (0, 0, 0);
    for _ in 0..10_000 {
        let nu = 10f64.powf(rng.random_range(-1.5..1.5));
        let mu = rng.random_range(0.0..0.95);
        let k = random_kernel(&mut rng, mu);
        let u = random_u(&mut rng);
        let c = compare_conditions(nu, &k, &u).unwrap();
        if c.cond_i {
            hits_i += 1;
            let (l, lp) = (
                bound_linear(nu, &k, &u).unwrap(),
                bound_linear_spectral(nu, &k, &u).unwrap(),
            );
            bad += usize::from(lp.total > l.total * (1.0 + 1e-12));
        }
        if c.cond_ii {
            hits_ii += 1;
            let l = bound_linear_approx(nu, &k, &u).unwrap();
            let lp = bound_linear_spectral_approx(nu, &k, &u).unwrap();
            bad += usize::from(lp.total > l.total * (1.0 + 1e-12));
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!(
            "{hits_i} draws met the first condition, {hits_ii} the second, {bad} violations"
        ),
    }
}

fn dominance(_: &mut Ledger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = 0;
    for _ in 0..10_000 {
        let nu = 10f64.powf(rng.random_range(-1.5..1.5));
        let mu = rng.random_range(0.0..0.95);
        let k = random_kernel(&mut rng, mu);
        let u = random_u(&mut rng);
        let l = bound_linear(nu, &k, &u).unwrap().total;
        let n = bound_nonlinear(
            &HawkesParams::new(k, LinkFunction::linear(nu).unwrap()).unwrap(),
            &u,
        )
        .unwrap()
        .total;
        bad += usize::from(l > n * (1.0 + 1e-12));
    }
    Outcome {
        pass: bad == 0,
        detail: format!("{bad} violations"),
    }
}

fn bound_respect(ledger: &mut Ledger) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, name) in [
        "poisson",
        "linear",
        "low_excitation",
        "box_stationary",
        "nonlinear",
    ]
    .iter()
    .enumerate()
    {
        let c = run_bound_vs_empirical(&preset(name).unwrap(), 10_000, 100 + i as u64).unwrap();
        ledger.summaries.push((format!("{name}/delta"), c.delta));
        ledger
            .summaries
            .push((format!("{name}/delta_a"), c.delta_a));
        pass &= c.pass;
        parts.push(format!(
            "{name}: W1 {:.4} <= {:.4}{}",
            c.delta.w1,
            c.min_bound_delta,
            if c.pass { "" } else { " FAILED" }
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn rate_sweep(ledger: &mut Ledger) -> Outcome {
    let grid = [0.2, 0.1, 0.05, 0.025];
    let sweep = run_rate_sweep(
        Family::Nonlinear {
            nu: 1.0,
            alpha: 1.0,
        },
        &grid,
        10_000,
        10,
    )
    .unwrap();
    let slope = sweep.slopes.iter().find(|s| s.0 == "nonlinear").unwrap().1;
    let mut monotone = true;
    for w in sweep.rows.windows(2) {
        let (a, b) = (&w[0].delta, &w[1].delta);
        monotone &= b.w1 <= a.w1 + 2.0 * (a.w1_se.powi(2) + b.w1_se.powi(2)).sqrt();
    }
    for r in &sweep.rows {
        ledger
            .summaries
            .push((format!("sweep eps={}", r.eps), r.delta));
        ledger
            .summaries
            .push((format!("sweep eps={} approx", r.eps), r.delta_a));
    }
    let w1: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("{:.4}", r.delta.w1))
        .collect();
    Outcome {
        pass: (slope - 0.5).abs() <= 0.1 && monotone,
        detail: format!(
            "bound slope {slope:.3} (target 0.5 +- 0.1), W1 along grid [{}] {}",
            w1.join(", "),
            if monotone {
                "nonincreasing"
            } else {
                "increasing"
            }
        ),
    }
}

fn ci_coverage(_: &mut Ledger) -> Outcome {
    let s = preset("poisson_ci").unwrap();
    let r = run_confidence_interval(&s, 0.2, 10_000, 11).unwrap();
    let feasible = matches!(r.outcome, CiOutcome::Feasible { .. });
    match r.coverage {
        Some((p, se)) if feasible => Outcome {
            pass: r.bound <= 0.0025 * (1.0 + 1e-12) && p >= 0.6 - 3.0 * se,
            detail: format!(
                "bound {:.6}, coverage {p:.4} (SE {se:.4}) vs floor 0.6",
                r.bound
            ),
        },
        _ => Outcome {
            pass: false,
            detail: format!("interval infeasible for bound {:.6}", r.bound),
        },
    }
}

fn ks_w1(ledger: &mut Ledger) -> Outcome {
    let bad: Vec<&str> = ledger
        .summaries
        .iter()
        .filter(|(_, s)| !s.ks_within_w1())
        .map(|(n, _)| n.as_str())
        .collect();
    Outcome {
        pass: bad.is_empty() && !ledger.summaries.is_empty(),
        detail: format!(
            "{} sample sets checked, violations: {bad:?}",
            ledger.summaries.len()
        ),
    }
}

type Check = fn(&mut Ledger) -> Outcome;

fn main() {
    let criteria: [(&str, Check, u64); 12] = [
        ("Poisson reduction", poisson_reduction, 5),
        ("stationary rate", stationary_rate, 30),
        ("intensity bracket", intensity_bracket, 30),
        ("innovation mean and isometry", martingale_isometry, 120),
        ("resolvent closed form", resolvent_closed_form, 1),
        ("bound formulas", bound_formulas, 1),
        ("comparison conditions", comparison_sweep, 10),
        ("linear bound dominance", dominance, 10),
        ("bound respect on presets", bound_respect, 600),
        ("sqrt(eps) rate", rate_sweep, 600),
        ("confidence interval coverage", ci_coverage, 120),
        ("KS <= 2 sqrt(W1)", ks_w1, 1),
    ];
    let mut ledger = Ledger::default();
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check(&mut ledger);
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        println!(
            "{} criterion {:>2} {name}: {} [{:.2}s of {budget}s{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
