//! Explicit Wasserstein bounds for `delta(u)` and `delta_a(u)`.
//!
//! Nonlinear bounds depend on `(phi(0), alpha, mu)` and norms of `u`; linear
//! bounds on `(nu, mu)`, the same norms and, for the spectral variants,
//! `||h||_2`. [`bound_general_resolvent`] keeps the two expectation terms as
//! Monte Carlo estimates and replaces the Malliavin-derivative terms by their
//! resolvent majorant.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernels::{cross_energy, l2_norm, ResolventTable};
use crate::model::{HawkesParams, Kernel, TestFunction};
use crate::stats::sqrt_two_over_pi;

/// Totals above this are reported as vacuous.
pub const DEFAULT_VACUITY_THRESHOLD: f64 = 2.0;

/// Fewest Monte Carlo paths accepted by [`bound_general_resolvent`].
pub const MIN_MC_SAMPLES: usize = 100;

/// Where a bound is proved to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Applicability {
    pub requires_linear: bool,
    pub requires_l2: bool,
    /// Holds for the stationary process.
    pub stationary: bool,
    /// Holds for the process started from an empty history at time 0.
    pub rplus: bool,
}

impl Applicability {
    const NONLINEAR: Self = Self {
        requires_linear: false,
        requires_l2: false,
        stationary: true,
        rplus: true,
    };
    const LINEAR: Self = Self {
        requires_linear: true,
        requires_l2: false,
        stationary: true,
        rplus: false,
    };
    const SPECTRAL: Self = Self {
        requires_linear: true,
        requires_l2: true,
        stationary: true,
        rplus: false,
    };
}

/// Quantities a bound was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub phi0: f64,
    pub alpha: f64,
    pub mu: f64,
    pub h_l2: f64,
    pub u_l1: f64,
    pub u_l2: f64,
    pub u_l3_cube: f64,
    /// `||u^2||_2`.
    pub u_sq_l2: f64,
}

impl BoundInputs {
    fn new(phi0: f64, alpha: f64, kernel: &Kernel, u: &TestFunction) -> Self {
        Self {
            phi0,
            alpha,
            mu: kernel.mass(),
            h_l2: l2_norm(kernel),
            u_l1: u.l1_norm(),
            u_l2: u.l2_norm(),
            u_l3_cube: u.l3_norm_cube(),
            u_sq_l2: u.square().l2_norm(),
        }
    }

    fn am(&self) -> f64 {
        self.alpha * self.mu
    }
}

/// One evaluated bound with its term breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: &'static str,
    pub terms: Vec<(&'static str, f64)>,
    /// Sum of `terms`.
    pub total: f64,
    pub applicability: Applicability,
    pub inputs: BoundInputs,
    /// Standard error of the Monte Carlo terms, if any.
    pub mc_se: Option<f64>,
}

impl BoundReport {
    fn new(
        name: &'static str,
        terms: Vec<(&'static str, f64)>,
        applicability: Applicability,
        inputs: BoundInputs,
    ) -> Self {
        let total = terms.iter().map(|t| t.1).sum();
        Self {
            name,
            terms,
            total,
            applicability,
            inputs,
            mc_se: None,
        }
    }

    fn with_term(mut self, label: &'static str, value: f64, name: &'static str) -> Self {
        self.terms.push((label, value));
        self.total = self.terms.iter().map(|t| t.1).sum();
        self.name = name;
        self
    }

    pub fn is_vacuous(&self, threshold: f64) -> bool {
        self.total > threshold
    }

    /// Multi-line human-readable rendering.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let flag = if self.is_vacuous(DEFAULT_VACUITY_THRESHOLD) {
            "  (vacuous)"
        } else {
            ""
        };
        let _ = writeln!(out, "{:<24} {:>14.6}{flag}", self.name, self.total);
        for (label, value) in &self.terms {
            let _ = writeln!(out, "  {label:<22} {value:>14.6}");
        }
        if let Some(se) = self.mc_se {
            let _ = writeln!(out, "  {:<22} {se:>14.6}", "mc_standard_error");
        }
        out
    }
}

fn check_u(u: &TestFunction) -> Result<()> {
    if u.l2_norm_sq() == 0.0 {
        return Err(Error::Parameter("test function must not vanish".into()));
    }
    Ok(())
}

fn check_linear(nu: f64, kernel: &Kernel) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Parameter(format!("nu must be > 0, got {nu}")));
    }
    let mu = kernel.mass();
    if mu >= 1.0 {
        return Err(Error::Stability(mu));
    }
    Ok(mu)
}

/// `(phi(0), phi(0) / (1 - alpha mu))`, the range of the stationary mean intensity.
pub fn intensity_bracket(p: &HawkesParams) -> (f64, f64) {
    let phi0 = p.phi0();
    (phi0, phi0 / (1.0 - p.stability()))
}

/// Bound for `delta(u)` of a nonlinear process; valid with or without burn-in.
pub fn bound_nonlinear(p: &HawkesParams, u: &TestFunction) -> Result<BoundReport> {
    check_u(u)?;
    let inp = BoundInputs::new(p.phi0(), p.alpha(), p.kernel(), u);
    let (phi0, am) = (inp.phi0, inp.am());
    let u2 = inp.u_l2 * inp.u_l2;
    let c = sqrt_two_over_pi();
    let one_minus = 1.0 - am;
    let terms = vec![
        (
            "variance",
            c * (1.0 - phi0 * u2)
                .abs()
                .max((1.0 - phi0 / one_minus * u2).abs()),
        ),
        ("third_moment", phi0 / one_minus * inp.u_l3_cube),
        (
            "cross_u_u",
            2.0 * c * phi0 * am * (2.0 - am) / (one_minus * one_minus) * u2,
        ),
        (
            "cross_u_u2",
            phi0 * am / (one_minus * one_minus) * inp.u_l2 * inp.u_sq_l2,
        ),
    ];
    Ok(BoundReport::new(
        "nonlinear",
        terms,
        Applicability::NONLINEAR,
        inp,
    ))
}

/// [`bound_nonlinear`] plus the cost of replacing `lambda(t)` by a constant.
pub fn bound_nonlinear_approx(p: &HawkesParams, u: &TestFunction) -> Result<BoundReport> {
    let base = bound_nonlinear(p, u)?;
    let inp = base.inputs;
    let am = inp.am();
    let corr = 2.0 * inp.phi0 * am / (1.0 - am) * inp.u_l1;
    Ok(base.with_term("correction", corr, "nonlinear_approx"))
}

/// Bound for `delta(u)` of a stationary linear process.
pub fn bound_linear(nu: f64, kernel: &Kernel, u: &TestFunction) -> Result<BoundReport> {
    let mu = check_linear(nu, kernel)?;
    check_u(u)?;
    let inp = BoundInputs::new(nu, 1.0, kernel, u);
    let u2 = inp.u_l2 * inp.u_l2;
    let c = sqrt_two_over_pi();
    let m = 1.0 - mu;
    let terms = vec![
        ("variance", c * (1.0 - nu / m * u2).abs()),
        ("third_moment", nu / m * inp.u_l3_cube),
        ("cross_u_u", 2.0 * c * nu * mu * (2.0 - mu) / (m * m) * u2),
        ("cross_u_u2", nu * mu / (m * m) * inp.u_l2 * inp.u_sq_l2),
    ];
    Ok(BoundReport::new(
        "linear",
        terms,
        Applicability::LINEAR,
        inp,
    ))
}

/// [`bound_linear`] for `delta_a(u)` with `lambda_hat = nu / (1 - mu)`.
pub fn bound_linear_approx(nu: f64, kernel: &Kernel, u: &TestFunction) -> Result<BoundReport> {
    let base = bound_linear(nu, kernel, u)?;
    let inp = base.inputs;
    let corr = 2.0 * nu * inp.mu / (1.0 - inp.mu) * inp.u_l1;
    Ok(base.with_term("correction", corr, "linear_approx"))
}

fn require_l2(kernel: &Kernel) -> Result<f64> {
    let n = l2_norm(kernel);
    if !n.is_finite() {
        return Err(Error::MissingL2);
    }
    Ok(n)
}

/// Bound for `delta(u)` of a stationary linear process with square-integrable kernel,
/// using the exact variance of `int u^2 lambda`.
pub fn bound_linear_spectral(nu: f64, kernel: &Kernel, u: &TestFunction) -> Result<BoundReport> {
    let mu = check_linear(nu, kernel)?;
    check_u(u)?;
    let h_l2 = require_l2(kernel)?;
    let inp = BoundInputs::new(nu, 1.0, kernel, u);
    let u2 = inp.u_l2 * inp.u_l2;
    let c = sqrt_two_over_pi();
    let m = 1.0 - mu;
    // ||u^2||_1 = ||u||_2^2
    let spread = (mu * inp.u_sq_l2).powi(2).min((h_l2 * u2).powi(2));
    let terms = vec![
        (
            "variance",
            c * ((1.0 - nu * u2 / m).powi(2) + nu / m.powi(3) * spread).sqrt(),
        ),
        ("third_moment", nu / m * inp.u_l3_cube),
        ("cross_u_u", 2.0 * c * nu * mu / (m * m) * u2),
        ("cross_u_u2", nu * mu / (m * m) * inp.u_l2 * inp.u_sq_l2),
    ];
    Ok(BoundReport::new(
        "linear_spectral",
        terms,
        Applicability::SPECTRAL,
        inp,
    ))
}

/// [`bound_linear_spectral`] for `delta_a(u)`.
pub fn bound_linear_spectral_approx(
    nu: f64,
    kernel: &Kernel,
    u: &TestFunction,
) -> Result<BoundReport> {
    let base = bound_linear_spectral(nu, kernel, u)?;
    let inp = base.inputs;
    let m = 1.0 - inp.mu;
    let corr = nu.sqrt() / m.powf(1.5) * (inp.mu * inp.u_l2).min(inp.h_l2 * inp.u_l1);
    Ok(base.with_term("correction", corr, "linear_spectral_approx"))
}

/// Sufficient conditions for the spectral bounds to improve on the plain
/// linear ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conditions {
    /// Implies `linear_spectral <= linear`.
    pub cond_i: bool,
    /// Implies `linear_spectral_approx <= linear_approx`.
    pub cond_ii: bool,
}

/// Evaluates both comparison conditions. `||h||_2^2 / mu^2` is taken as
/// `+inf` when `mu = 0`.
pub fn compare_conditions(nu: f64, kernel: &Kernel, u: &TestFunction) -> Result<Conditions> {
    let mu = check_linear(nu, kernel)?;
    check_u(u)?;
    let h_l2 = require_l2(kernel)?;
    let kernel_ratio = if mu == 0.0 {
        f64::INFINITY
    } else {
        (h_l2 / mu).powi(2)
    };
    let u2 = u.l2_norm_sq();
    let sq_ratio = u.square().l2_norm_sq() / (u2 * u2);
    let l1 = u.l1_norm();
    let spread_ratio = u2 / (l1 * l1);
    let scale = 4.0 * (1.0 - mu);
    let first = sq_ratio.min(kernel_ratio);
    let second = spread_ratio.min(kernel_ratio);
    Ok(Conditions {
        cond_i: nu >= first / scale,
        cond_ii: nu >= first.max(second) / scale,
    })
}

/// General bound through the resolvent, with Monte Carlo expectation terms.
///
/// `second[i]` and `third[i]` are `int u^2 lambda` and `int |u|^3 lambda`
/// along path `i`. The two cross terms use `lambda_high` from
/// [`intensity_bracket`] and the resolvent table `psi`.
pub fn bound_general_resolvent(
    p: &HawkesParams,
    u: &TestFunction,
    psi: &ResolventTable,
    second: &[f64],
    third: &[f64],
) -> Result<BoundReport> {
    check_u(u)?;
    let n = second.len().min(third.len());
    if n < MIN_MC_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: n,
            need: MIN_MC_SAMPLES,
        });
    }
    if second.len() != third.len() {
        return Err(Error::Parameter(
            "moment samples must have equal length".into(),
        ));
    }
    if (psi.alpha() - p.alpha()).abs() > 1e-12 {
        return Err(Error::Parameter(
            "resolvent table was built for a different alpha".into(),
        ));
    }
    let c = sqrt_two_over_pi();
    let (_, lambda_high) = intensity_bracket(p);
    let (m1, se1) = mean_se(second.iter().map(|v| c * (1.0 - v).abs()));
    let (m2, se2) = mean_se(third.iter().copied());
    let abs_u = u.abs();
    let cross_uu = cross_energy(&abs_u, &abs_u, psi)?;
    let cross_uu2 = cross_energy(&abs_u, &u.square(), psi)?;
    let inp = BoundInputs::new(p.phi0(), p.alpha(), p.kernel(), u);
    let terms = vec![
        ("variance_mc", m1),
        ("third_moment_mc", m2),
        ("cross_u_u", 2.0 * c * lambda_high * cross_uu),
        ("cross_u_u2", lambda_high * cross_uu2),
    ];
    let mut report = BoundReport::new("general_resolvent", terms, Applicability::NONLINEAR, inp);
    report.mc_se = Some(se1 + se2);
    Ok(report)
}

fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, sum) = values
        .clone()
        .fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// A bound that does not apply, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub name: &'static str,
    pub reason: String,
}

/// Every closed-form bound applicable to `p`, and the ones that are not.
pub fn applicable_bounds(
    p: &HawkesParams,
    u: &TestFunction,
) -> Result<(Vec<BoundReport>, Vec<Skipped>)> {
    let mut reports = vec![bound_nonlinear(p, u)?, bound_nonlinear_approx(p, u)?];
    let mut skipped = Vec::new();
    let linear_names = [
        "linear",
        "linear_approx",
        "linear_spectral",
        "linear_spectral_approx",
    ];
    if p.is_linear() {
        let nu = p.phi0();
        let k = p.kernel();
        reports.push(bound_linear(nu, k, u)?);
        reports.push(bound_linear_approx(nu, k, u)?);
        match bound_linear_spectral(nu, k, u) {
            Ok(r) => {
                reports.push(r);
                reports.push(bound_linear_spectral_approx(nu, k, u)?);
            }
            Err(Error::MissingL2) => {
                for name in &linear_names[2..] {
                    skipped.push(Skipped {
                        name,
                        reason: "kernel is not square integrable".into(),
                    });
                }
            }
            Err(e) => return Err(e),
        }
    } else {
        for name in linear_names {
            skipped.push(Skipped {
                name,
                reason: "link function is not linear".into(),
            });
        }
    }
    Ok((reports, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::resolvent;
    use crate::model::{normalized_indicator, LinkFunction};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const C: f64 = 0.797_884_560_802_865_4;

    fn nonlinear(phi0: f64, mu: f64) -> HawkesParams {
        HawkesParams::new(
            Kernel::exponential(1.0, mu).unwrap(),
            LinkFunction::saturating_exp(phi0, 10.0 * phi0).unwrap(),
        )
        .unwrap()
    }

    fn linear(nu: f64, mu: f64) -> HawkesParams {
        HawkesParams::new(
            Kernel::exponential(1.0, mu).unwrap(),
            LinkFunction::linear(nu).unwrap(),
        )
        .unwrap()
    }

    /// Printed closed form of the nonlinear bound for the normalised indicator.
    fn nonlinear_indicator_closed(phi0: f64, am: f64, ell: f64) -> f64 {
        C * am
            + 2.0 * C * am * (2.0 - am) / (1.0 - am)
            + ((1.0 - am) / (phi0 * ell)).sqrt()
            + am / (phi0 * ell * (1.0 - am)).sqrt()
    }

    /// Printed closed forms of the spectral bounds for the normalised indicator
    /// with `h = mu f`.
    fn linear_indicator_closed(nu: f64, mu: f64, ell: f64, f_l2: f64) -> (f64, f64) {
        let lead = (C * ell.powf(-0.5).min(f_l2) + ell.powf(-0.5)) * mu / (nu * (1.0 - mu)).sqrt()
            + ((1.0 - mu) / (nu * ell)).sqrt();
        (
            lead + 2.0 * C * mu / (1.0 - mu),
            lead + (2.0 * C + 1f64.min(ell.sqrt() * f_l2)) * mu / (1.0 - mu),
        )
    }

    fn linear_indicator_u(nu: f64, mu: f64, ell: f64) -> TestFunction {
        TestFunction::indicator(0.0, ell, 1.0 / (nu * ell / (1.0 - mu)).sqrt()).unwrap()
    }

    #[test]
    fn poisson_examples_equal_one() {
        let u = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let p = nonlinear(1.0, 0.0);
        let r = bound_nonlinear(&p, &u).unwrap();
        assert_eq!(r.total, 1.0);
        assert_eq!(bound_nonlinear_approx(&p, &u).unwrap().total, r.total);
        let k = Kernel::exponential(1.0, 0.0).unwrap();
        assert_eq!(bound_linear(1.0, &k, &u).unwrap().total, 1.0);
        assert_eq!(bound_linear_approx(1.0, &k, &u).unwrap().total, 1.0);
        let s = bound_linear_spectral(1.0, &k, &u).unwrap();
        assert_relative_eq!(s.total, C * (1.0f64 - 1.0).abs() + 1.0);
        assert_eq!(
            bound_linear_spectral_approx(1.0, &k, &u).unwrap().total,
            s.total
        );
    }

    #[test]
    fn nonlinear_indicator_terms() {
        let u = normalized_indicator(1.0, 0.1, 100.0).unwrap();
        let r = bound_nonlinear(&nonlinear(1.0, 0.1), &u).unwrap();
        let expect = [0.0798, 0.0949, 0.3369, 0.0105];
        for ((_, v), e) in r.terms.iter().zip(expect) {
            assert!((v - e).abs() < 1e-4, "{v} vs {e}");
        }
        assert_relative_eq!(r.terms[0].1, C * 0.1, max_relative = 1e-12);
        assert!((r.total - 0.522).abs() < 1e-3);
        assert_relative_eq!(
            r.total,
            nonlinear_indicator_closed(1.0, 0.1, 100.0),
            max_relative = 1e-12
        );
        let a = bound_nonlinear_approx(&nonlinear(1.0, 0.1), &u).unwrap();
        let corr = a.terms.last().unwrap().1;
        assert_relative_eq!(corr, 2.0 * 10.0 * 0.1 / 0.9f64.sqrt(), max_relative = 1e-12);
        assert!((corr - 2.108).abs() < 1e-3);
    }

    #[test]
    fn nonlinear_indicator_closed_form_over_parameters() {
        for (phi0, am, ell) in [(0.5, 0.3, 20.0), (3.0, 0.01, 1e4), (1.0, 0.9, 2.0)] {
            let u = normalized_indicator(phi0, am, ell).unwrap();
            let r = bound_nonlinear(&nonlinear(phi0, am), &u).unwrap();
            assert_relative_eq!(
                r.total,
                nonlinear_indicator_closed(phi0, am, ell),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn linear_hand_evaluation() {
        let k = Kernel::exponential(1.0, 0.5).unwrap();
        let u = TestFunction::indicator(0.0, 1.0, 0.5).unwrap();
        let r = bound_linear(2.0, &k, &u).unwrap();
        let expect = [0.0, 0.5, 2.0 * C * 1.5, 0.5];
        for ((_, v), e) in r.terms.iter().zip(expect) {
            assert_relative_eq!(*v, e, epsilon = 1e-12);
        }
        assert!((r.total - 3.394).abs() < 1e-3);
        let unit = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let a = bound_linear_approx(1.0, &k, &unit).unwrap();
        assert_relative_eq!(a.terms.last().unwrap().1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_correction_plug_in() {
        // ||h||_2 = 1 with mu = 0.5: exponential with mass 0.5 and rate 8
        let k = Kernel::exponential(8.0, 0.5).unwrap();
        assert_relative_eq!(l2_norm(&k), 1.0, epsilon = 1e-12);
        let u = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let r = bound_linear_spectral_approx(1.0, &k, &u).unwrap();
        assert_relative_eq!(r.terms.last().unwrap().1, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn linear_indicator_closed_forms() {
        for (nu, mu, ell, width) in [
            (1.0, 0.2, 50.0, 2.0),
            (4.0, 0.05, 200.0, 0.1),
            (0.5, 0.4, 10.0, 30.0),
        ] {
            // f uniform on (0, width]: ||f||_2^2 = 1 / width
            let k = Kernel::boxcar(width, mu).unwrap();
            let f_l2 = (1.0 / width).sqrt();
            let u = linear_indicator_u(nu, mu, ell);
            let holds = nu >= (1.0 / ell).min(f_l2 * f_l2) / (4.0 * (1.0 - mu));
            let cond = compare_conditions(nu, &k, &u).unwrap();
            assert_eq!(cond.cond_i, holds);
            assert_eq!(cond.cond_ii, holds);
            let (lp, ltp) = linear_indicator_closed(nu, mu, ell, f_l2);
            assert_relative_eq!(
                bound_linear_spectral(nu, &k, &u).unwrap().total,
                lp,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                bound_linear_spectral_approx(nu, &k, &u).unwrap().total,
                ltp,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn bracket() {
        assert_eq!(intensity_bracket(&nonlinear(1.0, 0.5)), (1.0, 2.0));
        assert_eq!(intensity_bracket(&nonlinear(1.5, 0.0)), (1.5, 1.5));
        let (lo, hi) = intensity_bracket(&linear(1.0, 0.5));
        assert!(lo <= 2.0 && 2.0 <= hi);
    }

    #[test]
    fn rejections() {
        let u = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let k = Kernel::exponential(1.0, 1.0).unwrap();
        assert!(matches!(
            bound_linear(1.0, &k, &u),
            Err(Error::Stability(_))
        ));
        let k = Kernel::exponential(1.0, 0.5).unwrap();
        assert!(bound_linear(0.0, &k, &u).is_err());
        let zero = TestFunction::indicator(0.0, 1.0, 0.0).unwrap();
        assert!(bound_linear(1.0, &k, &zero).is_err());
    }

    #[test]
    fn applicability_matrix() {
        let u = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let (r, s) = applicable_bounds(&linear(1.0, 0.3), &u).unwrap();
        assert_eq!(r.len(), 6);
        assert!(s.is_empty());
        let (r, s) = applicable_bounds(&nonlinear(1.0, 0.3), &u).unwrap();
        assert_eq!(
            r.iter().map(|b| b.name).collect::<Vec<_>>(),
            ["nonlinear", "nonlinear_approx"]
        );
        assert_eq!(s.len(), 4);
        let boxed = HawkesParams::new(
            Kernel::boxcar(2.0, 0.3).unwrap(),
            LinkFunction::linear(1.0).unwrap(),
        )
        .unwrap();
        let (r, _) = applicable_bounds(&boxed, &u).unwrap();
        assert!(r.iter().any(|b| b.name == "linear_spectral"));
    }

    #[test]
    fn general_resolvent_without_excitation_is_poisson_bound() {
        let p = nonlinear(1.0, 0.0);
        let u = TestFunction::indicator(0.0, 1.0, 1.0).unwrap();
        let psi = resolvent(p.kernel(), 1.0, 1e-2, 2.0).unwrap();
        let second = vec![1.0; 200];
        let third = vec![1.0; 200];
        let r = bound_general_resolvent(&p, &u, &psi, &second, &third).unwrap();
        assert_eq!(r.terms[2].1, 0.0);
        assert_eq!(r.terms[3].1, 0.0);
        assert_eq!(r.total, 1.0);
        assert!(bound_general_resolvent(&p, &u, &psi, &second[..99], &third[..99]).is_err());
    }

    #[test]
    fn general_resolvent_cross_term_within_cauchy_schwarz() {
        let (nu, mu) = (1.0, 0.5);
        let p = linear(nu, mu);
        let u = normalized_indicator(nu, mu, 10.0).unwrap();
        let psi = resolvent(p.kernel(), 1.0, 1e-3, 12.0).unwrap();
        let r = bound_general_resolvent(&p, &u, &psi, &[1.0; 100], &[0.0; 100]).unwrap();
        let majorant = 2.0 * C * nu / (1.0 - mu) * mu / (1.0 - mu) * u.l2_norm_sq();
        assert!(r.terms[2].1 <= majorant + 1e-9);
        let lin = bound_linear(nu, p.kernel(), &u).unwrap();
        assert!(r.terms[2].1 <= lin.terms[2].1);
    }

    fn kernel_strategy() -> impl Strategy<Value = Kernel> {
        prop_oneof![
            (0.1f64..10.0, 0.0f64..0.99).prop_map(|(r, m)| Kernel::exponential(r, m).unwrap()),
            (0.05f64..10.0, 0.0f64..0.99).prop_map(|(w, m)| Kernel::boxcar(w, m).unwrap()),
        ]
    }

    fn step_strategy() -> impl Strategy<Value = TestFunction> {
        proptest::collection::vec((0.01f64..5.0, -3.0f64..3.0), 1..6).prop_filter_map(
            "nonzero",
            |pieces| {
                let mut bp = vec![0.0];
                let mut vals = Vec::new();
                for (w, v) in pieces {
                    bp.push(bp.last().unwrap() + w);
                    vals.push(v);
                }
                let u = TestFunction::new(bp, vals).ok()?;
                (u.l2_norm_sq() > 1e-6).then_some(u)
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn totals_are_sums_and_terms_nonnegative(nu in 0.01f64..10.0, k in kernel_strategy(), u in step_strategy()) {
            let p = HawkesParams::new(k.clone(), LinkFunction::linear(nu).unwrap()).unwrap();
            for r in applicable_bounds(&p, &u).unwrap().0 {
                prop_assert!(r.terms.iter().all(|t| t.1 >= 0.0));
                prop_assert_eq!(r.total, r.terms.iter().map(|t| t.1).sum::<f64>());
            }
        }

        #[test]
        fn linear_never_exceeds_nonlinear(nu in 0.01f64..10.0, k in kernel_strategy(), u in step_strategy()) {
            let p = HawkesParams::new(k.clone(), LinkFunction::linear(nu).unwrap()).unwrap();
            let l = bound_linear(nu, &k, &u).unwrap().total;
            let n = bound_nonlinear(&p, &u).unwrap().total;
            prop_assert!(l <= n * (1.0 + 1e-12));
        }

        #[test]
        fn comparison_conditions_imply_improvement(nu in 0.001f64..10.0, k in kernel_strategy(), u in step_strategy()) {
            let c = compare_conditions(nu, &k, &u).unwrap();
            if c.cond_i {
                let (s, l) = (bound_linear_spectral(nu, &k, &u).unwrap(), bound_linear(nu, &k, &u).unwrap());
                prop_assert!(s.total <= l.total * (1.0 + 1e-12));
            }
            if c.cond_ii {
                let (s, l) = (bound_linear_spectral_approx(nu, &k, &u).unwrap(), bound_linear_approx(nu, &k, &u).unwrap());
                prop_assert!(s.total <= l.total * (1.0 + 1e-12));
            }
        }

        #[test]
        fn norm_terms_scale_with_powers(nu in 0.1f64..5.0, mu in 0.0f64..0.9, c in 0.1f64..4.0, u in step_strategy()) {
            let k = Kernel::exponential(1.0, mu).unwrap();
            let a = bound_linear(nu, &k, &u).unwrap();
            let b = bound_linear(nu, &k, &u.scaled(c)).unwrap();
            prop_assert!((b.terms[1].1 - c.powi(3) * a.terms[1].1).abs() <= 1e-9 * b.terms[1].1.max(1.0));
            prop_assert!((b.terms[2].1 - c.powi(2) * a.terms[2].1).abs() <= 1e-9 * b.terms[2].1.max(1.0));
            prop_assert!((b.terms[3].1 - c.powi(3) * a.terms[3].1).abs() <= 1e-9 * b.terms[3].1.max(1.0));
        }
    }
}
