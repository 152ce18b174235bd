//! First-chaos statistics `delta(u) = int u (dN - lambda dt)` of a simulated path.

use crate::bounds::intensity_bracket;
use crate::error::{Error, Result};
use crate::model::{EventStream, HawkesParams, Kernel, LinkFunction, TestFunction};
use crate::simulator::IntensityPath;

/// Compensator quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Largest Simpson step.
    pub h_quad: f64,
    /// Absolute error estimate above which a sample is flagged.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            h_quad: 1e-3,
            tol: 1e-6,
        }
    }
}

/// One realisation of `delta(u)` or `delta_a(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationSample {
    /// `event_sum - compensator`.
    pub value: f64,
    /// `sum_i u(T_i)`.
    pub event_sum: f64,
    /// `int u(t) lambda(t) dt`, or `lambda_hat int u` for the approximation.
    pub compensator: f64,
    /// Quadrature error estimate; zero when the compensator is exact.
    pub quad_err: f64,
    /// `quad_err > tol`.
    pub flagged: bool,
}

/// `int lambda` over each constant piece of a step function.
#[derive(Debug, Clone)]
struct PieceIntegrals {
    /// `(value of u on the piece, int_piece lambda, error estimate)`.
    pieces: Vec<(f64, f64, f64)>,
}

impl PieceIntegrals {
    /// `int w(u) lambda` and its error estimate.
    fn weighted(&self, w: impl Fn(f64) -> f64) -> (f64, f64) {
        self.pieces
            .iter()
            .fold((0.0, 0.0), |(total, err), &(v, m, e)| {
                let wv = w(v);
                (total + wv * m, err + wv.abs() * e)
            })
    }
}

/// `int u lambda`, `int u^2 lambda`, `int |u|^3 lambda` along one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityMoments {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    pub quad_err: f64,
}

fn check_support(u: &TestFunction, start: f64, end: f64) -> Result<()> {
    let (lo, hi) = u.support();
    if lo < start || hi > end {
        return Err(Error::SupportOutsideWindow { lo, hi, start, end });
    }
    Ok(())
}

fn piece_integrals(
    path: &IntensityPath,
    u: &TestFunction,
    quad: &QuadratureConfig,
) -> Result<PieceIntegrals> {
    if !(quad.h_quad > 0.0 && quad.h_quad.is_finite()) {
        return Err(Error::Parameter(format!(
            "h_quad must be > 0, got {}",
            quad.h_quad
        )));
    }
    let (start, end) = path.window();
    check_support(u, start, end)?;
    let pieces = u
        .pieces()
        .map(|(a, b, v)| {
            if v == 0.0 {
                (v, 0.0, 0.0)
            } else {
                let (m, e) = lambda_integral(path, a, b, quad);
                (v, m, e)
            }
        })
        .collect();
    Ok(PieceIntegrals { pieces })
}

/// `int_a^b lambda(t) dt` and an error estimate.
fn lambda_integral(path: &IntensityPath, a: f64, b: f64, quad: &QuadratureConfig) -> (f64, f64) {
    let params = path.params();
    let kernel = params.kernel();
    let link = params.link();
    if kernel.mass() == 0.0 {
        return (link.phi0() * (b - a), 0.0);
    }
    match (link, kernel) {
        (LinkFunction::Linear { nu }, Kernel::Exponential { rate, .. }) => {
            (exponential_linear_integral(path, *nu, *rate, a, b), 0.0)
        }
        (LinkFunction::Linear { nu }, _) => (linear_integral(path, *nu, a, b), 0.0),
        _ => simpson_integral(path, a, b, quad),
    }
}

/// Segment-wise `nu D + (S0 / beta)(1 - exp(-beta D))`.
fn exponential_linear_integral(path: &IntensityPath, nu: f64, rate: f64, a: f64, b: f64) -> f64 {
    let events = path.events();
    let mut k = path.events_before(a);
    // the event at `a` itself (if any) counts from its right limit on
    while k < events.len() && events[k] <= a {
        k += 1;
    }
    let mut total = nu * (b - a);
    let mut s = a;
    loop {
        let e = if k < events.len() && events[k] < b {
            events[k]
        } else {
            b
        };
        let d = e - s;
        if d > 0.0 {
            let s0 = path.excitation_from(k, s);
            total += s0 / rate * -(-rate * d).exp_m1();
        }
        if e >= b {
            break;
        }
        s = e;
        k += 1;
    }
    total
}

/// `nu (b - a) + sum_i [H(b - T_i) - H(max(a, T_i) - T_i)]` with `H` the
/// cumulative kernel mass.
fn linear_integral(path: &IntensityPath, nu: f64, a: f64, b: f64) -> f64 {
    let kernel = path.params().kernel();
    let mass = kernel.mass();
    let cumulative = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            mass - kernel.tail_mass(x)
        }
    };
    let events = path.events();
    let first = match kernel.support_end() {
        Some(w) => events.partition_point(|&s| s < a - w),
        None => 0,
    };
    let last = path.events_before(b);
    let excitation: f64 = events[first..last]
        .iter()
        .map(|&s| cumulative(b - s) - cumulative(a.max(s) - s))
        .sum();
    nu * (b - a) + excitation
}

/// Composite Simpson between consecutive discontinuities of `lambda`.
fn simpson_integral(path: &IntensityPath, a: f64, b: f64, quad: &QuadratureConfig) -> (f64, f64) {
    let params = path.params();
    let kernel = params.kernel();
    let link = params.link();
    let events = path.events();

    let mut cuts: Vec<f64> = events[path.events_before(a)..path.events_before(b)]
        .iter()
        .copied()
        .filter(|&s| s > a)
        .collect();
    if let Some(w) = kernel.support_end() {
        // compactly supported kernels may jump to zero at the end of their support
        let lo = events.partition_point(|&s| s <= a - w);
        let hi = events.partition_point(|&s| s < b - w);
        cuts.extend(events[lo..hi].iter().map(|&s| s + w));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
    }
    cuts.push(b);

    let mut total = 0.0;
    let mut err = 0.0;
    let mut s = a;
    for &e in &cuts {
        let d = e - s;
        if d > 0.0 {
            // events strictly before the segment interior
            let k = path.events_before(0.5 * (s + e));
            let f = |t: f64| link.eval(path.excitation_from(k, t));
            let n = ((d / quad.h_quad).ceil() as usize)
                .max(8)
                .next_multiple_of(4);
            let (fine, coarse) = simpson_pair(f, s, e, n);
            total += fine;
            err += (fine - coarse).abs() / 15.0;
        }
        s = e;
    }
    (total, err)
}

/// Simpson sums with `n` and `n / 2` intervals sharing nodes.
fn simpson_pair(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let h = (b - a) / n as f64;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for i in 0..=n {
        // end nodes sit just inside the segment so that kernels jumping at
        // `a` or `b` contribute their one-sided limits
        let x = match i {
            0 => a + 1e-9 * h,
            _ if i == n => b - 1e-9 * h,
            _ => a + i as f64 * h,
        };
        let y = f(x);
        let wf = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        fine += wf * y;
        if i % 2 == 0 {
            let j = i / 2;
            let wc = if j == 0 || j == n / 2 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            coarse += wc * y;
        }
    }
    (fine * h / 3.0, coarse * 2.0 * h / 3.0)
}

/// `delta(u) = sum_i u(T_i) - int u(t) lambda(t) dt` for one simulated path.
pub fn first_chaos(
    stream: &EventStream,
    path: &IntensityPath,
    u: &TestFunction,
    quad: &QuadratureConfig,
) -> Result<InnovationSample> {
    first_chaos_with_moments(stream, path, u, quad).map(|(d, _)| d)
}

/// [`first_chaos`] together with [`intensity_moments`], sharing one quadrature pass.
pub fn first_chaos_with_moments(
    stream: &EventStream,
    path: &IntensityPath,
    u: &TestFunction,
    quad: &QuadratureConfig,
) -> Result<(InnovationSample, IntensityMoments)> {
    let (start, end) = stream.window();
    check_support(u, start, end)?;
    let event_sum = u.sum_over_sorted(stream.times());
    let moments = moments_of(&piece_integrals(path, u, quad)?);
    let (compensator, quad_err) = (moments.first, moments.first_err);
    let sample = InnovationSample {
        value: event_sum - compensator,
        event_sum,
        compensator,
        quad_err,
        flagged: quad_err > quad.tol,
    };
    Ok((sample, moments.into()))
}

struct RawMoments {
    first: f64,
    first_err: f64,
    second: f64,
    third: f64,
    max_err: f64,
}

impl From<RawMoments> for IntensityMoments {
    fn from(m: RawMoments) -> Self {
        Self {
            first: m.first,
            second: m.second,
            third: m.third,
            quad_err: m.max_err,
        }
    }
}

fn moments_of(ints: &PieceIntegrals) -> RawMoments {
    let (first, e1) = ints.weighted(|v| v);
    let (second, e2) = ints.weighted(|v| v * v);
    let (third, e3) = ints.weighted(|v| v.abs().powi(3));
    RawMoments {
        first,
        first_err: e1,
        second,
        third,
        max_err: e1.max(e2).max(e3),
    }
}

/// `int w(t) lambda(t) dt` for a step weight `w`.
pub fn integrate_intensity(
    path: &IntensityPath,
    w: &TestFunction,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    Ok(piece_integrals(path, w, quad)?.weighted(|v| v))
}

/// `int u lambda`, `int u^2 lambda` and `int |u|^3 lambda` in one pass.
pub fn intensity_moments(
    path: &IntensityPath,
    u: &TestFunction,
    quad: &QuadratureConfig,
) -> Result<IntensityMoments> {
    Ok(moments_of(&piece_integrals(path, u, quad)?).into())
}

/// Constant intensity used by the approximated first chaos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaHat(f64);

impl LambdaHat {
    /// `nu / (1 - mu)` for linear links, the midpoint of the intensity bracket otherwise.
    pub fn default_for(params: &HawkesParams) -> Self {
        match params.link() {
            LinkFunction::Linear { nu } => Self(nu / (1.0 - params.mu())),
            _ => {
                let (lo, hi) = intensity_bracket(params);
                Self(0.5 * (lo + hi))
            }
        }
    }

    /// Accepts `value` only inside `[phi(0), phi(0) / (1 - alpha mu)]`.
    pub fn checked(params: &HawkesParams, value: f64) -> Result<Self> {
        let (lo, hi) = intensity_bracket(params);
        let slack = 1e-12 * hi;
        if !(value >= lo - slack && value <= hi + slack) {
            return Err(Error::Parameter(format!(
                "lambda_hat = {value} is outside the intensity bracket [{lo}, {hi}]"
            )));
        }
        Ok(Self(value))
    }

    /// Accepts any finite positive `value`, logging a warning outside the bracket.
    pub fn unchecked(params: &HawkesParams, value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Parameter(format!(
                "lambda_hat must be finite and >= 0, got {value}"
            )));
        }
        let (lo, hi) = intensity_bracket(params);
        if value < lo || value > hi {
            log::warn!("lambda_hat = {value} overrides the intensity bracket [{lo}, {hi}]");
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `delta_a(u) = sum_i u(T_i) - lambda_hat int u`.
pub fn approx_first_chaos(
    stream: &EventStream,
    u: &TestFunction,
    lambda_hat: LambdaHat,
) -> Result<InnovationSample> {
    let (start, end) = stream.window();
    check_support(u, start, end)?;
    let event_sum = u.sum_over_sorted(stream.times());
    let compensator = lambda_hat.0 * u.integral();
    Ok(InnovationSample {
        value: event_sum - compensator,
        event_sum,
        compensator,
        quad_err: 0.0,
        flagged: false,
    })
}
