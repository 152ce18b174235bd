//! Domain types shared across the crate: excitation kernels, link functions,
//! step test functions, model parameters and event streams.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{param, Error, Result};

/// Default grid step for tabulated kernels.
pub const DEFAULT_TABLE_STEP: f64 = 1e-3;

/// Excitation kernel `h`. Every form vanishes on `(-inf, 0]`, is nonnegative,
/// and integrates to its `mass`.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `h(t) = mass * rate * exp(-rate * t)`.
    Exponential { rate: f64, mass: f64 },
    /// `h(t) = mass / width` on `(0, width]`.
    Box { width: f64, mass: f64 },
    /// Piecewise-linear interpolation of values sampled on a uniform grid.
    Tabulated(Arc<TabulatedKernel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    step: f64,
    values: Vec<f64>,
    // suffix_max[k] = max(values[k..]); drives the nonincreasing envelope
    suffix_max: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedKernel {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let end = self.support_end();
        if t > end {
            return 0.0;
        }
        let x = t / self.step;
        let k = (x.floor() as usize).min(self.values.len() - 1);
        if k + 1 >= self.values.len() {
            return self.values[k];
        }
        let theta = x - k as f64;
        self.values[k] * (1.0 - theta) + self.values[k + 1] * theta
    }

    fn envelope(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.suffix_max[0];
        }
        if t > self.support_end() {
            return 0.0;
        }
        let k = ((t / self.step).floor() as usize).min(self.values.len() - 1);
        self.suffix_max[k]
    }

    /// Exact integral of the interpolant over `(0, t]`.
    fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let end = self.support_end();
        if t >= end {
            return *self.cumulative.last().unwrap();
        }
        let k = ((t / self.step).floor() as usize).min(self.values.len() - 2);
        let left = k as f64 * self.step;
        let dt = t - left;
        let ht = self.eval(t);
        self.cumulative[k] + 0.5 * dt * (self.values[k] + ht)
    }
}

impl Kernel {
    pub fn exponential(rate: f64, mass: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return param(format!("exponential rate must be > 0, got {rate}"));
        }
        check_mass(mass)?;
        Ok(Kernel::Exponential { rate, mass })
    }

    pub fn boxcar(width: f64, mass: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return param(format!("box width must be > 0, got {width}"));
        }
        check_mass(mass)?;
        Ok(Kernel::Box { width, mass })
    }

    /// Tabulated kernel from samples `values[k] = h(k * step)` on `[0, T_supp]`;
    /// `values[0]` is read as the right limit `h(0+)`.
    pub fn tabulated(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return param(format!("table step must be > 0, got {step}"));
        }
        if values.len() < 2 {
            return param("tabulated kernel needs at least two samples");
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return param(format!(
                "tabulated kernel values must be finite and >= 0, got {v}"
            ));
        }
        let mut suffix_max = values.clone();
        for k in (0..suffix_max.len() - 1).rev() {
            suffix_max[k] = suffix_max[k].max(suffix_max[k + 1]);
        }
        let mut cumulative = Vec::with_capacity(values.len());
        cumulative.push(0.0);
        for w in values.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + 0.5 * step * (w[0] + w[1]));
        }
        Ok(Kernel::Tabulated(Arc::new(TabulatedKernel {
            step,
            values,
            suffix_max,
            cumulative,
        })))
    }

    /// Samples `f` on `[0, support]` with the given step.
    pub fn tabulate(f: impl Fn(f64) -> f64, support: f64, step: f64) -> Result<Self> {
        if !(support.is_finite() && support > 0.0) {
            return param(format!("table support must be > 0, got {support}"));
        }
        let n = (support / step).round() as usize;
        Self::tabulated(step, (0..=n).map(|k| f(k as f64 * step)).collect())
    }

    /// `h(t)`; zero for `t <= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Kernel::Exponential { rate, mass } => mass * rate * (-rate * t).exp(),
            Kernel::Box { width, mass } => {
                if t <= *width {
                    mass / width
                } else {
                    0.0
                }
            }
            Kernel::Tabulated(tab) => tab.eval(t),
        }
    }

    /// Right limit `h(0+)`.
    pub fn at_origin(&self) -> f64 {
        match self {
            Kernel::Exponential { rate, mass } => mass * rate,
            Kernel::Box { width, mass } => mass / width,
            Kernel::Tabulated(tab) => tab.values[0],
        }
    }

    /// A nonincreasing function dominating `h` on `[0, inf)`, with
    /// `envelope(0) >= h(0+)`. Equal to `h` for the parametric forms.
    pub fn envelope(&self, t: f64) -> f64 {
        match self {
            Kernel::Tabulated(tab) => tab.envelope(t),
            _ if t <= 0.0 => self.at_origin(),
            _ => self.eval(t),
        }
    }

    /// Total mass `mu`: exact for parametric forms, trapezoidal for tables.
    pub fn mass(&self) -> f64 {
        match self {
            Kernel::Exponential { mass, .. } | Kernel::Box { mass, .. } => *mass,
            Kernel::Tabulated(tab) => *tab.cumulative.last().unwrap(),
        }
    }

    /// Mass of `h` on `(t, inf)`.
    pub fn tail_mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.mass();
        }
        match self {
            Kernel::Exponential { rate, mass } => mass * (-rate * t).exp(),
            Kernel::Box { width, mass } => mass * ((width - t) / width).max(0.0),
            Kernel::Tabulated(tab) => (self.mass() - tab.integral_to(t)).max(0.0),
        }
    }

    /// Right end of the support, `None` when unbounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Kernel::Exponential { .. } => None,
            Kernel::Box { width, .. } => Some(*width),
            Kernel::Tabulated(tab) => Some(tab.support_end()),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        match self {
            Kernel::Tabulated(tab) => tab.is_nonincreasing(),
            _ => true,
        }
    }

    /// Points in `(lo, hi)` where `h` is not smooth.
    pub(crate) fn kinks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Kernel::Exponential { .. } => Vec::new(),
            Kernel::Box { width, .. } => {
                if *width > lo && *width < hi {
                    vec![*width]
                } else {
                    Vec::new()
                }
            }
            Kernel::Tabulated(tab) => {
                let first = (lo / tab.step).floor() as i64 + 1;
                let last = ((hi / tab.step).ceil() as i64 - 1).min(tab.values.len() as i64 - 1);
                (first.max(1)..=last)
                    .map(|k| k as f64 * tab.step)
                    .filter(|&x| x > lo && x < hi)
                    .collect()
            }
        }
    }
}

fn check_mass(mass: f64) -> Result<()> {
    if !(mass.is_finite() && mass >= 0.0) {
        return param(format!("kernel mass must be finite and >= 0, got {mass}"));
    }
    Ok(())
}

/// Link function `phi`. All forms are nondecreasing with `phi(0) = nu` and
/// Lipschitz constant 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkFunction {
    /// `phi(x) = nu + x`.
    Linear { nu: f64 },
    /// `phi(x) = cap - (cap - nu) * exp(-x / (cap - nu))`.
    SaturatingExp { nu: f64, cap: f64 },
    /// `phi(x) = nu + amplitude * tanh(x / amplitude)`.
    Tanh { nu: f64, amplitude: f64 },
}

impl LinkFunction {
    pub fn linear(nu: f64) -> Result<Self> {
        check_nu(nu)?;
        Ok(LinkFunction::Linear { nu })
    }

    pub fn saturating_exp(nu: f64, cap: f64) -> Result<Self> {
        check_nu(nu)?;
        if !(cap.is_finite() && cap > nu) {
            return param(format!("saturating cap must exceed nu = {nu}, got {cap}"));
        }
        Ok(LinkFunction::SaturatingExp { nu, cap })
    }

    pub fn tanh(nu: f64, amplitude: f64) -> Result<Self> {
        check_nu(nu)?;
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return param(format!("tanh amplitude must be > 0, got {amplitude}"));
        }
        Ok(LinkFunction::Tanh { nu, amplitude })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LinkFunction::Linear { nu } => nu + x,
            LinkFunction::SaturatingExp { nu, cap } => {
                let span = cap - nu;
                nu - span * (-x / span).exp_m1()
            }
            LinkFunction::Tanh { nu, amplitude } => nu + amplitude * (x / amplitude).tanh(),
        }
    }

    pub fn phi0(&self) -> f64 {
        match *self {
            LinkFunction::Linear { nu }
            | LinkFunction::SaturatingExp { nu, .. }
            | LinkFunction::Tanh { nu, .. } => nu,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        1.0
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, LinkFunction::Linear { .. })
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu.is_finite() && nu > 0.0) {
        return param(format!("phi(0) = nu must be > 0, got {nu}"));
    }
    Ok(())
}

/// Step function with bounded support: `values[i]` on `(breakpoints[i], breakpoints[i+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TestFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return param(format!(
                "need n + 1 breakpoints for n values, got {} and {}",
                breakpoints.len(),
                values.len()
            ));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return param("test function breakpoints and values must be finite");
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return param("test function breakpoints must be strictly ascending");
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// `value * 1_{(start, end]}`.
    pub fn indicator(start: f64, end: f64, value: f64) -> Result<Self> {
        Self::new(vec![start, end], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(start, end, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo || t > hi {
            return 0.0;
        }
        // first breakpoint >= t closes the piece containing t
        let idx = self.breakpoints.partition_point(|&b| b < t);
        self.values[idx - 1]
    }

    /// `sum_i u(times[i])` for ascending `times`, in one merge pass.
    pub fn sum_over_sorted(&self, times: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut start = times.partition_point(|&t| t <= self.breakpoints[0]);
        for (a, b, v) in self.pieces() {
            debug_assert!(start == times.len() || times[start] > a);
            let end = start + times[start..].partition_point(|&t| t <= b);
            total += v * (end - start) as f64;
            start = end;
        }
        total
    }

    /// `||u||_p^p = sum |v_i|^p (t_{i+1} - t_i)`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        self.pieces()
            .map(|(a, b, v)| v.abs().powf(p) * (b - a))
            .sum()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_norm_pow(p).powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v.abs() * (b - a)).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v * v * (b - a)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l3_norm_cube(&self) -> f64 {
        self.pieces()
            .map(|(a, b, v)| v.abs().powi(3) * (b - a))
            .sum()
    }

    /// Signed integral `int u dt`.
    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v * (b - a)).sum()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map_values(f64::abs)
    }

    pub fn square(&self) -> Self {
        self.map_values(|v| v * v)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_values(|v| c * v)
    }
}

/// Hawkes model parameters `(phi, h)` with `alpha * mu < 1` enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesParams {
    kernel: Kernel,
    link: LinkFunction,
}

impl HawkesParams {
    pub fn new(kernel: Kernel, link: LinkFunction) -> Result<Self> {
        let am = link.lipschitz() * kernel.mass();
        if am >= 1.0 {
            return Err(Error::Stability(am));
        }
        Ok(Self { kernel, link })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn link(&self) -> &LinkFunction {
        &self.link
    }

    pub fn phi0(&self) -> f64 {
        self.link.phi0()
    }

    pub fn alpha(&self) -> f64 {
        self.link.lipschitz()
    }

    pub fn mu(&self) -> f64 {
        self.kernel.mass()
    }

    /// Stability product `alpha * mu`.
    pub fn stability(&self) -> f64 {
        self.alpha() * self.mu()
    }

    pub fn is_linear(&self) -> bool {
        self.link.is_linear()
    }
}

/// Step test function `u = c * 1_{(0, ell]}` normalised so that
/// `(phi0 / (1 - alpha_mu)) * ||u||_2^2 = 1`.
pub fn normalized_indicator(phi0: f64, alpha_mu: f64, ell: f64) -> Result<TestFunction> {
    if !(phi0.is_finite() && phi0 > 0.0) {
        return param(format!("phi0 must be > 0, got {phi0}"));
    }
    if !(0.0..1.0).contains(&alpha_mu) {
        return param(format!("alpha * mu must lie in [0, 1), got {alpha_mu}"));
    }
    if !(ell.is_finite() && ell > 0.0) {
        return param(format!("interval length must be > 0, got {ell}"));
    }
    let value = ((1.0 - alpha_mu) / (phi0 * ell)).sqrt();
    TestFunction::indicator(0.0, ell, value)
}

/// Sorted event times of one realisation on `(t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    times: Vec<f64>,
    t_start: f64,
    t_end: f64,
    burn_in: f64,
    seed: u64,
}

impl EventStream {
    pub fn new(times: Vec<f64>, t_start: f64, t_end: f64, burn_in: f64, seed: u64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return param(format!("invalid window ({t_start}, {t_end}]"));
        }
        if !(burn_in.is_finite() && burn_in >= 0.0) {
            return param(format!("burn-in must be >= 0, got {burn_in}"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return param("event times must be strictly increasing");
        }
        if let Some(t) = times.iter().find(|&&t| !(t > t_start && t <= t_end)) {
            return param(format!("event {t} outside window ({t_start}, {t_end}]"));
        }
        Ok(Self {
            times,
            t_start,
            t_end,
            burn_in,
            seed,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn burn_in(&self) -> f64 {
        self.burn_in
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of events in `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let lo = self.times.partition_point(|&t| t <= a);
        let hi = self.times.partition_point(|&t| t <= b);
        hi.saturating_sub(lo)
    }

    /// Text form: `# window t_start t_end seed`, then one time per line.
    /// Extra `#` lines may follow the header.
    pub fn to_text(&self, extra_comments: &[String]) -> String {
        let mut out = String::with_capacity(self.times.len() * 20 + 64);
        let _ = writeln!(
            out,
            "# window {} {} {}",
            self.t_start, self.t_end, self.seed
        );
        let _ = writeln!(out, "# burn_in {}", self.burn_in);
        for c in extra_comments {
            let _ = writeln!(out, "# {}", c.trim_start_matches('#').trim_start());
        }
        for t in &self.times {
            let _ = writeln!(out, "{t}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parameter("empty event stream".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "#" || fields[1] != "window" {
            return param(format!("bad event stream header: {header:?}"));
        }
        let parse_f = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parameter(format!("bad number {s:?}: {e}")))
        };
        let t_start = parse_f(fields[2])?;
        let t_end = parse_f(fields[3])?;
        let seed = fields[4]
            .parse::<u64>()
            .map_err(|e| Error::Parameter(format!("bad seed {:?}: {e}", fields[4])))?;
        let mut burn_in = 0.0;
        let mut times = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut it = comment.split_whitespace();
                while let Some(key) = it.next() {
                    if key == "burn_in" {
                        if let Some(v) = it.next() {
                            burn_in = parse_f(v)?;
                        }
                    }
                }
                continue;
            }
            times.push(parse_f(line)?);
        }
        Self::new(times, t_start, t_end, burn_in, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn normalized_indicator_degenerate_unit() {
        let u = normalized_indicator(1.0, 0.0, 1.0).unwrap();
        assert_eq!(u.values(), &[1.0]);
        assert_eq!(u.l2_norm_sq(), 1.0);
    }

    #[test]
    fn normalized_indicator_norms() {
        for &(phi0, am, ell) in &[(1.0, 0.1, 100.0), (2.5, 0.4, 7.0), (0.3, 0.9, 1e3)] {
            let u = normalized_indicator(phi0, am, ell).unwrap();
            assert!((u.l2_norm_sq() - (1.0 - am) / phi0).abs() < 1e-14);
            assert!((u.l1_norm() - ((1.0 - am) * ell / phi0).sqrt()).abs() < 1e-12);
        }
        let u = normalized_indicator(1.0, 0.1, 100.0).unwrap();
        assert!((u.values()[0] - 0.094_868_329_805_051_38).abs() < 1e-15);
        // numeric check of the normalisation: int u^2 over (0, 100]
        let num = riemann(|t| u.eval(t).powi(2), 0.0, 100.0, 100_000);
        assert!((num - 0.9).abs() < 1e-10);
    }

    #[test]
    fn normalized_indicator_rejects_bad_domain() {
        assert!(normalized_indicator(0.0, 0.1, 1.0).is_err());
        assert!(normalized_indicator(1.0, 1.0, 1.0).is_err());
        assert!(normalized_indicator(1.0, -0.1, 1.0).is_err());
        assert!(normalized_indicator(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn kernel_vanishes_off_positive_axis() {
        let kernels = [
            Kernel::exponential(2.0, 0.5).unwrap(),
            Kernel::boxcar(1.5, 0.3).unwrap(),
            Kernel::tabulate(|t| (-t).exp(), 5.0, 1e-2).unwrap(),
        ];
        for k in &kernels {
            assert_eq!(k.eval(0.0), 0.0);
            assert_eq!(k.eval(-1.0), 0.0);
            assert!(k.eval(0.01) > 0.0);
        }
    }

    #[test]
    fn kernel_mass_matches_fine_quadrature() {
        let kernels = [
            Kernel::exponential(2.0, 0.5).unwrap(),
            Kernel::exponential(0.25, 0.9).unwrap(),
            Kernel::boxcar(1.5, 0.3).unwrap(),
        ];
        for k in &kernels {
            let end = k.support_end().unwrap_or(80.0 / 0.25);
            let num = riemann(|t| k.eval(t), 0.0, end, 2_000_000);
            assert!((num - k.mass()).abs() <= 1e-6 * k.mass(), "{k:?}: {num}");
        }
        let tab = Kernel::tabulate(|t| (-t).exp(), 20.0, 1e-3).unwrap();
        assert!((tab.mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn box_kernel_is_closed_at_width() {
        let k = Kernel::boxcar(2.0, 0.4).unwrap();
        assert_eq!(k.eval(2.0), 0.2);
        assert_eq!(k.eval(2.0 + 1e-12), 0.0);
        assert!((k.tail_mass(1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tabulated_envelope_dominates_and_is_nonincreasing() {
        // a bump: rises then falls
        let k = Kernel::tabulate(|t| t * (-t).exp(), 10.0, 0.05).unwrap();
        assert!(!k.is_nonincreasing());
        let mut prev = f64::INFINITY;
        for i in 0..2100 {
            let t = i as f64 * 0.005;
            let e = k.envelope(t);
            assert!(e >= k.eval(t));
            assert!(e <= prev);
            prev = e;
        }
        assert!(k.envelope(0.0) >= k.at_origin());
    }

    #[test]
    fn tabulated_tail_mass_is_exact_for_piecewise_linear() {
        let k = Kernel::tabulated(1.0, vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(k.mass(), 2.0);
        assert!((k.tail_mass(0.5) - (2.0 - 0.5 * (2.0 + 1.5) * 0.5)).abs() < 1e-15);
        assert_eq!(k.tail_mass(3.0), 0.0);
    }

    #[test]
    fn stability_is_enforced() {
        let link = LinkFunction::linear(1.0).unwrap();
        assert!(HawkesParams::new(Kernel::exponential(1.0, 0.99).unwrap(), link).is_ok());
        match HawkesParams::new(Kernel::exponential(1.0, 1.0).unwrap(), link) {
            Err(Error::Stability(am)) => assert_eq!(am, 1.0),
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn links_reject_bad_parameters() {
        assert!(LinkFunction::linear(0.0).is_err());
        assert!(LinkFunction::saturating_exp(1.0, 1.0).is_err());
        assert!(LinkFunction::tanh(1.0, 0.0).is_err());
    }

    #[test]
    fn test_function_eval_is_left_open_right_closed() {
        let u = TestFunction::new(vec![0.0, 1.0, 3.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(u.eval(0.0), 0.0);
        assert_eq!(u.eval(1.0), 2.0);
        assert_eq!(u.eval(1.5), -1.0);
        assert_eq!(u.eval(3.0), -1.0);
        assert_eq!(u.eval(3.1), 0.0);
        assert_eq!(
            u.sum_over_sorted(&[-1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0]),
            2.0 + 2.0 - 1.0 - 1.0
        );
        assert_eq!(u.integral(), 0.0);
    }

    #[test]
    fn test_function_rejects_malformed_input() {
        assert!(TestFunction::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(TestFunction::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(TestFunction::new(vec![0.0, f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn event_stream_text_round_trip() {
        let s =
            EventStream::new(vec![0.1, 0.2 + 1e-17, 1.0 / 3.0, 7.5], 0.0, 10.0, 2.5, 99).unwrap();
        let text = s.to_text(&["burn_in 2.5".to_string()]);
        assert!(text.starts_with("# window 0 10 99\n"));
        assert_eq!(EventStream::from_text(&text).unwrap(), s);
    }

    #[test]
    fn event_stream_rejects_unsorted_or_outside() {
        assert!(EventStream::new(vec![0.5, 0.5], 0.0, 1.0, 0.0, 0).is_err());
        assert!(EventStream::new(vec![0.0], 0.0, 1.0, 0.0, 0).is_err());
        assert!(EventStream::new(vec![1.0], 0.0, 1.0, 0.0, 0).is_ok());
        assert_eq!(
            EventStream::new(vec![0.2, 0.4, 0.9], 0.0, 1.0, 0.0, 0)
                .unwrap()
                .count_in(0.2, 0.9),
            2
        );
    }

    proptest! {
        #[test]
        fn link_is_lipschitz_and_monotone(
            nu in 0.01f64..5.0, extra in 0.01f64..5.0, which in 0usize..3,
            x in 0.0f64..50.0, y in 0.0f64..50.0,
        ) {
            let link = match which {
                0 => LinkFunction::linear(nu).unwrap(),
                1 => LinkFunction::saturating_exp(nu, nu + extra).unwrap(),
                _ => LinkFunction::tanh(nu, extra).unwrap(),
            };
            prop_assert_eq!(link.eval(0.0), link.phi0());
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(link.eval(lo) <= link.eval(hi));
            let diff = (link.eval(x) - link.eval(y)).abs();
            prop_assert!(diff <= link.lipschitz() * (x - y).abs() * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn step_norms_match_riemann_sums(
            values in proptest::collection::vec(-3.0f64..3.0, 1..6),
            widths in proptest::collection::vec(1usize..8, 6),
        ) {
            // breakpoints on a 1/8 grid so a midpoint rule is exact
            let mut bps = vec![0.0];
            for w in widths.iter().take(values.len()) {
                let last = *bps.last().unwrap();
                bps.push(last + *w as f64 / 8.0);
            }
            let u = TestFunction::new(bps.clone(), values).unwrap();
            let end = *bps.last().unwrap();
            let n = (end * 64.0).round() as usize;
            for p in [1.0, 2.0, 3.0, 4.0] {
                let num = riemann(|t| u.eval(t).abs().powf(p), 0.0, end, n);
                prop_assert!((num - u.lp_norm_pow(p)).abs() <= 1e-10 * (1.0 + num));
            }
            // ||u^2||_2 = ||u||_4^2
            let lhs = u.square().l2_norm();
            let rhs = u.lp_norm(4.0).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }
}
