//! Kernel numerics: norms, the resolvent `Psi = sum_{i>=1} alpha^i h^{*i}`
//! and the resolvent-weighted cross energy of two step functions.
//!
//! The resolvent is the solution of the renewal equation
//!
//! ```text
//! Psi(t) = alpha h(t) + alpha int_0^t h(t - s) Psi(s) ds
//! ```
//!
//! discretised with `Psi` piecewise linear on a uniform grid and the kernel
//! integrated exactly against the hat functions (product integration). The
//! discrete system is lower triangular, so its fixed point is obtained by one
//! forward sweep; Picard iteration converges to the same vector.

use crate::error::{Error, Result};
use crate::model::{Kernel, TestFunction};

/// Default grid step of resolvent tables.
pub const DEFAULT_RESOLVENT_STEP: f64 = 1e-3;

/// `||h||_{L^1}`.
pub fn l1_norm(kernel: &Kernel) -> f64 {
    kernel.mass()
}

/// `||h||_{L^2}`: closed form for the parametric kernels, exact for the
/// piecewise-linear interpolant of a table.
pub fn l2_norm(kernel: &Kernel) -> f64 {
    match kernel {
        Kernel::Exponential { rate, mass } => mass * (rate / 2.0).sqrt(),
        Kernel::Box { width, mass } => mass / width.sqrt(),
        Kernel::Tabulated(tab) => {
            let dt = tab.step();
            tab.values()
                .windows(2)
                .map(|w| dt * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0)
                .sum::<f64>()
                .sqrt()
        }
    }
}

/// Tabulated resolvent on `k * step`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventTable {
    step: f64,
    alpha: f64,
    values: Vec<f64>,
    // int_0^{t_k} Psi and int_0^{t_k} int_0^y Psi, exact for the interpolant
    first_integral: Vec<f64>,
    second_integral: Vec<f64>,
    total_mass: f64,
}

impl ResolventTable {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// `alpha mu / (1 - alpha mu)`, the mass of the untruncated resolvent.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `int_0^T Psi`.
    pub fn mass(&self) -> f64 {
        *self.first_integral.last().unwrap()
    }

    /// Mass not captured by the table, `alpha mu / (1 - alpha mu) - int_0^T Psi`,
    /// floored at zero.
    pub fn tail_bound(&self) -> f64 {
        (self.total_mass - self.mass()).max(0.0)
    }

    /// The identically zero resolvent on `[0, horizon]`.
    pub fn zero(step: f64, horizon: f64) -> Result<Self> {
        let k = grid_len(step, horizon)?;
        Ok(Self::from_values(step, 0.0, vec![0.0; k + 1], 0.0))
    }

    fn from_values(step: f64, alpha: f64, values: Vec<f64>, total_mass: f64) -> Self {
        let n = values.len();
        let mut first = vec![0.0; n];
        let mut second = vec![0.0; n];
        for k in 0..n - 1 {
            let (p0, p1) = (values[k], values[k + 1]);
            first[k + 1] = first[k] + 0.5 * step * (p0 + p1);
            second[k + 1] = second[k] + step * (first[k] + step * (p0 / 3.0 + p1 / 6.0));
        }
        Self {
            step,
            alpha,
            values,
            first_integral: first,
            second_integral: second,
            total_mass,
        }
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let pos = x / self.step;
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        (k, pos - k as f64)
    }

    /// `Psi(x)` by linear interpolation; zero for `x < 0` and beyond the horizon.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.horizon() {
            return 0.0;
        }
        let (k, th) = self.locate(x);
        self.values[k] * (1.0 - th) + self.values[k + 1] * th
    }

    /// `int_0^x Psi`, clamped to the table horizon.
    pub fn integral(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(self.horizon());
        let (k, th) = self.locate(x);
        let (p0, p1) = (self.values[k], self.values[k + 1]);
        self.first_integral[k] + self.step * (p0 * th + 0.5 * (p1 - p0) * th * th)
    }

    /// `int_0^x int_0^y Psi(z) dz dy` for `0 <= x <= horizon`.
    pub fn double_integral(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (k, th) = self.locate(x.min(self.horizon()));
        let (p0, p1) = (self.values[k], self.values[k + 1]);
        let h = self.step;
        self.second_integral[k]
            + h * (self.first_integral[k] * th
                + h * (p0 * th * th / 2.0 + (p1 - p0) * th * th * th / 6.0))
    }

    /// Sup-norm of `Psi - (alpha h + alpha h * Psi)` on the grid, using the
    /// same product-integration rule as the solver. Cost is quadratic in the
    /// grid length.
    pub fn renewal_residual(&self, kernel: &Kernel) -> f64 {
        let k_max = self.values.len() - 1;
        let weights = HatWeights::new(kernel, self.step, k_max);
        let psi = &self.values;
        (0..=k_max)
            .map(|k| {
                let conv = weights.convolve_at(psi, k);
                let rhs = self.alpha * (node_value(kernel, k, self.step) + conv);
                (psi[k] - rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn grid_len(step: f64, horizon: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Parameter(format!(
            "grid step must be > 0, got {step}"
        )));
    }
    if !(horizon.is_finite() && horizon >= step) {
        return Err(Error::Parameter(format!(
            "horizon must be >= grid step {step}, got {horizon}"
        )));
    }
    Ok((horizon / step).round() as usize)
}

fn node_value(kernel: &Kernel, k: usize, step: f64) -> f64 {
    if k == 0 {
        kernel.at_origin()
    } else {
        kernel.eval(k as f64 * step)
    }
}

/// Integrals of `h` against the two halves of a hat function, cell by cell:
/// `right[m] = int_{cell m} h (1 - xi)`, `left[m] = int_{cell m} h xi` with
/// `xi = x / step - m`.
struct HatWeights {
    right: Vec<f64>,
    left: Vec<f64>,
}

impl HatWeights {
    fn new(kernel: &Kernel, step: f64, cells: usize) -> Self {
        let mut right = Vec::with_capacity(cells);
        let mut left = Vec::with_capacity(cells);
        match kernel {
            Kernel::Exponential { rate, mass } => {
                let b = rate * step;
                let (i0, i1) = exp_moments(b);
                let decay = (-b).exp();
                let mut base = mass * rate * step;
                for _ in 0..cells {
                    right.push(base * (i0 - i1));
                    left.push(base * i1);
                    base *= decay;
                }
            }
            _ => {
                // h is piecewise linear between kinks: two-point Gauss is exact
                let g = 0.5 / 3f64.sqrt();
                for m in 0..cells {
                    let lo = m as f64 * step;
                    let hi = lo + step;
                    let mut cuts = vec![lo];
                    cuts.extend(kernel.kinks_in(lo, hi));
                    cuts.push(hi);
                    let (mut r, mut l) = (0.0, 0.0);
                    for w in cuts.windows(2) {
                        let (a, c) = (w[0], w[1]);
                        let half = 0.5 * (c - a);
                        let mid = 0.5 * (a + c);
                        for x in [mid - 2.0 * g * half, mid + 2.0 * g * half] {
                            let hx = kernel.eval(x) * half;
                            let xi = x / step - m as f64;
                            r += hx * (1.0 - xi);
                            l += hx * xi;
                        }
                    }
                    right.push(r);
                    left.push(l);
                }
            }
        }
        Self { right, left }
    }

    /// `int_0^{t_k} h(t_k - s) Psi(s) ds` for piecewise-linear `Psi`.
    fn convolve_at(&self, psi: &[f64], k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let mut acc = psi[0] * self.left[k - 1] + psi[k] * self.right[0];
        for j in 1..k {
            acc += psi[j] * (self.left[k - 1 - j] + self.right[k - j]);
        }
        acc
    }
}

/// `(int_0^1 e^{-b x} dx, int_0^1 x e^{-b x} dx)`.
fn exp_moments(b: f64) -> (f64, f64) {
    if b < 0.05 {
        // series: sum (-b)^n / (n! (n + 1)), sum (-b)^n / (n! (n + 2))
        let (mut i0, mut i1) = (0.0, 0.0);
        let mut term = 1.0;
        for n in 0..20 {
            i0 += term / (n as f64 + 1.0);
            i1 += term / (n as f64 + 2.0);
            term *= -b / (n as f64 + 1.0);
        }
        (i0, i1)
    } else {
        let e = (-b).exp();
        let one_minus = -(-b).exp_m1();
        (one_minus / b, (one_minus - b * e) / (b * b))
    }
}

/// Horizon beyond which the resolvent keeps less than `1e-6` of its mass.
///
/// For an exponential kernel `Psi` decays at rate `beta (1 - alpha mu)`; for a
/// compactly supported kernel the `i`-th convolution power lives on
/// `[0, i * support]` and carries mass `(alpha mu)^i`.
pub fn default_resolvent_horizon(kernel: &Kernel, alpha: f64) -> f64 {
    let am = alpha * kernel.mass();
    if am <= 0.0 {
        return kernel.support_end().unwrap_or(1.0).max(1.0);
    }
    let rel = 1e-6_f64;
    match kernel {
        Kernel::Exponential { rate, .. } => (1.0 / rel).ln() / (rate * (1.0 - am)),
        _ => {
            let support = kernel.support_end().unwrap();
            let n = (rel.ln() / am.ln()).ceil().max(1.0);
            n * support
        }
    }
}

/// Resolvent table of `alpha h` on `[0, horizon]` with the given grid step.
pub fn resolvent(kernel: &Kernel, alpha: f64, step: f64, horizon: f64) -> Result<ResolventTable> {
    solve_resolvent(kernel, alpha, step, horizon, false)
}

pub(crate) fn solve_resolvent(
    kernel: &Kernel,
    alpha: f64,
    step: f64,
    horizon: f64,
    force_direct: bool,
) -> Result<ResolventTable> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::Parameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let am = alpha * kernel.mass();
    if am >= 1.0 {
        return Err(Error::Stability(am));
    }
    let k_max = grid_len(step, horizon)?;
    if am == 0.0 {
        return Ok(ResolventTable::from_values(
            step,
            alpha,
            vec![0.0; k_max + 1],
            0.0,
        ));
    }
    let weights = HatWeights::new(kernel, step, k_max.max(1));
    let diag = 1.0 - alpha * weights.right[0];
    if diag <= 0.0 {
        return Err(Error::Numeric(format!(
            "grid step {step} too coarse for kernel peak (1 - alpha w0 = {diag})"
        )));
    }
    let mut psi = vec![0.0; k_max + 1];
    psi[0] = alpha * kernel.at_origin();
    match kernel {
        Kernel::Exponential { rate, .. } if !force_direct => {
            // geometric weights: carry the two lagged sums forward
            let q = (-rate * step).exp();
            let (b0, a0) = (weights.left[0], weights.right[0]);
            let (mut with_origin, mut interior) = (psi[0], 0.0);
            for k in 1..=k_max {
                let explicit = b0 * with_origin + a0 * interior;
                psi[k] = alpha * (node_value(kernel, k, step) + explicit) / diag;
                with_origin = q * with_origin + psi[k];
                interior = q * (interior + psi[k]);
            }
        }
        _ => {
            for k in 1..=k_max {
                let mut explicit = psi[0] * weights.left[k - 1];
                for j in 1..k {
                    explicit += psi[j] * (weights.left[k - 1 - j] + weights.right[k - j]);
                }
                psi[k] = alpha * (node_value(kernel, k, step) + explicit) / diag;
            }
        }
    }
    if psi.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Numeric(
            "resolvent produced a negative or non-finite value".into(),
        ));
    }
    Ok(ResolventTable::from_values(
        step,
        alpha,
        psi,
        am / (1.0 - am),
    ))
}

/// `int int_{s > t} |f(t)| Psi(s - t) |g(s)| ds dt` for step functions `f`, `g`.
///
/// Fails with [`Error::Horizon`] when `sup supp g - inf supp f` exceeds the
/// table horizon.
pub fn cross_energy(f: &TestFunction, g: &TestFunction, psi: &ResolventTable) -> Result<f64> {
    let required = g.support().1 - f.support().0;
    if required > psi.horizon() * (1.0 + 1e-12) {
        return Err(Error::Horizon {
            horizon: psi.horizon(),
            required,
        });
    }
    let p2 = |x: f64| psi.double_integral(x);
    let mut total = 0.0;
    for (a, b, fv) in f.pieces() {
        if fv == 0.0 {
            continue;
        }
        for (c, d, gv) in g.pieces() {
            if gv == 0.0 || d <= a {
                continue;
            }
            let block = p2(d - a) - p2(c - a) - p2(d - b) + p2(c - b);
            total += fv.abs() * gv.abs() * block;
        }
    }
    Ok(total.max(0.0))
}
