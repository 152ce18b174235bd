//! Normal special functions and one-dimensional distances to `N(0, 1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;
use rand::Rng;

use crate::error::{Error, Result};
use crate::simulator::replication_rng;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
///
/// Acklam's rational approximation (relative error ~1e-9) refined by two
/// Halley steps on `normal_cdf`.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs q in (0, 1), got {q}"
        )));
    }
    let mut x = acklam(q);
    for _ in 0..2 {
        let err = normal_cdf(x) - q;
        let pdf = normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let u = err / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    if p < P_LOW {
        tail(p)
    } else if p > 1.0 - P_LOW {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `int_{-inf}^x normal_cdf`.
fn cdf_antiderivative(x: f64) -> f64 {
    x * normal_cdf(x) + normal_pdf(x)
}

/// Sorted sample of replicated statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    provenance: String,
}

impl SampleSet {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientSamples {
                got: values.len(),
                need: 2,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("sample values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            provenance: String::new(),
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (self.len() - 1) as f64
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.len() as f64).sqrt()
    }
}

/// Quantiles `Phi^{-1}(i / M)`, `i = 1..M-1`, where the empirical CDF of a
/// sample of size `M` crosses `Phi`.
fn crossing_points(m: usize) -> Vec<f64> {
    (1..m)
        .map(|i| normal_quantile(i as f64 / m as f64).expect("i / M lies in (0, 1)"))
        .collect()
}

fn w1_sorted(xs: &[f64], crossings: &[f64]) -> f64 {
    let m = xs.len();
    let first = xs[0];
    let last = xs[m - 1];
    let mut total = cdf_antiderivative(first);
    total += normal_pdf(last) - last * normal_cdf(-last);
    for i in 1..m {
        let (a, b) = (xs[i - 1], xs[i]);
        if b <= a {
            continue;
        }
        let c = i as f64 / m as f64;
        let r = crossings[i - 1];
        // int_a^b |c - Phi|; Phi - c changes sign at r
        let below =
            |lo: f64, hi: f64| c * (hi - lo) - (cdf_antiderivative(hi) - cdf_antiderivative(lo));
        total += if r <= a {
            -below(a, b)
        } else if r >= b {
            below(a, b)
        } else {
            below(a, r) - below(r, b)
        };
    }
    total.max(0.0)
}

/// Wasserstein-1 distance between the empirical law of `s` and `N(0, 1)`,
/// `int |F_M(x) - Phi(x)| dx`, integrated exactly piece by piece.
pub fn empirical_w1_to_normal(s: &SampleSet) -> f64 {
    w1_sorted(&s.values, &crossing_points(s.len()))
}

/// One-sample Kolmogorov statistic `sup_x |F_M(x) - Phi(x)|`.
pub fn kolmogorov_to_normal(s: &SampleSet) -> f64 {
    let m = s.len() as f64;
    s.values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let p = normal_cdf(x);
            ((i as f64 + 1.0) / m - p).max(p - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Nonparametric bootstrap standard error of `statistic`.
pub fn bootstrap_se(
    s: &SampleSet,
    resamples: usize,
    seed: u64,
    statistic: impl Fn(&[f64]) -> f64,
) -> f64 {
    if resamples < 2 {
        return f64::NAN;
    }
    let m = s.len();
    let mut rng = replication_rng(seed, u64::MAX - 1);
    let mut buf = vec![0.0; m];
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = s.values[rng.random_range(0..m)];
            }
            buf.sort_by(f64::total_cmp);
            statistic(&buf)
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    (stats.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt()
}

/// Bootstrap standard error of [`empirical_w1_to_normal`].
pub fn bootstrap_w1_se(s: &SampleSet, resamples: usize, seed: u64) -> f64 {
    let crossings = crossing_points(s.len());
    bootstrap_se(s, resamples, seed, |xs| w1_sorted(xs, &crossings))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples { got: 0, need: 1 });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok((d, kolmogorov_survival(lambda)))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Result of the Gaussian confidence-interval recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CiOutcome {
    /// `P(lower < X <= upper) >= coverage_floor`.
    Feasible {
        lower: f64,
        upper: f64,
        coverage_floor: f64,
    },
    /// `2 sqrt(bound) > beta / 2`; `min_beta = 4 sqrt(bound)` is the smallest
    /// level that would work (none in `(0, 1/2)` when it is `>= 1/2`).
    Infeasible { min_beta: f64 },
}

/// Interval `(Phi^{-1}(beta/2), Phi^{-1}(1 - beta/2)]` with coverage at least
/// `1 - 2 beta` for any `X` with `d_W(X, Z) <= bound`, valid when
/// `2 sqrt(bound) <= beta / 2` (Kolmogorov distance is at most
/// `2 sqrt(d_W)` against the standard normal).
pub fn confidence_interval(bound: f64, beta: f64) -> Result<CiOutcome> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Domain(format!(
            "beta must lie in (0, 1/2), got {beta}"
        )));
    }
    if !(bound.is_finite() && bound >= 0.0) {
        return Err(Error::Parameter(format!(
            "bound must be finite and >= 0, got {bound}"
        )));
    }
    let kolmogorov = 2.0 * bound.sqrt();
    // relative slack absorbs rounding at the exact boundary
    if kolmogorov > 0.5 * beta * (1.0 + 1e-12) {
        return Ok(CiOutcome::Infeasible {
            min_beta: 4.0 * bound.sqrt(),
        });
    }
    Ok(CiOutcome::Feasible {
        lower: normal_quantile(0.5 * beta)?,
        upper: normal_quantile(1.0 - 0.5 * beta)?,
        coverage_floor: 1.0 - 2.0 * beta,
    })
}

/// `sqrt(2 / pi)`, the mean absolute value of a standard normal.
pub fn sqrt_two_over_pi() -> f64 {
    (2.0 / PI).sqrt()
}
