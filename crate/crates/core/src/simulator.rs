//! Hawkes event generation.
//!
//! [`simulate`] is Ogata-style thinning of a unit-rate Poisson field: after
//! every candidate the dominating rate is `phi` of the envelope excitation,
//! which cannot increase until the next accepted event because kernel
//! envelopes are nonincreasing and `phi` is nondecreasing.
//!
//! [`embedding_simulate`] builds the iterates `N^(1), N^(2), ...` of the
//! Poisson-embedding recursion from one shared planar Poisson field, which is
//! only practical at small scale and serves as an independent construction
//! of the same law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::default_resolvent_horizon;
use crate::model::{EventStream, HawkesParams, Kernel};

/// One simulation request. Events are generated on `(-burn_in, horizon]` and
/// reported on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: HawkesParams,
    pub horizon: f64,
    pub burn_in: f64,
    pub seed: u64,
    pub replication: u64,
}

impl SimConfig {
    pub fn new(params: HawkesParams, horizon: f64, burn_in: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            params,
            horizon,
            burn_in,
            seed,
            replication: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_replication(&self, replication: u64) -> Self {
        Self {
            replication,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Parameter(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if !(self.burn_in.is_finite() && self.burn_in >= 0.0) {
            return Err(Error::Parameter(format!(
                "burn-in must be >= 0, got {}",
                self.burn_in
            )));
        }
        let am = self.params.stability();
        if am >= 1.0 {
            return Err(Error::Stability(am));
        }
        Ok(())
    }
}

/// Independent stream for replication `rep` of a run seeded with `seed`.
/// ChaCha is counter based, so each `(seed, rep)` pair addresses its own
/// keystream and parallel and serial runs draw identical numbers.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Burn-in after which the resolvent keeps less than `1e-4` of its mass;
/// the transient from the empty past decays like the resolvent tail.
pub fn default_burn_in(params: &HawkesParams) -> f64 {
    let am = params.stability();
    if am <= 0.0 {
        return 0.0;
    }
    let rel = 1e-4_f64;
    match params.kernel() {
        Kernel::Exponential { rate, .. } => (1.0 / rel).ln() / (rate * (1.0 - am)),
        k => (rel.ln() / am.ln()).ceil().max(1.0) * k.support_end().unwrap(),
    }
}

#[inline]
fn exp_draw(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Running excitation `S(t) = sum_{T_i < t} h(t - T_i)` for nondecreasing query times.
enum Tracker<'a> {
    /// O(1) Markov recursion for exponential kernels.
    Markov {
        rate: f64,
        jump: f64,
        last: f64,
        after: f64,
    },
    /// Sum over events still inside the kernel support.
    Window {
        kernel: &'a Kernel,
        support: f64,
        active: std::collections::VecDeque<f64>,
    },
}

impl<'a> Tracker<'a> {
    fn new(kernel: &'a Kernel) -> Self {
        match kernel {
            Kernel::Exponential { rate, mass } => Tracker::Markov {
                rate: *rate,
                jump: mass * rate,
                last: f64::NEG_INFINITY,
                after: 0.0,
            },
            k => Tracker::Window {
                kernel: k,
                support: k.support_end().unwrap(),
                active: Default::default(),
            },
        }
    }

    fn prune(&mut self, t: f64) {
        if let Tracker::Window {
            support, active, ..
        } = self
        {
            while let Some(&front) = active.front() {
                if t - front > *support {
                    active.pop_front();
                } else {
                    break;
                }
            }
        }
    }

    /// `S(t)` counting events strictly before `t`.
    fn value(&mut self, t: f64) -> f64 {
        self.prune(t);
        match self {
            Tracker::Markov {
                rate, last, after, ..
            } => {
                if *after == 0.0 {
                    0.0
                } else {
                    *after * (-*rate * (t - *last)).exp()
                }
            }
            Tracker::Window { kernel, active, .. } => {
                active.iter().map(|&s| kernel.eval(t - s)).sum()
            }
        }
    }

    /// Nonincreasing majorant of `S` on `(t, next event]`, counting events `<= t`.
    fn envelope(&mut self, t: f64) -> f64 {
        self.prune(t);
        match self {
            Tracker::Markov {
                rate, last, after, ..
            } => {
                if *after == 0.0 {
                    0.0
                } else {
                    *after * (-*rate * (t - *last)).exp()
                }
            }
            Tracker::Window { kernel, active, .. } => {
                active.iter().map(|&s| kernel.envelope(t - s)).sum()
            }
        }
    }

    /// Registers an event at `t`; `value_before` is `S(t)`.
    fn push(&mut self, t: f64, value_before: f64) -> f64 {
        match self {
            Tracker::Markov {
                jump, last, after, ..
            } => {
                *last = t;
                *after = value_before + *jump;
                *after
            }
            Tracker::Window { active, .. } => {
                active.push_back(t);
                f64::NAN
            }
        }
    }
}

/// Everything needed to evaluate `lambda(t)` exactly on the simulated window.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPath {
    params: HawkesParams,
    /// All events including the burn-in prefix.
    events: Vec<f64>,
    /// `S(T_i+)` after each event, exponential kernels only.
    markov_after: Option<Vec<f64>>,
    start: f64,
    end: f64,
}

impl IntensityPath {
    pub fn params(&self) -> &HawkesParams {
        &self.params
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    /// Simulated window `[-burn_in, horizon]`.
    pub fn window(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    /// Builds a path from externally supplied events (sorted, inside the window).
    pub fn from_events(
        params: HawkesParams,
        events: Vec<f64>,
        start: f64,
        end: f64,
    ) -> Result<Self> {
        if events.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "events must be strictly increasing".into(),
            ));
        }
        if events.iter().any(|&t| t < start || t > end) {
            return Err(Error::Parameter("events must lie inside the window".into()));
        }
        let markov_after = match params.kernel() {
            Kernel::Exponential { rate, mass } => {
                let mut after = Vec::with_capacity(events.len());
                let mut prev: Option<(f64, f64)> = None;
                for &t in &events {
                    let before = prev.map_or(0.0, |(s, a)| a * (-rate * (t - s)).exp());
                    let a = before + mass * rate;
                    after.push(a);
                    prev = Some((t, a));
                }
                Some(after)
            }
            _ => None,
        };
        Ok(Self {
            params,
            events,
            markov_after,
            start,
            end,
        })
    }

    /// Index of the first event `>= t`, i.e. the number of events strictly before `t`.
    pub(crate) fn events_before(&self, t: f64) -> usize {
        self.events.partition_point(|&s| s < t)
    }

    /// Excitation `S(t)` from events strictly before `t` (no window check).
    pub(crate) fn excitation(&self, t: f64) -> f64 {
        let k = self.events_before(t);
        self.excitation_from(k, t)
    }

    /// Excitation at `t` given that exactly the first `k` events precede `t`.
    pub(crate) fn excitation_from(&self, k: usize, t: f64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let kernel = self.params.kernel();
        match (&self.markov_after, kernel) {
            (Some(after), Kernel::Exponential { rate, .. }) => {
                after[k - 1] * (-rate * (t - self.events[k - 1])).exp()
            }
            _ => {
                let support = kernel.support_end().unwrap_or(f64::INFINITY);
                self.events[..k]
                    .iter()
                    .rev()
                    .take_while(|&&s| t - s <= support)
                    .map(|&s| kernel.eval(t - s))
                    .sum()
            }
        }
    }
}

/// `lambda(t) = phi(sum_{T_i < t} h(t - T_i))`, the left-continuous intensity.
pub fn intensity_at(path: &IntensityPath, t: f64) -> Result<f64> {
    if !(t >= path.start && t <= path.end) {
        return Err(Error::OutsideWindow {
            t,
            start: path.start,
            end: path.end,
        });
    }
    Ok(path.params.link().eval(path.excitation(t)))
}

/// Thinning simulation of one replication.
pub fn simulate(cfg: &SimConfig) -> Result<(EventStream, IntensityPath)> {
    cfg.validate()?;
    let params = &cfg.params;
    let link = params.link();
    let mut rng = replication_rng(cfg.seed, cfg.replication);
    let mut tracker = Tracker::new(params.kernel());
    let start = -cfg.burn_in;
    let end = cfg.horizon;

    let expected = params.phi0() / (1.0 - params.stability()) * (end - start);
    let mut events: Vec<f64> = Vec::with_capacity((expected * 1.1) as usize + 16);
    let mut markov: Vec<f64> = Vec::new();
    let is_markov = matches!(tracker, Tracker::Markov { .. });
    if is_markov {
        markov.reserve(events.capacity());
    }

    let mut t = start;
    loop {
        let bound = link.eval(tracker.envelope(t));
        let candidate = t + exp_draw(&mut rng, bound);
        if candidate > end {
            break;
        }
        if candidate <= t {
            continue;
        }
        let s = tracker.value(candidate);
        let lambda = link.eval(s);
        if lambda > bound * (1.0 + 1e-12) {
            return Err(Error::DominatingRate {
                time: candidate,
                intensity: lambda,
                bound,
            });
        }
        // intensity equal to the bound is accepted without a draw
        let accept = lambda >= bound || rng.random::<f64>() * bound < lambda;
        if accept {
            let after = tracker.push(candidate, s);
            events.push(candidate);
            if is_markov {
                markov.push(after);
            }
        }
        t = candidate;
    }

    let first_reported = events.partition_point(|&x| x <= 0.0);
    let stream = EventStream::new(
        events[first_reported..].to_vec(),
        0.0,
        end,
        cfg.burn_in,
        cfg.seed,
    )?;
    let path = IntensityPath {
        params: params.clone(),
        events,
        markov_after: is_markov.then_some(markov),
        start,
        end,
    };
    Ok((stream, path))
}

/// Iterates of the Poisson-embedding recursion driven by one planar Poisson
/// field on `(-burn_in, horizon] x (0, z_cap]`: `lambda^(0) = 0`,
/// `N^(n)` = field points under `lambda^(n)`, `lambda^(n+1) = phi(h * N^(n))`.
///
/// Returns `N^(1), ..., N^(n_iters)` on `(0, horizon]`. The sets increase
/// with `n`. Fails with [`Error::Truncation`] if some `lambda^(n)` exceeds
/// `z_cap`, in which case the truncated field cannot represent the iterate.
pub fn embedding_simulate(cfg: &SimConfig, n_iters: usize, z_cap: f64) -> Result<Vec<EventStream>> {
    cfg.validate()?;
    if n_iters == 0 {
        return Err(Error::Parameter("n_iters must be >= 1".into()));
    }
    if !(z_cap.is_finite() && z_cap > 0.0) {
        return Err(Error::Parameter(format!(
            "z_cap must be finite and > 0, got {z_cap}"
        )));
    }
    let params = &cfg.params;
    let link = params.link();
    let kernel = params.kernel();
    let start = -cfg.burn_in;
    let end = cfg.horizon;

    let mut rng = replication_rng(cfg.seed, cfg.replication);
    let mut field: Vec<(f64, f64)> = Vec::new();
    let mut t = start;
    loop {
        t += exp_draw(&mut rng, z_cap);
        if t > end {
            break;
        }
        let z = z_cap * (1.0 - rng.random::<f64>());
        field.push((t, z));
    }

    let mut previous: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(n_iters);
    for _ in 0..n_iters {
        // sup of lambda^(n) is reached right after an event of N^(n-1)
        let mut sup_tracker = Tracker::new(kernel);
        let (mut worst_t, mut worst) = (start, link.phi0());
        for &s in &previous {
            let before = sup_tracker.value(s);
            sup_tracker.push(s, before);
            let peak = link.eval(sup_tracker.envelope(s));
            if peak > worst {
                worst = peak;
                worst_t = s;
            }
        }
        if worst > z_cap {
            return Err(Error::Truncation {
                time: worst_t,
                intensity: worst,
                z_cap,
            });
        }

        let mut tracker = Tracker::new(kernel);
        let mut prev_idx = 0;
        let mut current = Vec::new();
        for &(t, z) in &field {
            while prev_idx < previous.len() && previous[prev_idx] < t {
                let s = previous[prev_idx];
                let before = tracker.value(s);
                tracker.push(s, before);
                prev_idx += 1;
            }
            let lambda = link.eval(tracker.value(t));
            if z <= lambda {
                current.push(t);
            }
        }
        let first = current.partition_point(|&x| x <= 0.0);
        out.push(EventStream::new(
            current[first..].to_vec(),
            0.0,
            end,
            cfg.burn_in,
            cfg.seed,
        )?);
        previous = current;
    }
    Ok(out)
}

/// Empirical rate `count / horizon` of one long run, a plug-in estimate of
/// the stationary intensity.
pub fn estimate_rate(params: &HawkesParams, horizon: f64, seed: u64) -> Result<f64> {
    let burn_in = default_burn_in(params);
    let (stream, _) = simulate(&SimConfig::new(params.clone(), horizon, burn_in, seed)?)?;
    Ok(stream.len() as f64 / horizon)
}

/// Horizon for resolvent tables used alongside a simulation of `params`.
pub fn resolvent_horizon_for(params: &HawkesParams, span: f64) -> f64 {
    default_resolvent_horizon(params.kernel(), params.alpha()).max(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinkFunction;

    fn linear(nu: f64, kernel: Kernel) -> HawkesParams {
        HawkesParams::new(kernel, LinkFunction::linear(nu).unwrap()).unwrap()
    }

    #[test]
    fn identical_config_is_bit_identical() {
        let p = linear(1.0, Kernel::exponential(2.0, 0.5).unwrap());
        let cfg = SimConfig::new(p, 200.0, 10.0, 7).unwrap();
        let (a, pa) = simulate(&cfg).unwrap();
        let (b, pb) = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(pa, pb);
        let (c, _) = simulate(&cfg.with_replication(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn reported_stream_excludes_burn_in() {
        let p = linear(1.0, Kernel::exponential(1.0, 0.5).unwrap());
        let (s, path) = simulate(&SimConfig::new(p, 50.0, 20.0, 3).unwrap()).unwrap();
        assert!(s.times().iter().all(|&t| t > 0.0 && t <= 50.0));
        assert!(path.events().iter().any(|&t| t <= 0.0));
        assert_eq!(path.window(), (-20.0, 50.0));
        assert_eq!(s.burn_in(), 20.0);
    }

    #[test]
    fn intensity_without_history_is_nu() {
        let p = linear(1.7, Kernel::boxcar(1.0, 0.4).unwrap());
        let path = IntensityPath::from_events(p, vec![], 0.0, 10.0).unwrap();
        assert_eq!(intensity_at(&path, 3.0).unwrap(), 1.7);
    }

    #[test]
    fn intensity_after_single_event_and_left_limit() {
        let (beta, mu, nu) = (2.0, 0.5, 1.0);
        let p = linear(nu, Kernel::exponential(beta, mu).unwrap());
        let path = IntensityPath::from_events(p, vec![0.0], 0.0, 10.0).unwrap();
        // the event itself is not counted at its own time
        assert_eq!(intensity_at(&path, 0.0).unwrap(), nu);
        for t in [0.1, 1.0, 4.0] {
            let want = nu + mu * beta * (-beta * t).exp();
            assert!((intensity_at(&path, t).unwrap() - want).abs() < 1e-14);
        }
        assert!(matches!(
            intensity_at(&path, 10.5),
            Err(Error::OutsideWindow { .. })
        ));
    }

    #[test]
    fn markov_state_matches_direct_sum() {
        let p = linear(0.8, Kernel::exponential(1.5, 0.6).unwrap());
        let (_, path) = simulate(&SimConfig::new(p.clone(), 100.0, 0.0, 11).unwrap()).unwrap();
        let k = p.kernel();
        for i in 0..200 {
            let t = i as f64 * 0.5 + 0.013;
            let direct: f64 = path
                .events()
                .iter()
                .filter(|&&s| s < t)
                .map(|&s| k.eval(t - s))
                .sum();
            assert!((path.excitation(t) - direct).abs() < 1e-10 * (1.0 + direct));
        }
    }

    #[test]
    fn intensity_never_below_phi0() {
        let p = HawkesParams::new(
            Kernel::boxcar(0.8, 0.5).unwrap(),
            LinkFunction::tanh(0.5, 2.0).unwrap(),
        )
        .unwrap();
        let (_, path) = simulate(&SimConfig::new(p, 100.0, 0.0, 5).unwrap()).unwrap();
        for i in 0..1000 {
            assert!(intensity_at(&path, i as f64 * 0.1).unwrap() >= 0.5);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let p = linear(1.0, Kernel::exponential(1.0, 0.5).unwrap());
        assert!(SimConfig::new(p.clone(), 0.0, 0.0, 1).is_err());
        assert!(SimConfig::new(p, 1.0, -1.0, 1).is_err());
    }

    #[test]
    fn non_monotone_table_is_simulated_under_envelope() {
        let k = Kernel::tabulate(|t| 0.5 * t * (-t).exp(), 15.0, 0.01).unwrap();
        let p = linear(1.0, k);
        let (s, _) = simulate(&SimConfig::new(p, 500.0, 20.0, 2).unwrap()).unwrap();
        // rate nu / (1 - mu) with mu ~ 0.5
        let rate = s.len() as f64 / 500.0;
        assert!((rate - 2.0).abs() < 0.4, "{rate}");
    }

    #[test]
    fn first_embedding_iterate_is_poisson_phi0() {
        let p = linear(1.5, Kernel::exponential(1.0, 0.5).unwrap());
        let cfg = SimConfig::new(p, 2000.0, 0.0, 9).unwrap();
        let iters = embedding_simulate(&cfg, 1, 20.0).unwrap();
        let rate = iters[0].len() as f64 / 2000.0;
        assert!(
            (rate - 1.5).abs() < 4.0 * (1.5f64 / 2000.0).sqrt(),
            "{rate}"
        );
    }

    #[test]
    fn embedding_iterates_increase_and_settle() {
        let p = linear(1.0, Kernel::exponential(2.0, 0.5).unwrap());
        let mut settled = 0;
        for seed in 0..20 {
            let cfg = SimConfig::new(p.clone(), 50.0, 0.0, seed).unwrap();
            let iters = embedding_simulate(&cfg, 12, 50.0).unwrap();
            for w in iters.windows(2) {
                let (a, b) = (w[0].times(), w[1].times());
                assert!(a
                    .iter()
                    .all(|t| b.binary_search_by(|x| x.total_cmp(t)).is_ok()));
            }
            if iters[10] == iters[11] {
                settled += 1;
            }
        }
        assert!(settled >= 18, "{settled}");
    }

    #[test]
    fn embedding_reports_truncation() {
        let p = linear(1.0, Kernel::exponential(5.0, 0.9).unwrap());
        let cfg = SimConfig::new(p, 50.0, 0.0, 1).unwrap();
        assert!(matches!(
            embedding_simulate(&cfg, 8, 1.2),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn default_burn_in_values() {
        let p = linear(1.0, Kernel::exponential(2.0, 0.5).unwrap());
        assert!((default_burn_in(&p) - (1e4f64).ln()).abs() < 1e-12);
        let p = linear(1.0, Kernel::exponential(2.0, 0.0).unwrap());
        assert_eq!(default_burn_in(&p), 0.0);
        let p = linear(1.0, Kernel::boxcar(2.0, 0.5).unwrap());
        assert_eq!(default_burn_in(&p), 14.0 * 2.0);
    }
}
