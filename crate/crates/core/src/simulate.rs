//! Ground-truth generative oracle: samples event streams from known
//! parameters via Ogata's modified thinning, and supplies the compensator
//! and time-rescaling goodness-of-fit machinery used to validate fits.
//!
//! The sampler records causal parentage — which event (or the background)
//! triggered each accepted event — so synthetic corpora come with
//! certain-causality ground truth.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::events::{EventError, EventLog, MarkedEvent};
use crate::kernel::impulse_sup;
use crate::math;
use crate::matrix::Matrix;
use crate::model::{active_range, HawkesParams, ModelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {reason}")]
    BadConfig { reason: &'static str },
    #[error("runaway cascade: exceeded {cap} events at t = {t}")]
    CascadeOverflow { cap: usize, t: f64 },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("internal event construction failure: {0}")]
    Internal(#[from] EventError),
}

/// Per-process categorical distribution over prototype feature vectors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureEmission {
    prototypes: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

impl FeatureEmission {
    pub fn new(prototypes: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, SimError> {
        if prototypes.is_empty() || prototypes.len() != weights.len() {
            return Err(SimError::BadConfig {
                reason: "feature emission needs one weight per prototype",
            });
        }
        let f = prototypes[0].len();
        for p in &prototypes {
            if p.len() != f || f == 0 {
                return Err(SimError::BadConfig {
                    reason: "feature prototypes must share a non-zero length",
                });
            }
            if p.iter().any(|v| !v.is_finite() || *v < 0.0) || p.iter().all(|v| *v == 0.0) {
                return Err(SimError::BadConfig {
                    reason: "feature prototypes must be non-negative and not all zero",
                });
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0
        {
            return Err(SimError::BadConfig {
                reason: "emission weights must be non-negative with positive sum",
            });
        }
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            prototypes,
            probabilities,
        })
    }

    pub fn uniform(prototypes: Vec<Vec<f64>>) -> Result<Self, SimError> {
        let n = prototypes.len();
        Self::new(prototypes, vec![1.0; n])
    }

    pub fn num_features(&self) -> usize {
        self.prototypes[0].len()
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (p, proto) in self.probabilities.iter().zip(&self.prototypes) {
            acc += p;
            if u < acc {
                return proto.clone();
            }
        }
        self.prototypes[self.prototypes.len() - 1].clone()
    }
}

pub const DEFAULT_EVENT_CAP: usize = 10_000_000;

/// Simulation configuration: model parameters, horizon, seed, optional mark
/// emissions and the runaway-cascade cap.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: HawkesParams,
    pub horizon: f64,
    pub seed: u64,
    /// One emission per process; all must share the same feature length.
    pub feature_emission: Option<Vec<FeatureEmission>>,
    /// Mention probability per ordered pair; the diagonal is ignored.
    pub dyad_emission: Option<Matrix>,
    pub max_events: usize,
}

impl SimConfig {
    pub fn new(params: HawkesParams, horizon: f64, seed: u64) -> Self {
        Self {
            params,
            horizon,
            seed,
            feature_emission: None,
            dyad_emission: None,
            max_events: DEFAULT_EVENT_CAP,
        }
    }

    pub fn with_feature_emission(mut self, emission: Vec<FeatureEmission>) -> Self {
        self.feature_emission = Some(emission);
        self
    }

    pub fn with_dyad_emission(mut self, probabilities: Matrix) -> Self {
        self.dyad_emission = Some(probabilities);
        self
    }

    pub fn with_event_cap(mut self, cap: usize) -> Self {
        self.max_events = cap;
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(SimError::BadConfig {
                reason: "horizon must be finite and positive",
            });
        }
        if self.max_events == 0 {
            return Err(SimError::BadConfig {
                reason: "event cap must be positive",
            });
        }
        let k = self.params.num_processes();
        if let Some(em) = &self.feature_emission {
            if em.len() != k {
                return Err(SimError::BadConfig {
                    reason: "need one feature emission per process",
                });
            }
            let f = em[0].num_features();
            if em.iter().any(|e| e.num_features() != f) {
                return Err(SimError::BadConfig {
                    reason: "feature emissions must agree on feature count",
                });
            }
        }
        if let Some(de) = &self.dyad_emission {
            if de.rows() != k || de.cols() != k {
                return Err(SimError::BadConfig {
                    reason: "dyad emission must be K by K",
                });
            }
            if de.iter().any(|p| !p.is_finite() || !(0.0..=1.0).contains(&p)) {
                return Err(SimError::BadConfig {
                    reason: "dyad emission entries must be probabilities",
                });
            }
        }
        Ok(())
    }
}

/// A sampled stream plus its causal parentage: `parentage[i]` is the index
/// of the event that triggered event `i`, or `None` for background events.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub log: EventLog,
    pub parentage: Vec<Option<usize>>,
}

/// Samples an event stream on `[0, T]` whose law is the multivariate Hawkes
/// process defined by the parameters, with marks drawn from the emissions.
/// Deterministic given the seed.
///
/// Ogata's modified thinning: each step draws a candidate from an
/// exponential clock at the current upper bound, then accepts with
/// probability `λ_total(candidate) / bound`. The bound is recomputed after
/// every candidate from per-event kernel suprema, which stay valid for
/// non-monotone kernels such as raised cosines.
pub fn simulate(config: &SimConfig) -> Result<SimOutput, SimError> {
    config.validate()?;
    let params = &config.params;
    let k_count = params.num_processes();
    let horizon = config.horizon;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut events: Vec<MarkedEvent> = Vec::new();
    let mut parentage: Vec<Option<usize>> = Vec::new();
    let mut lambdas = vec![0.0; k_count];
    let mut t = 0.0;

    loop {
        let bound = upper_bound(params, &events, t);
        let u: f64 = rng.random();
        // Inverse-CDF exponential with rate `bound`; u in [0, 1) keeps the
        // log argument positive.
        let wait = -math::ln(1.0 - u) / bound;
        let candidate = t + wait;
        if candidate > horizon || !candidate.is_finite() {
            break;
        }
        for (k, slot) in lambdas.iter_mut().enumerate() {
            *slot = rate_at(params, &events, k, candidate);
        }
        let total: f64 = lambdas.iter().sum();
        let v: f64 = rng.random();
        if v * bound < total {
            // Accept: pick the process, then the parent within that process.
            let pick: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut proc = k_count - 1;
            for (k, lam) in lambdas.iter().enumerate() {
                acc += lam;
                if pick < acc {
                    proc = k;
                    break;
                }
            }
            let parent = draw_parent(params, &events, proc, candidate, &mut rng);
            let mut ev = MarkedEvent::new(candidate, proc);
            if let Some(emissions) = &config.feature_emission {
                ev = ev.with_features(emissions[proc].draw(&mut rng));
            }
            if let Some(probs) = &config.dyad_emission {
                let mut targets = Vec::new();
                for j in 0..k_count {
                    if j != proc {
                        let p = probs[(proc, j)];
                        if p > 0.0 && rng.random::<f64>() < p {
                            targets.push(j);
                        }
                    }
                }
                ev = ev.with_dyad(targets);
            }
            events.push(ev);
            parentage.push(parent);
            if events.len() > config.max_events {
                return Err(SimError::CascadeOverflow {
                    cap: config.max_events,
                    t: candidate,
                });
            }
        }
        t = candidate;
    }

    let log = EventLog::new(horizon, k_count, feature_len(config), events, None)?;
    Ok(SimOutput { log, parentage })
}

fn feature_len(config: &SimConfig) -> usize {
    config
        .feature_emission
        .as_ref()
        .map(|e| e[0].num_features())
        .unwrap_or(0)
}

/// Total-intensity upper bound valid until the next candidate: backgrounds
/// plus each active event's kernel supremum over its remaining support,
/// both channels. The supremum is non-increasing in elapsed time, so the
/// bound cannot be overtaken while no new event arrives.
fn upper_bound(params: &HawkesParams, events: &[MarkedEvent], t: f64) -> f64 {
    let k_count = params.num_processes();
    let mut bound: f64 = params.background().iter().sum();
    let window = params.basis().window();
    // Events at exactly `t` (just accepted) enter with dt = 0: the full
    // kernel supremum.
    let lo = events.partition_point(|e| e.time < t - window);
    for ev in &events[lo..] {
        let dt = (t - ev.time).max(0.0);
        for k in 0..k_count {
            let w = params.weights()[(ev.process, k)];
            if w != 0.0 {
                bound += w * impulse_sup(params.impulse(), params.basis(), (ev.process, k), dt);
            }
        }
    }
    if let Some(dyad) = params.dyad() {
        let window = dyad.basis().window();
        let lo = events.partition_point(|e| e.time < t - window);
        for ev in &events[lo..] {
            let dt = (t - ev.time).max(0.0);
            if let Some(targets) = &ev.dyad {
                for &k in targets {
                    let w = dyad.weights()[(ev.process, k)];
                    if w != 0.0 {
                        bound +=
                            w * impulse_sup(dyad.coefficients(), dyad.basis(), (ev.process, k), dt);
                    }
                }
            }
        }
    }
    bound
}

/// Ground intensity during simulation, over the partial event list.
fn rate_at(params: &HawkesParams, events: &[MarkedEvent], k: usize, t: f64) -> f64 {
    let mut rate = params.background()[k];
    for ev in &events[active_range(events, t, params.basis().window())] {
        let w = params.weights()[(ev.process, k)];
        if w != 0.0 {
            rate += w * params.impulse_density(ev.process, k, t - ev.time);
        }
    }
    if let Some(dyad) = params.dyad() {
        for ev in &events[active_range(events, t, dyad.basis().window())] {
            if ev.mentions(k) {
                let w = dyad.weights()[(ev.process, k)];
                if w != 0.0 {
                    rate += w * dyad.impulse(ev.process, k, t - ev.time);
                }
            }
        }
    }
    rate
}

/// Splits the accepted event's intensity into background and per-past-event
/// contributions and draws the parent proportionally.
fn draw_parent(
    params: &HawkesParams,
    events: &[MarkedEvent],
    proc: usize,
    t: f64,
    rng: &mut ChaCha12Rng,
) -> Option<usize> {
    let range = active_range(events, t, params.basis().window());
    let mut contributions: Vec<(usize, f64)> = Vec::new();
    for (idx, ev) in events.iter().enumerate().take(range.end).skip(range.start) {
        let w = params.weights()[(ev.process, proc)];
        if w != 0.0 {
            let c = w * params.impulse_density(ev.process, proc, t - ev.time);
            if c > 0.0 {
                contributions.push((idx, c));
            }
        }
    }
    if let Some(dyad) = params.dyad() {
        let drange = active_range(events, t, dyad.basis().window());
        for (idx, ev) in events.iter().enumerate().take(drange.end).skip(drange.start) {
            if ev.mentions(proc) {
                let w = dyad.weights()[(ev.process, proc)];
                if w != 0.0 {
                    let c = w * dyad.impulse(ev.process, proc, t - ev.time);
                    if c > 0.0 {
                        contributions.push((idx, c));
                    }
                }
            }
        }
    }
    let background = params.background()[proc];
    let total = background + contributions.iter().map(|(_, c)| c).sum::<f64>();
    let mut pick = rng.random::<f64>() * total;
    if pick < background {
        return None;
    }
    pick -= background;
    for (idx, c) in &contributions {
        if pick < *c {
            return Some(*idx);
        }
        pick -= c;
    }
    contributions.last().map(|(idx, _)| *idx)
}

/// Cumulative intensity mass `Λ_k(t) = ∫_0^t λ_k`, exact through kernel
/// integrals; non-decreasing in `t`.
pub fn compensator(
    params: &HawkesParams,
    log: &EventLog,
    k: usize,
    t: f64,
) -> Result<f64, SimError> {
    params.check_log(log)?;
    if k >= params.num_processes() {
        return Err(SimError::Model(ModelError::ProcessOutOfRange {
            index: k,
            count: params.num_processes(),
        }));
    }
    if !t.is_finite() || t < 0.0 || t > log.horizon() {
        return Err(SimError::Model(ModelError::TimeOutOfRange {
            t,
            horizon: log.horizon(),
        }));
    }
    let mut mass = params.background()[k] * t;
    let window = params.basis().window();
    for ev in log.events() {
        if ev.time >= t {
            break;
        }
        let w = params.weights()[(ev.process, k)];
        if w != 0.0 {
            mass += w * params.impulse_mass(ev.process, k, 0.0, (t - ev.time).min(window));
        }
    }
    if let Some(dyad) = params.dyad() {
        let window = dyad.basis().window();
        for ev in log.events() {
            if ev.time >= t {
                break;
            }
            if ev.mentions(k) {
                let w = dyad.weights()[(ev.process, k)];
                if w != 0.0 {
                    mass += w * dyad.impulse_mass(ev.process, k, 0.0, (t - ev.time).min(window));
                }
            }
        }
    }
    Ok(mass)
}

/// One-sample Kolmogorov-Smirnov result against the unit exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Time-rescaled inter-event gaps for one process; i.i.d. Exp(1) under the
/// true model.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessResiduals {
    pub process: usize,
    pub gaps: Vec<f64>,
    pub ks: Option<KsTest>,
}

/// Residuals for every process plus the pooled KS decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub per_process: Vec<ProcessResiduals>,
    pub pooled: Option<KsTest>,
}

/// Transforms each process's inter-event gaps through the compensator:
/// `Λ_k(s_(j)) - Λ_k(s_(j-1))` over that process's ordered events. Processes
/// with fewer than two events yield an empty sequence. Also runs the KS test
/// against Exp(1) per process and on the pooled gaps.
pub fn rescaled_residuals(
    params: &HawkesParams,
    log: &EventLog,
) -> Result<ResidualReport, SimError> {
    params.check_log(log)?;
    let events = log.events();
    let window = params.basis().window();
    let dyad_window = params.dyad().map(|d| d.basis().window());
    let mut per_process = Vec::new();
    let mut pooled_gaps = Vec::new();

    for k in 0..params.num_processes() {
        let times: Vec<f64> = events
            .iter()
            .filter(|e| e.process == k)
            .map(|e| e.time)
            .collect();
        let mut gaps = Vec::new();
        for pair in times.windows(2) {
            let (t0, t1) = (pair[0], pair[1]);
            let mut gap = params.background()[k] * (t1 - t0);
            // Only events whose kernel mass changes over (t0, t1] matter:
            // anything older than t0 - window is fully integrated on both
            // sides and cancels.
            let lo = events.partition_point(|e| e.time < t0 - window);
            let hi = events.partition_point(|e| e.time < t1);
            for ev in &events[lo..hi] {
                let w = params.weights()[(ev.process, k)];
                if w != 0.0 {
                    gap += w * params.impulse_mass(ev.process, k, t0 - ev.time, t1 - ev.time);
                }
            }
            if let (Some(dyad), Some(dw)) = (params.dyad(), dyad_window) {
                let dlo = events.partition_point(|e| e.time < t0 - dw);
                for ev in &events[dlo..hi] {
                    if ev.mentions(k) {
                        let w = dyad.weights()[(ev.process, k)];
                        if w != 0.0 {
                            gap += w * dyad.impulse_mass(ev.process, k, t0 - ev.time, t1 - ev.time);
                        }
                    }
                }
            }
            gaps.push(gap);
        }
        pooled_gaps.extend_from_slice(&gaps);
        let ks = exp1_ks_test(&gaps);
        per_process.push(ProcessResiduals {
            process: k,
            gaps,
            ks,
        });
    }
    let pooled = exp1_ks_test(&pooled_gaps);
    Ok(ResidualReport {
        per_process,
        pooled,
    })
}

/// KS test of a sample against Exp(1). `None` for an empty sample.
pub fn exp1_ks_test(sample: &[f64]) -> Option<KsTest> {
    if sample.is_empty() {
        return None;
    }
    let n = sample.len();
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = 1.0 - math::exp(-x);
        let upper = (i + 1) as f64 / nf - cdf;
        let lower = cdf - i as f64 / nf;
        d = d.max(upper).max(lower);
    }
    let sqrt_n = math::sqrt(nf);
    let effective = sqrt_n + 0.12 + 0.11 / sqrt_n;
    Some(KsTest {
        statistic: d,
        p_value: kolmogorov_tail(effective * d),
        n,
    })
}

/// Asymptotic Kolmogorov tail `Q(z) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² z²)`.
pub fn kolmogorov_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = math::exp(-2.0 * jf * jf * z * z);
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
