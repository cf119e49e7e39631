//! Intensity functions, joint likelihood, log-posterior with Gamma prior and
//! penalties, analytic gradients, and softmax feature attribution.
//!
//! The ground intensity of process `k` is
//!
//! ```text
//! λ_k(t) = b_k + Σ_{n: 0 < t - s_n ≤ Δt}  W[c_n, k] · g_{c_n,k}(t - s_n)
//!              + Σ_{n: k ∈ d_n, 0 < t - s_n ≤ Δt'} W'[c_n, k] · g'(t - s_n)
//! ```
//!
//! summed over strictly-past events. The second (dyadic) channel exists only
//! when the parameters carry one. Events exactly `Δt` in the past still
//! contribute: the kernel support is closed at the window edge.
//!
//! The negative log-likelihood is the standard point-process form, event
//! log-intensities minus the compensator, with the compensator evaluated
//! exactly through basis integrals rather than time discretization.
//! Feature weights θ parameterize the per-feature attribution view
//! ([`feature_intensity`], [`softmax_attribution`]) and are regularized by
//! the quadratic penalty; they do not alter the ground intensity, whose
//! likelihood is θ-free.

use alloc::vec;
use alloc::vec::Vec;

use crate::events::{EventLog, MarkedEvent};
use crate::kernel::{BasisFamily, ImpulseCoefficients, KernelError};
use crate::math;
use crate::matrix::Matrix;

/// Floor applied to weights inside the Gamma log term.
pub const WEIGHT_LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: {reason}")]
    Dimension { reason: &'static str },
    #[error("invalid parameter: {reason}")]
    BadParameter { reason: &'static str },
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("process index {index} out of range for {count} processes")]
    ProcessOutOfRange { index: usize, count: usize },
    #[error("feature index {index} out of range for {count} features")]
    FeatureOutOfRange { index: usize, count: usize },
    #[error("parameters carry no feature weights")]
    MissingFeatureWeights,
    #[error("event carries no feature vector")]
    MissingFeatures,
    #[error("kernel error: {0}")]
    Kernel(#[from] KernelError),
}

/// The dyadic-interaction influence channel: mention marks carry their own
/// weights and decay kernel.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadChannel {
    weights: Matrix,
    basis: BasisFamily,
    coefficients: ImpulseCoefficients,
}

impl DyadChannel {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn coefficients(&self) -> &ImpulseCoefficients {
        &self.coefficients
    }

    /// Kernel density for a pair, coefficients applied, no weight.
    pub(crate) fn impulse(&self, sender: usize, receiver: usize, dt: f64) -> f64 {
        combine_value(&self.coefficients, &self.basis, sender, receiver, dt)
    }

    pub(crate) fn impulse_mass(&self, sender: usize, receiver: usize, a: f64, c: f64) -> f64 {
        combine_integral(&self.coefficients, &self.basis, sender, receiver, a, c)
    }
}

/// Full parameter set of the model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HawkesParams {
    background: Vec<f64>,
    weights: Matrix,
    basis: BasisFamily,
    impulse: ImpulseCoefficients,
    feature_weights: Option<Matrix>,
    dyad: Option<DyadChannel>,
}

impl HawkesParams {
    /// Base model: background rates, weight matrix `W[(sender, receiver)]`,
    /// and the impulse kernel.
    pub fn new(
        background: Vec<f64>,
        weights: Matrix,
        basis: BasisFamily,
        impulse: ImpulseCoefficients,
    ) -> Result<Self, ModelError> {
        let k = background.len();
        if k == 0 {
            return Err(ModelError::Dimension {
                reason: "at least one process required",
            });
        }
        if background.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(ModelError::BadParameter {
                reason: "background rates must be finite and strictly positive",
            });
        }
        check_weight_matrix(&weights, k, "W")?;
        check_kernel_pairing(&impulse, &basis, k)?;
        Ok(Self {
            background,
            weights,
            basis,
            impulse,
            feature_weights: None,
            dyad: None,
        })
    }

    /// Attaches per-process feature weights θ (K×F).
    pub fn with_features(mut self, theta: Matrix) -> Result<Self, ModelError> {
        if theta.rows() != self.num_processes() {
            return Err(ModelError::Dimension {
                reason: "theta must have one row per process",
            });
        }
        if !theta.is_finite() {
            return Err(ModelError::BadParameter {
                reason: "theta entries must be finite",
            });
        }
        self.feature_weights = Some(theta);
        Ok(self)
    }

    /// Attaches the dyadic-interaction channel.
    pub fn with_dyad_channel(
        mut self,
        weights: Matrix,
        basis: BasisFamily,
        coefficients: ImpulseCoefficients,
    ) -> Result<Self, ModelError> {
        let k = self.num_processes();
        check_weight_matrix(&weights, k, "W'")?;
        check_kernel_pairing(&coefficients, &basis, k)?;
        self.dyad = Some(DyadChannel {
            weights,
            basis,
            coefficients,
        });
        Ok(self)
    }

    pub fn num_processes(&self) -> usize {
        self.background.len()
    }

    pub fn num_features(&self) -> Option<usize> {
        self.feature_weights.as_ref().map(|m| m.cols())
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn impulse(&self) -> &ImpulseCoefficients {
        &self.impulse
    }

    pub fn feature_weights(&self) -> Option<&Matrix> {
        self.feature_weights.as_ref()
    }

    pub fn dyad(&self) -> Option<&DyadChannel> {
        self.dyad.as_ref()
    }

    /// Estimated spectral radius of `W`; values `>= 1` mean the cascade can
    /// be explosive. Advisory only — explosive regimes are allowed.
    pub fn spectral_radius(&self) -> f64 {
        self.weights.spectral_radius_estimate()
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Recency-channel kernel density for a pair, no weight applied.
    pub(crate) fn impulse_density(&self, sender: usize, receiver: usize, dt: f64) -> f64 {
        combine_value(&self.impulse, &self.basis, sender, receiver, dt)
    }

    /// Recency-channel kernel mass on `[a, c]` for a pair, no weight applied.
    pub(crate) fn impulse_mass(&self, sender: usize, receiver: usize, a: f64, c: f64) -> f64 {
        combine_integral(&self.impulse, &self.basis, sender, receiver, a, c)
    }

    pub(crate) fn check_log(&self, log: &EventLog) -> Result<(), ModelError> {
        if log.num_processes() != self.num_processes() {
            return Err(ModelError::Dimension {
                reason: "log and parameters disagree on process count",
            });
        }
        if let Some(theta) = &self.feature_weights {
            if log.num_features() > 0 && theta.cols() != log.num_features() {
                return Err(ModelError::Dimension {
                    reason: "theta columns must equal the log's feature count",
                });
            }
        }
        Ok(())
    }
}

fn check_weight_matrix(m: &Matrix, k: usize, name: &'static str) -> Result<(), ModelError> {
    if m.rows() != k || m.cols() != k {
        return Err(ModelError::Dimension {
            reason: if name == "W" {
                "W must be K by K"
            } else {
                "W' must be K by K"
            },
        });
    }
    if m.iter().any(|v| !v.is_finite() || v < 0.0) {
        return Err(ModelError::BadParameter {
            reason: "weight entries must be finite and non-negative",
        });
    }
    Ok(())
}

fn check_kernel_pairing(
    coeffs: &ImpulseCoefficients,
    basis: &BasisFamily,
    k: usize,
) -> Result<(), ModelError> {
    if coeffs.basis_count() != basis.count() {
        return Err(ModelError::Dimension {
            reason: "coefficient vectors must match the basis count",
        });
    }
    if let Some(kc) = coeffs.num_processes() {
        if kc != k {
            return Err(ModelError::Dimension {
                reason: "per-pair coefficients must match the process count",
            });
        }
    }
    Ok(())
}

fn combine_value(
    coeffs: &ImpulseCoefficients,
    basis: &BasisFamily,
    sender: usize,
    receiver: usize,
    dt: f64,
) -> f64 {
    let cs = coeffs.coefficients(sender, receiver);
    let mut out = 0.0;
    for (b, &cb) in cs.iter().enumerate() {
        if cb != 0.0 {
            out += cb * basis.value(b, dt);
        }
    }
    out
}

fn combine_integral(
    coeffs: &ImpulseCoefficients,
    basis: &BasisFamily,
    sender: usize,
    receiver: usize,
    a: f64,
    c: f64,
) -> f64 {
    let cs = coeffs.coefficients(sender, receiver);
    let mut out = 0.0;
    for (b, &cb) in cs.iter().enumerate() {
        if cb != 0.0 {
            out += cb * basis.integral(b, a, c);
        }
    }
    out
}

/// Index range of events with `0 < t - s_n <= window`, i.e. the strictly-past
/// events still inside the influence window at time `t`.
pub(crate) fn active_range(events: &[MarkedEvent], t: f64, window: f64) -> core::ops::Range<usize> {
    let lo = events.partition_point(|e| e.time < t - window);
    let hi = events.partition_point(|e| e.time < t);
    lo..hi
}

/// Ground intensity `λ_k(t)`: background plus recency-channel influence plus
/// the dyadic channel when the parameters carry one. Strictly past events
/// only; always `>= b_k`.
pub fn intensity(
    params: &HawkesParams,
    log: &EventLog,
    k: usize,
    t: f64,
) -> Result<f64, ModelError> {
    params.check_log(log)?;
    check_process(k, params.num_processes())?;
    check_time(t, log.horizon())?;
    Ok(intensity_unchecked(params, log, k, t))
}

pub(crate) fn intensity_unchecked(params: &HawkesParams, log: &EventLog, k: usize, t: f64) -> f64 {
    let events = log.events();
    let mut rate = params.background[k];
    for ev in &events[active_range(events, t, params.basis.window())] {
        let w = params.weights[(ev.process, k)];
        if w != 0.0 {
            rate += w * params.impulse_density(ev.process, k, t - ev.time);
        }
    }
    if let Some(dyad) = &params.dyad {
        for ev in &events[active_range(events, t, dyad.basis.window())] {
            if ev.mentions(k) {
                let w = dyad.weights[(ev.process, k)];
                if w != 0.0 {
                    rate += w * dyad.impulse(ev.process, k, t - ev.time);
                }
            }
        }
    }
    rate
}

/// Per-feature intensity view `λ(t, k, i)`: background, the recency channel
/// with each featured sender event's mass split by its softmax attribution,
/// and the whole dyadic channel. Unfeatured events carry no per-feature
/// signal and are excluded from the feature term.
pub fn feature_intensity(
    params: &HawkesParams,
    log: &EventLog,
    k: usize,
    i: usize,
    t: f64,
) -> Result<f64, ModelError> {
    params.check_log(log)?;
    check_process(k, params.num_processes())?;
    check_time(t, log.horizon())?;
    let theta = params
        .feature_weights
        .as_ref()
        .ok_or(ModelError::MissingFeatureWeights)?;
    if i >= theta.cols() {
        return Err(ModelError::FeatureOutOfRange {
            index: i,
            count: theta.cols(),
        });
    }
    let events = log.events();
    let mut rate = params.background[k];
    for ev in &events[active_range(events, t, params.basis.window())] {
        if ev.features.is_none() {
            continue;
        }
        let w = params.weights[(ev.process, k)];
        if w != 0.0 {
            let attribution = softmax_attribution(theta, ev)?;
            rate += w * params.impulse_density(ev.process, k, t - ev.time) * attribution[i];
        }
    }
    if let Some(dyad) = &params.dyad {
        for ev in &events[active_range(events, t, dyad.basis.window())] {
            if ev.mentions(k) {
                let w = dyad.weights[(ev.process, k)];
                if w != 0.0 {
                    rate += w * dyad.impulse(ev.process, k, t - ev.time);
                }
            }
        }
    }
    Ok(rate)
}

/// Softmax attribution of an event across features:
/// `exp(θ[c_n, i] · f_{n,i}) / Σ_j exp(θ[c_n, j] · f_{n,j})`, computed with
/// max subtraction so saturated weights cannot overflow.
pub fn softmax_attribution(theta: &Matrix, event: &MarkedEvent) -> Result<Vec<f64>, ModelError> {
    let features = event.features.as_ref().ok_or(ModelError::MissingFeatures)?;
    if event.process >= theta.rows() {
        return Err(ModelError::ProcessOutOfRange {
            index: event.process,
            count: theta.rows(),
        });
    }
    if features.len() != theta.cols() {
        return Err(ModelError::Dimension {
            reason: "feature vector length must equal theta columns",
        });
    }
    let row = theta.row(event.process);
    let mut logits: Vec<f64> = row
        .iter()
        .zip(features.iter())
        .map(|(&th, &f)| th * f)
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = math::exp(*z - max);
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
    Ok(logits)
}

/// Prior and penalty configuration: elementwise Gamma(α, β) on the weight
/// matrices plus quadratic penalties on θ and on the impulse coefficients
/// (about the uniform vector).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriorConfig {
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub theta_penalty: f64,
    pub coefficient_penalty: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            gamma_shape: 1.1,
            gamma_rate: 1.0,
            theta_penalty: 1e-2,
            coefficient_penalty: 1e-2,
        }
    }
}

impl PriorConfig {
    /// Flat prior: the posterior equals the likelihood.
    pub fn flat() -> Self {
        Self {
            gamma_shape: 1.0,
            gamma_rate: 0.0,
            theta_penalty: 0.0,
            coefficient_penalty: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.gamma_shape.is_finite()
            && self.gamma_shape > 0.0
            && self.gamma_rate.is_finite()
            && self.gamma_rate >= 0.0
            && self.theta_penalty.is_finite()
            && self.theta_penalty >= 0.0
            && self.coefficient_penalty.is_finite()
            && self.coefficient_penalty >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(ModelError::BadParameter {
                reason: "prior hyperparameters out of range",
            })
        }
    }
}

/// Exact negative log-likelihood: `-Σ_n log λ_{c_n}(s_n) + Σ_k ∫ λ_k`.
/// The compensator is computed in closed form from basis integrals.
pub fn neg_log_likelihood(params: &HawkesParams, log: &EventLog) -> Result<f64, ModelError> {
    params.check_log(log)?;
    let events = log.events();
    let horizon = log.horizon();
    let k_count = params.num_processes();

    let mut nll = 0.0;
    for ev in events {
        let lambda = intensity_unchecked(params, log, ev.process, ev.time);
        nll -= math::ln(lambda);
    }

    // Compensator: background block plus each event's forward kernel mass
    // toward every receiver.
    nll += params.background.iter().sum::<f64>() * horizon;
    let window = params.basis.window();
    for ev in events {
        let reach = (horizon - ev.time).min(window);
        if reach <= 0.0 {
            continue;
        }
        for k in 0..k_count {
            let w = params.weights[(ev.process, k)];
            if w != 0.0 {
                nll += w * params.impulse_mass(ev.process, k, 0.0, reach);
            }
        }
    }
    if let Some(dyad) = &params.dyad {
        let window = dyad.basis.window();
        for ev in events {
            let reach = (horizon - ev.time).min(window);
            if reach <= 0.0 {
                continue;
            }
            if let Some(targets) = &ev.dyad {
                for &k in targets {
                    let w = dyad.weights[(ev.process, k)];
                    if w != 0.0 {
                        nll += w * dyad.impulse_mass(ev.process, k, 0.0, reach);
                    }
                }
            }
        }
    }
    Ok(nll)
}

/// Negative log-posterior: likelihood plus
/// `Σ [-(α-1)·log W + β·W]` over both weight matrices (log floored at
/// [`WEIGHT_LOG_FLOOR`]), plus the quadratic penalties.
pub fn neg_log_posterior(
    params: &HawkesParams,
    log: &EventLog,
    prior: &PriorConfig,
) -> Result<f64, ModelError> {
    prior.validate()?;
    let mut value = neg_log_likelihood(params, log)?;
    value += weight_prior_term(&params.weights, prior);
    if let Some(dyad) = &params.dyad {
        value += weight_prior_term(&dyad.weights, prior);
    }
    if let Some(theta) = &params.feature_weights {
        value += 0.5 * prior.theta_penalty * theta.iter().map(|v| v * v).sum::<f64>();
    }
    value += coefficient_penalty_term(&params.impulse, prior.coefficient_penalty);
    Ok(value)
}

fn weight_prior_term(weights: &Matrix, prior: &PriorConfig) -> f64 {
    let mut out = 0.0;
    for w in weights.iter() {
        out +=
            -(prior.gamma_shape - 1.0) * math::ln(w.max(WEIGHT_LOG_FLOOR)) + prior.gamma_rate * w;
    }
    out
}

fn coefficient_penalty_term(coeffs: &ImpulseCoefficients, penalty: f64) -> f64 {
    if penalty == 0.0 {
        return 0.0;
    }
    let b = coeffs.basis_count();
    let uniform = 1.0 / b as f64;
    let mut out = 0.0;
    for_each_coeff_vector(coeffs, |cs| {
        for &c in cs {
            let d = c - uniform;
            out += 0.5 * penalty * d * d;
        }
    });
    out
}

fn for_each_coeff_vector<F: FnMut(&[f64])>(coeffs: &ImpulseCoefficients, mut f: F) {
    match coeffs.num_processes() {
        None => f(coeffs.coefficients(0, 0)),
        Some(k) => {
            for s in 0..k {
                for r in 0..k {
                    f(coeffs.coefficients(s, r));
                }
            }
        }
    }
}

/// Gradient of [`neg_log_posterior`] with respect to the unconstrained
/// parameterization: `log b`, `log W`, `log W'`, raw θ, and impulse
/// coefficients through their softmax logits (gauge `z = log c`).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// d / d(log b), length K.
    pub background: Vec<f64>,
    /// d / d(log W), K×K.
    pub weights: Matrix,
    /// d / d(coefficient logits), same flat layout as the coefficients
    /// (one vector if shared, K·K vectors if per pair).
    pub coefficients: Vec<f64>,
    /// d / dθ, K×F, present iff the parameters carry θ.
    pub feature_weights: Option<Matrix>,
    /// d / d(log W'), K×K, present iff the parameters carry a dyad channel.
    pub dyad_weights: Option<Matrix>,
}

impl Gradient {
    /// Max-norm over every block; used for convergence reporting.
    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for v in self
            .background
            .iter()
            .chain(self.weights.as_slice())
            .chain(self.coefficients.iter())
        {
            m = m.max(math::abs(*v));
        }
        if let Some(t) = &self.feature_weights {
            for v in t.as_slice() {
                m = m.max(math::abs(*v));
            }
        }
        if let Some(d) = &self.dyad_weights {
            for v in d.as_slice() {
                m = m.max(math::abs(*v));
            }
        }
        m
    }
}

/// Exact analytic gradient of the negative log-posterior. Matches central
/// finite differences on the unconstrained parameterization.
pub fn gradient(
    params: &HawkesParams,
    log: &EventLog,
    prior: &PriorConfig,
) -> Result<Gradient, ModelError> {
    gradient_impl(params, log, prior, None, 1.0)
}

/// Stochastic gradient over a subset of events: the event term runs over
/// `batch` only and the compensator + prior terms are scaled by the batch
/// fraction, so batch gradients sum to the full gradient over an epoch.
pub(crate) fn gradient_batch(
    params: &HawkesParams,
    log: &EventLog,
    prior: &PriorConfig,
    batch: &[usize],
    scale: f64,
) -> Result<Gradient, ModelError> {
    gradient_impl(params, log, prior, Some(batch), scale)
}

fn gradient_impl(
    params: &HawkesParams,
    log: &EventLog,
    prior: &PriorConfig,
    batch: Option<&[usize]>,
    scale: f64,
) -> Result<Gradient, ModelError> {
    prior.validate()?;
    params.check_log(log)?;
    let events = log.events();
    let horizon = log.horizon();
    let k_count = params.num_processes();
    let b_count = params.basis().count();

    // Natural-scale accumulators.
    let mut d_bg = vec![0.0; k_count];
    let mut d_w = Matrix::zeros(k_count, k_count);
    let mut d_wp = params.dyad.as_ref().map(|_| Matrix::zeros(k_count, k_count));
    let mut d_coeff = vec![0.0; coeff_flat_len(&params.impulse)];

    // Event term: -log λ at each (selected) event.
    let window = params.basis.window();
    let selected: Vec<&MarkedEvent> = match batch {
        None => events.iter().collect(),
        Some(indices) => indices.iter().map(|&i| &events[i]).collect(),
    };
    for ev in selected {
        let receiver = ev.process;
        let lambda = intensity_unchecked(params, log, receiver, ev.time);
        let inv = 1.0 / lambda;
        d_bg[receiver] -= inv;
        for past in &events[active_range(events, ev.time, window)] {
            let dt = ev.time - past.time;
            let w = params.weights[(past.process, receiver)];
            let g = params.impulse_density(past.process, receiver, dt);
            if g != 0.0 {
                d_w[(past.process, receiver)] -= inv * g;
            }
            if w != 0.0 {
                let cs_idx = coeff_offset(&params.impulse, past.process, receiver);
                for b in 0..b_count {
                    let bv = params.basis().value(b, dt);
                    if bv != 0.0 {
                        d_coeff[cs_idx + b] -= inv * w * bv;
                    }
                }
            }
        }
        if let (Some(dyad), Some(dwp)) = (&params.dyad, d_wp.as_mut()) {
            for past in &events[active_range(events, ev.time, dyad.basis.window())] {
                if past.mentions(receiver) {
                    let g = dyad.impulse(past.process, receiver, ev.time - past.time);
                    if g != 0.0 {
                        dwp[(past.process, receiver)] -= inv * g;
                    }
                }
            }
        }
    }

    // Compensator term, scaled by the batch fraction.
    for d in d_bg.iter_mut() {
        *d += scale * horizon;
    }
    for ev in events {
        let reach = (horizon - ev.time).min(window);
        if reach <= 0.0 {
            continue;
        }
        for k in 0..k_count {
            let mass = params.impulse_mass(ev.process, k, 0.0, reach);
            d_w[(ev.process, k)] += scale * mass;
            let w = params.weights[(ev.process, k)];
            if w != 0.0 {
                let cs_idx = coeff_offset(&params.impulse, ev.process, k);
                for b in 0..b_count {
                    d_coeff[cs_idx + b] += scale * w * params.basis().integral(b, 0.0, reach);
                }
            }
        }
    }
    if let (Some(dyad), Some(dwp)) = (&params.dyad, d_wp.as_mut()) {
        let dwindow = dyad.basis.window();
        for ev in events {
            let reach = (horizon - ev.time).min(dwindow);
            if reach <= 0.0 {
                continue;
            }
            if let Some(targets) = &ev.dyad {
                for &k in targets {
                    dwp[(ev.process, k)] += scale * dyad.impulse_mass(ev.process, k, 0.0, reach);
                }
            }
        }
    }

    // Prior and penalties on the natural scale, same scaling.
    add_weight_prior_grad(&mut d_w, &params.weights, prior, scale);
    if let (Some(dyad), Some(dwp)) = (&params.dyad, d_wp.as_mut()) {
        add_weight_prior_grad(dwp, &dyad.weights, prior, scale);
    }
    if prior.coefficient_penalty != 0.0 {
        let uniform = 1.0 / b_count as f64;
        let mut offset = 0;
        for_each_coeff_vector(&params.impulse, |cs| {
            for (b, &c) in cs.iter().enumerate() {
                d_coeff[offset + b] += scale * prior.coefficient_penalty * (c - uniform);
            }
            offset += b_count;
        });
    }

    // Chain rule onto the unconstrained coordinates.
    let background: Vec<f64> = d_bg
        .iter()
        .zip(params.background.iter())
        .map(|(d, b)| d * b)
        .collect();
    let mut weights = Matrix::zeros(k_count, k_count);
    for s in 0..k_count {
        for r in 0..k_count {
            weights[(s, r)] = d_w[(s, r)] * params.weights[(s, r)];
        }
    }
    let dyad_weights = match (&params.dyad, d_wp) {
        (Some(dyad), Some(dwp)) => {
            let mut out = Matrix::zeros(k_count, k_count);
            for s in 0..k_count {
                for r in 0..k_count {
                    out[(s, r)] = dwp[(s, r)] * dyad.weights[(s, r)];
                }
            }
            Some(out)
        }
        _ => None,
    };
    // Softmax chain per coefficient vector: dz_b = c_b (dc_b - Σ_j c_j dc_j).
    let mut coefficients = vec![0.0; d_coeff.len()];
    let mut offset = 0;
    for_each_coeff_vector(&params.impulse, |cs| {
        let dot: f64 = cs
            .iter()
            .zip(&d_coeff[offset..offset + b_count])
            .map(|(c, d)| c * d)
            .sum();
        for (b, &c) in cs.iter().enumerate() {
            coefficients[offset + b] = c * (d_coeff[offset + b] - dot);
        }
        offset += b_count;
    });

    // θ gradient: penalty only — the ground intensity is θ-free.
    let feature_weights = params.feature_weights.as_ref().map(|theta| {
        let mut g = Matrix::zeros(theta.rows(), theta.cols());
        if prior.theta_penalty != 0.0 {
            for (o, v) in g.as_mut_slice().iter_mut().zip(theta.iter()) {
                *o = scale * prior.theta_penalty * v;
            }
        }
        g
    });

    Ok(Gradient {
        background,
        weights,
        coefficients,
        feature_weights,
        dyad_weights,
    })
}

fn add_weight_prior_grad(target: &mut Matrix, weights: &Matrix, prior: &PriorConfig, scale: f64) {
    for s in 0..weights.rows() {
        for r in 0..weights.cols() {
            let w = weights[(s, r)];
            if w > WEIGHT_LOG_FLOOR {
                target[(s, r)] -= scale * (prior.gamma_shape - 1.0) / w;
            }
            target[(s, r)] += scale * prior.gamma_rate;
        }
    }
}

pub(crate) fn coeff_flat_len(coeffs: &ImpulseCoefficients) -> usize {
    match coeffs.num_processes() {
        None => coeffs.basis_count(),
        Some(k) => k * k * coeffs.basis_count(),
    }
}

pub(crate) fn coeff_offset(coeffs: &ImpulseCoefficients, sender: usize, receiver: usize) -> usize {
    match coeffs.num_processes() {
        None => 0,
        Some(k) => (sender * k + receiver) * coeffs.basis_count(),
    }
}

fn check_process(k: usize, count: usize) -> Result<(), ModelError> {
    if k >= count {
        return Err(ModelError::ProcessOutOfRange { index: k, count });
    }
    Ok(())
}

fn check_time(t: f64, horizon: f64) -> Result<(), ModelError> {
    if !t.is_finite() || t < 0.0 || t > horizon {
        return Err(ModelError::TimeOutOfRange { t, horizon });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::MarkedEvent;
    use alloc::vec;

    fn boxcar_params_2() -> HawkesParams {
        // K=2, one boxcar basis with a 2-second window, W[0→1] = 0.8.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let impulse = ImpulseCoefficients::uniform_shared(1);
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8;
        HawkesParams::new(vec![0.3, 0.1], w, basis, impulse).unwrap()
    }

    fn one_event_log() -> EventLog {
        EventLog::new(10.0, 2, 0, vec![MarkedEvent::new(1.0, 0)], None).unwrap()
    }

    #[test]
    fn zero_weights_give_constant_background() {
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let params = HawkesParams::new(
            vec![0.4, 0.7],
            Matrix::zeros(2, 2),
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(
            10.0,
            2,
            0,
            vec![MarkedEvent::new(1.0, 0), MarkedEvent::new(2.0, 1)],
            None,
        )
        .unwrap();
        for i in 0..20 {
            let t = 0.5 * i as f64;
            assert_eq!(intensity(&params, &log, 0, t).unwrap(), 0.4);
            assert_eq!(intensity(&params, &log, 1, t).unwrap(), 0.7);
        }
    }

    #[test]
    fn boxcar_intensity_hand_value() {
        // Unit-mass boxcar over 2s has height 0.5, so at t=2 the event at
        // t=1 contributes 0.8 * 0.5 = 0.4 on top of b=0.1.
        let params = boxcar_params_2();
        let log = one_event_log();
        let got = intensity(&params, &log, 1, 2.0).unwrap();
        assert!((got - 0.5).abs() < 1e-15, "{got}");
    }

    #[test]
    fn intensity_expires_after_window() {
        let params = boxcar_params_2();
        let log = one_event_log();
        let got = intensity(&params, &log, 1, 3.5).unwrap();
        assert_eq!(got, 0.1);
        // Closed support: an event exactly Δt in the past still counts.
        let at_edge = intensity(&params, &log, 1, 3.0).unwrap();
        assert!((at_edge - 0.5).abs() < 1e-15);
        // Strictly past only: at the event's own time it contributes nothing.
        let at_event = intensity(&params, &log, 1, 1.0).unwrap();
        assert_eq!(at_event, 0.1);
    }

    #[test]
    fn intensity_rejects_out_of_range() {
        let params = boxcar_params_2();
        let log = one_event_log();
        assert!(matches!(
            intensity(&params, &log, 1, 10.5),
            Err(ModelError::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            intensity(&params, &log, 2, 1.0),
            Err(ModelError::ProcessOutOfRange { .. })
        ));
    }

    #[test]
    fn softmax_uniform_when_theta_zero() {
        let theta = Matrix::zeros(1, 3);
        let ev = MarkedEvent::new(0.5, 0).with_features(vec![2.0, 1.0, 5.0]);
        let got = softmax_attribution(&theta, &ev).unwrap();
        for v in &got {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_closed_form() {
        // f = (1, 0), θ = (ln 3, anything): exp(ln 3) = 3 against exp(0) = 1.
        let theta = Matrix::from_rows(1, 2, vec![3.0f64.ln(), -17.0]);
        let ev = MarkedEvent::new(0.5, 0).with_features(vec![1.0, 0.0]);
        let got = softmax_attribution(&theta, &ev).unwrap();
        assert!((got[0] - 0.75).abs() < 1e-14);
        assert!((got[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn softmax_saturation_is_stable() {
        let theta = Matrix::from_rows(1, 2, vec![1000.0, 0.0]);
        let ev = MarkedEvent::new(0.5, 0).with_features(vec![1.0, 1.0]);
        let got = softmax_attribution(&theta, &ev).unwrap();
        assert!(got[0] > 1.0 - 1e-12);
        assert!(got[1] >= 0.0);
        assert!((got[0] + got[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let theta = Matrix::from_rows(2, 3, vec![0.3, -2.0, 1.4, 0.0, 9.0, -4.0]);
        for p in 0..2 {
            let ev = MarkedEvent::new(0.5, p).with_features(vec![0.5, 1.5, 2.5]);
            let got = softmax_attribution(&theta, &ev).unwrap();
            let sum: f64 = got.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(got.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    #[test]
    fn nll_empty_log_is_pure_compensator() {
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let params = HawkesParams::new(
            vec![0.5],
            Matrix::zeros(1, 1),
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(10.0, 1, 0, vec![], None).unwrap();
        let got = neg_log_likelihood(&params, &log).unwrap();
        assert!((got - 5.0).abs() < 1e-12);
    }

    #[test]
    fn nll_single_event_closed_form() {
        // Homogeneous Poisson with rate 0.5 on [0, 10], one event:
        // NLL = 0.5 * 10 - log 0.5.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let params = HawkesParams::new(
            vec![0.5],
            Matrix::zeros(1, 1),
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(10.0, 1, 0, vec![MarkedEvent::new(1.0, 0)], None).unwrap();
        let got = neg_log_likelihood(&params, &log).unwrap();
        let expected = 5.0 - 0.5f64.ln();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn nll_additive_over_independent_processes() {
        // With W = 0 the joint NLL is the sum of K homogeneous Poisson NLLs.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let b = vec![0.4, 0.9, 0.2];
        let params = HawkesParams::new(
            b.clone(),
            Matrix::zeros(3, 3),
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let horizon = 20.0;
        let events = vec![
            MarkedEvent::new(1.0, 0),
            MarkedEvent::new(2.0, 1),
            MarkedEvent::new(3.0, 1),
            MarkedEvent::new(4.5, 2),
            MarkedEvent::new(19.0, 0),
        ];
        let log = EventLog::new(horizon, 3, 0, events.clone(), None).unwrap();
        let got = neg_log_likelihood(&params, &log).unwrap();
        let mut expected = 0.0;
        for (k, bk) in b.iter().enumerate() {
            let n_k = events.iter().filter(|e| e.process == k).count() as f64;
            expected += bk * horizon - n_k * bk.ln();
        }
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn posterior_flat_prior_equals_likelihood() {
        let params = boxcar_params_2();
        let log = one_event_log();
        let nll = neg_log_likelihood(&params, &log).unwrap();
        let nlp = neg_log_posterior(&params, &log, &PriorConfig::flat()).unwrap();
        assert_eq!(nll, nlp);
    }

    #[test]
    fn posterior_rate_term_hand_value() {
        // α = 1, β = 2, total W mass 1.5 adds exactly 3.0.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 1.0;
        w[(1, 0)] = 0.5;
        let params = HawkesParams::new(
            vec![0.3, 0.1],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = one_event_log();
        let prior = PriorConfig {
            gamma_shape: 1.0,
            gamma_rate: 2.0,
            theta_penalty: 0.0,
            coefficient_penalty: 0.0,
        };
        let nll = neg_log_likelihood(&params, &log).unwrap();
        let nlp = neg_log_posterior(&params, &log, &prior).unwrap();
        assert!((nlp - (nll + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn posterior_finite_at_zero_weight() {
        // α > 1 with a zero weight entry must stay finite via the log floor.
        let params = boxcar_params_2(); // has zero entries in W
        let log = one_event_log();
        let prior = PriorConfig {
            gamma_shape: 2.0,
            gamma_rate: 1.0,
            theta_penalty: 0.0,
            coefficient_penalty: 0.0,
        };
        let nlp = neg_log_posterior(&params, &log, &prior).unwrap();
        assert!(nlp.is_finite());
    }

    #[test]
    fn gradient_empty_log_background_closed_form() {
        // Compensator only: d/d(log b_k) = b_k · T.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let params = HawkesParams::new(
            vec![0.5, 2.0],
            Matrix::zeros(2, 2),
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(10.0, 2, 0, vec![], None).unwrap();
        let g = gradient(&params, &log, &PriorConfig::flat()).unwrap();
        assert!((g.background[0] - 5.0).abs() < 1e-12);
        assert!((g.background[1] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn feature_intensity_uniform_split() {
        // θ = 0 with F = 2: each feature channel carries half the W term.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8;
        let params = HawkesParams::new(
            vec![0.3, 0.1],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap()
        .with_features(Matrix::zeros(2, 2))
        .unwrap();
        let log = EventLog::new(
            10.0,
            2,
            2,
            vec![MarkedEvent::new(1.0, 0).with_features(vec![1.0, 2.0])],
            None,
        )
        .unwrap();
        let full = intensity(&params, &log, 1, 2.0).unwrap();
        let w_term = full - 0.1;
        for i in 0..2 {
            let fi = feature_intensity(&params, &log, 1, i, 2.0).unwrap();
            assert!((fi - (0.1 + 0.5 * w_term)).abs() < 1e-12);
        }
    }

    #[test]
    fn feature_intensity_requires_theta() {
        let params = boxcar_params_2();
        let log = one_event_log();
        assert!(matches!(
            feature_intensity(&params, &log, 1, 0, 2.0),
            Err(ModelError::MissingFeatureWeights)
        ));
    }

    #[test]
    fn dyad_channel_adds_to_intensity() {
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8;
        let mut wp = Matrix::zeros(2, 2);
        wp[(0, 1)] = 0.6;
        let params = HawkesParams::new(
            vec![0.3, 0.1],
            w,
            basis.clone(),
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap()
        .with_dyad_channel(wp, basis, ImpulseCoefficients::uniform_shared(1))
        .unwrap();
        // Event mentioning process 1 boosts it through both channels.
        let log = EventLog::new(
            10.0,
            2,
            0,
            vec![MarkedEvent::new(1.0, 0).with_dyad(vec![1])],
            None,
        )
        .unwrap();
        let got = intensity(&params, &log, 1, 2.0).unwrap();
        assert!((got - (0.1 + 0.8 * 0.5 + 0.6 * 0.5)).abs() < 1e-14);
        // An event with no mention only uses the recency channel.
        let log2 = EventLog::new(10.0, 2, 0, vec![MarkedEvent::new(1.0, 0)], None).unwrap();
        let got2 = intensity(&params, &log2, 1, 2.0).unwrap();
        assert!((got2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        assert!(HawkesParams::new(
            vec![0.0],
            Matrix::zeros(1, 1),
            basis.clone(),
            ImpulseCoefficients::uniform_shared(1),
        )
        .is_err());
        let mut w = Matrix::zeros(1, 1);
        w[(0, 0)] = -0.5;
        assert!(HawkesParams::new(
            vec![1.0],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .is_err());
    }
}
