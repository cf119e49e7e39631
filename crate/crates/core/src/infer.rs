//! Parameter estimation: stochastic gradient descent on the log-posterior
//! and a limited-memory quasi-Newton path with strong Wolfe line search.
//!
//! Optimization runs on an unconstrained parameterization — `log b`,
//! `log W`, `log W'`, raw θ, and softmax logits for the impulse
//! coefficients — so every iterate satisfies positivity and simplex
//! constraints exactly.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::events::EventLog;
use crate::kernel::{BasisFamily, ImpulseCoefficients};
use crate::math;
use crate::matrix::Matrix;
use crate::model::{
    self, gradient, neg_log_posterior, Gradient, HawkesParams, ModelError, PriorConfig,
};

/// Weights are packed as `ln(max(w, WEIGHT_PACK_FLOOR))`.
const WEIGHT_PACK_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("invalid fit config: {reason}")]
    BadConfig { reason: &'static str },
    #[error("objective became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitMethod {
    QuasiNewton,
    Sgd,
}

/// Starting point for the optimizer.
#[derive(Debug, Clone)]
pub enum Init {
    /// Empirical background rates, small uniform weights, uniform simplex
    /// coefficients, zero θ.
    Default,
    WarmStart(HawkesParams),
}

/// Fit configuration. `max_iterations` counts quasi-Newton iterations or
/// SGD epochs.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub method: FitMethod,
    pub max_iterations: usize,
    pub step_initial: f64,
    pub step_decay: f64,
    pub minibatch: usize,
    /// Relative objective change below this over five consecutive
    /// iterations counts as converged.
    pub tolerance: f64,
    pub seed: u64,
    pub prior: PriorConfig,
    pub init: Init,
    pub kernel: BasisFamily,
    /// One coefficient vector per ordered pair instead of a shared one.
    pub per_pair_coefficients: bool,
    /// Optimize the impulse coefficients (through softmax logits). Off by
    /// default: the kernel shape is fixed ahead of training.
    pub learn_coefficients: bool,
    /// Carry a θ block (K×F) for downstream attribution.
    pub include_features: bool,
    /// Enable the dyadic-interaction channel with this kernel.
    pub dyad_kernel: Option<BasisFamily>,
}

impl FitConfig {
    pub fn new(kernel: BasisFamily) -> Self {
        Self {
            method: FitMethod::QuasiNewton,
            max_iterations: 200,
            step_initial: 0.05,
            step_decay: 1e-3,
            minibatch: 128,
            tolerance: 1e-7,
            seed: 0,
            prior: PriorConfig::default(),
            init: Init::Default,
            kernel,
            per_pair_coefficients: false,
            learn_coefficients: false,
            include_features: false,
            dyad_kernel: None,
        }
    }

    pub fn with_method(mut self, method: FitMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_dyad_channel(mut self, kernel: BasisFamily) -> Self {
        self.dyad_kernel = Some(kernel);
        self
    }

    pub fn with_prior(mut self, prior: PriorConfig) -> Self {
        self.prior = prior;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn warm_start(mut self, params: HawkesParams) -> Self {
        self.init = Init::WarmStart(params);
        self
    }

    fn validate(&self) -> Result<(), FitError> {
        if self.max_iterations == 0 {
            return Err(FitError::BadConfig {
                reason: "max_iterations must be positive",
            });
        }
        if !(self.step_initial.is_finite() && self.step_initial > 0.0) {
            return Err(FitError::BadConfig {
                reason: "step size must be positive",
            });
        }
        if !(self.step_decay.is_finite() && self.step_decay >= 0.0) {
            return Err(FitError::BadConfig {
                reason: "step decay must be non-negative",
            });
        }
        if self.minibatch == 0 {
            return Err(FitError::BadConfig {
                reason: "minibatch must be positive",
            });
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(FitError::BadConfig {
                reason: "tolerance must be positive",
            });
        }
        self.prior.validate()?;
        Ok(())
    }
}

/// Estimation result: parameters at the best objective seen, the
/// per-iteration objective trace, and convergence metadata.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub params: HawkesParams,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub final_grad_norm: f64,
}

/// Fits the model to an event log. Deterministic given the seed.
pub fn fit(log: &EventLog, config: &FitConfig) -> Result<FittedModel, FitError> {
    config.validate()?;
    let template = initial_params(log, config)?;
    let packing = Packing::from_params(&template, config.learn_coefficients);
    let x0 = pack(&template, &packing);
    let problem = Problem {
        template: &template,
        packing: &packing,
        log,
        prior: &config.prior,
    };
    match config.method {
        FitMethod::QuasiNewton => quasi_newton(&problem, x0, config),
        FitMethod::Sgd => sgd(&problem, x0, config),
    }
}

fn initial_params(log: &EventLog, config: &FitConfig) -> Result<HawkesParams, FitError> {
    if let Init::WarmStart(params) = &config.init {
        params.check_log(log)?;
        return Ok(params.clone());
    }
    let k = log.num_processes();
    let horizon = log.horizon();
    if !(horizon > 0.0) {
        return Err(FitError::BadConfig {
            reason: "cannot fit on a zero-length horizon",
        });
    }
    // Empirical rate per process, floored so empty processes keep b > 0.
    let counts = log.process_counts();
    let background: Vec<f64> = counts
        .iter()
        .map(|&n| (n as f64).max(0.5) / horizon)
        .collect();
    let weights = Matrix::filled(k, k, 0.01);
    let coeffs = if config.per_pair_coefficients {
        ImpulseCoefficients::uniform_per_pair(k, config.kernel.count())
    } else {
        ImpulseCoefficients::uniform_shared(config.kernel.count())
    };
    let mut params = HawkesParams::new(background, weights, config.kernel.clone(), coeffs)?;
    if config.include_features && log.num_features() > 0 {
        params = params.with_features(Matrix::zeros(k, log.num_features()))?;
    }
    if let Some(dyad_kernel) = &config.dyad_kernel {
        let coeffs = ImpulseCoefficients::uniform_shared(dyad_kernel.count());
        params =
            params.with_dyad_channel(Matrix::filled(k, k, 0.01), dyad_kernel.clone(), coeffs)?;
    }
    Ok(params)
}

// ---------------------------------------------------------------------------
// Parameter vector layout
// ---------------------------------------------------------------------------

/// Block layout of the unconstrained parameter vector:
/// `[log b | log W | coeff logits? | θ? | log W'?]`.
#[derive(Debug, Clone)]
struct Packing {
    k: usize,
    coeff_len: usize,
    theta_rows: usize,
    theta_cols: usize,
    dyad: bool,
}

impl Packing {
    fn from_params(params: &HawkesParams, learn_coefficients: bool) -> Self {
        Self {
            k: params.num_processes(),
            coeff_len: if learn_coefficients {
                model::coeff_flat_len(params.impulse())
            } else {
                0
            },
            theta_rows: params.feature_weights().map_or(0, Matrix::rows),
            theta_cols: params.feature_weights().map_or(0, Matrix::cols),
            dyad: params.dyad().is_some(),
        }
    }

    fn len(&self) -> usize {
        let mut n = self.k + self.k * self.k + self.coeff_len + self.theta_rows * self.theta_cols;
        if self.dyad {
            n += self.k * self.k;
        }
        n
    }
}

fn pack(params: &HawkesParams, packing: &Packing) -> Vec<f64> {
    let mut x = Vec::with_capacity(packing.len());
    for b in params.background() {
        x.push(math::ln(*b));
    }
    for w in params.weights().iter() {
        x.push(math::ln(w.max(WEIGHT_PACK_FLOOR)));
    }
    if packing.coeff_len > 0 {
        // Logit gauge z = log c is a softmax preimage of c.
        match params.impulse().num_processes() {
            None => {
                for &c in params.impulse().coefficients(0, 0) {
                    x.push(math::ln(c.max(1e-300)));
                }
            }
            Some(k) => {
                for s in 0..k {
                    for r in 0..k {
                        for &c in params.impulse().coefficients(s, r) {
                            x.push(math::ln(c.max(1e-300)));
                        }
                    }
                }
            }
        }
    }
    if let Some(theta) = params.feature_weights() {
        x.extend(theta.iter());
    }
    if let Some(dyad) = params.dyad() {
        for w in dyad.weights().iter() {
            x.push(math::ln(w.max(WEIGHT_PACK_FLOOR)));
        }
    }
    debug_assert_eq!(x.len(), packing.len());
    x
}

fn unpack(
    template: &HawkesParams,
    packing: &Packing,
    x: &[f64],
) -> Result<HawkesParams, ModelError> {
    let k = packing.k;
    let mut pos = 0;
    let background: Vec<f64> = x[pos..pos + k].iter().map(|v| math::exp(*v)).collect();
    pos += k;
    let weights = Matrix::from_rows(
        k,
        k,
        x[pos..pos + k * k].iter().map(|v| math::exp(*v)).collect(),
    );
    pos += k * k;
    let impulse = if packing.coeff_len > 0 {
        let logits = &x[pos..pos + packing.coeff_len];
        pos += packing.coeff_len;
        softmax_coefficients(template.impulse(), logits)?
    } else {
        template.impulse().clone()
    };
    let mut params = HawkesParams::new(background, weights, template.basis().clone(), impulse)?;
    if packing.theta_rows > 0 {
        let len = packing.theta_rows * packing.theta_cols;
        let theta = Matrix::from_rows(
            packing.theta_rows,
            packing.theta_cols,
            x[pos..pos + len].to_vec(),
        );
        pos += len;
        params = params.with_features(theta)?;
    }
    if packing.dyad {
        let dyad = template.dyad().expect("packing says dyad present");
        let dyad_w = Matrix::from_rows(
            k,
            k,
            x[pos..pos + k * k].iter().map(|v| math::exp(*v)).collect(),
        );
        params =
            params.with_dyad_channel(dyad_w, dyad.basis().clone(), dyad.coefficients().clone())?;
    }
    Ok(params)
}

fn softmax_coefficients(
    template: &ImpulseCoefficients,
    logits: &[f64],
) -> Result<ImpulseCoefficients, ModelError> {
    let b = template.basis_count();
    let mut flat = Vec::with_capacity(logits.len());
    for chunk in logits.chunks(b) {
        let max = chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut vals = Vec::with_capacity(b);
        for &z in chunk {
            let e = math::exp(z - max);
            vals.push(e);
            sum += e;
        }
        for v in vals {
            flat.push(v / sum);
        }
    }
    let out = match template.num_processes() {
        None => ImpulseCoefficients::shared(flat)?,
        Some(k) => ImpulseCoefficients::per_pair(k, b, flat)?,
    };
    Ok(out)
}

fn gradient_vec(grad: &Gradient, packing: &Packing) -> Vec<f64> {
    let mut v = Vec::with_capacity(packing.len());
    v.extend(grad.background.iter());
    v.extend(grad.weights.as_slice().iter());
    if packing.coeff_len > 0 {
        v.extend(grad.coefficients.iter());
    }
    if let Some(theta) = &grad.feature_weights {
        v.extend(theta.as_slice().iter());
    }
    if let Some(dyad) = &grad.dyad_weights {
        v.extend(dyad.as_slice().iter());
    }
    debug_assert_eq!(v.len(), packing.len());
    v
}

// ---------------------------------------------------------------------------
// Objective adaptor
// ---------------------------------------------------------------------------

struct Problem<'a> {
    template: &'a HawkesParams,
    packing: &'a Packing,
    log: &'a EventLog,
    prior: &'a PriorConfig,
}

impl Problem<'_> {
    /// Objective value; +inf when the point is not representable (overflowed
    /// weights), which line searches treat as an ordinary rejection.
    fn value(&self, x: &[f64]) -> f64 {
        match unpack(self.template, self.packing, x) {
            Ok(params) => {
                neg_log_posterior(&params, self.log, self.prior).unwrap_or(f64::INFINITY)
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        let params = unpack(self.template, self.packing, x).ok()?;
        let g = gradient(&params, self.log, self.prior).ok()?;
        let v = gradient_vec(&g, self.packing);
        if v.iter().all(|g| g.is_finite()) {
            Some(v)
        } else {
            None
        }
    }

    fn grad_batch(&self, x: &[f64], batch: &[usize], scale: f64) -> Option<Vec<f64>> {
        let params = unpack(self.template, self.packing, x).ok()?;
        let g = model::gradient_batch(&params, self.log, self.prior, batch, scale).ok()?;
        Some(gradient_vec(&g, self.packing))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(math::abs(*x)))
}

// ---------------------------------------------------------------------------
// Limited-memory quasi-Newton with strong Wolfe line search
// ---------------------------------------------------------------------------

const LBFGS_MEMORY: usize = 7;
const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const GRAD_STOP: f64 = 1e-10;
const CONSECUTIVE_FLAT: usize = 5;

fn quasi_newton(
    problem: &Problem<'_>,
    mut x: Vec<f64>,
    config: &FitConfig,
) -> Result<FittedModel, FitError> {
    let mut f = problem.value(&x);
    if !f.is_finite() {
        return Err(FitError::NonFinite { iteration: 0 });
    }
    let mut g = problem.grad(&x).ok_or(FitError::NonFinite { iteration: 0 })?;
    let mut trace = vec![f];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut flat_count = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for iter in 0..config.max_iterations {
        iterations = iter + 1;
        if max_abs(&g) < GRAD_STOP {
            converged = true;
            break;
        }
        let mut direction = two_loop_direction(&memory, &g);
        let mut g0d = dot(&g, &direction);
        if g0d >= 0.0 {
            // Curvature memory produced a non-descent direction; restart.
            memory.clear();
            direction = g.iter().map(|v| -v).collect();
            g0d = dot(&g, &direction);
        }
        let Some((alpha, f_new, g_new)) = strong_wolfe(problem, &x, &direction, f, g0d) else {
            // No acceptable step along this direction.
            break;
        };
        let mut s = direction;
        for v in s.iter_mut() {
            *v *= alpha;
        }
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 {
            if memory.len() == LBFGS_MEMORY {
                memory.pop_front();
            }
            let rho = 1.0 / sy;
            memory.push_back((s.clone(), y, rho));
        }
        axpy(&mut x, 1.0, &s);
        let rel = math::abs(f - f_new) / f.abs().max(1.0);
        f = f_new;
        g = g_new;
        trace.push(f);
        if rel < config.tolerance {
            flat_count += 1;
            if flat_count >= CONSECUTIVE_FLAT {
                converged = true;
                break;
            }
        } else {
            flat_count = 0;
        }
    }

    let params = unpack(problem.template, problem.packing, &x)?;
    Ok(FittedModel {
        params,
        objective_trace: trace,
        converged,
        iterations,
        final_grad_norm: max_abs(&g),
    })
}

fn two_loop_direction(memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, g: &[f64]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        axpy(&mut q, -a, y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        for v in q.iter_mut() {
            *v *= gamma;
        }
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let beta = rho * dot(y, &q);
        axpy(&mut q, a - beta, s);
    }
    for v in q.iter_mut() {
        *v = -*v;
    }
    q
}

/// Strong Wolfe line search (bracket then zoom by bisection). Returns the
/// step, the objective and the gradient at the accepted point.
fn strong_wolfe(
    problem: &Problem<'_>,
    x: &[f64],
    direction: &[f64],
    f0: f64,
    g0d: f64,
) -> Option<(f64, f64, Vec<f64>)> {
    let eval_f = |alpha: f64| {
        let mut xt = x.to_vec();
        axpy(&mut xt, alpha, direction);
        problem.value(&xt)
    };
    let eval_g = |alpha: f64| {
        let mut xt = x.to_vec();
        axpy(&mut xt, alpha, direction);
        problem.grad(&xt)
    };

    let mut alpha_prev = 0.0f64;
    let mut f_prev = f0;
    let mut alpha = 1.0f64;
    let alpha_max = 1e4;

    for i in 0..20 {
        let f_a = eval_f(alpha);
        if f_a > f0 + WOLFE_C1 * alpha * g0d || (i > 0 && f_a >= f_prev) {
            return zoom(
                &eval_f, &eval_g, direction, f0, g0d, alpha_prev, alpha, f_prev,
            );
        }
        let g_a = eval_g(alpha)?;
        let gd = dot(&g_a, direction);
        if math::abs(gd) <= -WOLFE_C2 * g0d {
            return Some((alpha, f_a, g_a));
        }
        if gd >= 0.0 {
            return zoom(&eval_f, &eval_g, direction, f0, g0d, alpha, alpha_prev, f_a);
        }
        alpha_prev = alpha;
        f_prev = f_a;
        alpha = (2.0 * alpha).min(alpha_max);
        if alpha >= alpha_max {
            return Some((alpha_prev, f_prev, eval_g(alpha_prev)?));
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn zoom(
    eval_f: &impl Fn(f64) -> f64,
    eval_g: &impl Fn(f64) -> Option<Vec<f64>>,
    direction: &[f64],
    f0: f64,
    g0d: f64,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
) -> Option<(f64, f64, Vec<f64>)> {
    for _ in 0..40 {
        let alpha = 0.5 * (lo + hi);
        let f_a = eval_f(alpha);
        if f_a > f0 + WOLFE_C1 * alpha * g0d || f_a >= f_lo {
            hi = alpha;
        } else {
            let g_a = eval_g(alpha)?;
            let gd = dot(&g_a, direction);
            if math::abs(gd) <= -WOLFE_C2 * g0d {
                return Some((alpha, f_a, g_a));
            }
            if gd * (hi - lo) >= 0.0 {
                hi = lo;
            }
            lo = alpha;
            f_lo = f_a;
        }
        if math::abs(hi - lo) < 1e-14 {
            break;
        }
    }
    // Fall back to the best Armijo point found, if it improves at all.
    if f_lo < f0 && lo > 0.0 {
        let g_lo = eval_g(lo)?;
        return Some((lo, f_lo, g_lo));
    }
    None
}

// ---------------------------------------------------------------------------
// Stochastic gradient descent
// ---------------------------------------------------------------------------

fn sgd(
    problem: &Problem<'_>,
    mut x: Vec<f64>,
    config: &FitConfig,
) -> Result<FittedModel, FitError> {
    let n = problem.log.len();
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let f0 = problem.value(&x);
    if !f0.is_finite() {
        return Err(FitError::NonFinite { iteration: 0 });
    }
    let mut trace = vec![f0];
    let mut best = (f0, x.clone());
    let mut indices: Vec<usize> = (0..n).collect();
    let mut step_count = 0usize;
    let mut flat_count = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for epoch in 0..config.max_iterations {
        iterations = epoch + 1;
        // Fisher-Yates shuffle from the seeded generator.
        for i in (1..indices.len()).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        if n == 0 {
            // Nothing to subsample: one deterministic full-gradient step.
            let g = problem
                .grad(&x)
                .ok_or(FitError::NonFinite { iteration: epoch })?;
            let eta = config.step_initial / (1.0 + config.step_decay * step_count as f64);
            axpy(&mut x, -eta, &g);
            step_count += 1;
        } else {
            for chunk in indices.chunks(config.minibatch.min(n)) {
                let scale = chunk.len() as f64 / n as f64;
                let g = problem
                    .grad_batch(&x, chunk, scale)
                    .ok_or(FitError::NonFinite { iteration: epoch })?;
                let eta = config.step_initial / (1.0 + config.step_decay * step_count as f64);
                axpy(&mut x, -eta, &g);
                step_count += 1;
            }
        }
        let f = problem.value(&x);
        if !f.is_finite() {
            return Err(FitError::NonFinite { iteration: epoch });
        }
        let prev = *trace.last().expect("trace is never empty");
        trace.push(f);
        if f < best.0 {
            best = (f, x.clone());
        }
        let rel = math::abs(prev - f) / prev.abs().max(1.0);
        if rel < config.tolerance {
            flat_count += 1;
            if flat_count >= CONSECUTIVE_FLAT {
                converged = true;
                break;
            }
        } else {
            flat_count = 0;
        }
    }

    // Return the best iterate seen: individual SGD steps may overshoot.
    let (_, best_x) = best;
    let final_grad = problem
        .grad(&best_x)
        .map(|g| max_abs(&g))
        .unwrap_or(f64::NAN);
    let params = unpack(problem.template, problem.packing, &best_x)?;
    Ok(FittedModel {
        params,
        objective_trace: trace,
        converged,
        iterations,
        final_grad_norm: final_grad,
    })
}

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

/// Compares the analytic gradient against central finite differences on the
/// full unconstrained parameterization (every block, including coefficient
/// logits). Returns the worst error, measured relative to
/// `max(|analytic|, |numeric|, 1)` per coordinate.
pub fn finite_difference_check(
    params: &HawkesParams,
    log: &EventLog,
    prior: &PriorConfig,
    h: f64,
) -> Result<f64, FitError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(FitError::BadConfig {
            reason: "finite-difference step must be positive",
        });
    }
    let packing = Packing::from_params(params, true);
    let x = pack(params, &packing);
    // Evaluate both sides at the packed point so flooring of zero weights
    // affects them identically.
    let at = unpack(params, &packing, &x)?;
    let analytic = gradient_vec(&gradient(&at, log, prior)?, &packing);
    let problem = Problem {
        template: params,
        packing: &packing,
        log,
        prior,
    };
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let mut xp = x.clone();
        xp[i] += h;
        let fp = problem.value(&xp);
        xp[i] = x[i] - h;
        let fm = problem.value(&xp);
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(FitError::NonFinite { iteration: i });
        }
        let numeric = (fp - fm) / (2.0 * h);
        let denom = math::abs(analytic[i]).max(math::abs(numeric)).max(1.0);
        worst = worst.max(math::abs(analytic[i] - numeric) / denom);
    }
    Ok(worst)
}
