//! Run configuration: one JSON document with per-subcommand blocks.
//! Unknown keys are rejected everywhere; flags override config values.

use serde::{Deserialize, Serialize};

use ripple_core::infer::{FitConfig, FitMethod};
use ripple_core::kernel::BasisFamily;
use ripple_core::matrix::Matrix;
use ripple_core::model::{HawkesParams, PriorConfig};
use ripple_core::simulate::{FeatureEmission, SimConfig};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub kernel: Option<KernelBlock>,
    #[serde(default)]
    pub prior: Option<PriorBlock>,
    #[serde(default)]
    pub fit: Option<FitBlock>,
    #[serde(default)]
    pub simulation: Option<SimulationBlock>,
    #[serde(default)]
    pub query: Option<QueryBlock>,
    #[serde(default)]
    pub evaluation: Option<EvaluationBlock>,
}

impl RunConfig {
    pub fn parse(raw: &str) -> Result<Self, CliError> {
        serde_json::from_str(raw).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub kind: String,
    #[serde(default)]
    pub count: Option<usize>,
    pub window: f64,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
}

impl KernelBlock {
    pub fn build(&self) -> Result<BasisFamily, CliError> {
        let count = self.count.unwrap_or(1);
        let fam = match self.kind.as_str() {
            "boxcar" => BasisFamily::boxcar(count, self.window),
            "raised_cosine" => BasisFamily::raised_cosine(count, self.window),
            "truncated_exponential" => match &self.rates {
                Some(rates) => BasisFamily::truncated_exponential(rates.clone(), self.window),
                None => BasisFamily::default_exponential(self.window),
            },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown kernel kind {other:?} (expected boxcar, raised_cosine or truncated_exponential)"
                )))
            }
        };
        fam.map_err(|e| CliError::Usage(format!("bad kernel block: {e}")))
    }
}

/// 48-hour default influence window.
pub fn default_kernel() -> BasisFamily {
    BasisFamily::default_exponential(48.0 * 3600.0).expect("static default kernel")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorBlock {
    #[serde(default = "default_gamma_shape")]
    pub gamma_shape: f64,
    #[serde(default = "default_gamma_rate")]
    pub gamma_rate: f64,
    #[serde(default = "default_penalty")]
    pub theta_penalty: f64,
    #[serde(default = "default_penalty")]
    pub coefficient_penalty: f64,
}

fn default_gamma_shape() -> f64 {
    1.1
}

fn default_gamma_rate() -> f64 {
    1.0
}

fn default_penalty() -> f64 {
    1e-2
}

impl PriorBlock {
    pub fn build(&self) -> PriorConfig {
        PriorConfig {
            gamma_shape: self.gamma_shape,
            gamma_rate: self.gamma_rate,
            theta_penalty: self.theta_penalty,
            coefficient_penalty: self.coefficient_penalty,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_step_initial")]
    pub step_initial: f64,
    #[serde(default = "default_step_decay")]
    pub step_decay: f64,
    #[serde(default = "default_minibatch")]
    pub minibatch: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub per_pair_coefficients: bool,
    #[serde(default)]
    pub learn_coefficients: bool,
    #[serde(default)]
    pub include_features: bool,
    /// Enable the dyadic-interaction channel.
    #[serde(default)]
    pub dyad: bool,
    /// Kernel for the dyadic channel; falls back to the main kernel.
    #[serde(default)]
    pub dyad_kernel: Option<KernelBlock>,
}

fn default_method() -> String {
    "quasi_newton".into()
}

fn default_max_iterations() -> usize {
    200
}

fn default_step_initial() -> f64 {
    0.05
}

fn default_step_decay() -> f64 {
    1e-3
}

fn default_minibatch() -> usize {
    128
}

fn default_tolerance() -> f64 {
    1e-7
}

impl Default for FitBlock {
    fn default() -> Self {
        Self {
            method: default_method(),
            max_iterations: default_max_iterations(),
            step_initial: default_step_initial(),
            step_decay: default_step_decay(),
            minibatch: default_minibatch(),
            tolerance: default_tolerance(),
            per_pair_coefficients: false,
            learn_coefficients: false,
            include_features: false,
            dyad: false,
            dyad_kernel: None,
        }
    }
}

impl FitBlock {
    pub fn build(
        &self,
        kernel: BasisFamily,
        prior: PriorConfig,
        seed: u64,
    ) -> Result<FitConfig, CliError> {
        let method = match self.method.as_str() {
            "quasi_newton" => FitMethod::QuasiNewton,
            "sgd" => FitMethod::Sgd,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown fit method {other:?} (expected quasi_newton or sgd)"
                )))
            }
        };
        let mut config = FitConfig::new(kernel.clone())
            .with_method(method)
            .with_prior(prior)
            .with_seed(seed);
        config.max_iterations = self.max_iterations;
        config.step_initial = self.step_initial;
        config.step_decay = self.step_decay;
        config.minibatch = self.minibatch;
        config.tolerance = self.tolerance;
        config.per_pair_coefficients = self.per_pair_coefficients;
        config.learn_coefficients = self.learn_coefficients;
        config.include_features = self.include_features;
        if self.dyad {
            let dyad_kernel = match &self.dyad_kernel {
                Some(block) => block.build()?,
                None => kernel,
            };
            config = config.with_dyad_channel(dyad_kernel);
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureEmissionBlock {
    pub prototypes: Vec<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub horizon: f64,
    pub background: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    #[serde(default)]
    pub dyad_weights: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dyad_kernel: Option<KernelBlock>,
    #[serde(default)]
    pub feature_emission: Option<Vec<FeatureEmissionBlock>>,
    #[serde(default)]
    pub dyad_emission: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub max_events: Option<usize>,
}

fn square_matrix(rows: &[Vec<f64>], k: usize, what: &str) -> Result<Matrix, CliError> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(CliError::Usage(format!("{what} must be a {k}x{k} matrix")));
    }
    Ok(Matrix::from_rows(
        k,
        k,
        rows.iter().flatten().copied().collect(),
    ))
}

impl SimulationBlock {
    pub fn build(&self, kernel: &BasisFamily, seed: u64) -> Result<SimConfig, CliError> {
        let k = self.background.len();
        let weights = square_matrix(&self.weights, k, "simulation.weights")?;
        let coeffs = ripple_core::kernel::ImpulseCoefficients::uniform_shared(kernel.count());
        let mut params = HawkesParams::new(self.background.clone(), weights, kernel.clone(), coeffs)
            .map_err(|e| CliError::Usage(format!("bad simulation parameters: {e}")))?;
        if let Some(dyad_rows) = &self.dyad_weights {
            let dyad_w = square_matrix(dyad_rows, k, "simulation.dyad_weights")?;
            let dyad_kernel = match &self.dyad_kernel {
                Some(block) => block.build()?,
                None => kernel.clone(),
            };
            let dyad_coeffs =
                ripple_core::kernel::ImpulseCoefficients::uniform_shared(dyad_kernel.count());
            params = params
                .with_dyad_channel(dyad_w, dyad_kernel, dyad_coeffs)
                .map_err(|e| CliError::Usage(format!("bad dyad channel: {e}")))?;
        }
        let mut config = SimConfig::new(params, self.horizon, seed);
        if let Some(blocks) = &self.feature_emission {
            if blocks.len() != k {
                return Err(CliError::Usage(format!(
                    "simulation.feature_emission needs {k} entries"
                )));
            }
            let mut emissions = Vec::with_capacity(k);
            for block in blocks {
                let emission = match &block.weights {
                    Some(w) => FeatureEmission::new(block.prototypes.clone(), w.clone()),
                    None => FeatureEmission::uniform(block.prototypes.clone()),
                };
                emissions.push(
                    emission.map_err(|e| CliError::Usage(format!("bad feature emission: {e}")))?,
                );
            }
            config = config.with_feature_emission(emissions);
        }
        if let Some(rows) = &self.dyad_emission {
            config = config.with_dyad_emission(square_matrix(rows, k, "simulation.dyad_emission")?);
        }
        if let Some(cap) = self.max_events {
            config = config.with_event_cap(cap);
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaBlock {
    #[serde(default)]
    pub voices: Option<Vec<usize>>,
    #[serde(default)]
    pub topics: Option<Vec<usize>>,
    #[serde(default)]
    pub time_range: Option<(f64, f64)>,
    #[serde(default)]
    pub min_feature_weight: Option<f64>,
}

impl CriteriaBlock {
    pub fn build(&self) -> ripple_core::events::FilterCriteria {
        let mut criteria = ripple_core::events::FilterCriteria::default();
        if let Some(v) = &self.voices {
            criteria = criteria.voices(v.iter().copied());
        }
        if let Some(t) = &self.topics {
            criteria = criteria.topics(t.iter().copied());
        }
        if let Some((a, b)) = self.time_range {
            criteria = criteria.between(a, b);
        }
        if let Some(w) = self.min_feature_weight {
            criteria = criteria.min_weight(w);
        }
        criteria
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBlock {
    pub sender: usize,
    pub receiver: usize,
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    #[serde(default)]
    pub feature: Option<usize>,
    #[serde(default)]
    pub grid_seconds: Option<f64>,
    #[serde(default)]
    pub allow_self: bool,
    #[serde(default)]
    pub receiver_side_events: bool,
    #[serde(default)]
    pub criteria: Option<CriteriaBlock>,
}

impl QueryBlock {
    pub fn build(&self, horizon: f64) -> ripple_core::responsiveness::ResponsivenessQuery {
        let interval = self.interval.unwrap_or((0.0, horizon));
        let mut query = ripple_core::responsiveness::ResponsivenessQuery::new(
            self.sender,
            self.receiver,
            interval,
        );
        if let Some(feature) = self.feature {
            query = query.with_feature(feature);
        }
        if let Some(grid) = self.grid_seconds {
            query = query.with_grid(grid);
        }
        query.allow_self = self.allow_self;
        query.receiver_side_events = self.receiver_side_events;
        if let Some(c) = &self.criteria {
            query = query.with_criteria(c.build());
        }
        query
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationBlock {
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    /// Number of quantile-spaced thresholds when none are given explicitly.
    #[serde(default = "default_threshold_count")]
    pub threshold_count: usize,
}

fn default_threshold_count() -> usize {
    5
}

impl Default for EvaluationBlock {
    fn default() -> Self {
        Self {
            thresholds: None,
            threshold_count: default_threshold_count(),
        }
    }
}
