//! The responsiveness measure: directed, time-varying influence from one
//! voice to another, as an instantaneous series, as interval-normalized
//! shares across senders, and attributed to features or dyadic mentions.
//!
//! Instantaneous responsiveness of the pair (sender, receiver) at time `t`
//! is the sender-driven component of the receiver's intensity: the sum of
//! kernel contributions of the sender's events still inside the influence
//! window, weighted by `W[sender, receiver]` (plus the dyadic channel for
//! sender events that mention the receiver). Summed over all senders and
//! added to the background it reconstructs the receiver's intensity exactly.

use alloc::vec::Vec;

use crate::events::{filter_events, EventError, EventLog, FilterCriteria};
use crate::model::{softmax_attribution, HawkesParams, ModelError};

pub const DEFAULT_GRID_SECONDS: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResponsivenessError {
    #[error("invalid responsiveness query: {reason}")]
    BadQuery { reason: &'static str },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("event error: {0}")]
    Event(#[from] EventError),
}

/// A responsiveness question: sender, receiver, interval, optional feature,
/// conditioning criteria and the sampling grid for the instantaneous series.
#[derive(Debug, Clone)]
pub struct ResponsivenessQuery {
    pub sender: usize,
    pub receiver: usize,
    pub interval: (f64, f64),
    pub feature: Option<usize>,
    pub criteria: FilterCriteria,
    pub grid_seconds: f64,
    /// Permit sender == receiver (self-excitation queries).
    pub allow_self: bool,
    /// Compatibility switch: drive the series by the receiver's own events
    /// instead of the sender's (the literal single-index reading of the
    /// measure). Off by default.
    pub receiver_side_events: bool,
}

impl ResponsivenessQuery {
    pub fn new(sender: usize, receiver: usize, interval: (f64, f64)) -> Self {
        Self {
            sender,
            receiver,
            interval,
            feature: None,
            criteria: FilterCriteria::default(),
            grid_seconds: DEFAULT_GRID_SECONDS,
            allow_self: false,
            receiver_side_events: false,
        }
    }

    pub fn with_feature(mut self, feature: usize) -> Self {
        self.feature = Some(feature);
        self
    }

    pub fn with_criteria(mut self, criteria: FilterCriteria) -> Self {
        self.criteria = criteria;
        self
    }

    pub fn with_grid(mut self, seconds: f64) -> Self {
        self.grid_seconds = seconds;
        self
    }

    fn validate(&self, params: &HawkesParams, log: &EventLog) -> Result<(), ResponsivenessError> {
        let k = params.num_processes();
        if self.sender >= k || self.receiver >= k {
            return Err(ResponsivenessError::BadQuery {
                reason: "sender or receiver out of range",
            });
        }
        if self.sender == self.receiver && !self.allow_self {
            return Err(ResponsivenessError::BadQuery {
                reason: "self-influence requires the allow_self flag",
            });
        }
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite()) || a > b || a < 0.0 || b > log.horizon() {
            return Err(ResponsivenessError::BadQuery {
                reason: "interval must be well-ordered inside [0, T]",
            });
        }
        if !(self.grid_seconds.is_finite() && self.grid_seconds > 0.0) {
            return Err(ResponsivenessError::BadQuery {
                reason: "grid resolution must be positive",
            });
        }
        if let Some(gamma) = self.feature {
            let f = params.num_features().unwrap_or(0);
            if gamma >= f {
                return Err(ResponsivenessError::BadQuery {
                    reason: "feature index out of range",
                });
            }
        }
        Ok(())
    }
}

/// Instantaneous responsiveness `R(sender, receiver, t)`: the sender-driven
/// component of the receiver's intensity at `t`. Zero whenever both channel
/// weights for the pair are zero.
pub fn instantaneous(
    params: &HawkesParams,
    log: &EventLog,
    sender: usize,
    receiver: usize,
    t: f64,
) -> Result<f64, ResponsivenessError> {
    instantaneous_impl(params, log, sender, receiver, t, false)
}

/// The literal single-process reading: the receiver's own events drive the
/// series through `W[sender, receiver]`. Kept behind this entry point for
/// comparison; the dyadic channel does not apply here.
pub fn instantaneous_receiver_indexed(
    params: &HawkesParams,
    log: &EventLog,
    sender: usize,
    receiver: usize,
    t: f64,
) -> Result<f64, ResponsivenessError> {
    instantaneous_impl(params, log, sender, receiver, t, true)
}

fn instantaneous_impl(
    params: &HawkesParams,
    log: &EventLog,
    sender: usize,
    receiver: usize,
    t: f64,
    receiver_side: bool,
) -> Result<f64, ResponsivenessError> {
    params.check_log(log)?;
    let k = params.num_processes();
    if sender >= k || receiver >= k {
        return Err(ResponsivenessError::BadQuery {
            reason: "sender or receiver out of range",
        });
    }
    if !t.is_finite() || t < 0.0 || t > log.horizon() {
        return Err(ResponsivenessError::Model(ModelError::TimeOutOfRange {
            t,
            horizon: log.horizon(),
        }));
    }
    let driving = if receiver_side { receiver } else { sender };
    let events = log.events();
    let w = params.weights()[(sender, receiver)];
    let mut value = 0.0;
    if w != 0.0 {
        let window = params.basis().window();
        for ev in &events[crate::model::active_range(events, t, window)] {
            if ev.process == driving {
                value += w * params.impulse_density(sender, receiver, t - ev.time);
            }
        }
    }
    if !receiver_side {
        if let Some(dyad) = params.dyad() {
            let wp = dyad.weights()[(sender, receiver)];
            if wp != 0.0 {
                let window = dyad.basis().window();
                for ev in &events[crate::model::active_range(events, t, window)] {
                    if ev.process == sender && ev.mentions(receiver) {
                        value += wp * dyad.impulse(sender, receiver, t - ev.time);
                    }
                }
            }
        }
    }
    Ok(value)
}

/// Exact integral of [`instantaneous`] over `[a, b]` for one pair, through
/// kernel integrals (no grid involved). Both channels.
pub fn pair_interval_mass(
    params: &HawkesParams,
    log: &EventLog,
    sender: usize,
    receiver: usize,
    a: f64,
    b: f64,
) -> f64 {
    let mut mass = 0.0;
    let w = params.weights()[(sender, receiver)];
    if w != 0.0 {
        for ev in log.events() {
            if ev.process == sender && ev.time < b {
                mass += w * params.impulse_mass(sender, receiver, a - ev.time, b - ev.time);
            }
        }
    }
    if let Some(dyad) = params.dyad() {
        let wp = dyad.weights()[(sender, receiver)];
        if wp != 0.0 {
            for ev in log.events() {
                if ev.process == sender && ev.time < b && ev.mentions(receiver) {
                    mass += wp * dyad.impulse_mass(sender, receiver, a - ev.time, b - ev.time);
                }
            }
        }
    }
    mass
}

/// Influence mass into the receiver per sender over the query interval,
/// with each mass normalized by the total incoming influence. When nothing
/// flowed, shares are all zero and the flag is set.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct SenderShare {
    pub sender: usize,
    /// Pre-normalization influence mass over the interval.
    pub mass: f64,
    /// Share of the receiver's total incoming influence.
    pub share: f64,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalShares {
    pub receiver: usize,
    pub interval: (f64, f64),
    pub shares: Vec<SenderShare>,
    pub all_zero: bool,
}

/// Integrates instantaneous responsiveness over the query interval for
/// every sender into the query's receiver and normalizes by the total.
/// Criteria are applied to the log first. Self-influence enters only with
/// the query's `allow_self` flag.
pub fn interval_responsiveness(
    params: &HawkesParams,
    log: &EventLog,
    query: &ResponsivenessQuery,
) -> Result<IntervalShares, ResponsivenessError> {
    params.check_log(log)?;
    let k = params.num_processes();
    if query.receiver >= k {
        return Err(ResponsivenessError::BadQuery {
            reason: "receiver out of range",
        });
    }
    let (a, b) = query.interval;
    if !(a.is_finite() && b.is_finite()) || a > b || a < 0.0 || b > log.horizon() {
        return Err(ResponsivenessError::BadQuery {
            reason: "interval must be well-ordered inside [0, T]",
        });
    }
    let filtered = filter_events(log, &query.criteria)?;
    let mut shares = Vec::with_capacity(k);
    let mut total = 0.0;
    for sender in 0..k {
        let mass = if sender == query.receiver && !query.allow_self {
            0.0
        } else {
            pair_interval_mass(params, &filtered, sender, query.receiver, a, b)
        };
        total += mass;
        shares.push(SenderShare {
            sender,
            mass,
            share: 0.0,
        });
    }
    let all_zero = total <= 0.0;
    if !all_zero {
        for s in shares.iter_mut() {
            s.share = s.mass / total;
        }
    }
    Ok(IntervalShares {
        receiver: query.receiver,
        interval: query.interval,
        shares,
        all_zero,
    })
}

/// Responsiveness attribution for one feature: the feature-weighted kernel
/// mass of the sender's featured events, the dyadic-channel mass of the
/// sender's mention events, and their sum.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributionResult {
    pub feature: usize,
    pub feature_term: f64,
    pub dyad_term: f64,
    pub total: f64,
}

/// Attributed responsiveness over the query interval for the query feature.
/// The feature term weights each featured sender event's kernel mass by its
/// softmax attribution at γ; the dyad term integrates the dyadic channel
/// over the sender's events that mention the receiver.
pub fn attribution(
    params: &HawkesParams,
    log: &EventLog,
    query: &ResponsivenessQuery,
) -> Result<AttributionResult, ResponsivenessError> {
    params.check_log(log)?;
    query.validate(params, log)?;
    let gamma = query.feature.ok_or(ResponsivenessError::BadQuery {
        reason: "attribution needs a feature index",
    })?;
    let theta = params
        .feature_weights()
        .ok_or(ResponsivenessError::Model(ModelError::MissingFeatureWeights))?;
    let filtered = filter_events(log, &query.criteria)?;
    let (a, b) = query.interval;
    let (sender, receiver) = (query.sender, query.receiver);

    let w = params.weights()[(sender, receiver)];
    let mut feature_term = 0.0;
    if w != 0.0 {
        for ev in filtered.events() {
            if ev.process == sender && ev.time < b && ev.features.is_some() {
                let share = softmax_attribution(theta, ev)?[gamma];
                feature_term +=
                    w * share * params.impulse_mass(sender, receiver, a - ev.time, b - ev.time);
            }
        }
    }
    let mut dyad_term = 0.0;
    if let Some(dyad) = params.dyad() {
        let wp = dyad.weights()[(sender, receiver)];
        if wp != 0.0 {
            for ev in filtered.events() {
                if ev.process == sender && ev.time < b && ev.mentions(receiver) {
                    dyad_term += wp * dyad.impulse_mass(sender, receiver, a - ev.time, b - ev.time);
                }
            }
        }
    }
    Ok(AttributionResult {
        feature: gamma,
        feature_term,
        dyad_term,
        total: feature_term + dyad_term,
    })
}

/// Attribution across every feature for the query pair and interval.
pub fn attribution_table(
    params: &HawkesParams,
    log: &EventLog,
    query: &ResponsivenessQuery,
) -> Result<Vec<AttributionResult>, ResponsivenessError> {
    let f = params
        .num_features()
        .ok_or(ResponsivenessError::Model(ModelError::MissingFeatureWeights))?;
    let mut out = Vec::with_capacity(f);
    for gamma in 0..f {
        let mut q = query.clone();
        q.feature = Some(gamma);
        out.push(attribution(params, log, &q)?);
    }
    Ok(out)
}

/// One directed influence edge: interval-aggregate responsiveness before
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfluenceEdge {
    pub sender: usize,
    pub receiver: usize,
    pub weight: f64,
}

/// Extracts the influence network over the interval `h`: one edge per
/// ordered cross pair whose pre-normalization mass reaches the threshold,
/// sorted by weight descending, then by indices. Structurally zero edges
/// are omitted.
pub fn influence_network(
    params: &HawkesParams,
    log: &EventLog,
    h: (f64, f64),
    threshold: f64,
) -> Result<Vec<InfluenceEdge>, ResponsivenessError> {
    params.check_log(log)?;
    let (a, b) = h;
    if !(a.is_finite() && b.is_finite()) || a > b || a < 0.0 || b > log.horizon() {
        return Err(ResponsivenessError::BadQuery {
            reason: "interval must be well-ordered inside [0, T]",
        });
    }
    if threshold.is_nan() || threshold < 0.0 {
        return Err(ResponsivenessError::BadQuery {
            reason: "threshold must be non-negative",
        });
    }
    let k = params.num_processes();
    let mut edges = Vec::new();
    for sender in 0..k {
        for receiver in 0..k {
            if sender == receiver {
                continue;
            }
            let weight = pair_interval_mass(params, log, sender, receiver, a, b);
            if weight > 0.0 && weight >= threshold {
                edges.push(InfluenceEdge {
                    sender,
                    receiver,
                    weight,
                });
            }
        }
    }
    edges.sort_by(|x, y| {
        y.weight
            .total_cmp(&x.weight)
            .then(x.sender.cmp(&y.sender))
            .then(x.receiver.cmp(&y.receiver))
    });
    Ok(edges)
}

/// Full report for one query: the instantaneous series on the grid, the
/// normalized incoming shares for the receiver, and (when the parameters
/// carry θ) the per-feature attribution table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsivenessReport {
    pub query_pair: (usize, usize),
    pub series: Vec<(f64, f64)>,
    pub shares: IntervalShares,
    pub attribution: Option<Vec<AttributionResult>>,
}

pub fn report(
    params: &HawkesParams,
    log: &EventLog,
    query: &ResponsivenessQuery,
) -> Result<ResponsivenessReport, ResponsivenessError> {
    params.check_log(log)?;
    query.validate(params, log)?;
    let filtered = filter_events(log, &query.criteria)?;
    let (a, b) = query.interval;
    let mut series = Vec::new();
    let mut t = a;
    // Closed sampling: include both endpoints, tolerating fp drift.
    while t <= b + 1e-9 {
        let at = t.min(b);
        let value = instantaneous_impl(
            params,
            &filtered,
            query.sender,
            query.receiver,
            at,
            query.receiver_side_events,
        )?;
        series.push((at, value));
        t += query.grid_seconds;
    }
    let shares = interval_responsiveness(params, log, query)?;
    let attribution = if params.feature_weights().is_some() && params.num_features().unwrap_or(0) > 0
    {
        Some(attribution_table(params, log, query)?)
    } else {
        None
    };
    Ok(ResponsivenessReport {
        query_pair: (query.sender, query.receiver),
        series,
        shares,
        attribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::MarkedEvent;
    use crate::kernel::{BasisFamily, ImpulseCoefficients};
    use crate::matrix::Matrix;
    use crate::model::intensity;
    use crate::testutil::random_fixture;
    use alloc::vec;

    fn boxcar_pair() -> (HawkesParams, EventLog) {
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8;
        let params = HawkesParams::new(
            vec![0.3, 0.1],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(10.0, 2, 0, vec![MarkedEvent::new(1.0, 0)], None).unwrap();
        (params, log)
    }

    #[test]
    fn zero_weight_pair_is_silent() {
        let (params, log) = boxcar_pair();
        for i in 0..50 {
            let t = 0.2 * i as f64;
            // Pair (1, 0) has W = 0.
            assert_eq!(instantaneous(&params, &log, 1, 0, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_event_boxcar_hand_values() {
        // Sender event at t=1, boxcar height 0.5, W = 0.8: the series is
        // 0.4 on (1, 3] and zero outside.
        let (params, log) = boxcar_pair();
        let at = |t: f64| instantaneous(&params, &log, 0, 1, t).unwrap();
        assert_eq!(at(1.0), 0.0);
        assert!((at(1.5) - 0.4).abs() < 1e-15);
        assert!((at(3.0) - 0.4).abs() < 1e-15);
        assert_eq!(at(3.1), 0.0);
        assert_eq!(at(0.5), 0.0);
    }

    #[test]
    fn decomposition_reconstructs_intensity() {
        for seed in [1u64, 2, 3, 4] {
            for with_marks in [false, true] {
                let (params, log) = random_fixture(seed, with_marks);
                for i in 0..30 {
                    let t = i as f64;
                    for receiver in 0..3 {
                        let mut total = params.background()[receiver];
                        for sender in 0..3 {
                            total +=
                                instantaneous(&params, &log, sender, receiver, t).unwrap();
                        }
                        let lambda = intensity(&params, &log, receiver, t).unwrap();
                        assert!(
                            (total - lambda).abs() < 1e-10,
                            "seed {seed} marks {with_marks} t {t} k {receiver}: {total} vs {lambda}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn shares_split_evenly_for_identical_senders() {
        // Senders 0 and 1 with equal weights and mirrored event times.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(3, 3);
        w[(0, 2)] = 0.5;
        w[(1, 2)] = 0.5;
        let params = HawkesParams::new(
            vec![0.2, 0.2, 0.2],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(
            10.0,
            3,
            0,
            vec![
                MarkedEvent::new(1.0, 0),
                MarkedEvent::new(1.0, 1),
                MarkedEvent::new(4.0, 0),
                MarkedEvent::new(4.0, 1),
            ],
            None,
        )
        .unwrap();
        let query = ResponsivenessQuery::new(0, 2, (0.0, 10.0));
        let shares = interval_responsiveness(&params, &log, &query).unwrap();
        assert!(!shares.all_zero);
        assert!((shares.shares[0].share - 0.5).abs() < 1e-12);
        assert!((shares.shares[1].share - 0.5).abs() < 1e-12);
        assert_eq!(shares.shares[2].share, 0.0);
        let total: f64 = shares.shares.iter().map(|s| s.share).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn only_active_sender_takes_the_whole_share() {
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(3, 3);
        w[(0, 2)] = 0.5;
        w[(1, 2)] = 0.5;
        let params = HawkesParams::new(
            vec![0.2, 0.2, 0.2],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(10.0, 3, 0, vec![MarkedEvent::new(1.0, 0)], None).unwrap();
        let query = ResponsivenessQuery::new(0, 2, (0.0, 10.0));
        let shares = interval_responsiveness(&params, &log, &query).unwrap();
        assert!((shares.shares[0].share - 1.0).abs() < 1e-12);
        assert_eq!(shares.shares[1].share, 0.0);
    }

    #[test]
    fn no_influence_yields_zero_shares_with_flag() {
        let (params, log) = boxcar_pair();
        // Receiver 0 receives nothing (W column is zero).
        let query = ResponsivenessQuery::new(1, 0, (0.0, 10.0));
        let shares = interval_responsiveness(&params, &log, &query).unwrap();
        assert!(shares.all_zero);
        assert!(shares.shares.iter().all(|s| s.share == 0.0));
    }

    #[test]
    fn interval_mass_matches_trapezoid_quadrature() {
        // Smooth kernel so the trapezoid oracle converges fast.
        let basis = BasisFamily::raised_cosine(2, 3.0).unwrap();
        let mut w = Matrix::zeros(3, 3);
        w[(0, 2)] = 0.6;
        w[(1, 2)] = 0.3;
        w[(2, 0)] = 0.2;
        let params = HawkesParams::new(
            vec![0.2, 0.2, 0.2],
            w,
            basis,
            ImpulseCoefficients::shared(vec![0.4, 0.6]).unwrap(),
        )
        .unwrap();
        let log = EventLog::new(
            20.0,
            3,
            0,
            vec![
                MarkedEvent::new(0.7, 0),
                MarkedEvent::new(1.4, 1),
                MarkedEvent::new(2.1, 0),
                MarkedEvent::new(5.0, 1),
                MarkedEvent::new(9.0, 0),
            ],
            None,
        )
        .unwrap();
        for sender in 0..2 {
            let exact = pair_interval_mass(&params, &log, sender, 2, 1.0, 12.0);
            // Trapezoid with 1e-3 grid.
            let step = 1e-3;
            let n = ((12.0 - 1.0) / step) as usize;
            let mut acc = 0.0;
            for i in 0..=n {
                let t = 1.0 + i as f64 * step;
                let v = instantaneous(&params, &log, sender, 2, t).unwrap();
                let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += weight * v;
            }
            let oracle = acc * step;
            assert!(
                (exact - oracle).abs() < 1e-4,
                "sender {sender}: exact {exact} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn interval_additivity() {
        let (params, log) = random_fixture(8, true);
        for sender in 0..3 {
            for receiver in 0..3 {
                let ab = pair_interval_mass(&params, &log, sender, receiver, 2.0, 9.0);
                let bc = pair_interval_mass(&params, &log, sender, receiver, 9.0, 21.0);
                let ac = pair_interval_mass(&params, &log, sender, receiver, 2.0, 21.0);
                assert!(
                    (ab + bc - ac).abs() < 1e-10,
                    "pair ({sender},{receiver}): {ab} + {bc} vs {ac}"
                );
            }
        }
    }

    #[test]
    fn scaling_weight_scales_mass_linearly() {
        let (params, log) = boxcar_pair();
        let base = pair_interval_mass(&params, &log, 0, 1, 0.0, 10.0);
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8 * 3.0;
        let scaled_params = HawkesParams::new(
            params.background().to_vec(),
            w,
            params.basis().clone(),
            params.impulse().clone(),
        )
        .unwrap();
        let scaled = pair_interval_mass(&scaled_params, &log, 0, 1, 0.0, 10.0);
        assert!((scaled - 3.0 * base).abs() < 1e-12);
    }

    #[test]
    fn attribution_completeness_over_features() {
        let (params, log) = random_fixture(5, true);
        let query = ResponsivenessQuery::new(0, 1, (0.0, 30.0));
        let table = attribution_table(&params, &log, &query).unwrap();
        let total_feature: f64 = table.iter().map(|a| a.feature_term).sum();
        // The unattributed feature-path value: kernel mass restricted to
        // featured sender events.
        let w = params.weights()[(0, 1)];
        let mut featured_mass = 0.0;
        for ev in log.events() {
            if ev.process == 0 && ev.features.is_some() {
                featured_mass += w * params.impulse_mass(0, 1, 0.0 - ev.time, 30.0 - ev.time);
            }
        }
        assert!(
            (total_feature - featured_mass).abs() < 1e-9,
            "{total_feature} vs {featured_mass}"
        );
    }

    #[test]
    fn attribution_ratio_follows_softmax() {
        // One featured sender event with a 3:1 softmax split.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8;
        let theta = Matrix::from_rows(2, 2, vec![3.0f64.ln(), 0.0, 0.0, 0.0]);
        let params = HawkesParams::new(
            vec![0.3, 0.1],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap()
        .with_features(theta)
        .unwrap();
        let log = EventLog::new(
            10.0,
            2,
            2,
            vec![MarkedEvent::new(1.0, 0).with_features(vec![1.0, 0.0])],
            None,
        )
        .unwrap();
        let q0 = ResponsivenessQuery::new(0, 1, (0.0, 10.0)).with_feature(0);
        let q1 = ResponsivenessQuery::new(0, 1, (0.0, 10.0)).with_feature(1);
        let a0 = attribution(&params, &log, &q0).unwrap();
        let a1 = attribution(&params, &log, &q1).unwrap();
        assert!((a0.feature_term / a1.feature_term - 3.0).abs() < 1e-9);
        assert_eq!(a0.dyad_term, 0.0);
    }

    #[test]
    fn attribution_dyad_term_zero_without_mentions() {
        let (params, log) = random_fixture(6, true);
        // Strip mentions from the log.
        let events: Vec<MarkedEvent> = log
            .events()
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.dyad = None;
                e
            })
            .collect();
        let clean = EventLog::new(
            log.horizon(),
            log.num_processes(),
            log.num_features(),
            events,
            None,
        )
        .unwrap();
        let query = ResponsivenessQuery::new(1, 2, (0.0, 30.0)).with_feature(0);
        let a = attribution(&params, &clean, &query).unwrap();
        assert_eq!(a.dyad_term, 0.0);
    }

    #[test]
    fn network_threshold_infinity_empty() {
        let (params, log) = random_fixture(3, false);
        let edges = influence_network(&params, &log, (0.0, 30.0), f64::INFINITY).unwrap();
        assert!(edges.is_empty());
    }

    #[test]
    fn network_zero_threshold_counts_structural_edges() {
        let (params, log) = random_fixture(3, false);
        let edges = influence_network(&params, &log, (0.0, 30.0), 0.0).unwrap();
        // Candidates are the K(K-1) cross pairs minus those with zero mass
        // (zero weight or an idle sender).
        let k = 3;
        let mut expected = 0;
        for s in 0..k {
            for r in 0..k {
                if s != r && pair_interval_mass(&params, &log, s, r, 0.0, 30.0) > 0.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(edges.len(), expected);
        assert!(edges.len() <= k * (k - 1));
        // Deterministic ordering: weight descending.
        for pair in edges.windows(2) {
            assert!(pair[0].weight >= pair[1].weight);
        }
    }

    #[test]
    fn report_series_covers_grid() {
        let (params, log) = boxcar_pair();
        let query = ResponsivenessQuery::new(0, 1, (0.0, 10.0)).with_grid(0.5);
        let rep = report(&params, &log, &query).unwrap();
        assert_eq!(rep.series.len(), 21);
        assert_eq!(rep.series[0], (0.0, 0.0));
        let peak = rep
            .series
            .iter()
            .map(|(_, v)| *v)
            .fold(0.0f64, f64::max);
        assert!((peak - 0.4).abs() < 1e-12);
        assert!(rep.attribution.is_none());
    }

    #[test]
    fn query_validation_errors() {
        let (params, log) = boxcar_pair();
        let query = ResponsivenessQuery::new(0, 0, (0.0, 1.0));
        assert!(matches!(
            report(&params, &log, &query),
            Err(ResponsivenessError::BadQuery { .. })
        ));
        let query = ResponsivenessQuery::new(0, 1, (5.0, 1.0));
        assert!(report(&params, &log, &query).is_err());
        let query = ResponsivenessQuery::new(0, 1, (0.0, 99.0));
        assert!(report(&params, &log, &query).is_err());
        assert!(instantaneous(&params, &log, 5, 0, 1.0).is_err());
    }

    #[test]
    fn receiver_indexed_compat_mode() {
        // Literal mode: the receiver's own events drive the value.
        let basis = BasisFamily::boxcar(1, 2.0).unwrap();
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = 0.8;
        let params = HawkesParams::new(
            vec![0.3, 0.1],
            w,
            basis,
            ImpulseCoefficients::uniform_shared(1),
        )
        .unwrap();
        let log = EventLog::new(
            10.0,
            2,
            0,
            vec![MarkedEvent::new(1.0, 0), MarkedEvent::new(5.0, 1)],
            None,
        )
        .unwrap();
        // Sender-side: driven by the event at t=1 (process 0).
        assert!(instantaneous(&params, &log, 0, 1, 2.0).unwrap() > 0.0);
        assert_eq!(instantaneous(&params, &log, 0, 1, 6.0).unwrap(), 0.0);
        // Receiver-side: driven by the event at t=5 (process 1).
        assert_eq!(
            instantaneous_receiver_indexed(&params, &log, 0, 1, 2.0).unwrap(),
            0.0
        );
        assert!(instantaneous_receiver_indexed(&params, &log, 0, 1, 6.0).unwrap() > 0.0);
    }
}
