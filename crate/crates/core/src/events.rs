//! Canonical data model for marked multivariate event streams and
//! deterministic filtering by analysis criteria.
//!
//! An [`EventLog`] owns a time-sorted sequence of [`MarkedEvent`]s on a fixed
//! horizon `[0, T]` produced by `K` processes ("voices"). Events optionally
//! carry a feature vector of fixed length `F` and a set of dyadic mention
//! targets. Logs are immutable after construction and safe to share across
//! readers.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// One timestamped event emitted by a process, with optional marks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkedEvent {
    /// Seconds since the corpus epoch, in `[0, T]` of the owning log.
    pub time: f64,
    /// Index of the emitting process, `< K` of the owning log.
    pub process: usize,
    /// Optional non-negative feature signals, exactly `F` entries.
    pub features: Option<Vec<f64>>,
    /// Optional directed mention targets (sorted, deduplicated, no self).
    pub dyad: Option<Vec<usize>>,
}

impl MarkedEvent {
    pub fn new(time: f64, process: usize) -> Self {
        Self {
            time,
            process,
            features: None,
            dyad: None,
        }
    }

    pub fn with_features(mut self, features: Vec<f64>) -> Self {
        self.features = Some(features);
        self
    }

    /// Attaches mention targets; they are sorted and deduplicated. An empty
    /// set is normalized to no mark so round-trips stay canonical.
    pub fn with_dyad(mut self, mut targets: Vec<usize>) -> Self {
        targets.sort_unstable();
        targets.dedup();
        self.dyad = if targets.is_empty() {
            None
        } else {
            Some(targets)
        };
        self
    }

    /// True when this event mentions `target`.
    pub fn mentions(&self, target: usize) -> bool {
        match &self.dyad {
            Some(d) => d.binary_search(&target).is_ok(),
            None => false,
        }
    }
}

/// A single invariant violation found in a log, with the offending index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationIssue {
    #[error("event {index}: time is not finite")]
    NonFiniteTime { index: usize },
    #[error("event {index}: negative time")]
    NegativeTime { index: usize },
    #[error("event {index}: time exceeds horizon")]
    TimeExceedsHorizon { index: usize },
    #[error("event {index}: process index out of range")]
    ProcessOutOfRange { index: usize },
    #[error("event {index}: feature vector length does not match F")]
    FeatureLengthMismatch { index: usize },
    #[error("event {index}: feature entry is negative or not finite")]
    BadFeatureValue { index: usize },
    #[error("event {index}: feature vector is all zero")]
    AllZeroFeatures { index: usize },
    #[error("event {index}: dyad target out of range")]
    DyadTargetOutOfRange { index: usize },
    #[error("event {index}: dyad targets own process")]
    DyadSelfMention { index: usize },
    #[error("events {first} and {second} are out of time order")]
    OutOfOrder { first: usize, second: usize },
    #[error("log header invalid: {reason}")]
    BadHeader { reason: &'static str },
}

/// Every invariant violation found by [`validate_log`]; empty iff valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EventError {
    #[error("invalid event log: {0}")]
    Invalid(ValidationIssue),
    #[error("invalid filter criteria: {reason}")]
    InvalidCriteria { reason: &'static str },
}

/// Immutable, time-sorted event stream over `K` processes on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventLog {
    horizon: f64,
    num_processes: usize,
    num_features: usize,
    events: Vec<MarkedEvent>,
    labels: Option<Vec<String>>,
}

impl EventLog {
    /// Builds a log, validating every event against `K`, `F` and the horizon.
    /// Events are stable-sorted by time, so simultaneous events keep their
    /// input order.
    pub fn new(
        horizon: f64,
        num_processes: usize,
        num_features: usize,
        mut events: Vec<MarkedEvent>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, EventError> {
        if let Some(issue) = header_issue(horizon, num_processes, &labels) {
            return Err(EventError::Invalid(issue));
        }
        for (index, ev) in events.iter().enumerate() {
            if let Some(issue) = event_issue(ev, index, num_processes, num_features, horizon) {
                return Err(EventError::Invalid(issue));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self {
            horizon,
            num_processes,
            num_features,
            events,
            labels,
        })
    }

    /// Builds a log without any invariant checks. Intended for IO and
    /// validation paths that audit the result with [`validate_log`].
    pub fn from_parts_unchecked(
        horizon: f64,
        num_processes: usize,
        num_features: usize,
        events: Vec<MarkedEvent>,
        labels: Option<Vec<String>>,
    ) -> Self {
        Self {
            horizon,
            num_processes,
            num_features,
            events,
            labels,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn num_processes(&self) -> usize {
        self.num_processes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn events(&self) -> &[MarkedEvent] {
        &self.events
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event count per process.
    pub fn process_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.num_processes];
        for ev in &self.events {
            if ev.process < self.num_processes {
                counts[ev.process] += 1;
            }
        }
        counts
    }
}

fn header_issue(
    horizon: f64,
    num_processes: usize,
    labels: &Option<Vec<String>>,
) -> Option<ValidationIssue> {
    if !horizon.is_finite() || horizon < 0.0 {
        return Some(ValidationIssue::BadHeader {
            reason: "horizon must be finite and non-negative",
        });
    }
    if num_processes == 0 {
        return Some(ValidationIssue::BadHeader {
            reason: "at least one process required",
        });
    }
    if let Some(names) = labels {
        if names.len() != num_processes {
            return Some(ValidationIssue::BadHeader {
                reason: "label count must equal K",
            });
        }
    }
    None
}

fn event_issue(
    ev: &MarkedEvent,
    index: usize,
    num_processes: usize,
    num_features: usize,
    horizon: f64,
) -> Option<ValidationIssue> {
    if !ev.time.is_finite() {
        return Some(ValidationIssue::NonFiniteTime { index });
    }
    if ev.time < 0.0 {
        return Some(ValidationIssue::NegativeTime { index });
    }
    if ev.time > horizon {
        return Some(ValidationIssue::TimeExceedsHorizon { index });
    }
    if ev.process >= num_processes {
        return Some(ValidationIssue::ProcessOutOfRange { index });
    }
    if let Some(f) = &ev.features {
        if f.len() != num_features {
            return Some(ValidationIssue::FeatureLengthMismatch { index });
        }
        if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Some(ValidationIssue::BadFeatureValue { index });
        }
        if f.iter().all(|v| *v == 0.0) {
            return Some(ValidationIssue::AllZeroFeatures { index });
        }
    }
    if let Some(d) = &ev.dyad {
        if d.iter().any(|t| *t >= num_processes) {
            return Some(ValidationIssue::DyadTargetOutOfRange { index });
        }
        if d.contains(&ev.process) {
            return Some(ValidationIssue::DyadSelfMention { index });
        }
    }
    None
}

/// Reports every invariant violation in `log`, one entry per problem.
/// A clean report means the log satisfies all invariants.
pub fn validate_log(log: &EventLog) -> ValidationReport {
    let mut issues = Vec::new();
    if let Some(issue) = header_issue(log.horizon, log.num_processes, &log.labels) {
        issues.push(issue);
    }
    for (index, ev) in log.events.iter().enumerate() {
        if let Some(issue) = event_issue(ev, index, log.num_processes, log.num_features, log.horizon)
        {
            issues.push(issue);
        }
    }
    for pair in log.events.windows(2).enumerate() {
        let (i, w) = pair;
        if w[1].time < w[0].time {
            issues.push(ValidationIssue::OutOfOrder {
                first: i,
                second: i + 1,
            });
        }
    }
    ValidationReport { issues }
}

/// The conditioning context for an analysis: which voices, topics and time
/// range to keep. Unset fields do not constrain.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterCriteria {
    /// Keep events whose process is in this set. `None` keeps all.
    pub voice_set: Option<BTreeSet<usize>>,
    /// Keep featured events with a value `>= min_feature_weight` at one of
    /// these feature indices. `None` keeps all; `Some` drops unfeatured events.
    pub topic_tags: Option<BTreeSet<usize>>,
    /// Keep events with time in this closed interval.
    pub time_range: Option<(f64, f64)>,
    /// Threshold a tagged feature must reach for topic membership.
    pub min_feature_weight: f64,
}

impl FilterCriteria {
    pub fn voices<I: IntoIterator<Item = usize>>(mut self, voices: I) -> Self {
        self.voice_set = Some(voices.into_iter().collect());
        self
    }

    pub fn topics<I: IntoIterator<Item = usize>>(mut self, tags: I) -> Self {
        self.topic_tags = Some(tags.into_iter().collect());
        self
    }

    pub fn between(mut self, start: f64, end: f64) -> Self {
        self.time_range = Some((start, end));
        self
    }

    pub fn min_weight(mut self, w: f64) -> Self {
        self.min_feature_weight = w;
        self
    }

    fn check(&self, log: &EventLog) -> Result<(), EventError> {
        if let Some(vs) = &self.voice_set {
            if vs.iter().any(|v| *v >= log.num_processes()) {
                return Err(EventError::InvalidCriteria {
                    reason: "voice index out of range",
                });
            }
        }
        if let Some(tags) = &self.topic_tags {
            if tags.iter().any(|t| *t >= log.num_features()) {
                return Err(EventError::InvalidCriteria {
                    reason: "topic tag out of range",
                });
            }
        }
        if let Some((a, b)) = self.time_range {
            if !(a.is_finite() && b.is_finite()) || a > b {
                return Err(EventError::InvalidCriteria {
                    reason: "time range not well-ordered",
                });
            }
            if a < 0.0 || b > log.horizon() {
                return Err(EventError::InvalidCriteria {
                    reason: "time range outside horizon",
                });
            }
        }
        if !self.min_feature_weight.is_finite() || self.min_feature_weight < 0.0 {
            return Err(EventError::InvalidCriteria {
                reason: "min feature weight must be finite and non-negative",
            });
        }
        Ok(())
    }

    fn keeps(&self, ev: &MarkedEvent) -> bool {
        if let Some(vs) = &self.voice_set {
            if !vs.contains(&ev.process) {
                return false;
            }
        }
        if let Some((a, b)) = self.time_range {
            if ev.time < a || ev.time > b {
                return false;
            }
        }
        if let Some(tags) = &self.topic_tags {
            match &ev.features {
                Some(f) => {
                    if !tags
                        .iter()
                        .any(|&t| f.get(t).is_some_and(|v| *v >= self.min_feature_weight))
                    {
                        return false;
                    }
                }
                None => return false,
            }
        }
        true
    }
}

/// Returns a new log containing exactly the events matching `criteria`, in
/// their original order. Header fields (horizon, K, F, labels) are preserved,
/// so filtering is idempotent and composable.
pub fn filter_events(log: &EventLog, criteria: &FilterCriteria) -> Result<EventLog, EventError> {
    criteria.check(log)?;
    let events = log
        .events()
        .iter()
        .filter(|ev| criteria.keeps(ev))
        .cloned()
        .collect();
    Ok(EventLog {
        horizon: log.horizon,
        num_processes: log.num_processes,
        num_features: log.num_features,
        events,
        labels: log.labels.clone(),
    })
}
