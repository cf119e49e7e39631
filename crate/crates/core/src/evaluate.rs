//! Quality measurement of inferred influence against ground-truth causal
//! patterns: recall, noise-signal ratio, threshold sweeps, and the
//! matched-ratio comparison between models.
//!
//! Patterns are directed pairs (sender, receiver). Per-event causal links
//! are reduced to pair level before scoring.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::events::EventLog;
use crate::responsiveness::InfluenceEdge;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid ground truth: {reason}")]
    BadTruth { reason: &'static str },
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
}

/// Where a truth set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    /// Built from a simulation's causal parentage.
    SyntheticParentage,
    /// Curated by hand.
    Curated,
}

/// Ground-truth directed influence pairs, optionally with the per-event
/// causal links they were reduced from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pairs: BTreeSet<(usize, usize)>,
    links: Vec<(usize, usize)>,
    provenance: Provenance,
}

impl GroundTruth {
    /// Curated pair set. Self-loops are rejected unless allowed.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(
        pairs: I,
        allow_self: bool,
    ) -> Result<Self, EvalError> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        if !allow_self && pairs.iter().any(|(s, t)| s == t) {
            return Err(EvalError::BadTruth {
                reason: "self-loop in truth pairs",
            });
        }
        Ok(Self {
            pairs,
            links: Vec::new(),
            provenance: Provenance::Curated,
        })
    }

    /// Reduces a simulation's parentage sidecar to pair level: every
    /// cross-process parent→child link becomes a true pair.
    pub fn from_parentage(
        log: &EventLog,
        parentage: &[Option<usize>],
    ) -> Result<Self, EvalError> {
        if parentage.len() != log.len() {
            return Err(EvalError::BadTruth {
                reason: "parentage length must equal event count",
            });
        }
        let events = log.events();
        let mut pairs = BTreeSet::new();
        let mut links = Vec::new();
        for (child, parent) in parentage.iter().enumerate() {
            if let Some(p) = parent {
                if *p >= events.len() {
                    return Err(EvalError::BadTruth {
                        reason: "parent index out of range",
                    });
                }
                links.push((*p, child));
                let sender = events[*p].process;
                let receiver = events[child].process;
                if sender != receiver {
                    pairs.insert((sender, receiver));
                }
            }
        }
        Ok(Self {
            pairs,
            links,
            provenance: Provenance::SyntheticParentage,
        })
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    /// Per-event (parent, child) links, present for synthetic truth.
    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Scores at one threshold. `recall` and `noise_signal` are `None` when
/// their denominators are empty (undefined rather than fabricated).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalResult {
    pub threshold: f64,
    pub recall: Option<f64>,
    pub noise_signal: Option<f64>,
    pub significant: usize,
    pub correct: usize,
    pub true_count: usize,
}

/// Fraction of true pairs whose inferred weight reaches the threshold.
/// `None` when the truth set is empty.
pub fn recall(inferred: &[InfluenceEdge], truth: &GroundTruth, threshold: f64) -> Option<f64> {
    if truth.is_empty() {
        return None;
    }
    let covered = truth
        .pairs
        .iter()
        .filter(|(s, t)| {
            inferred
                .iter()
                .any(|e| e.sender == *s && e.receiver == *t && e.weight >= threshold)
        })
        .count();
    Some(covered as f64 / truth.len() as f64)
}

/// `|significant| / |significant ∩ truth|`; at least 1 when defined, `None`
/// when no significant edge is correct.
pub fn noise_signal_ratio(
    inferred: &[InfluenceEdge],
    truth: &GroundTruth,
    threshold: f64,
) -> Option<f64> {
    let significant: Vec<&InfluenceEdge> =
        inferred.iter().filter(|e| e.weight >= threshold).collect();
    let correct = significant
        .iter()
        .filter(|e| truth.pairs.contains(&(e.sender, e.receiver)))
        .count();
    if correct == 0 {
        None
    } else {
        Some(significant.len() as f64 / correct as f64)
    }
}

/// Full scores at one threshold.
pub fn evaluate_at(inferred: &[InfluenceEdge], truth: &GroundTruth, threshold: f64) -> EvalResult {
    let significant = inferred.iter().filter(|e| e.weight >= threshold).count();
    let correct = inferred
        .iter()
        .filter(|e| e.weight >= threshold && truth.pairs.contains(&(e.sender, e.receiver)))
        .count();
    EvalResult {
        threshold,
        recall: recall(inferred, truth, threshold),
        noise_signal: noise_signal_ratio(inferred, truth, threshold),
        significant,
        correct,
        true_count: truth.len(),
    }
}

/// Scores across an ascending threshold list. Rejects unsorted input;
/// recall and the significant count are non-increasing along the sweep by
/// construction.
pub fn threshold_sweep(
    inferred: &[InfluenceEdge],
    truth: &GroundTruth,
    thresholds: &[f64],
) -> Result<Vec<EvalResult>, EvalError> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(EvalError::UnsortedThresholds);
    }
    let results: Vec<EvalResult> = thresholds
        .iter()
        .map(|&th| evaluate_at(inferred, truth, th))
        .collect();
    debug_assert!(results
        .windows(2)
        .all(|w| w[1].significant <= w[0].significant));
    Ok(results)
}

/// True when `candidate` reaches at least the recall of `baseline` at every
/// matched operating point: for each candidate sweep point, the comparison
/// baseline is the best baseline recall among points with a noise-signal
/// ratio no worse (within `slack`, relative). Points where the baseline has
/// no matching operating point pass vacuously.
pub fn dominates_at_matched_noise(
    candidate: &[EvalResult],
    baseline: &[EvalResult],
    slack: f64,
) -> bool {
    for point in candidate {
        let (Some(r_c), Some(n_c)) = (point.recall, point.noise_signal) else {
            // Undefined candidate points (nothing correct) count as failures
            // unless the baseline is undefined everywhere too.
            if baseline.iter().any(|b| b.noise_signal.is_some()) {
                return false;
            }
            continue;
        };
        let mut best_baseline: Option<f64> = None;
        for b in baseline {
            if let (Some(r_b), Some(n_b)) = (b.recall, b.noise_signal) {
                if n_b <= n_c * (1.0 + slack) {
                    best_baseline = Some(best_baseline.map_or(r_b, |x: f64| x.max(r_b)));
                }
            }
        }
        if let Some(r_b) = best_baseline {
            if r_c + 1e-12 < r_b {
                return false;
            }
        }
    }
    true
}
