//! File formats: JSON-Lines event logs and parentage sidecars, the fitted
//! model document, CSV exports, and atomic writes.
//!
//! Event file layout: the first line is a header object
//! `{"k": int, "f": int, "t": float, "labels": [string]?}`; every following
//! line is one event `{"time": float, "proc": int, "feat": [float]?,
//! "dyad": [int]?}`. UTF-8, LF line endings. Floats are serialized with
//! shortest round-trip precision, so saving and loading is bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ripple_core::events::{validate_log, EventLog, MarkedEvent};
use ripple_core::model::{HawkesParams, PriorConfig};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    k: usize,
    f: usize,
    t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventLine {
    time: f64,
    proc: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    feat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dyad: Option<Vec<usize>>,
}

/// A loaded log plus load-time warnings.
#[derive(Debug)]
pub struct LoadedEvents {
    pub log: EventLog,
    /// Number of adjacent out-of-order pairs repaired by re-sorting.
    pub out_of_order: usize,
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Strict load: any malformed or invariant-violating record is an error
/// with its line number. Unsorted events are repaired with a warning count.
pub fn load_events(path: &Path) -> Result<LoadedEvents, CliError> {
    let raw = read_to_string(path)?;
    let mut lines = raw.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty file, missing header", path.display())))?;
    let header: HeaderLine = serde_json::from_str(header_line)
        .map_err(|e| CliError::Data(format!("{}: line 1: bad header: {e}", path.display())))?;
    let mut events = Vec::new();
    let mut out_of_order = 0usize;
    let mut prev_time = f64::NEG_INFINITY;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: EventLine = serde_json::from_str(line).map_err(|e| {
            CliError::Data(format!("{}: line {line_no}: malformed record: {e}", path.display()))
        })?;
        let mut ev = MarkedEvent::new(record.time, record.proc);
        if let Some(feat) = record.feat {
            ev = ev.with_features(feat);
        }
        if let Some(dyad) = record.dyad {
            ev = ev.with_dyad(dyad);
        }
        if ev.time < prev_time {
            out_of_order += 1;
        }
        prev_time = ev.time;
        events.push((line_no, ev));
    }
    // Validate each record against the header before handing to the core
    // constructor, so errors carry line numbers.
    let probe = EventLog::from_parts_unchecked(
        header.t,
        header.k,
        header.f,
        events.iter().map(|(_, e)| e.clone()).collect(),
        header.labels.clone(),
    );
    let report = validate_log(&probe);
    for issue in &report.issues {
        if let Some(index) = issue_index(issue) {
            let line_no = events[index].0;
            return Err(CliError::Data(format!(
                "{}: line {line_no}: {issue}",
                path.display()
            )));
        }
        if !matches!(issue, ripple_core::events::ValidationIssue::OutOfOrder { .. }) {
            return Err(CliError::Data(format!("{}: {issue}", path.display())));
        }
    }
    let log = EventLog::new(
        header.t,
        header.k,
        header.f,
        events.into_iter().map(|(_, e)| e).collect(),
        header.labels,
    )
    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(LoadedEvents { log, out_of_order })
}

fn issue_index(issue: &ripple_core::events::ValidationIssue) -> Option<usize> {
    use ripple_core::events::ValidationIssue::*;
    match issue {
        NonFiniteTime { index }
        | NegativeTime { index }
        | TimeExceedsHorizon { index }
        | ProcessOutOfRange { index }
        | FeatureLengthMismatch { index }
        | BadFeatureValue { index }
        | AllZeroFeatures { index }
        | DyadTargetOutOfRange { index }
        | DyadSelfMention { index } => Some(*index),
        OutOfOrder { .. } | BadHeader { .. } => None,
    }
}

/// One line-numbered problem found while auditing a file.
#[derive(Debug, Clone)]
pub struct AuditIssue {
    /// 1-based line in the file, when attributable to one.
    pub line: Option<usize>,
    pub message: String,
}

/// Lenient audit for the `validate` subcommand: collects every problem
/// instead of stopping at the first.
pub fn audit_events(path: &Path) -> Result<Vec<AuditIssue>, CliError> {
    let raw = read_to_string(path)?;
    let mut issues = Vec::new();
    let mut lines = raw.lines().enumerate();
    let Some((_, header_line)) = lines.next() else {
        return Ok(vec![AuditIssue {
            line: None,
            message: "empty file, missing header".into(),
        }]);
    };
    let header: Option<HeaderLine> = match serde_json::from_str(header_line) {
        Ok(h) => Some(h),
        Err(e) => {
            issues.push(AuditIssue {
                line: Some(1),
                message: format!("bad header: {e}"),
            });
            None
        }
    };
    let mut events = Vec::new();
    let mut event_lines = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<EventLine>(line) {
            Ok(record) => {
                let mut ev = MarkedEvent::new(record.time, record.proc);
                if let Some(feat) = record.feat {
                    ev = ev.with_features(feat);
                }
                if let Some(dyad) = record.dyad {
                    ev = ev.with_dyad(dyad);
                }
                events.push(ev);
                event_lines.push(line_no);
            }
            Err(e) => issues.push(AuditIssue {
                line: Some(line_no),
                message: format!("malformed record: {e}"),
            }),
        }
    }
    if let Some(header) = header {
        let probe =
            EventLog::from_parts_unchecked(header.t, header.k, header.f, events, header.labels);
        for issue in validate_log(&probe).issues {
            let line = issue_index(&issue).map(|i| event_lines[i]);
            issues.push(AuditIssue {
                line,
                message: issue.to_string(),
            });
        }
    }
    Ok(issues)
}

/// Serializes a log in the JSON-Lines format.
pub fn render_events(log: &EventLog) -> String {
    let mut out = String::new();
    let header = HeaderLine {
        k: log.num_processes(),
        f: log.num_features(),
        t: log.horizon(),
        labels: log.labels().map(|l| l.to_vec()),
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for ev in log.events() {
        let line = EventLine {
            time: ev.time,
            proc: ev.process,
            feat: ev.features.clone(),
            dyad: ev.dyad.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("event serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParentageLine {
    child: usize,
    parent: Option<usize>,
}

/// Parentage sidecar: `{"child": i, "parent": j | null}` per event.
pub fn render_parentage(parentage: &[Option<usize>]) -> String {
    let mut out = String::new();
    for (child, parent) in parentage.iter().enumerate() {
        let line = ParentageLine {
            child,
            parent: *parent,
        };
        out.push_str(&serde_json::to_string(&line).expect("parentage serializes"));
        out.push('\n');
    }
    out
}

pub fn load_parentage(path: &Path, num_events: usize) -> Result<Vec<Option<usize>>, CliError> {
    let raw = read_to_string(path)?;
    let mut parentage = vec![None; num_events];
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ParentageLine = serde_json::from_str(line).map_err(|e| {
            CliError::Data(format!(
                "{}: line {}: malformed parentage: {e}",
                path.display(),
                idx + 1
            ))
        })?;
        if record.child >= num_events {
            return Err(CliError::Data(format!(
                "{}: line {}: child index {} out of range",
                path.display(),
                idx + 1,
                record.child
            )));
        }
        parentage[record.child] = record.parent;
    }
    Ok(parentage)
}

/// The fitted-model document: parameters, prior, fit metadata.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub params: HawkesParams,
    pub prior: PriorConfig,
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub objective_initial: f64,
    pub objective_final: f64,
}

pub fn render_model(doc: &ModelDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("model serializes");
    out.push('\n');
    out
}

pub fn load_model(path: &Path) -> Result<ModelDocument, CliError> {
    let raw = read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Network document: interval, threshold and the sorted edge list.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub interval: (f64, f64),
    pub threshold: f64,
    pub edges: Vec<ripple_core::responsiveness::InfluenceEdge>,
}

pub fn render_network(doc: &NetworkDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("network serializes");
    out.push('\n');
    out
}

pub fn load_network(path: &Path) -> Result<NetworkDocument, CliError> {
    let raw = read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Objective trace CSV: `iteration,objective`.
pub fn render_trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,objective\n");
    for (i, v) in trace.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

/// Instantaneous-series CSV: `time,sender,receiver,value`.
pub fn render_series_csv(sender: usize, receiver: usize, series: &[(f64, f64)]) -> String {
    let mut out = String::from("time,sender,receiver,value\n");
    for (t, v) in series {
        out.push_str(&format!("{t},{sender},{receiver},{v}\n"));
    }
    out
}

/// Threshold-sweep CSV: `threshold,recall,nsr,significant,correct`.
/// Undefined metrics render as empty fields.
pub fn render_sweep_csv(results: &[ripple_core::evaluate::EvalResult]) -> String {
    let mut out = String::from("threshold,recall,nsr,significant,correct\n");
    for r in results {
        let recall = r.recall.map(|v| v.to_string()).unwrap_or_default();
        let nsr = r.noise_signal.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.threshold, recall, nsr, r.significant, r.correct
        ));
    }
    out
}

/// Writes to a temp file in the target directory and renames into place,
/// so interrupted runs never leave partial artifacts.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
    let mut tmp = PathBuf::from(path);
    let mut name = tmp
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    tmp.set_file_name(name);
    fs::write(&tmp, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Usage(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}
