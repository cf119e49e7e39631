//! Directed-influence inference for multivariate event streams.
//!
//! This crate models a set of event-generating processes ("voices") as a
//! multivariate Hawkes process: each event transiently raises the event rate
//! of other processes through a non-negative weight matrix and a time-decay
//! kernel of bounded support. On top of the fitted model it computes
//! *responsiveness* — the directed, time-varying influence one voice exerts
//! on another — optionally attributed to features or dyadic mentions.
//!
//! The crate is `no_std` (alloc required). All IO, file formats and the
//! command-line surface live in the companion `ripple-cli` crate.
//!
//! Module map:
//! - [`events`] — marked event streams and deterministic filtering
//! - [`kernel`] — time-decay basis functions and per-pair impulse responses
//! - [`model`] — intensities, likelihood, posterior, analytic gradients
//! - [`simulate`] — Ogata thinning sampler and goodness-of-fit machinery
//! - [`infer`] — SGD and quasi-Newton parameter estimation
//! - [`responsiveness`] — influence series, interval shares, attribution
//! - [`evaluate`] — recall / noise-signal scoring against ground truth

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod evaluate;
pub mod events;
pub mod infer;
pub mod kernel;
pub(crate) mod math;
pub mod matrix;
pub mod model;
pub mod responsiveness;
pub mod simulate;
#[cfg(test)]
pub(crate) mod testutil;

pub use events::{EventLog, FilterCriteria, MarkedEvent};
pub use kernel::{BasisFamily, BasisKind, ImpulseCoefficients};
pub use matrix::Matrix;
pub use model::{HawkesParams, PriorConfig};
