//! Time-decay basis functions and per-pair impulse responses with bounded
//! support.
//!
//! A [`BasisFamily`] holds `B` non-negative basis functions, each supported
//! on `(0, Δt]` and normalized to unit mass, so the weight matrix alone
//! carries influence magnitude. An impulse response `g` is a convex
//! combination of the bases, held per directed pair (or shared across pairs)
//! by [`ImpulseCoefficients`].

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("basis index {index} out of range for {count} bases")]
    BasisIndexOutOfRange { index: usize, count: usize },
    #[error("pair ({sender}, {receiver}) out of range for {num_processes} processes")]
    PairOutOfRange {
        sender: usize,
        receiver: usize,
        num_processes: usize,
    },
    #[error("reversed interval: {a} > {c}")]
    ReversedInterval { a: f64, c: f64 },
    #[error("invalid kernel configuration: {reason}")]
    BadConfig { reason: &'static str },
    #[error("coefficient vector does not match basis count")]
    CountMismatch,
}

/// Shape of the decay bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BasisKind {
    /// Piecewise-constant bins partitioning `(0, Δt]`.
    Boxcar,
    /// One smooth cosine bump per bin, zero at bin edges.
    RaisedCosine,
    /// Exponential decays truncated and renormalized to `(0, Δt]`,
    /// one decay rate per basis.
    TruncatedExponential,
}

/// A family of `B` unit-mass basis functions on the window `(0, Δt]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisFamily {
    kind: BasisKind,
    count: usize,
    window: f64,
    /// Decay rates, one per basis; empty unless `TruncatedExponential`.
    rates: Vec<f64>,
}

impl BasisFamily {
    pub fn boxcar(count: usize, window: f64) -> Result<Self, KernelError> {
        Self::validate_common(count, window)?;
        Ok(Self {
            kind: BasisKind::Boxcar,
            count,
            window,
            rates: Vec::new(),
        })
    }

    pub fn raised_cosine(count: usize, window: f64) -> Result<Self, KernelError> {
        Self::validate_common(count, window)?;
        Ok(Self {
            kind: BasisKind::RaisedCosine,
            count,
            window,
            rates: Vec::new(),
        })
    }

    pub fn truncated_exponential(rates: Vec<f64>, window: f64) -> Result<Self, KernelError> {
        Self::validate_common(rates.len(), window)?;
        if rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(KernelError::BadConfig {
                reason: "decay rates must be finite and positive",
            });
        }
        Ok(Self {
            kind: BasisKind::TruncatedExponential,
            count: rates.len(),
            window,
            rates,
        })
    }

    /// Single truncated exponential whose mean decay sits inside the window.
    pub fn default_exponential(window: f64) -> Result<Self, KernelError> {
        Self::truncated_exponential(vec![2.0 / window], window)
    }

    fn validate_common(count: usize, window: f64) -> Result<(), KernelError> {
        if count == 0 {
            return Err(KernelError::BadConfig {
                reason: "basis count must be at least 1",
            });
        }
        if !window.is_finite() || window <= 0.0 {
            return Err(KernelError::BadConfig {
                reason: "window must be finite and positive",
            });
        }
        Ok(())
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    fn bin_width(&self) -> f64 {
        self.window / self.count as f64
    }

    /// Density of basis `b` at elapsed time `dt`. Zero outside `(0, Δt]`.
    /// Panics if `b` is out of range; use [`basis_value`] for a checked call.
    pub fn value(&self, b: usize, dt: f64) -> f64 {
        assert!(b < self.count, "basis index out of range");
        if dt <= 0.0 || dt > self.window {
            return 0.0;
        }
        match self.kind {
            BasisKind::Boxcar => {
                let w = self.bin_width();
                let lo = b as f64 * w;
                let hi = (b + 1) as f64 * w;
                if dt > lo && dt <= hi {
                    1.0 / w
                } else {
                    0.0
                }
            }
            BasisKind::RaisedCosine => {
                let w = self.bin_width();
                let lo = b as f64 * w;
                let x = dt - lo;
                if x > 0.0 && x <= w {
                    (1.0 - math::cos(core::f64::consts::TAU * x / w)) / w
                } else {
                    0.0
                }
            }
            BasisKind::TruncatedExponential => {
                let r = self.rates[b];
                r * math::exp(-r * dt) / (1.0 - math::exp(-r * self.window))
            }
        }
    }

    /// Exact mass of basis `b` on `[a, c]`, clipped to the support.
    /// Requires `a <= c`; panics if `b` is out of range.
    pub fn integral(&self, b: usize, a: f64, c: f64) -> f64 {
        assert!(b < self.count, "basis index out of range");
        assert!(a <= c, "reversed interval");
        let a = a.clamp(0.0, self.window);
        let c = c.clamp(0.0, self.window);
        if a >= c {
            return 0.0;
        }
        match self.kind {
            BasisKind::Boxcar => {
                let w = self.bin_width();
                let lo = b as f64 * w;
                let hi = (b + 1) as f64 * w;
                let overlap = (c.min(hi) - a.max(lo)).max(0.0);
                overlap / w
            }
            BasisKind::RaisedCosine => {
                let w = self.bin_width();
                let lo = b as f64 * w;
                let x1 = (a - lo).clamp(0.0, w);
                let x2 = (c - lo).clamp(0.0, w);
                let f = |x: f64| x / w - math::sin(core::f64::consts::TAU * x / w) / core::f64::consts::TAU;
                f(x2) - f(x1)
            }
            BasisKind::TruncatedExponential => {
                let r = self.rates[b];
                (math::exp(-r * a) - math::exp(-r * c)) / (1.0 - math::exp(-r * self.window))
            }
        }
    }

    /// Supremum of basis `b` over elapsed times `[dt, ∞)`. Non-increasing in
    /// `dt`, so it stays a valid bound while time advances without new
    /// events; used for thinning upper bounds.
    pub fn sup_value(&self, b: usize, dt: f64) -> f64 {
        assert!(b < self.count, "basis index out of range");
        if dt > self.window {
            return 0.0;
        }
        match self.kind {
            BasisKind::Boxcar => {
                let w = self.bin_width();
                let hi = (b + 1) as f64 * w;
                if dt <= hi {
                    1.0 / w
                } else {
                    0.0
                }
            }
            BasisKind::RaisedCosine => {
                let w = self.bin_width();
                let lo = b as f64 * w;
                let hi = (b + 1) as f64 * w;
                let center = lo + 0.5 * w;
                if dt <= center {
                    2.0 / w
                } else if dt <= hi {
                    self.value(b, dt)
                } else {
                    0.0
                }
            }
            BasisKind::TruncatedExponential => {
                let r = self.rates[b];
                let at = dt.max(0.0);
                r * math::exp(-r * at) / (1.0 - math::exp(-r * self.window))
            }
        }
    }
}

/// Convex-combination weights over the bases, per directed pair or shared.
/// Every weight vector lies on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImpulseCoefficients {
    basis_count: usize,
    /// `None` for a single shared vector; `Some(K)` for one vector per
    /// ordered pair, flattened as `(sender * K + receiver) * B + b`.
    per_pair: Option<usize>,
    data: Vec<f64>,
}

impl ImpulseCoefficients {
    /// One shared uniform vector across all pairs.
    pub fn uniform_shared(basis_count: usize) -> Self {
        Self {
            basis_count,
            per_pair: None,
            data: vec![1.0 / basis_count as f64; basis_count],
        }
    }

    /// One uniform vector per ordered pair.
    pub fn uniform_per_pair(num_processes: usize, basis_count: usize) -> Self {
        let pairs = num_processes * num_processes;
        Self {
            basis_count,
            per_pair: Some(num_processes),
            data: vec![1.0 / basis_count as f64; pairs * basis_count],
        }
    }

    /// Shared coefficients, normalized onto the simplex.
    pub fn shared(weights: Vec<f64>) -> Result<Self, KernelError> {
        let data = normalize_simplex(weights)?;
        Ok(Self {
            basis_count: data.len(),
            per_pair: None,
            data,
        })
    }

    /// Per-pair coefficients from flat data of length `K·K·B`, each pair's
    /// vector normalized onto the simplex.
    pub fn per_pair(
        num_processes: usize,
        basis_count: usize,
        flat: Vec<f64>,
    ) -> Result<Self, KernelError> {
        if flat.len() != num_processes * num_processes * basis_count {
            return Err(KernelError::CountMismatch);
        }
        let mut data = Vec::with_capacity(flat.len());
        for chunk in flat.chunks(basis_count) {
            data.extend_from_slice(&normalize_simplex(chunk.to_vec())?);
        }
        Ok(Self {
            basis_count,
            per_pair: Some(num_processes),
            data,
        })
    }

    pub fn basis_count(&self) -> usize {
        self.basis_count
    }

    pub fn is_shared(&self) -> bool {
        self.per_pair.is_none()
    }

    pub fn num_processes(&self) -> Option<usize> {
        self.per_pair
    }

    fn pair_in_range(&self, sender: usize, receiver: usize) -> bool {
        match self.per_pair {
            Some(k) => sender < k && receiver < k,
            None => true,
        }
    }

    /// The simplex vector for a directed pair. Panics on an out-of-range
    /// pair; use [`impulse_value`] / [`impulse_integral`] for checked calls.
    pub fn coefficients(&self, sender: usize, receiver: usize) -> &[f64] {
        match self.per_pair {
            None => &self.data,
            Some(k) => {
                assert!(sender < k && receiver < k, "pair out of range");
                let start = (sender * k + receiver) * self.basis_count;
                &self.data[start..start + self.basis_count]
            }
        }
    }
}

fn normalize_simplex(mut weights: Vec<f64>) -> Result<Vec<f64>, KernelError> {
    if weights.is_empty() {
        return Err(KernelError::BadConfig {
            reason: "coefficient vector must not be empty",
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(KernelError::BadConfig {
            reason: "coefficients must be finite and non-negative",
        });
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(KernelError::BadConfig {
            reason: "coefficients must not be all zero",
        });
    }
    for w in weights.iter_mut() {
        *w /= sum;
    }
    Ok(weights)
}

/// Checked density of basis `b` at elapsed time `dt`.
pub fn basis_value(family: &BasisFamily, b: usize, dt: f64) -> Result<f64, KernelError> {
    if b >= family.count() {
        return Err(KernelError::BasisIndexOutOfRange {
            index: b,
            count: family.count(),
        });
    }
    Ok(family.value(b, dt))
}

/// Checked mass of basis `b` on `[a, c]`.
pub fn basis_integral(family: &BasisFamily, b: usize, a: f64, c: f64) -> Result<f64, KernelError> {
    if b >= family.count() {
        return Err(KernelError::BasisIndexOutOfRange {
            index: b,
            count: family.count(),
        });
    }
    if a > c {
        return Err(KernelError::ReversedInterval { a, c });
    }
    Ok(family.integral(b, a, c))
}

fn check_pair(
    coeffs: &ImpulseCoefficients,
    family: &BasisFamily,
    pair: (usize, usize),
) -> Result<(), KernelError> {
    if coeffs.basis_count() != family.count() {
        return Err(KernelError::CountMismatch);
    }
    if !coeffs.pair_in_range(pair.0, pair.1) {
        return Err(KernelError::PairOutOfRange {
            sender: pair.0,
            receiver: pair.1,
            num_processes: coeffs.num_processes().unwrap_or(0),
        });
    }
    Ok(())
}

/// Impulse density `g(dt)` for a directed pair: the convex combination of
/// basis densities. Integrates to one over the support.
pub fn impulse_value(
    coeffs: &ImpulseCoefficients,
    family: &BasisFamily,
    pair: (usize, usize),
    dt: f64,
) -> Result<f64, KernelError> {
    check_pair(coeffs, family, pair)?;
    let cs = coeffs.coefficients(pair.0, pair.1);
    let mut out = 0.0;
    for (b, &cb) in cs.iter().enumerate() {
        if cb != 0.0 {
            out += cb * family.value(b, dt);
        }
    }
    Ok(out)
}

/// Impulse mass on `[a, c]` for a directed pair.
pub fn impulse_integral(
    coeffs: &ImpulseCoefficients,
    family: &BasisFamily,
    pair: (usize, usize),
    a: f64,
    c: f64,
) -> Result<f64, KernelError> {
    check_pair(coeffs, family, pair)?;
    if a > c {
        return Err(KernelError::ReversedInterval { a, c });
    }
    let cs = coeffs.coefficients(pair.0, pair.1);
    let mut out = 0.0;
    for (b, &cb) in cs.iter().enumerate() {
        if cb != 0.0 {
            out += cb * family.integral(b, a, c);
        }
    }
    Ok(out)
}

/// Supremum of the impulse density over elapsed times `[dt, ∞)`; the
/// per-event term of the thinning upper bound.
pub(crate) fn impulse_sup(
    coeffs: &ImpulseCoefficients,
    family: &BasisFamily,
    pair: (usize, usize),
    dt: f64,
) -> f64 {
    let cs = coeffs.coefficients(pair.0, pair.1);
    let mut out = 0.0;
    for (b, &cb) in cs.iter().enumerate() {
        if cb != 0.0 {
            out += cb * family.sup_value(b, dt);
        }
    }
    out
}
