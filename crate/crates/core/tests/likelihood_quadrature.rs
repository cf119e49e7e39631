//! Likelihood oracle: the exact negative log-likelihood must match a
//! dense-trapezoid quadrature of the intensity computed by an independent
//! brute-force implementation (its own kernel formulas, no shared code
//! path with the library).

use ripple_core::events::{EventLog, MarkedEvent};
use ripple_core::kernel::{BasisFamily, BasisKind, ImpulseCoefficients};
use ripple_core::matrix::Matrix;
use ripple_core::model::{neg_log_likelihood, HawkesParams};

const TRAPEZOID_POINTS: usize = 1_000_000;

/// Independent basis density, written straight from the definitions.
fn oracle_basis(kind: BasisKind, count: usize, window: f64, rates: &[f64], b: usize, dt: f64) -> f64 {
    if dt <= 0.0 || dt > window {
        return 0.0;
    }
    let w = window / count as f64;
    match kind {
        BasisKind::Boxcar => {
            let lo = b as f64 * w;
            let hi = (b as f64 + 1.0) * w;
            if dt > lo && dt <= hi {
                1.0 / w
            } else {
                0.0
            }
        }
        BasisKind::RaisedCosine => {
            let x = dt - b as f64 * w;
            if x > 0.0 && x <= w {
                (1.0 - (std::f64::consts::TAU * x / w).cos()) / w
            } else {
                0.0
            }
        }
        BasisKind::TruncatedExponential => {
            let r = rates[b];
            r * (-r * dt).exp() / (1.0 - (-r * window).exp())
        }
    }
}

/// Brute-force ground intensity: direct double loop over all events, no
/// window search, no shared kernel code.
fn oracle_intensity(params: &HawkesParams, log: &EventLog, k: usize, t: f64) -> f64 {
    let mut rate = params.background()[k];
    let basis = params.basis();
    for ev in log.events() {
        if ev.time >= t {
            continue;
        }
        let dt = t - ev.time;
        let w = params.weights()[(ev.process, k)];
        if w != 0.0 {
            let coeffs = params.impulse().coefficients(ev.process, k);
            let mut g = 0.0;
            for (b, &c) in coeffs.iter().enumerate() {
                g += c * oracle_basis(
                    basis.kind(),
                    basis.count(),
                    basis.window(),
                    basis.rates(),
                    b,
                    dt,
                );
            }
            rate += w * g;
        }
        if let Some(dyad) = params.dyad() {
            if ev.dyad.as_ref().is_some_and(|targets| targets.contains(&k)) {
                let wp = dyad.weights()[(ev.process, k)];
                if wp != 0.0 {
                    let db = dyad.basis();
                    let coeffs = dyad.coefficients().coefficients(ev.process, k);
                    let mut g = 0.0;
                    for (b, &c) in coeffs.iter().enumerate() {
                        g += c * oracle_basis(db.kind(), db.count(), db.window(), db.rates(), b, dt);
                    }
                    rate += wp * g;
                }
            }
        }
    }
    rate
}

/// Oracle NLL: -Σ log λ(s_n) with the brute-force intensity, plus a
/// trapezoid quadrature of Σ_k λ_k over the horizon.
fn oracle_nll(params: &HawkesParams, log: &EventLog) -> f64 {
    let mut nll = 0.0;
    for ev in log.events() {
        nll -= oracle_intensity(params, log, ev.process, ev.time).ln();
    }
    let horizon = log.horizon();
    let h = horizon / TRAPEZOID_POINTS as f64;
    for k in 0..params.num_processes() {
        let mut acc = 0.5 * (oracle_intensity(params, log, k, 0.0)
            + oracle_intensity(params, log, k, horizon));
        for i in 1..TRAPEZOID_POINTS {
            acc += oracle_intensity(params, log, k, i as f64 * h);
        }
        nll += acc * h;
    }
    nll
}

fn check_fixture(name: &str, params: HawkesParams, log: EventLog) {
    let exact = neg_log_likelihood(&params, &log).unwrap();
    let oracle = oracle_nll(&params, &log);
    let rel = (exact - oracle).abs() / oracle.abs().max(1.0);
    assert!(
        rel < 1e-5,
        "{name}: exact {exact} vs oracle {oracle} (rel {rel:.2e})"
    );
}

fn small_log(horizon: f64, k: usize, times_procs: &[(f64, usize)]) -> EventLog {
    let events = times_procs
        .iter()
        .map(|&(t, p)| MarkedEvent::new(t, p))
        .collect();
    EventLog::new(horizon, k, 0, events, None).unwrap()
}

#[test]
fn boxcar_single_basis() {
    let basis = BasisFamily::boxcar(1, 2.0).unwrap();
    let mut w = Matrix::zeros(2, 2);
    w[(0, 1)] = 0.4;
    w[(1, 0)] = 0.25;
    let params = HawkesParams::new(
        vec![0.3, 0.5],
        w,
        basis,
        ImpulseCoefficients::uniform_shared(1),
    )
    .unwrap();
    let log = small_log(10.0, 2, &[(0.7, 0), (1.9, 1), (3.3, 0), (6.1, 1), (8.2, 0)]);
    check_fixture("boxcar_single_basis", params, log);
}

#[test]
fn boxcar_two_bins() {
    let basis = BasisFamily::boxcar(2, 3.0).unwrap();
    let mut w = Matrix::zeros(2, 2);
    w[(0, 0)] = 0.3;
    w[(0, 1)] = 0.35;
    let params = HawkesParams::new(
        vec![0.4, 0.2],
        w,
        basis,
        ImpulseCoefficients::shared(vec![0.7, 0.3]).unwrap(),
    )
    .unwrap();
    let log = small_log(12.0, 2, &[(1.1, 0), (2.8, 0), (5.5, 1), (9.4, 0)]);
    check_fixture("boxcar_two_bins", params, log);
}

#[test]
fn truncated_exponential_pairwise() {
    let basis = BasisFamily::truncated_exponential(vec![0.8, 2.5], 4.0).unwrap();
    let mut w = Matrix::zeros(2, 2);
    w[(0, 1)] = 0.5;
    w[(1, 1)] = 0.2;
    w[(1, 0)] = 0.3;
    let coeffs = ImpulseCoefficients::per_pair(
        2,
        2,
        vec![0.5, 0.5, 0.2, 0.8, 0.9, 0.1, 0.4, 0.6],
    )
    .unwrap();
    let params = HawkesParams::new(vec![0.25, 0.45], w, basis, coeffs).unwrap();
    let log = small_log(15.0, 2, &[(0.4, 1), (2.2, 0), (4.9, 1), (7.7, 0), (11.0, 1)]);
    check_fixture("truncated_exponential_pairwise", params, log);
}

#[test]
fn raised_cosine_three_processes() {
    let basis = BasisFamily::raised_cosine(2, 3.0).unwrap();
    let mut w = Matrix::zeros(3, 3);
    w[(0, 1)] = 0.45;
    w[(1, 2)] = 0.4;
    w[(2, 0)] = 0.35;
    let params = HawkesParams::new(
        vec![0.3, 0.25, 0.35],
        w,
        basis,
        ImpulseCoefficients::shared(vec![0.6, 0.4]).unwrap(),
    )
    .unwrap();
    let log = small_log(
        10.0,
        3,
        &[(0.9, 0), (1.8, 1), (3.1, 2), (4.4, 0), (6.6, 1), (8.0, 2)],
    );
    check_fixture("raised_cosine_three_processes", params, log);
}

#[test]
fn generalized_with_dyad_channel() {
    let basis = BasisFamily::truncated_exponential(vec![1.2], 3.0).unwrap();
    let mut w = Matrix::zeros(2, 2);
    w[(0, 1)] = 0.4;
    w[(1, 0)] = 0.2;
    let mut wp = Matrix::zeros(2, 2);
    wp[(0, 1)] = 0.5;
    let dyad_basis = BasisFamily::boxcar(1, 2.0).unwrap();
    let params = HawkesParams::new(
        vec![0.35, 0.3],
        w,
        basis,
        ImpulseCoefficients::uniform_shared(1),
    )
    .unwrap()
    .with_dyad_channel(wp, dyad_basis, ImpulseCoefficients::uniform_shared(1))
    .unwrap();
    let events = vec![
        MarkedEvent::new(0.8, 0).with_dyad(vec![1]),
        MarkedEvent::new(2.4, 1),
        MarkedEvent::new(4.0, 0),
        MarkedEvent::new(6.3, 0).with_dyad(vec![1]),
        MarkedEvent::new(8.9, 1),
    ];
    let log = EventLog::new(11.0, 2, 0, events, None).unwrap();
    check_fixture("generalized_with_dyad_channel", params, log);
}
