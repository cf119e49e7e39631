//! Shared randomized fixtures for unit tests.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::events::{EventLog, MarkedEvent};
use crate::kernel::{BasisFamily, ImpulseCoefficients};
use crate::matrix::Matrix;
use crate::model::HawkesParams;

/// K=3 fixture with a two-basis exponential kernel and a few dozen events.
/// With `with_marks` the parameters carry θ and a dyadic channel, and events
/// carry feature vectors and mention marks.
pub(crate) fn random_fixture(seed: u64, with_marks: bool) -> (HawkesParams, EventLog) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let k = 3usize;
    let f = 2usize;
    let horizon = 30.0;
    let basis = BasisFamily::truncated_exponential(vec![0.6, 2.2], 4.0).unwrap();
    let background: Vec<f64> = (0..k).map(|_| 0.1 + rng.random::<f64>() * 0.5).collect();
    let mut w = Matrix::zeros(k, k);
    for s in 0..k {
        for r in 0..k {
            if rng.random::<f64>() < 0.6 {
                w[(s, r)] = rng.random::<f64>() * 0.5;
            }
        }
    }
    let coeffs = ImpulseCoefficients::per_pair(
        k,
        2,
        (0..k * k * 2).map(|_| 0.2 + rng.random::<f64>()).collect(),
    )
    .unwrap();
    let mut params = HawkesParams::new(background, w, basis, coeffs).unwrap();
    if with_marks {
        let theta = Matrix::from_rows(
            k,
            f,
            (0..k * f)
                .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                .collect(),
        );
        params = params.with_features(theta).unwrap();
        let mut wp = Matrix::zeros(k, k);
        for s in 0..k {
            for r in 0..k {
                if s != r && rng.random::<f64>() < 0.5 {
                    wp[(s, r)] = rng.random::<f64>() * 0.4;
                }
            }
        }
        let dyad_basis = BasisFamily::boxcar(1, 2.5).unwrap();
        params = params
            .with_dyad_channel(wp, dyad_basis, ImpulseCoefficients::uniform_shared(1))
            .unwrap();
    }
    let mut events = Vec::new();
    let n = 40 + (seed % 17) as usize;
    for _ in 0..n {
        let t = rng.random::<f64>() * horizon;
        let proc = rng.random_range(0..k);
        let mut ev = MarkedEvent::new(t, proc);
        if with_marks {
            if rng.random::<f64>() < 0.8 {
                let feats: Vec<f64> = (0..f).map(|_| 0.1 + rng.random::<f64>() * 1.5).collect();
                ev = ev.with_features(feats);
            }
            if rng.random::<f64>() < 0.4 {
                let target = (proc + 1 + rng.random_range(0..k - 1)) % k;
                ev = ev.with_dyad(vec![target]);
            }
        }
        events.push(ev);
    }
    let log = EventLog::new(horizon, k, if with_marks { f } else { 0 }, events, None).unwrap();
    (params, log)
}
