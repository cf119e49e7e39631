//! Convexity probe: with the kernel fixed and (b, W, W') linearly
//! parameterized, the generalized negative log-likelihood is convex. The
//! probe checks midpoint-style convexity on random parameter pairs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use ripple_core::events::{EventLog, MarkedEvent};
use ripple_core::kernel::{BasisFamily, ImpulseCoefficients};
use ripple_core::matrix::Matrix;
use ripple_core::model::{neg_log_likelihood, HawkesParams};

fn fixture_log(rng: &mut ChaCha12Rng) -> EventLog {
    let k = 3;
    let horizon = 25.0;
    let mut events = Vec::new();
    for _ in 0..45 {
        let t = rng.random::<f64>() * horizon;
        let proc = rng.random_range(0..k);
        let mut ev = MarkedEvent::new(t, proc);
        if rng.random::<f64>() < 0.5 {
            let target = (proc + 1 + rng.random_range(0..k - 1)) % k;
            ev = ev.with_dyad(vec![target]);
        }
        events.push(ev);
    }
    EventLog::new(horizon, k, 0, events, None).unwrap()
}

/// Random generalized parameter point over the shared fixed kernel.
fn random_point(rng: &mut ChaCha12Rng, basis: &BasisFamily, dyad_basis: &BasisFamily) -> HawkesParams {
    let k = 3;
    let background: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
    let weights = Matrix::from_rows(
        k,
        k,
        (0..k * k).map(|_| rng.random::<f64>() * 0.8).collect(),
    );
    let dyad_weights = Matrix::from_rows(
        k,
        k,
        (0..k * k).map(|_| rng.random::<f64>() * 0.6).collect(),
    );
    HawkesParams::new(
        background,
        weights,
        basis.clone(),
        ImpulseCoefficients::uniform_shared(basis.count()),
    )
    .unwrap()
    .with_dyad_channel(
        dyad_weights,
        dyad_basis.clone(),
        ImpulseCoefficients::uniform_shared(dyad_basis.count()),
    )
    .unwrap()
}

/// Elementwise convex combination of two points on the natural scale.
fn blend(p: &HawkesParams, q: &HawkesParams, lambda: f64) -> HawkesParams {
    let k = p.num_processes();
    let background: Vec<f64> = p
        .background()
        .iter()
        .zip(q.background())
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    let mix = |a: &Matrix, b: &Matrix| {
        let data = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        Matrix::from_rows(k, k, data)
    };
    HawkesParams::new(
        background,
        mix(p.weights(), q.weights()),
        p.basis().clone(),
        p.impulse().clone(),
    )
    .unwrap()
    .with_dyad_channel(
        mix(p.dyad().unwrap().weights(), q.dyad().unwrap().weights()),
        p.dyad().unwrap().basis().clone(),
        p.dyad().unwrap().coefficients().clone(),
    )
    .unwrap()
}

#[test]
fn generalized_nll_is_convex_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(314159);
    let basis = BasisFamily::truncated_exponential(vec![0.7, 2.0], 4.0).unwrap();
    let dyad_basis = BasisFamily::boxcar(1, 2.5).unwrap();
    let log = fixture_log(&mut rng);
    for trial in 0..100 {
        let p = random_point(&mut rng, &basis, &dyad_basis);
        let q = random_point(&mut rng, &basis, &dyad_basis);
        let f_p = neg_log_likelihood(&p, &log).unwrap();
        let f_q = neg_log_likelihood(&q, &log).unwrap();
        for lambda in [0.25, 0.5, 0.75] {
            let mid = blend(&p, &q, lambda);
            let f_mid = neg_log_likelihood(&mid, &log).unwrap();
            let bound = lambda * f_p + (1.0 - lambda) * f_q;
            assert!(
                f_mid <= bound + 1e-9,
                "trial {trial}, λ={lambda}: {f_mid} > {bound}"
            );
        }
    }
}
