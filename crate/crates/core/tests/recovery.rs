//! Simulation-recovery oracles: estimation error shrinks with more data,
//! and a fitted chain network surfaces the true edges on top.

use ripple_core::infer::{fit, FitConfig};
use ripple_core::kernel::{BasisFamily, ImpulseCoefficients};
use ripple_core::matrix::Matrix;
use ripple_core::model::HawkesParams;
use ripple_core::responsiveness::influence_network;
use ripple_core::simulate::{simulate, SimConfig};

fn kernel() -> BasisFamily {
    BasisFamily::default_exponential(3.0).unwrap()
}

/// Directed 3-voice chain 0 → 1 → 2 with a weak back edge.
fn chain_truth() -> HawkesParams {
    let mut w = Matrix::zeros(3, 3);
    w[(0, 1)] = 0.6;
    w[(1, 2)] = 0.6;
    w[(2, 0)] = 0.3;
    HawkesParams::new(
        vec![0.25, 0.15, 0.15],
        w,
        kernel(),
        ImpulseCoefficients::uniform_shared(1),
    )
    .unwrap()
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn median_weight_error(truth: &HawkesParams, horizon: f64, seed: u64) -> (usize, f64) {
    let out = simulate(&SimConfig::new(truth.clone(), horizon, seed)).unwrap();
    let fitted = fit(&out.log, &FitConfig::new(kernel())).unwrap();
    let mut errors = Vec::new();
    for s in 0..3 {
        for r in 0..3 {
            errors.push((fitted.params.weights()[(s, r)] - truth.weights()[(s, r)]).abs());
        }
    }
    (out.log.len(), median(errors))
}

#[test]
fn weight_error_shrinks_with_sample_size() {
    let truth = chain_truth();
    // Horizons sized to land near 500, 2000 and 8000 events.
    let (n_small, err_small) = median_weight_error(&truth, 450.0, 101);
    let (n_mid, err_mid) = median_weight_error(&truth, 1800.0, 101);
    let (n_large, err_large) = median_weight_error(&truth, 7200.0, 101);
    assert!(n_small > 250 && n_small < 1000, "n_small = {n_small}");
    assert!(n_mid > 1000 && n_mid < 4000, "n_mid = {n_mid}");
    assert!(n_large > 4000, "n_large = {n_large}");
    assert!(
        err_small > err_mid && err_mid > err_large,
        "errors not decreasing: {err_small} > {err_mid} > {err_large}"
    );
}

#[test]
fn chain_network_tops_true_edges() {
    // Simulate the 3-voice chain, fit, and extract the network: the
    // strongest edges must be the true chain links.
    let truth = chain_truth();
    let out = simulate(&SimConfig::new(truth, 2500.0, 55)).unwrap();
    let fitted = fit(&out.log, &FitConfig::new(kernel())).unwrap();
    let horizon = out.log.horizon();
    let edges = influence_network(&fitted.params, &out.log, (0.0, horizon), 0.0).unwrap();
    assert!(edges.len() >= 3);
    let top: Vec<(usize, usize)> = edges[..3].iter().map(|e| (e.sender, e.receiver)).collect();
    assert!(top.contains(&(0, 1)), "top edges {top:?}");
    assert!(top.contains(&(1, 2)), "top edges {top:?}");
    assert!(top.contains(&(2, 0)), "top edges {top:?}");
}
