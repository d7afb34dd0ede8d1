//! Shared fixtures for the benchmarks.

use deep_mpc::harness::{Scenario, ScenarioConfig};
use deep_mpc::network::{Activation, FeatureNetwork};
use deep_mpc::ocp::QpProblem;
use deep_mpc::rng::{stream, Stream};
use deep_mpc::trainer::Dataset;
use deep_mpc::{Matrix, Vector};

/// Deterministic pseudo-random entry in `[-1, 1]`.
fn entry(i: usize, j: usize, salt: f64) -> f64 {
    ((i as f64 * 12.9898 + j as f64 * 78.233 + salt) * 43.758).sin()
}

/// Strictly convex box-constrained QP with `n` variables and `k` rows.
pub fn box_qp(n: usize, k: usize) -> QpProblem {
    let l = Matrix::from_fn(n, n, |i, j| entry(i, j, 0.1));
    let p = &l * l.transpose() / n as f64 + Matrix::identity(n, n) * 0.1;
    let q = Vector::from_fn(n, |i, _| entry(i, 0, 0.2));
    let a = Matrix::from_fn(k, n, |i, j| entry(i, j, 0.3));
    let center = &a * Vector::from_fn(n, |i, _| entry(i, 1, 0.4));
    let lo = center.map(|c| c - 0.5);
    let hi = center.map(|c| c + 0.5);
    QpProblem::new(p, q, a, lo, hi).expect("valid QP")
}

/// Benchmark wing-rock scenario with a shortened run.
pub fn wing_rock(steps: usize) -> Scenario {
    let mut cfg = ScenarioConfig::wing_rock();
    cfg.simulation.steps = steps;
    Scenario::prepare(&cfg).expect("benchmark scenario is feasible")
}

/// Default deep feature network and a matching replay set.
pub fn network_and_data(samples: usize) -> (FeatureNetwork, Matrix, Dataset) {
    let mut rng = stream(0, Stream::NetworkInit);
    let net = FeatureNetwork::random(&[2, 5, 5, 3], &[Activation::Relu, Activation::Relu, Activation::Tanh], &mut rng).expect("valid sizes");
    let k = Matrix::from_fn(net.feature_dim(), 1, |i, _| 0.05 * entry(i, 0, 0.5));
    let data = Dataset {
        states: (0..samples).map(|s| Vector::from_fn(2, |i, _| 0.3 * entry(s, i, 0.6))).collect(),
        labels: (0..samples).map(|s| Vector::from_element(1, 0.2 * entry(s, 0, 0.7))).collect(),
    };
    (net, k, data)
}
