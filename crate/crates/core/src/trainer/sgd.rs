use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::FeatureNetwork;

use super::buffer::Dataset;

/// Hidden-layer training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    /// Samples per training set.
    pub p0: usize,
    /// Replay buffer capacity.
    pub p_max: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Defaults to `min(32, p0)`.
    pub batch_size: Option<usize>,
    /// First training instant `T_1`; must be at least `p0`.
    pub first_trigger: usize,
    /// Steps between later triggers.
    pub period: usize,
    /// Steps between starting a job and publishing its weights.
    pub latency: usize,
    /// Run jobs on a worker thread instead of inline.
    pub asynchronous: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            p0: 50,
            p_max: 200,
            epochs: 50,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: None,
            first_trigger: 50,
            period: 50,
            latency: 1,
            asynchronous: false,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.p0 == 0 || self.p0 > self.p_max {
            return bad(format!("need 0 < p0 ≤ p_max, got p0 = {}, p_max = {}", self.p0, self.p_max));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate {} must be finite and nonnegative", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum {} must lie in [0, 1)", self.momentum));
        }
        if self.first_trigger < self.p0 {
            return bad(format!("first trigger {} precedes p0 = {}", self.first_trigger, self.p0));
        }
        if self.period == 0 || self.latency == 0 {
            return bad("period and latency must be positive".into());
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be positive".into());
        }
        Ok(())
    }

    pub fn effective_batch_size(&self) -> usize {
        self.batch_size.unwrap_or(32.min(self.p0))
    }
}

fn residual(net: &FeatureNetwork, k: &Matrix, x: &Vector, label: &Vector) -> Vector {
    label + k.tr_mul(&net.forward_features(x))
}

/// Mean of `‖u^a + Kᵀφ(x)‖²` over the dataset, with `K` the frozen output layer.
pub fn dataset_loss(data: &Dataset, net: &FeatureNetwork, k: &Matrix) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::NotEnoughData {
            requested: 1,
            available: 0,
        });
    }
    let total: f64 = data
        .states
        .iter()
        .zip(&data.labels)
        .map(|(x, u)| residual(net, k, x, u).norm_squared())
        .sum();
    Ok(total / data.len() as f64)
}

fn accumulate_pair(net: &FeatureNetwork, k: &Matrix, x: &Vector, label: &Vector, grads: &mut [Matrix], scale: f64) {
    let trace = net.forward_trace(x);
    let r = label + k.tr_mul(&trace.features);
    let d_phi = k * r * 2.0;
    let mut d_a = d_phi.rows(1, d_phi.len() - 1).into_owned();
    for (l, layer) in net.layers().iter().enumerate().rev() {
        let z = &trace.pre_activations[l];
        let delta = d_a.zip_map(z, |g, zi| g * layer.activation.derivative(zi));
        grads[l] += &trace.layer_inputs[l] * delta.transpose() * scale;
        if l > 0 {
            let back = &layer.weights * &delta;
            d_a = back.rows(1, back.len() - 1).into_owned();
        }
    }
}

fn zero_grads(net: &FeatureNetwork) -> Vec<Matrix> {
    net.layers()
        .iter()
        .map(|l| Matrix::zeros(l.weights.nrows(), l.weights.ncols()))
        .collect()
}

fn batch_gradient<'a>(net: &FeatureNetwork, k: &Matrix, pairs: impl ExactSizeIterator<Item = (&'a Vector, &'a Vector)>) -> Vec<Matrix> {
    let mut grads = zero_grads(net);
    let scale = 1.0 / pairs.len().max(1) as f64;
    for (x, u) in pairs {
        accumulate_pair(net, k, x, u, &mut grads, scale);
    }
    grads
}

/// Gradient of [`dataset_loss`] with respect to each hidden weight matrix.
pub fn gradient(data: &Dataset, net: &FeatureNetwork, k: &Matrix) -> Vec<Matrix> {
    batch_gradient(net, k, data.states.iter().zip(&data.labels))
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub network: FeatureNetwork,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs: usize,
}

/// Minibatch SGD with momentum on the hidden stack. The returned network
/// carries the next generation index.
pub fn train<R: Rng + ?Sized>(
    hidden: &FeatureNetwork,
    k_frozen: &Matrix,
    data: &Dataset,
    cfg: &TrainerConfig,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    let initial_loss = dataset_loss(data, hidden, k_frozen)?;
    let mut net = hidden.clone();
    let mut velocity = zero_grads(&net);
    let batch = cfg.effective_batch_size().min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch) {
            let grads = batch_gradient(
                &net,
                k_frozen,
                chunk.iter().map(|&i| (&data.states[i], &data.labels[i])),
            );
            for ((layer, v), g) in net.layers_mut().iter_mut().zip(&mut velocity).zip(&grads) {
                *v *= cfg.momentum;
                *v -= g * cfg.learning_rate;
                layer.weights += &*v;
            }
        }
        if !net.is_finite() {
            return Err(Error::TrainingDiverged(f64::NAN));
        }
    }
    let final_loss = dataset_loss(data, &net, k_frozen)?;
    if !final_loss.is_finite() {
        return Err(Error::TrainingDiverged(final_loss));
    }
    log::debug!("training: loss {initial_loss:.6e} -> {final_loss:.6e}");
    net.generation = hidden.generation + 1;
    Ok(TrainingOutcome {
        network: net,
        initial_loss,
        final_loss,
        epochs: cfg.epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Activation;
    use crate::rng::{stream, Stream};
    use rand::Rng;

    const DEEP: [Activation; 3] = [Activation::Relu, Activation::Relu, Activation::Tanh];

    fn setup(seed: u64, n: usize) -> (FeatureNetwork, Matrix, Dataset) {
        let mut rng = stream(seed, Stream::Fuzz);
        let net = FeatureNetwork::random(&[2, 5, 5, 3], &DEEP, &mut rng).unwrap();
        let k = Matrix::from_fn(4, 1, |_, _| rng.random_range(-1.0..1.0));
        let states: Vec<Vector> = (0..n)
            .map(|_| Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let labels = (0..n).map(|_| Vector::from_element(1, rng.random_range(-0.5..0.5))).collect();
        (net, k, Dataset { states, labels })
    }

    fn self_labelled(net: &FeatureNetwork, k: &Matrix, states: Vec<Vector>) -> Dataset {
        let labels = states.iter().map(|x| -k.tr_mul(&net.forward_features(x))).collect();
        Dataset { states, labels }
    }

    #[test]
    fn perfect_fit_has_zero_loss_and_gradient() {
        let (net, k, data) = setup(1, 10);
        let fit = self_labelled(&net, &k, data.states);
        assert!(dataset_loss(&fit, &net, &k).unwrap() < 1e-28);
        for g in gradient(&fit, &net, &k) {
            assert!(g.amax() < 1e-14);
        }
        let cfg = TrainerConfig { p0: 10, p_max: 10, first_trigger: 10, epochs: 5, ..Default::default() };
        let out = train(&net, &k, &fit, &cfg, &mut stream(1, Stream::Training)).unwrap();
        for (a, b) in out.network.layers().iter().zip(net.layers()) {
            assert!((&a.weights - &b.weights).amax() < 1e-14);
        }
    }

    #[test]
    fn single_pair_loss_is_squared_residual() {
        let (net, k, data) = setup(2, 1);
        let r = &data.labels[0] + k.tr_mul(&net.forward_features(&data.states[0]));
        assert_eq!(dataset_loss(&data, &net, &k).unwrap(), r.norm_squared());
    }

    #[test]
    fn loss_matches_termwise_sum() {
        let (net, k, data) = setup(3, 17);
        let mut sum = 0.0;
        for (x, u) in data.states.iter().zip(&data.labels) {
            let phi = net.forward_features(x);
            let mut kphi = 0.0;
            for r in 0..4 {
                kphi += k[(r, 0)] * phi[r];
            }
            sum += (u[0] + kphi).powi(2);
        }
        assert!((dataset_loss(&data, &net, &k).unwrap() - sum / 17.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..5 {
            let (net, k, data) = setup(10 + seed, 8);
            let grads = gradient(&data, &net, &k);
            for (l, g) in grads.iter().enumerate() {
                for idx in 0..g.len() {
                    let h = 1e-5;
                    let mut plus = net.clone();
                    plus.layers_mut()[l].weights[idx] += h;
                    let mut minus = net.clone();
                    minus.layers_mut()[l].weights[idx] -= h;
                    let fd = (dataset_loss(&data, &plus, &k).unwrap() - dataset_loss(&data, &minus, &k).unwrap()) / (2.0 * h);
                    let err = (fd - g[idx]).abs();
                    assert!(err <= 1e-4 * fd.abs().max(g[idx].abs()) + 1e-8, "layer {l} entry {idx}: {fd} vs {}", g[idx]);
                }
            }
        }
    }

    #[test]
    fn gradient_of_mean_is_mean_of_gradients() {
        let (net, k, data) = setup(4, 6);
        let whole = gradient(&data, &net, &k);
        let mut avg = zero_grads(&net);
        for i in 0..6 {
            let one = Dataset { states: vec![data.states[i].clone()], labels: vec![data.labels[i].clone()] };
            for (a, g) in avg.iter_mut().zip(gradient(&one, &net, &k)) {
                *a += g / 6.0;
            }
        }
        for (a, b) in avg.iter().zip(&whole) {
            assert!((a - b).amax() < 1e-14);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let (net, k, data) = setup(5, 20);
        let cfg = TrainerConfig { p0: 20, p_max: 20, first_trigger: 20, learning_rate: 0.0, epochs: 3, ..Default::default() };
        let out = train(&net, &k, &data, &cfg, &mut stream(5, Stream::Training)).unwrap();
        assert_eq!(out.network.layers(), net.layers());
        assert_eq!(out.network.generation, net.generation + 1);
    }

    #[test]
    fn linear_layer_reaches_least_squares_optimum() {
        // Identity activation: φ = [1; Wᵀ[1; x]], K = [0; 1] makes the residual u + wᵀ[1; x].
        let mut rng = stream(6, Stream::Fuzz);
        let net = FeatureNetwork::zeros(&[2, 1], &[Activation::Identity]).unwrap();
        let k = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let n = 40;
        let states: Vec<Vector> = (0..n).map(|_| Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))).collect();
        let labels: Vec<Vector> = states
            .iter()
            .map(|x| Vector::from_element(1, 0.3 - 0.7 * x[0] + 0.2 * x[1] + rng.random_range(-0.05..0.05)))
            .collect();
        let data = Dataset { states: states.clone(), labels: labels.clone() };
        let a = Matrix::from_fn(n, 3, |r, c| if c == 0 { 1.0 } else { states[r][c - 1] });
        let b = Vector::from_fn(n, |r, _| -labels[r][0]);
        let w = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
        let optimum = (&a * &w - &b).norm_squared() / n as f64;
        let cfg = TrainerConfig { p0: n, p_max: n, first_trigger: n, epochs: 2000, batch_size: Some(n), ..Default::default() };
        let out = train(&net, &k, &data, &cfg, &mut stream(6, Stream::Training)).unwrap();
        assert!(out.final_loss - optimum < 1e-3, "{} vs {optimum}", out.final_loss);
        assert!(out.final_loss <= out.initial_loss);
    }

    #[test]
    fn divergence_is_reported() {
        let (net, k, data) = setup(7, 20);
        let cfg = TrainerConfig { p0: 20, p_max: 20, first_trigger: 20, learning_rate: 1e200, epochs: 5, ..Default::default() };
        let err = train(&net, &k, &data, &cfg, &mut stream(7, Stream::Training)).unwrap_err();
        assert!(matches!(err, Error::TrainingDiverged(_)));
    }

    #[test]
    fn config_validation() {
        assert!(TrainerConfig::default().validate().is_ok());
        assert!(TrainerConfig { momentum: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainerConfig { p0: 300, ..Default::default() }.validate().is_err());
        assert!(TrainerConfig { first_trigger: 10, ..Default::default() }.validate().is_err());
        assert_eq!(TrainerConfig { p0: 10, ..Default::default() }.effective_batch_size(), 10);
    }
}
