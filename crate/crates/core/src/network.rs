//! Feature network `φ_j` (hidden stack with a leading bias feature) and the
//! adaptively updated output layer `K_t`.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::plant::pseudo_inverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative at pre-activation `z`. ReLU uses the subgradient 0 at 0.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
            Activation::Sigmoid => {
                let s = self.apply(z);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }

    /// Whether every output lies in `[-1, 1]`.
    pub fn is_bounded(self) -> bool {
        matches!(self, Activation::Tanh | Activation::Sigmoid)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::Parse(format!("unknown activation `{other}`"))),
        }
    }
}

/// Dense layer `a = ψ(Wᵀ[1; a_prev])`; row 0 of `weights` holds the biases.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn fan_in(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn fan_out(&self) -> usize {
        self.weights.ncols()
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `[1; a_{l-1}]` fed to each layer.
    pub layer_inputs: Vec<Vector>,
    /// Pre-activations `z_l`.
    pub pre_activations: Vec<Vector>,
    /// `φ = [1; a_L]`.
    pub features: Vector,
}

/// Hidden stack `W_1 … W_{L-1}`. Immutable once published to the control
/// loop; a retrained stack replaces it wholesale.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureNetwork {
    input_dim: usize,
    layers: Vec<DenseLayer>,
    /// Number of completed trainings that produced this stack.
    pub generation: usize,
}

fn augmented(a: &Vector) -> Vector {
    let mut out = Vector::zeros(a.len() + 1);
    out[0] = 1.0;
    out.rows_mut(1, a.len()).copy_from(a);
    out
}

impl FeatureNetwork {
    pub fn new(input_dim: usize, layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("feature network needs at least one hidden layer".into()));
        }
        let mut width = input_dim;
        for layer in &layers {
            if layer.weights.nrows() != width + 1 {
                return Err(Error::Dimension {
                    context: "hidden layer fan-in (+1 bias row)",
                    expected: width + 1,
                    got: layer.weights.nrows(),
                });
            }
            width = layer.fan_out();
        }
        Ok(Self {
            input_dim,
            layers,
            generation: 0,
        })
    }

    /// `sizes = [n_0, n_1, …, n_L]`, one activation per hidden layer.
    /// Weights are drawn uniformly from `±1/√fan_in`.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], activations: &[Activation], rng: &mut R) -> Result<Self> {
        Self::build(sizes, activations, |fan_in, rows, cols| {
            let r = 1.0 / (fan_in.max(1) as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| rng.random_range(-r..=r))
        })
    }

    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        Self::build(sizes, activations, |_, rows, cols| Matrix::zeros(rows, cols))
    }

    fn build(
        sizes: &[usize],
        activations: &[Activation],
        mut init: impl FnMut(usize, usize, usize) -> Matrix,
    ) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(Error::Config(format!(
                "network sizes {sizes:?} need exactly {} activations, got {}",
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, act)| DenseLayer {
                weights: init(w[0], w[0] + 1, w[1]),
                activation: *act,
            })
            .collect();
        Self::new(sizes[0], layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    /// `[n_0, …, n_L]`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim)
            .chain(self.layers.iter().map(DenseLayer::fan_out))
            .collect()
    }

    /// Length of `φ`, i.e. `n_L + 1`.
    pub fn feature_dim(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::fan_out) + 1
    }

    /// `σ = √(n_L + 1)`, valid only for a bounded last activation.
    pub fn sigma(&self) -> Result<f64> {
        let last = self.layers.last().expect("validated nonempty");
        if !last.activation.is_bounded() {
            return Err(Error::Config(format!(
                "last activation `{}` is unbounded, so ‖φ‖ has no bound",
                last.activation.name()
            )));
        }
        Ok((self.feature_dim() as f64).sqrt())
    }

    pub fn forward_features(&self, x: &Vector) -> Vector {
        let mut a = x.clone();
        for layer in &self.layers {
            let z = layer.weights.tr_mul(&augmented(&a));
            a = z.map(|v| layer.activation.apply(v));
        }
        augmented(&a)
    }

    pub fn forward_trace(&self, x: &Vector) -> ForwardTrace {
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        for layer in &self.layers {
            let input = augmented(&a);
            let z = layer.weights.tr_mul(&input);
            a = z.map(|v| layer.activation.apply(v));
            layer_inputs.push(input);
            pre_activations.push(z);
        }
        ForwardTrace {
            layer_inputs,
            pre_activations,
            features: augmented(&a),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().all(|v| v.is_finite()))
    }
}

/// Per-column radial projection onto balls of radius `bounds[i]`.
pub fn project_columns(k_bar: &Matrix, bounds: &[f64]) -> Matrix {
    let mut k = k_bar.clone();
    for (i, mut col) in k.column_iter_mut().enumerate() {
        let norm = col.norm();
        let bound = bounds[i];
        if norm > bound {
            col *= bound / norm;
            // Rounding can leave the norm one ulp above the bound.
            while col.norm() > bound {
                col *= 1.0 - f64::EPSILON;
            }
        }
    }
    k
}

/// Output layer `K_t` with column bounds `W̄_i` and learning rate `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputWeights {
    k: Matrix,
    bounds: Vec<f64>,
    theta: f64,
}

impl OutputWeights {
    /// `K_0 = 0`.
    pub fn zeros(feature_dim: usize, bounds: Vec<f64>, theta: f64) -> Result<Self> {
        Self::from_matrix(Matrix::zeros(feature_dim, bounds.len()), bounds, theta)
    }

    /// Fails if a column of `k` lies outside its ball.
    pub fn from_matrix(k: Matrix, bounds: Vec<f64>, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Config(format!("learning rate θ = {theta} must lie in (0, 1)")));
        }
        if bounds.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(Error::Config("column bounds must be finite and nonnegative".into()));
        }
        if k.ncols() != bounds.len() {
            return Err(Error::Dimension {
                context: "output weight columns",
                expected: bounds.len(),
                got: k.ncols(),
            });
        }
        if k.column_iter().zip(&bounds).any(|(c, b)| c.norm() > *b) {
            return Err(Error::Config("initial output weights violate column bounds".into()));
        }
        Ok(Self { k, bounds, theta })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.k
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn input_dim(&self) -> usize {
        self.k.ncols()
    }

    /// `W̄ = Σ_i W̄_i²`.
    pub fn total_bound(&self) -> f64 {
        self.bounds.iter().map(|b| b * b).sum()
    }

    /// `u^a = −Kᵀφ`.
    pub fn adaptive_control(&self, phi: &Vector) -> Vector {
        -self.k.tr_mul(phi)
    }

    /// `g(x)†(x_{t+1} − f̄(x_t, u^m_t))`, which equals `u^a_t + h(x_t)` for the
    /// true plant.
    pub fn innovation(g_x: &Matrix, x_next: &Vector, x_nom_next: &Vector) -> Result<Vector> {
        Ok(pseudo_inverse(g_x)? * (x_next - x_nom_next))
    }

    /// Pre-projection update `K̄ = K + (θ/‖φ‖²) φ ũᵀ`.
    pub fn raw_update(&self, phi: &Vector, innovation: &Vector) -> Matrix {
        let scale = self.theta / phi.norm_squared();
        &self.k + phi * innovation.transpose() * scale
    }

    /// One step of the adaptive law followed by the column projection.
    pub fn update(&self, phi: &Vector, x_next: &Vector, x_nom_next: &Vector, g_x: &Matrix) -> Result<Self> {
        if phi.len() != self.k.nrows() {
            return Err(Error::Dimension {
                context: "feature vector",
                expected: self.k.nrows(),
                got: phi.len(),
            });
        }
        let innovation = Self::innovation(g_x, x_next, x_nom_next)?;
        Ok(self.with_projected(self.raw_update(phi, &innovation)))
    }

    fn with_projected(&self, k_bar: Matrix) -> Self {
        Self {
            k: project_columns(&k_bar, &self.bounds),
            bounds: self.bounds.clone(),
            theta: self.theta,
        }
    }
}

/// Control-authority split: `u_max^a = √W̄ σ` and `w′_max = δ_g u_max^a + w_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthorityBounds {
    pub u_max_a: f64,
    pub w_max_prime: f64,
}

pub fn control_authority_bounds(bounds: &[f64], sigma: f64, delta_g: f64, w_max: f64, u_max: f64) -> Result<AuthorityBounds> {
    if !(sigma > 0.0 && delta_g > 0.0 && w_max >= 0.0) {
        return Err(Error::Config("σ and δ_g must be positive, w_max nonnegative".into()));
    }
    let u_max_a = bounds.iter().map(|b| b * b).sum::<f64>().sqrt() * sigma;
    if u_max_a >= u_max {
        return Err(Error::Config(format!(
            "empty U′: adaptive authority u_max^a = {u_max_a} is not below u_max = {u_max}"
        )));
    }
    Ok(AuthorityBounds {
        u_max_a,
        w_max_prime: delta_g * u_max_a + w_max,
    })
}

const FORMAT_TAG: &str = "# deep-mpc network v1";

/// Text exchange format: a header line, `input <d>`, `generation <j>`, then
/// per hidden layer `layer <rows> <cols> <activation>` followed by the
/// row-major weights one row per line, and optionally an `output` block.
pub fn write_network(net: &FeatureNetwork, output: Option<&OutputWeights>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{FORMAT_TAG}");
    let _ = writeln!(s, "input {}", net.input_dim);
    let _ = writeln!(s, "generation {}", net.generation);
    for layer in &net.layers {
        let _ = writeln!(
            s,
            "layer {} {} {}",
            layer.weights.nrows(),
            layer.weights.ncols(),
            layer.activation.name()
        );
        write_rows(&mut s, &layer.weights);
    }
    if let Some(out) = output {
        let bounds: Vec<String> = out.bounds.iter().map(f64::to_string).collect();
        let _ = writeln!(
            s,
            "output {} {} {} {}",
            out.k.nrows(),
            out.k.ncols(),
            out.theta,
            bounds.join(" ")
        );
        write_rows(&mut s, &out.k);
    }
    s
}

fn write_rows(s: &mut String, m: &Matrix) {
    for row in m.row_iter() {
        let vals: Vec<String> = row.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{}", vals.join(" "));
    }
}

pub fn parse_network(text: &str) -> Result<(FeatureNetwork, Option<OutputWeights>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(FORMAT_TAG) {
        return Err(Error::Parse("missing network format header".into()));
    }
    let input_dim: usize = keyed(lines.next(), "input")?;
    let generation: usize = keyed(lines.next(), "generation")?;
    let mut layers = Vec::new();
    let mut output = None;
    while let Some(line) = lines.next() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("layer") => {
                let rows = parse_tok(tok.next())?;
                let cols = parse_tok(tok.next())?;
                let activation: Activation = tok.next().ok_or_else(|| Error::Parse("missing activation".into()))?.parse()?;
                let weights = read_rows(&mut lines, rows, cols)?;
                layers.push(DenseLayer { weights, activation });
            }
            Some("output") => {
                let rows = parse_tok(tok.next())?;
                let cols = parse_tok(tok.next())?;
                let theta: f64 = parse_tok(tok.next())?;
                let bounds = tok.map(|t| parse_tok(Some(t))).collect::<Result<Vec<f64>>>()?;
                let k = read_rows(&mut lines, rows, cols)?;
                output = Some(OutputWeights::from_matrix(k, bounds, theta)?);
            }
            other => return Err(Error::Parse(format!("unexpected record {other:?}"))),
        }
    }
    let mut net = FeatureNetwork::new(input_dim, layers)?;
    net.generation = generation;
    Ok((net, output))
}

fn parse_tok<T: FromStr>(tok: Option<&str>) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse("truncated record".into()))?;
    tok.parse().map_err(|_| Error::Parse(format!("bad number `{tok}`")))
}

fn keyed<T: FromStr>(line: Option<&str>, key: &str) -> Result<T> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
    let mut tok = line.split_whitespace();
    if tok.next() != Some(key) {
        return Err(Error::Parse(format!("expected `{key}`, found `{line}`")));
    }
    parse_tok(tok.next())
}

fn read_rows<'a>(lines: &mut impl Iterator<Item = &'a str>, rows: usize, cols: usize) -> Result<Matrix> {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = lines.next().ok_or_else(|| Error::Parse("truncated matrix".into()))?;
        let row = line.split_whitespace().map(|t| parse_tok(Some(t))).collect::<Result<Vec<f64>>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!("row has {} entries, expected {cols}", row.len())));
        }
        data.extend(row);
    }
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;
    use rand::Rng;

    const DEEP: [Activation; 3] = [Activation::Relu, Activation::Relu, Activation::Tanh];

    #[test]
    fn bias_feature_is_always_one() {
        let mut rng = stream(1, Stream::NetworkInit);
        let net = FeatureNetwork::random(&[2, 5, 5, 3], &DEEP, &mut rng).unwrap();
        for x in [[0.0, 0.0], [10.0, -3.0], [-0.2, 0.7]] {
            assert_eq!(net.forward_features(&Vector::from_row_slice(&x))[0], 1.0);
        }
    }

    #[test]
    fn zero_weights_give_unit_bias_only() {
        let net = FeatureNetwork::zeros(&[2, 5, 5, 3], &DEEP).unwrap();
        let phi = net.forward_features(&Vector::from_row_slice(&[0.3, -1.0]));
        assert_eq!(phi, Vector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn benchmark_network_shape_and_bound() {
        let mut rng = stream(2, Stream::NetworkInit);
        let net = FeatureNetwork::random(&[2, 5, 5, 3], &DEEP, &mut rng).unwrap();
        assert_eq!(net.feature_dim(), 4);
        assert_eq!(net.sigma().unwrap(), 2.0);
        for _ in 0..200 {
            let x = Vector::from_fn(2, |_, _| rng.random_range(-50.0..50.0));
            assert!(net.forward_features(&x).norm() <= 2.0);
        }
        let relu_last = FeatureNetwork::zeros(&[2, 3], &[Activation::Relu]).unwrap();
        assert!(relu_last.sigma().is_err());
    }

    #[test]
    fn adaptive_control_examples() {
        let phi = Vector::from_row_slice(&[1.0, 0.3, -0.2, 0.9]);
        let zero = OutputWeights::zeros(4, vec![1.0], 0.5).unwrap();
        assert_eq!(zero.adaptive_control(&phi), Vector::zeros(1));

        let mut e1 = Matrix::zeros(4, 1);
        e1[(0, 0)] = 1.0;
        let k = OutputWeights::from_matrix(e1, vec![1.0], 0.5).unwrap();
        assert_eq!(k.adaptive_control(&phi)[0], -1.0);

        let mut rng = stream(3, Stream::Fuzz);
        let kmat = Matrix::from_fn(4, 2, |_, _| rng.random_range(-0.2..0.2));
        let k = OutputWeights::from_matrix(kmat.clone(), vec![1.0, 1.0], 0.5).unwrap();
        let u = k.adaptive_control(&phi);
        for i in 0..2 {
            let brute: f64 = (0..4).map(|r| kmat[(r, i)] * phi[r]).sum();
            assert!((u[i] + brute).abs() < 1e-15);
        }
    }

    #[test]
    fn update_with_zero_innovation_keeps_weights() {
        let mut rng = stream(4, Stream::Fuzz);
        let kmat = Matrix::from_fn(4, 1, |_, _| rng.random_range(-0.1..0.1));
        let k = OutputWeights::from_matrix(kmat, vec![1.0], 0.5).unwrap();
        let phi = Vector::from_row_slice(&[1.0, 0.1, 0.2, 0.3]);
        let x = Vector::from_row_slice(&[0.3, 0.1]);
        let g = Matrix::from_column_slice(2, 1, &[0.0, 0.05]);
        let next = k.update(&phi, &x, &x, &g).unwrap();
        assert_eq!(next, k);
    }

    #[test]
    fn update_matches_ground_truth_innovation() {
        // x_next - f̄ = g (u_a + h), so the innovation recovers u_a + h.
        let g = Matrix::from_column_slice(2, 1, &[0.0, 0.05]);
        let k = OutputWeights::zeros(4, vec![10.0], 0.3).unwrap();
        let phi = Vector::from_row_slice(&[1.0, -0.4, 0.2, 0.5]);
        let x_nom = Vector::from_row_slice(&[0.1, 0.2]);
        let u_tilde = Vector::from_element(1, 0.37);
        let x_next = &x_nom + &g * &u_tilde;
        let innovation = OutputWeights::innovation(&g, &x_next, &x_nom).unwrap();
        let expected = phi.clone() * u_tilde.transpose() * (0.3 / phi.norm_squared());
        let got = k.raw_update(&phi, &innovation);
        assert!((got - expected).amax() < 1e-12);
    }

    #[test]
    fn projection_rescales_long_columns() {
        let k_bar = Matrix::from_column_slice(2, 2, &[3.0, 4.0, 0.1, 0.1]);
        let k = project_columns(&k_bar, &[1.0, 1.0]);
        assert!((k.column(0).norm() - 1.0).abs() < 1e-15);
        assert!((k[(0, 0)] - 0.6).abs() < 1e-15 && (k[(1, 0)] - 0.8).abs() < 1e-15);
        assert_eq!(k.column(1), k_bar.column(1));
    }

    #[test]
    fn authority_bound_examples() {
        let b = control_authority_bounds(&[0.0], 2.0, 0.05, 0.01, 1.0).unwrap();
        assert_eq!(b.u_max_a, 0.0);
        assert_eq!(b.w_max_prime, 0.01);
        let b = control_authority_bounds(&[0.5], 2.0, 0.05, 0.01, 2.0).unwrap();
        assert!((b.u_max_a - 1.0).abs() < 1e-15 && (b.w_max_prime - 0.06).abs() < 1e-15);
        let scaled = control_authority_bounds(&[1.5], 2.0, 0.05, 0.01, 5.0).unwrap();
        assert!((scaled.u_max_a - 3.0 * b.u_max_a).abs() < 1e-14);
        assert!(control_authority_bounds(&[0.5], 2.0, 0.05, 0.01, 1.0).is_err());
    }

    #[test]
    fn theta_endpoints_rejected() {
        assert!(OutputWeights::zeros(3, vec![1.0], 0.0).is_err());
        assert!(OutputWeights::zeros(3, vec![1.0], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_bounded(
            vals in proptest::collection::vec(-5.0f64..5.0, 8),
            b0 in 0.01f64..3.0,
            b1 in 0.01f64..3.0,
        ) {
            let k_bar = Matrix::from_column_slice(4, 2, &vals);
            let bounds = [b0, b1];
            let k = project_columns(&k_bar, &bounds);
            prop_assert_eq!(project_columns(&k, &bounds), k.clone());
            for (c, b) in k.column_iter().zip(bounds) {
                prop_assert!(c.norm() <= b * (1.0 + 1e-15));
            }
        }

        #[test]
        fn projection_property_against_interior_points(
            vals in proptest::collection::vec(-5.0f64..5.0, 4),
            star in proptest::collection::vec(-1.0f64..1.0, 4),
            bound in 0.1f64..2.0,
        ) {
            let k_bar = Matrix::from_column_slice(4, 1, &vals);
            let mut w_star = Matrix::from_column_slice(4, 1, &star);
            let n = w_star.norm();
            if n > bound { w_star *= bound / n; }
            let k = project_columns(&k_bar, &[bound]);
            let inner = (&w_star - &k).dot(&(&k_bar - &k));
            prop_assert!(inner <= 1e-12);
        }

        #[test]
        fn network_text_format_round_trips(seed in 0u64..1000) {
            let mut rng = stream(seed, Stream::NetworkInit);
            let mut net = FeatureNetwork::random(&[2, 5, 5, 3], &DEEP, &mut rng).unwrap();
            net.generation = (seed % 7) as usize;
            let kmat = Matrix::from_fn(4, 1, |_, _| rng.random_range(-0.05..0.05));
            let out = OutputWeights::from_matrix(kmat, vec![0.15], 0.5).unwrap();
            let text = write_network(&net, Some(&out));
            let (net2, out2) = parse_network(&text).unwrap();
            prop_assert_eq!(net2, net);
            prop_assert_eq!(out2, Some(out));
        }
    }
}
