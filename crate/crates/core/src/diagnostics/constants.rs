use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig_range, Matrix, Vector};

/// Measured or configured quantities the stability constants are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Lipschitz constant inside the inner tube; defaults to `c3`.
    pub c3_hat: Option<f64>,
    /// Tube level `c`.
    pub tube_level: f64,
    pub w_max_prime: f64,
    /// `‖g‖` bound inside the inner tube.
    pub delta_g_hat: f64,
    pub sigma: f64,
    pub theta: f64,
    /// `W̄ = Σ_i W̄_i²`.
    pub w_bar: f64,
    pub input_dim: usize,
    /// Reconstruction-error growth `‖ε(x)‖ ≤ β‖x‖²`.
    pub beta: f64,
    /// Inner level `ĉ`; defaults to `c̄`.
    pub c_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c3_hat: f64,
    pub gamma: f64,
    pub tube_level: f64,
    pub c_bar: f64,
    pub c_hat: f64,
    pub delta_g_hat: f64,
    pub beta: f64,
    pub a0: f64,
    pub eta: f64,
    /// Mean-square constants as stated: `c_0 = σ²/(1−θ)`, `c_0′ = 4c_0W̄/θ`.
    pub c0: f64,
    pub c0_prime: f64,
    /// Variant carrying the extra `1/m²` used inside the proof.
    pub c0_proof: f64,
    pub c0_prime_proof: f64,
    pub w_max_prime: f64,
    pub sigma: f64,
    pub theta: f64,
    pub w_bar: f64,
    pub input_dim: usize,
}

impl StabilityConstants {
    pub fn from_inputs(inp: &ConstantInputs) -> Result<Self> {
        if !(inp.c2 > inp.c1 && inp.c1 > 0.0) {
            return Err(Error::Config(format!("need c_2 > c_1 > 0, got c_1 = {}, c_2 = {}", inp.c1, inp.c2)));
        }
        if !(inp.theta > 0.0 && inp.theta < 1.0) || inp.input_dim == 0 {
            return Err(Error::Config("θ must lie in (0, 1) and m ≥ 1".into()));
        }
        let m = inp.input_dim as f64;
        let gamma = 1.0 - inp.c1 / inp.c2;
        let c_bar = inp.c2 * inp.c3 / inp.c1 * inp.w_max_prime;
        let c3_hat = inp.c3_hat.unwrap_or(inp.c3);
        let a0 = 2.0 * (c3_hat * inp.delta_g_hat * inp.sigma).powi(2) / (1.0 - inp.theta);
        let eta = (1.0 - 2.0 * gamma * gamma) * inp.c1 * inp.c1
            - 2.0 * (inp.sigma * c3_hat * inp.delta_g_hat * inp.beta / m).powi(2) / (1.0 - inp.theta);
        let c0 = inp.sigma * inp.sigma / (1.0 - inp.theta);
        let c0_proof = c0 / (m * m);
        Ok(Self {
            c1: inp.c1,
            c2: inp.c2,
            c3: inp.c3,
            c3_hat,
            gamma,
            tube_level: inp.tube_level,
            c_bar,
            c_hat: inp.c_hat.unwrap_or(c_bar),
            delta_g_hat: inp.delta_g_hat,
            beta: inp.beta,
            a0,
            eta,
            c0,
            c0_prime: 4.0 * c0 * inp.w_bar / inp.theta,
            c0_proof,
            c0_prime_proof: 4.0 * c0_proof * inp.w_bar / inp.theta,
            w_max_prime: inp.w_max_prime,
            sigma: inp.sigma,
            theta: inp.theta,
            w_bar: inp.w_bar,
            input_dim: inp.input_dim,
        })
    }

    /// `w′_max < (c_1/(c_2 c_3)) c`, equivalently `c̄ < c`.
    pub fn tube_precondition(&self) -> bool {
        self.w_max_prime < self.c1 / (self.c2 * self.c3) * self.tube_level
    }
}

/// `c_1 = λ_min(Q)` and `c_2 = L̄^N λ_max(Q_f) + Σ_{i<N} L̄^i λ_max(Q)`.
pub fn estimate_value_bounds(q: &Matrix, q_f: &Matrix, growth: f64, horizon: usize) -> Result<(f64, f64)> {
    let (q_min, q_max) = sym_eig_range(q);
    let (_, qf_max) = sym_eig_range(q_f);
    let c1 = q_min;
    let c2 = growth.powi(horizon as i32) * qf_max + crate::mpc::growth_sum(growth, horizon) * q_max;
    if !(c2 > c1 && c1 > 0.0) {
        return Err(Error::Config(format!("value bounds degenerate: c_1 = {c1}, c_2 = {c2}")));
    }
    Ok((c1, c2))
}

/// Axis-aligned sampling region.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lower: Vector,
    pub upper: Vector,
}

impl BoxRegion {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        Vector::from_fn(self.lower.len(), |i, _| {
            if self.upper[i] > self.lower[i] {
                rng.random_range(self.lower[i]..=self.upper[i])
            } else {
                self.lower[i]
            }
        })
    }
}

/// Sampled Lipschitz constant of `x ↦ cost(controls, x)` with the controls
/// held fixed (chosen at a random anchor), inflated by 1.2.
pub fn estimate_lipschitz_c3<C, R: Rng + ?Sized>(
    region: &BoxRegion,
    samples: usize,
    rng: &mut R,
    controls_for: impl Fn(&Vector) -> C,
    cost: impl Fn(&C, &Vector) -> f64,
) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let anchor = region.sample(rng);
        let controls = controls_for(&anchor);
        let x = region.sample(rng);
        let y = region.sample(rng);
        let dist = (&x - &y).norm();
        if dist < 1e-12 {
            continue;
        }
        best = best.max((cost(&controls, &x) - cost(&controls, &y)).abs() / dist);
    }
    1.2 * best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn value_bound_examples() {
        let (c1, _) = estimate_value_bounds(&Matrix::identity(2, 2), &(Matrix::identity(2, 2) * 3.0), 1.1, 5).unwrap();
        assert_eq!(c1, 1.0);
        let (_, c2) = estimate_value_bounds(&Matrix::identity(2, 2), &(Matrix::identity(2, 2) * 3.0), 1.1, 0).unwrap();
        assert!((c2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_of_quadratic() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let region = BoxRegion { lower: Vector::from_element(2, -1.0), upper: Vector::from_element(2, 1.0) };
        let mut rng = stream(1, Stream::Diagnostics);
        let est = estimate_lipschitz_c3(&region, 20_000, &mut rng, |_| (), |_, x| x.dot(&(&m * x)));
        // Gradient 2Mx is largest at a corner of the box.
        let corners = [[1.0, 1.0], [1.0, -1.0]];
        let truth = corners
            .iter()
            .map(|c| (&m * Vector::from_row_slice(c) * 2.0).norm())
            .fold(0.0, f64::max);
        assert!(est >= truth / 1.2, "{est} vs {truth}");

        let small = BoxRegion { lower: Vector::from_element(2, -0.1), upper: Vector::from_element(2, 0.1) };
        let est_small = estimate_lipschitz_c3(&small, 20_000, &mut stream(2, Stream::Diagnostics), |_| (), |_, x| x.dot(&(&m * x)));
        assert!(est_small <= est * 1.05);

        let point = BoxRegion { lower: Vector::zeros(2), upper: Vector::zeros(2) };
        assert_eq!(estimate_lipschitz_c3(&point, 10, &mut rng, |_| (), |_, x| x.norm()), 0.0);
    }

    #[test]
    fn constants_assembly() {
        let inp = ConstantInputs {
            c1: 1.0,
            c2: 4.0,
            c3: 2.0,
            c3_hat: None,
            tube_level: 10.0,
            w_max_prime: 0.1,
            delta_g_hat: 1.0,
            sigma: 2.0,
            theta: 0.5,
            w_bar: 0.02,
            input_dim: 2,
            beta: 0.0,
            c_hat: None,
        };
        let k = StabilityConstants::from_inputs(&inp).unwrap();
        assert_eq!(k.gamma, 0.75);
        assert!((k.c_bar - 0.8).abs() < 1e-15);
        assert_eq!(k.c_hat, k.c_bar);
        assert!((k.a0 - 2.0 * 16.0 / 0.5).abs() < 1e-12);
        assert_eq!(k.c0, 8.0);
        assert_eq!(k.c0_proof, 2.0);
        assert!(k.tube_precondition());
        assert!(StabilityConstants::from_inputs(&ConstantInputs { c2: 0.5, ..inp }).is_err());
    }
}
