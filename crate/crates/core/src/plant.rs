//! Control-affine plant `x⁺ = f(x) + g(x)(u + h(x))`, its nominal part, and the
//! wing-rock benchmark uncertainty.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, min_singular_value, spectral_norm, Matrix, Vector};
use crate::rng::SimRng;

/// Threshold below which a singular value of `g(x)` counts as zero.
pub const RANK_TOL: f64 = 1e-9;

pub type DriftFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type InputMapFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

#[derive(Clone)]
pub enum Dynamics {
    /// `f(x) = A x`, `g(x) = B`.
    Linear { a: Matrix, b: Matrix },
    Nonlinear { f: DriftFn, g: InputMapFn },
}

/// Known part of the dynamics plus the bound metadata used by the controller
/// and by the stability diagnostics.
#[derive(Clone)]
pub struct ControlAffineModel {
    state_dim: usize,
    input_dim: usize,
    dynamics: Dynamics,
    /// Upper bound on `‖g(x)‖`.
    pub delta_g: f64,
    pub lipschitz_f: f64,
    pub lipschitz_g: f64,
}

impl fmt::Debug for ControlAffineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlAffineModel")
            .field("state_dim", &self.state_dim)
            .field("input_dim", &self.input_dim)
            .field("linear", &self.is_linear())
            .field("delta_g", &self.delta_g)
            .field("lipschitz_f", &self.lipschitz_f)
            .field("lipschitz_g", &self.lipschitz_g)
            .finish()
    }
}

impl ControlAffineModel {
    /// Linear model. `δ_g = ‖B‖`, `L_f = ‖A‖`, `L_g = 0`.
    pub fn linear(a: Matrix, b: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Config("state matrix A must be square".into()));
        }
        if b.nrows() != a.nrows() {
            return Err(Error::Dimension {
                context: "input matrix rows",
                expected: a.nrows(),
                got: b.nrows(),
            });
        }
        if b.ncols() == 0 || b.ncols() > b.nrows() {
            return Err(Error::Config("input matrix must have 1..=d columns".into()));
        }
        let smin = min_singular_value(&b);
        if smin <= RANK_TOL {
            return Err(Error::Singular(smin));
        }
        Ok(Self {
            state_dim: a.nrows(),
            input_dim: b.ncols(),
            delta_g: spectral_norm(&b),
            lipschitz_f: spectral_norm(&a),
            lipschitz_g: 0.0,
            dynamics: Dynamics::Linear { a, b },
        })
    }

    pub fn nonlinear(
        state_dim: usize,
        input_dim: usize,
        f: DriftFn,
        g: InputMapFn,
        delta_g: f64,
        lipschitz_f: f64,
        lipschitz_g: f64,
    ) -> Result<Self> {
        if delta_g <= 0.0 || lipschitz_f < 0.0 || lipschitz_g < 0.0 {
            return Err(Error::Config("model bounds must be positive".into()));
        }
        Ok(Self {
            state_dim,
            input_dim,
            dynamics: Dynamics::Nonlinear { f, g },
            delta_g,
            lipschitz_f,
            lipschitz_g,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.dynamics, Dynamics::Linear { .. })
    }

    /// `(A, B)` for linear models.
    pub fn linear_parts(&self) -> Option<(&Matrix, &Matrix)> {
        match &self.dynamics {
            Dynamics::Linear { a, b } => Some((a, b)),
            Dynamics::Nonlinear { .. } => None,
        }
    }

    pub fn drift(&self, x: &Vector) -> Vector {
        match &self.dynamics {
            Dynamics::Linear { a, .. } => a * x,
            Dynamics::Nonlinear { f, .. } => f(x),
        }
    }

    pub fn input_map(&self, x: &Vector) -> Matrix {
        match &self.dynamics {
            Dynamics::Linear { b, .. } => b.clone(),
            Dynamics::Nonlinear { g, .. } => g(x),
        }
    }

    /// Nominal successor `f̄(x, u_m) = f(x) + g(x) u_m`.
    pub fn step_nominal(&self, x: &Vector, u_m: &Vector) -> Vector {
        match &self.dynamics {
            Dynamics::Linear { a, b } => a * x + b * u_m,
            Dynamics::Nonlinear { f, g } => f(x) + g(x) * u_m,
        }
    }

    /// Jacobians `(∂f̄/∂x, ∂f̄/∂u)` at `(x, u)`. Exact for linear models,
    /// central differences otherwise.
    pub fn linearize(&self, x: &Vector, u: &Vector) -> (Matrix, Matrix) {
        match &self.dynamics {
            Dynamics::Linear { a, b } => (a.clone(), b.clone()),
            Dynamics::Nonlinear { g, .. } => {
                let jac = crate::ocp::finite_diff_jacobian(|z| self.step_nominal(z, u), x, 1e-6);
                (jac, g(x))
            }
        }
    }

    /// Checks the rank and norm-bound invariants of `g` on states sampled
    /// from `X`.
    pub fn validate_input_map(&self, sets: &ConstraintSets, samples: usize, rng: &mut SimRng) -> Result<()> {
        for _ in 0..samples {
            let x = sets.sample_state(rng);
            let g = self.input_map(&x);
            let smin = min_singular_value(&g);
            if smin <= RANK_TOL {
                return Err(Error::Singular(smin));
            }
            let gn = spectral_norm(&g);
            if gn > self.delta_g * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "‖g(x)‖ = {gn} exceeds delta_g = {} at x = {:?}",
                    self.delta_g,
                    x.as_slice()
                )));
            }
        }
        Ok(())
    }
}

/// Admissible state box `X`, input ∞-ball radius `u_max`, and disturbance
/// 2-ball radius `w_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSets {
    pub state_lower: Vector,
    pub state_upper: Vector,
    pub u_max: f64,
    pub w_max: f64,
}

impl ConstraintSets {
    pub fn new(state_lower: Vector, state_upper: Vector, u_max: f64, w_max: f64) -> Result<Self> {
        if state_lower.len() != state_upper.len() {
            return Err(Error::Dimension {
                context: "state box bounds",
                expected: state_lower.len(),
                got: state_upper.len(),
            });
        }
        let finite = state_lower.iter().chain(state_upper.iter()).all(|v| v.is_finite());
        if !finite || state_lower.iter().zip(state_upper.iter()).any(|(l, u)| l >= u) {
            return Err(Error::Config("state box must be finite with lower < upper".into()));
        }
        if !(u_max > 0.0) || !(w_max >= 0.0) {
            return Err(Error::Config("u_max must be positive and w_max nonnegative".into()));
        }
        Ok(Self {
            state_lower,
            state_upper,
            u_max,
            w_max,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_lower.len()
    }

    pub fn contains_state(&self, x: &Vector) -> bool {
        x.iter()
            .zip(self.state_lower.iter().zip(self.state_upper.iter()))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn input_admissible(&self, u: &Vector) -> bool {
        inf_norm(u) <= self.u_max
    }

    /// Half-widths of the state box per coordinate.
    pub fn half_widths(&self) -> Vector {
        (&self.state_upper - &self.state_lower) * 0.5
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        Vector::from_iterator(
            self.state_dim(),
            self.state_lower
                .iter()
                .zip(self.state_upper.iter())
                .map(|(l, u)| rng.random_range(*l..=*u)),
        )
    }
}

/// Inclusive window `[start, end]` on which the uncertainty gain is `gain`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GainWindow {
    pub start: usize,
    pub end: usize,
    pub gain: f64,
}

/// Piecewise-constant gain `v_t`; zero outside every window. With a repeat
/// period the windows are evaluated at `t mod period`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainSchedule {
    pub windows: Vec<GainWindow>,
    pub repeat_period: Option<usize>,
}

impl GainSchedule {
    pub fn constant(gain: f64) -> Self {
        Self {
            windows: vec![GainWindow {
                start: 0,
                end: usize::MAX,
                gain,
            }],
            repeat_period: None,
        }
    }

    pub fn gain_at(&self, t: usize) -> f64 {
        let local = match self.repeat_period {
            Some(p) if p > 0 => t % p,
            _ => t,
        };
        self.windows
            .iter()
            .find(|w| w.start <= local && local <= w.end)
            .map_or(0.0, |w| w.gain)
    }

    /// Every gain value the schedule can produce, including the implicit zero.
    pub fn gain_values(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend(self.windows.iter().map(|w| w.gain));
        out
    }

    /// Instants `t ∈ 1..horizon` where `v_t ≠ v_{t-1}`.
    pub fn switch_instants(&self, horizon: usize) -> Vec<usize> {
        (1..horizon)
            .filter(|&t| self.gain_at(t) != self.gain_at(t - 1))
            .collect()
    }
}

/// Normal distribution with standard deviation `std`, truncated to
/// `[-half_width, half_width]` by rejection.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedNormal {
    std: f64,
    half_width: f64,
}

impl TruncatedNormal {
    pub fn new(std: f64, half_width: f64) -> Result<Self> {
        if !(std >= 0.0) || !(half_width >= 0.0) {
            return Err(Error::Config("truncated normal needs std, half_width >= 0".into()));
        }
        Ok(Self { std, half_width })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.half_width == 0.0 || self.std == 0.0 {
            return 0.0;
        }
        let normal = Normal::new(0.0, self.std).expect("std checked in constructor");
        loop {
            let w: f64 = normal.sample(rng);
            if w.abs() <= self.half_width {
                return w;
            }
        }
    }
}

/// Matched uncertainty `h(x_t)` as seen by the simulator (never by the
/// controller).
pub trait MatchedUncertainty: Send + Sync {
    fn input_dim(&self) -> usize;

    fn evaluate(&self, x: &Vector, t: usize, rng: &mut SimRng) -> Result<Vector>;
}

/// No uncertainty at all.
#[derive(Debug, Clone, Copy)]
pub struct NoUncertainty {
    pub input_dim: usize,
}

impl MatchedUncertainty for NoUncertainty {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn evaluate(&self, _x: &Vector, _t: usize, _rng: &mut SimRng) -> Result<Vector> {
        Ok(Vector::zeros(self.input_dim))
    }
}

pub const WING_ROCK_V0: [f64; 6] = [0.8, 0.2314, 0.6918, -0.6245, 0.0095, 0.0214];
pub const WING_ROCK_NOISE_HALF_WIDTH: f64 = 0.1523;

/// Wing-rock benchmark uncertainty `h(x) = v_t V_0ᵀ sat(ς′(x)) + ω_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySpec {
    pub basis_weights: Vec<f64>,
    pub schedule: GainSchedule,
    pub noise_half_width: f64,
    pub noise_std: f64,
    pub saturation: f64,
}

impl UncertaintySpec {
    /// Benchmark constants: `V_0`, gain 4 on `[50ℓ, 50ℓ+49]` for even `ℓ`,
    /// `ω̄ = 0.1523`, threshold `ω̄/5`, noise std `ω̄/2`.
    pub fn wing_rock() -> Self {
        Self {
            basis_weights: WING_ROCK_V0.to_vec(),
            schedule: GainSchedule {
                windows: vec![GainWindow {
                    start: 0,
                    end: 49,
                    gain: 4.0,
                }],
                repeat_period: Some(100),
            },
            noise_half_width: WING_ROCK_NOISE_HALF_WIDTH,
            noise_std: WING_ROCK_NOISE_HALF_WIDTH / 2.0,
            saturation: WING_ROCK_NOISE_HALF_WIDTH / 5.0,
        }
    }

    pub fn noise(&self) -> Result<TruncatedNormal> {
        TruncatedNormal::new(self.noise_std, self.noise_half_width)
    }

    /// Noise-free part `v_t V_0ᵀ ς(x)`.
    pub fn structured(&self, x: &Vector, t: usize) -> Result<f64> {
        let basis = eval_basis(x, self.saturation)?;
        let v_t = self.schedule.gain_at(t);
        Ok(v_t * basis.iter().zip(&self.basis_weights).map(|(b, w)| b * w).sum::<f64>())
    }
}

impl MatchedUncertainty for UncertaintySpec {
    fn input_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &Vector, t: usize, rng: &mut SimRng) -> Result<Vector> {
        eval_uncertainty(self, x, t, rng)
    }
}

/// `sat(ς′(x))` with `ς′(x) = [1, δ, p, |δ|p, |p|p, δ³]` and every entry
/// clamped to `±threshold`.
pub fn eval_basis(x: &Vector, threshold: f64) -> Result<[f64; 6]> {
    if x.len() != 2 {
        return Err(Error::Dimension {
            context: "wing-rock basis state",
            expected: 2,
            got: x.len(),
        });
    }
    let (roll, rate) = (x[0], x[1]);
    let raw = [1.0, roll, rate, roll.abs() * rate, rate.abs() * rate, roll.powi(3)];
    Ok(raw.map(|v| v.clamp(-threshold, threshold)))
}

/// One draw of `h(x_t)`.
pub fn eval_uncertainty(spec: &UncertaintySpec, x: &Vector, t: usize, rng: &mut SimRng) -> Result<Vector> {
    let structured = spec.structured(x, t)?;
    let omega = spec.noise()?.sample(rng);
    Ok(Vector::from_element(1, structured + omega))
}

/// Result of one true plant step.
#[derive(Debug, Clone)]
pub struct TrueStep {
    pub next: Vector,
    /// The uncertainty realised at this step.
    pub h: Vector,
}

/// `x_{t+1} = f(x_t) + g(x_t)(u_t + h(x_t))`. Rejects inputs outside `U`.
pub fn step_true(
    model: &ControlAffineModel,
    sets: &ConstraintSets,
    uncertainty: &dyn MatchedUncertainty,
    x: &Vector,
    u: &Vector,
    t: usize,
    rng: &mut SimRng,
) -> Result<TrueStep> {
    if !sets.input_admissible(u) {
        return Err(Error::InputOutOfBounds {
            norm: inf_norm(u),
            u_max: sets.u_max,
        });
    }
    let h = uncertainty.evaluate(x, t, rng)?;
    if h.len() != model.input_dim() {
        return Err(Error::Dimension {
            context: "uncertainty output",
            expected: model.input_dim(),
            got: h.len(),
        });
    }
    let next = model.drift(x) + model.input_map(x) * (u + &h);
    Ok(TrueStep { next, h })
}

/// Left pseudo-inverse `(GᵀG)⁻¹Gᵀ` of a full-column-rank matrix.
pub fn pseudo_inverse(g: &Matrix) -> Result<Matrix> {
    let smin = min_singular_value(g);
    if g.ncols() > g.nrows() || smin <= RANK_TOL {
        return Err(Error::Singular(smin));
    }
    let gram = g.transpose() * g;
    let chol = gram.cholesky().ok_or(Error::Singular(smin))?;
    Ok(chol.solve(&g.transpose()))
}

/// Sampled worst case of `‖g(x)h(x)‖` over `X`, every gain of the schedule
/// and `|ω| = ω̄`, inflated by `safety_factor`. Samples are the box corners
/// followed by uniform draws from a fixed stream, so the estimate is
/// nondecreasing in `sample_count`.
pub fn estimate_disturbance_bound(
    model: &ControlAffineModel,
    sets: &ConstraintSets,
    spec: &UncertaintySpec,
    sample_count: usize,
    safety_factor: f64,
    seed: u64,
) -> Result<f64> {
    if sample_count < 1000 {
        return Err(Error::Config("disturbance bound needs at least 1000 samples".into()));
    }
    if model.input_dim() != 1 {
        return Err(Error::Dimension {
            context: "benchmark uncertainty input dimension",
            expected: 1,
            got: model.input_dim(),
        });
    }
    let d = sets.state_dim();
    let mut rng = crate::rng::stream(seed, crate::rng::Stream::Sampling);
    let corners = (0..(1usize << d)).map(|mask| {
        Vector::from_fn(d, |i, _| {
            if mask >> i & 1 == 1 {
                sets.state_upper[i]
            } else {
                sets.state_lower[i]
            }
        })
    });
    let gains = spec.schedule.gain_values();
    let mut worst = 0.0_f64;
    let mut visit = |x: Vector| -> Result<()> {
        let basis = eval_basis(&x, spec.saturation)?;
        let s: f64 = basis.iter().zip(&spec.basis_weights).map(|(b, w)| b * w).sum();
        let g_norm = spectral_norm(&model.input_map(&x));
        for v in &gains {
            worst = worst.max(g_norm * ((v * s).abs() + spec.noise_half_width));
        }
        Ok(())
    };
    let n_corners = 1usize << d;
    for c in corners.take(sample_count) {
        visit(c)?;
    }
    for _ in n_corners.min(sample_count)..sample_count {
        visit(sets.sample_state(&mut rng))?;
    }
    Ok(worst * safety_factor)
}

/// Wing-rock roll dynamics discretised at 0.05 s.
pub fn wing_rock_model() -> ControlAffineModel {
    let a = Matrix::from_row_slice(2, 2, &[1.0, 0.05, 0.0, 1.0]);
    let b = Matrix::from_column_slice(2, 1, &[0.0, 0.05]);
    ControlAffineModel::linear(a, b).expect("benchmark matrices are valid")
}

/// `X = [-π/6, π/6] × [-π/3, π/3]`, `U = [-π/4, π/4]`.
pub fn wing_rock_sets(w_max: f64) -> ConstraintSets {
    use std::f64::consts::PI;
    ConstraintSets::new(
        Vector::from_vec(vec![-PI / 6.0, -PI / 3.0]),
        Vector::from_vec(vec![PI / 6.0, PI / 3.0]),
        PI / 4.0,
        w_max,
    )
    .expect("benchmark sets are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use std::f64::consts::PI;

    fn zero_noise_spec() -> UncertaintySpec {
        UncertaintySpec {
            noise_half_width: 0.0,
            ..UncertaintySpec::wing_rock()
        }
    }

    #[test]
    fn basis_at_origin_saturates_constant_entry() {
        let b = eval_basis(&Vector::zeros(2), 0.1523 / 5.0).unwrap();
        assert!((b[0] - 0.03046).abs() < 1e-12);
        assert!(b[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn basis_small_state_only_clamps_first_entry() {
        let b = eval_basis(&Vector::from_vec(vec![0.01, 0.01]), 0.1523 / 5.0).unwrap();
        let expected = [0.03046, 0.01, 0.01, 0.0001, 0.0001, 1e-6];
        for (got, want) in b.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn basis_clamp_is_idempotent() {
        let thr = 0.03046;
        let x = Vector::from_vec(vec![0.4, -0.9]);
        let b = eval_basis(&x, thr).unwrap();
        let again = b.map(|v| v.clamp(-thr, thr));
        assert_eq!(b, again);
    }

    #[test]
    fn basis_rejects_wrong_dimension() {
        assert!(matches!(
            eval_basis(&Vector::zeros(3), 1.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn uncertainty_follows_gain_windows() {
        let spec = zero_noise_spec();
        let mut rng = stream(0, Stream::PlantNoise);
        let h0 = eval_uncertainty(&spec, &Vector::zeros(2), 0, &mut rng).unwrap();
        assert!((h0[0] - 4.0 * 0.8 * 0.03046).abs() < 1e-12);
        assert!((h0[0] - 0.09747).abs() < 1e-5);
        let off = eval_uncertainty(&spec, &Vector::from_vec(vec![0.3, 0.2]), 75, &mut rng).unwrap();
        assert_eq!(off[0], 0.0);
        assert_eq!(spec.schedule.gain_at(0), 4.0);
        assert_eq!(spec.schedule.gain_at(49), 4.0);
        assert_eq!(spec.schedule.gain_at(50), 0.0);
        assert_eq!(spec.schedule.gain_at(149), 4.0);
        assert_eq!(spec.schedule.switch_instants(300), vec![50, 100, 150, 200, 250]);
    }

    #[test]
    fn truncated_normal_stays_inside() {
        let tn = TruncatedNormal::new(0.1523 / 2.0, 0.1523).unwrap();
        let mut rng = stream(3, Stream::PlantNoise);
        for _ in 0..100_000 {
            assert!(tn.sample(&mut rng).abs() <= 0.1523);
        }
    }

    #[test]
    fn true_step_matches_hand_computation() {
        let model = wing_rock_model();
        let sets = wing_rock_sets(0.0);
        let none = NoUncertainty { input_dim: 1 };
        let mut rng = stream(0, Stream::PlantNoise);
        let x = Vector::from_vec(vec![PI / 30.0, PI / 12.0]);
        let step = step_true(&model, &sets, &none, &x, &Vector::zeros(1), 0, &mut rng).unwrap();
        assert!((step.next[0] - (PI / 30.0 + 0.05 * PI / 12.0)).abs() < 1e-15);
        assert!((step.next[1] - PI / 12.0).abs() < 1e-15);

        let zero = step_true(&model, &sets, &none, &Vector::zeros(2), &Vector::zeros(1), 0, &mut rng).unwrap();
        assert_eq!(zero.next, Vector::zeros(2));

        let u = Vector::from_element(1, 0.3);
        let s = step_true(&model, &sets, &none, &x, &u, 0, &mut rng).unwrap();
        assert_eq!(s.next, model.step_nominal(&x, &u));
    }

    #[test]
    fn true_step_rejects_inadmissible_input() {
        let model = wing_rock_model();
        let sets = wing_rock_sets(0.0);
        let none = NoUncertainty { input_dim: 1 };
        let mut rng = stream(0, Stream::PlantNoise);
        let err = step_true(&model, &sets, &none, &Vector::zeros(2), &Vector::from_element(1, 0.8), 0, &mut rng);
        assert!(matches!(err, Err(Error::InputOutOfBounds { .. })));
    }

    #[test]
    fn nominal_step_examples() {
        let model = wing_rock_model();
        let x = Vector::from_vec(vec![0.0, 1.0]);
        assert_eq!(model.step_nominal(&x, &Vector::zeros(1)), Vector::from_vec(vec![0.05, 1.0]));
        assert_eq!(
            model.step_nominal(&Vector::zeros(2), &Vector::from_element(1, 1.0)),
            Vector::from_vec(vec![0.0, 0.05])
        );
        assert!((model.delta_g - 0.05).abs() < 1e-15);
    }

    #[test]
    fn pseudo_inverse_examples() {
        assert_eq!(pseudo_inverse(&Matrix::identity(2, 2)).unwrap(), Matrix::identity(2, 2));
        let g = Matrix::from_column_slice(2, 1, &[0.0, 0.05]);
        let pinv = pseudo_inverse(&g).unwrap();
        assert!((pinv[(0, 0)]).abs() < 1e-15 && (pinv[(0, 1)] - 20.0).abs() < 1e-12);
        let rank_deficient = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(pseudo_inverse(&rank_deficient), Err(Error::Singular(_))));
    }

    #[test]
    fn disturbance_bound_examples() {
        let model = wing_rock_model();
        let sets = wing_rock_sets(0.0);
        let zero = UncertaintySpec {
            basis_weights: vec![0.0; 6],
            noise_half_width: 0.0,
            ..UncertaintySpec::wing_rock()
        };
        assert_eq!(estimate_disturbance_bound(&model, &sets, &zero, 1000, 1.1, 0).unwrap(), 0.0);

        let spec = UncertaintySpec::wing_rock();
        let small = estimate_disturbance_bound(&model, &sets, &spec, 1000, 1.1, 0).unwrap();
        let large = estimate_disturbance_bound(&model, &sets, &spec, 5000, 1.1, 0).unwrap();
        assert!(small > 0.0 && large >= small);

        let wider = UncertaintySpec {
            noise_half_width: 2.0 * spec.noise_half_width,
            ..spec.clone()
        };
        assert!(estimate_disturbance_bound(&model, &sets, &wider, 1000, 1.1, 0).unwrap() >= small);
        assert!(estimate_disturbance_bound(&model, &sets, &spec, 999, 1.1, 0).is_err());
    }

    #[test]
    fn benchmark_input_map_invariants_hold() {
        let model = wing_rock_model();
        let sets = wing_rock_sets(0.0);
        let mut rng = stream(1, Stream::Sampling);
        model.validate_input_map(&sets, 500, &mut rng).unwrap();
    }
}
