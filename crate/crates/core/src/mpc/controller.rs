use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, weighted_sq, Matrix, Vector};
use crate::ocp::{condense_linear_ocp, solve_qp, sqp_solve, OcpSpec, QpSettings, SolveStatus, SqpSettings};
use crate::plant::ControlAffineModel;

use super::reference::ReferenceTrajectory;
use super::terminal::TerminalIngredients;
use super::tighten::TightenedSets;

/// Tracking MPC data: horizon, weights, terminal ingredients and tube level.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    pub horizon: usize,
    pub q: Matrix,
    pub r: Matrix,
    pub terminal: TerminalIngredients,
    /// Tube level `c ≤ α`.
    pub tube_level: f64,
    pub solver: QpSettings,
    pub sqp: SqpSettings,
}

impl MpcConfig {
    pub fn new(horizon: usize, q: Matrix, r: Matrix, terminal: TerminalIngredients, tube_level: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("MPC horizon must be positive".into()));
        }
        if !is_positive_definite(&q) || !is_positive_definite(&r) || !is_positive_definite(&terminal.q_f) {
            return Err(Error::Config("Q, R and Q_f must be positive definite".into()));
        }
        if !(tube_level > 0.0 && terminal.alpha >= tube_level) {
            return Err(Error::Config(format!(
                "need α ≥ c > 0, got α = {}, c = {tube_level}",
                terminal.alpha
            )));
        }
        Ok(Self {
            horizon,
            q,
            r,
            terminal,
            tube_level,
            solver: QpSettings::default(),
            sqp: SqpSettings::default(),
        })
    }

    /// `c_s(x, u)` relative to the reference at `t`.
    pub fn stage_cost(&self, x: &Vector, u: &Vector, reference: &ReferenceTrajectory, t: usize) -> f64 {
        let ex = x - reference.state_at(t);
        let eu = u - reference.input_at(t, u.len());
        weighted_sq(&ex, &self.q) + weighted_sq(&eu, &self.r)
    }
}

/// Governor weights and horizon (may differ from the tracking MPC).
#[derive(Debug, Clone, PartialEq)]
pub struct GovernorConfig {
    pub horizon: usize,
    pub q: Matrix,
    pub r: Matrix,
    pub solver: QpSettings,
    pub sqp: SqpSettings,
}

fn box_of(radius: f64, m: usize) -> (Vector, Vector) {
    (Vector::from_element(m, -radius), Vector::from_element(m, radius))
}

fn solve_spec(model: &ControlAffineModel, x0: &Vector, spec: &OcpSpec, qp: &QpSettings, sqp: &SqpSettings) -> Result<(Vector, f64, SolveStatus)> {
    if let Some((a, b)) = model.linear_parts() {
        let condensed = condense_linear_ocp(a, b, x0, spec)?;
        let sol = solve_qp(&condensed.qp, qp)?;
        Ok((sol.z, sol.objective, sol.status))
    } else {
        let guess = Vector::zeros(spec.horizon * model.input_dim());
        let out = sqp_solve(model, x0, spec, &guess, sqp)?;
        Ok((out.solution.z, out.solution.objective, out.solution.status))
    }
}

fn rollout(model: &ControlAffineModel, x0: &Vector, u: &Vector) -> (Vec<Vector>, Vec<Vector>) {
    let m = model.input_dim();
    let mut xs = vec![x0.clone()];
    let mut us = Vec::new();
    for i in 0..u.len() / m {
        let ui = u.rows(i * m, m).into_owned();
        xs.push(model.step_nominal(&xs[i], &ui));
        us.push(ui);
    }
    (xs, us)
}

/// Offline reference: `min Σ ‖x^r_i‖²_Q + ‖u^r_i‖²_R` with `x^r_N = 0`,
/// states in `X_r` and inputs in `U_r`.
pub fn solve_reference_governor(
    model: &ControlAffineModel,
    x0: &Vector,
    cfg: &GovernorConfig,
    tight: &TightenedSets,
) -> Result<ReferenceTrajectory> {
    let d = model.state_dim();
    let m = model.input_dim();
    if !tight.contains_state(x0) {
        return Err(Error::Infeasible(format!("initial state {:?} lies outside X_r", x0.as_slice())));
    }
    let n = cfg.horizon;
    let mut spec = OcpSpec::regulation(n, cfg.q.clone(), cfg.r.clone(), Matrix::zeros(d, d), box_of(tight.u_ref_max, m).0, box_of(tight.u_ref_max, m).1);
    spec.state_bounds = Some((tight.state_lower.clone(), tight.state_upper.clone()));
    spec.terminal_equality = true;
    let (u, _, status) = solve_spec(model, x0, &spec, &cfg.solver, &cfg.sqp)?;
    let (mut xs, us) = rollout(model, x0, &u);
    match status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible(format!(
                "no input sequence in U_r steers {:?} to the origin within {n} steps inside X_r",
                x0.as_slice()
            )))
        }
        SolveStatus::MaxIter => {
            let gap = xs[n].amax();
            if gap > 1e-6 {
                return Err(Error::Infeasible(format!("governor did not converge (‖x_N‖ = {gap:.3e})")));
            }
            log::warn!("governor stopped at the iteration limit; using best iterate");
        }
    }
    // The terminal state is zero up to solver tolerance; store it exactly.
    xs[n] = Vector::zeros(d);
    Ok(ReferenceTrajectory { states: xs, inputs: us })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSolution {
    /// First optimal move `u*_{t|t}`, clamped into the stage-0 box.
    pub u_m: Vector,
    /// `V_m(x_t)`.
    pub value: f64,
    /// Whole optimal sequence.
    pub inputs: Vec<Vector>,
    pub status: SolveStatus,
}

/// Stage-0 admissible box `{u : u + u_a ∈ U}`.
pub fn stage0_box(u_max: f64, u_a: &Vector) -> (Vector, Vector) {
    (u_a.map(|a| -u_max - a), u_a.map(|a| u_max - a))
}

fn tracking_spec(model: &ControlAffineModel, u_a: &Vector, reference: &ReferenceTrajectory, t: usize, cfg: &MpcConfig, tight: &TightenedSets) -> OcpSpec {
    let m = model.input_dim();
    let n = cfg.horizon;
    let mut bounds = vec![box_of(tight.u_prime, m); n];
    bounds[0] = stage0_box(tight.u_max, u_a);
    OcpSpec {
        horizon: n,
        q: cfg.q.clone(),
        r: cfg.r.clone(),
        q_f: cfg.terminal.q_f.clone(),
        x_ref: (0..=n).map(|i| reference.state_at(t + i)).collect(),
        u_ref: (0..n).map(|i| reference.input_at(t + i, m)).collect(),
        input_bounds: bounds,
        state_bounds: None,
        terminal_equality: false,
    }
}

/// Online tracking problem at time `t`; the first move is shifted by the
/// adaptive input so that `u^a + u^m ∈ U`.
pub fn solve_tracking_mpc(
    model: &ControlAffineModel,
    x_t: &Vector,
    u_a: &Vector,
    reference: &ReferenceTrajectory,
    t: usize,
    cfg: &MpcConfig,
    tight: &TightenedSets,
) -> Result<TrackingSolution> {
    let m = model.input_dim();
    let spec = tracking_spec(model, u_a, reference, t, cfg, tight);
    let (u, value, status) = solve_spec(model, x_t, &spec, &cfg.solver, &cfg.sqp)?;
    match status {
        SolveStatus::Optimal => {}
        SolveStatus::MaxIter => log::warn!("tracking MPC at t = {t} hit the iteration limit; applying best iterate"),
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible(format!("tracking MPC infeasible at t = {t}")));
        }
    }
    let (lo, hi) = &spec.input_bounds[0];
    let inputs: Vec<Vector> = (0..cfg.horizon).map(|i| u.rows(i * m, m).into_owned()).collect();
    let u_m = Vector::from_fn(m, |j, _| inputs[0][j].clamp(lo[j], hi[j]));
    Ok(TrackingSolution {
        u_m,
        value,
        inputs,
        status,
    })
}

/// `V̂_m(x_{t|t-1})`: the tracking problem at `t` started from the nominal
/// prediction instead of the measured state.
pub fn solve_intermediate(
    model: &ControlAffineModel,
    x_pred: &Vector,
    u_a_next: &Vector,
    reference: &ReferenceTrajectory,
    t: usize,
    cfg: &MpcConfig,
    tight: &TightenedSets,
) -> Result<f64> {
    Ok(solve_tracking_mpc(model, x_pred, u_a_next, reference, t, cfg, tight)?.value)
}

/// Cost of the tracking problem at `t` from `x` under a fixed input sequence.
pub fn tracking_cost(model: &ControlAffineModel, x: &Vector, inputs: &[Vector], reference: &ReferenceTrajectory, t: usize, cfg: &MpcConfig) -> f64 {
    let mut state = x.clone();
    let mut cost = 0.0;
    for (i, u) in inputs.iter().enumerate() {
        cost += cfg.stage_cost(&state, u, reference, t + i);
        state = model.step_nominal(&state, u);
    }
    let ef = state - reference.state_at(t + inputs.len());
    cost + weighted_sq(&ef, &cfg.terminal.q_f)
}
