use serde::{Deserialize, Serialize};

use crate::linalg::{Matrix, Vector};

/// Everything the checkers need about one closed-loop step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: Vector,
    pub x_ref: Vector,
    pub u_a: Vector,
    pub u_m: Vector,
    /// Ground-truth uncertainty (simulator side only).
    pub h: Vector,
    /// `ũ_t = u^a_t + h(x_t)`.
    pub u_tilde: Vector,
    /// Features `φ_j(x_t)`; empty for the tube-only controller.
    pub phi: Vector,
    /// `‖g(x_t) ũ_t‖`.
    pub disturbance_norm: f64,
    /// `V_m(x_t)`.
    pub v_m: f64,
    /// `c_s(x_t, u*_{t|t})`.
    pub stage_cost: f64,
    /// `V̂_m(x_{t+1|t})`, known once the next step is solved.
    pub v_hat_next: Option<f64>,
    /// Output weights before and after this step's update.
    pub k: Matrix,
    pub k_next: Matrix,
    pub generation: usize,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryTrace {
    pub records: Vec<StepRecord>,
}

impl TrajectoryTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn u_tilde(&self) -> Vec<Vector> {
        self.records.iter().map(|r| r.u_tilde.clone()).collect()
    }
}
