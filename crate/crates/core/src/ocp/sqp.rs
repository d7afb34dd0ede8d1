//! Sequential quadratic programming for nonlinear control-affine models:
//! linearize along the current rollout, condense, solve, line-search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::plant::ControlAffineModel;

use super::condense::{condense_ltv, AffineStage, OcpSpec};
use super::qp::{solve_qp_warm, OcpSolution, QpSettings, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqpSettings {
    pub max_iter: usize,
    /// Step-norm (∞) threshold for convergence.
    pub tol: f64,
    /// Weight of the constraint violation in the line-search merit.
    pub merit_penalty: f64,
    pub qp: QpSettings,
}

impl Default for SqpSettings {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-9,
            merit_penalty: 1e4,
            qp: QpSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SqpOutcome {
    pub solution: OcpSolution,
    /// `‖x_N‖` of the rollout after each accepted step, starting with the
    /// initial guess.
    pub terminal_norms: Vec<f64>,
}

fn rollout(model: &ControlAffineModel, x0: &Vector, us: &[Vector]) -> Vec<Vector> {
    let mut xs = Vec::with_capacity(us.len() + 1);
    xs.push(x0.clone());
    for u in us {
        let next = model.step_nominal(xs.last().expect("nonempty"), u);
        xs.push(next);
    }
    xs
}

fn split(u: &Vector, m: usize) -> Vec<Vector> {
    (0..u.len() / m).map(|i| u.rows(i * m, m).into_owned()).collect()
}

fn violation(spec: &OcpSpec, xs: &[Vector]) -> f64 {
    let n = spec.horizon;
    let mut v = 0.0;
    if let Some((lo, hi)) = &spec.state_bounds {
        let last = if spec.terminal_equality { n.saturating_sub(1) } else { n };
        for x in &xs[1..=last] {
            for j in 0..x.len() {
                v += (lo[j] - x[j]).max(0.0) + (x[j] - hi[j]).max(0.0);
            }
        }
    }
    if spec.terminal_equality {
        v += xs[n].iter().map(|c| c.abs()).sum::<f64>();
    }
    v
}

fn clamp_inputs(spec: &OcpSpec, u: &Vector, m: usize) -> Vector {
    Vector::from_fn(u.len(), |k, _| {
        let (lo, hi) = &spec.input_bounds[k / m];
        u[k].clamp(lo[k % m], hi[k % m])
    })
}

pub fn sqp_solve(model: &ControlAffineModel, x0: &Vector, spec: &OcpSpec, u0: &Vector, cfg: &SqpSettings) -> Result<SqpOutcome> {
    let m = model.input_dim();
    if u0.len() != spec.horizon * m {
        return Err(Error::Dimension {
            context: "SQP initial guess",
            expected: spec.horizon * m,
            got: u0.len(),
        });
    }
    let merit = |u: &Vector| {
        let us = split(u, m);
        let xs = rollout(model, x0, &us);
        spec.rollout_cost(&xs, &us) + cfg.merit_penalty * violation(spec, &xs)
    };

    let mut u = clamp_inputs(spec, u0, m);
    let mut y: Option<Vector> = None;
    let mut last = None;
    let mut status = SolveStatus::MaxIter;
    let mut accepted = 0;
    let mut terminal_norms = vec![rollout(model, x0, &split(&u, m))[spec.horizon].norm()];

    for _ in 0..=cfg.max_iter {
        let us = split(&u, m);
        let xs = rollout(model, x0, &us);
        let stages: Vec<AffineStage> = us
            .iter()
            .zip(&xs)
            .map(|(ui, xi)| {
                let (a, b) = model.linearize(xi, ui);
                let c = model.step_nominal(xi, ui) - &a * xi - &b * ui;
                if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::Linearization(format!("non-finite Jacobian at x = {xi:?}")));
                }
                Ok(AffineStage { a, b, c })
            })
            .collect::<Result<_>>()?;
        let cond = condense_ltv(&stages, x0, spec)?;
        let sol = solve_qp_warm(&cond.qp, &cfg.qp, y.as_ref().map(|yy| (&u, yy)))?;
        if sol.status == SolveStatus::Infeasible {
            if accepted == 0 {
                return Err(Error::Infeasible("SQP subproblem has no feasible point".into()));
            }
            log::warn!("SQP subproblem infeasible after {accepted} steps; returning last iterate");
            break;
        }
        let step = &sol.z - &u;
        let residuals = cond.qp.residuals(&u, &sol.y);
        last = Some(residuals);
        y = Some(sol.y.clone());
        if crate::linalg::inf_norm(&step) <= cfg.tol {
            status = SolveStatus::Optimal;
            last = Some(cond.qp.residuals(&sol.z, &sol.y));
            u = sol.z;
            break;
        }
        if accepted == cfg.max_iter {
            break;
        }
        let base = merit(&u);
        let mut t = 1.0;
        while t > 1e-6 && merit(&(&u + &step * t)) > base {
            t *= 0.5;
        }
        u += &step * t;
        accepted += 1;
        terminal_norms.push(rollout(model, x0, &split(&u, m))[spec.horizon].norm());
    }

    let us = split(&u, m);
    let xs = rollout(model, x0, &us);
    Ok(SqpOutcome {
        solution: OcpSolution {
            objective: spec.rollout_cost(&xs, &us),
            y: y.unwrap_or_else(|| Vector::zeros(0)),
            residuals: last.unwrap_or_default(),
            z: u,
            status,
            iterations: accepted,
        },
        terminal_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::ocp::condense::condense_linear_ocp;
    use crate::ocp::qp::solve_qp;
    use crate::plant::wing_rock_model;
    use std::sync::Arc;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn linear_model_converges_in_one_step() {
        let model = wing_rock_model();
        let (a, b) = model.linear_parts().unwrap();
        let x0 = Vector::from_row_slice(&[0.1, 0.2]);
        let spec = OcpSpec::regulation(10, Matrix::identity(2, 2), scalar(1.0), Matrix::identity(2, 2) * 10.0, Vector::from_element(1, -0.5), Vector::from_element(1, 0.5));
        let qp = solve_qp(&condense_linear_ocp(a, b, &x0, &spec).unwrap().qp, &QpSettings::default()).unwrap();
        let out = sqp_solve(&model, &x0, &spec, &Vector::zeros(10), &SqpSettings::default()).unwrap();
        assert_eq!(out.solution.status, SolveStatus::Optimal);
        assert_eq!(out.solution.iterations, 1);
        assert!((&out.solution.z - &qp.z).amax() < 1e-8);

        let warm = sqp_solve(&model, &x0, &spec, &qp.z, &SqpSettings::default()).unwrap();
        assert_eq!(warm.solution.iterations, 0);
    }

    #[test]
    fn nonlinear_toy_matches_grid_search() {
        let model = ControlAffineModel::nonlinear(
            1,
            1,
            Arc::new(|x: &Vector| Vector::from_element(1, x[0] + 0.1 * x[0] * x[0])),
            Arc::new(|_: &Vector| Matrix::from_element(1, 1, 1.0)),
            1.0,
            1.5,
            0.0,
        )
        .unwrap();
        let x0 = Vector::from_element(1, 1.0);
        let spec = OcpSpec::regulation(2, scalar(1.0), scalar(0.5), scalar(10.0), Vector::from_element(1, -1.0), Vector::from_element(1, 1.0));
        let out = sqp_solve(&model, &x0, &spec, &Vector::zeros(2), &SqpSettings::default()).unwrap();
        assert_eq!(out.solution.status, SolveStatus::Optimal);
        for w in out.terminal_norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "{:?}", out.terminal_norms);
        }

        let cost = |u0: f64, u1: f64| {
            let us = [Vector::from_element(1, u0), Vector::from_element(1, u1)];
            spec.rollout_cost(&rollout(&model, &x0, &us), &us)
        };
        let mut best = f64::INFINITY;
        let grid = 2001;
        for i in 0..grid {
            for j in 0..grid {
                let u0 = -1.0 + 2.0 * i as f64 / (grid - 1) as f64;
                let u1 = -1.0 + 2.0 * j as f64 / (grid - 1) as f64;
                best = best.min(cost(u0, u1));
            }
        }
        assert!(out.solution.objective <= best + 1e-9);
        assert!(best - out.solution.objective < 1e-5);
    }
}
