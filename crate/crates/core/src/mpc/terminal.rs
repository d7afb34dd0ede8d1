//! Terminal cost `c_f(x) = xᵀQ_f x`, terminal set `{c_f ≤ α}` and local
//! feedback `u′ = K_f x`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, Matrix, Vector};
use crate::plant::ControlAffineModel;

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalIngredients {
    pub q_f: Matrix,
    pub alpha: f64,
    /// `u′ = gain · x`.
    pub gain: Matrix,
}

/// Stabilizing solution of the discrete algebraic Riccati equation via the
/// structure-preserving doubling algorithm.
pub fn solve_dare(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Config("input weight R is singular".into()))?;
    let mut ak = a.clone();
    let mut gk = b * r_inv * b.transpose();
    let mut hk = q.clone();
    let eye = Matrix::identity(n, n);
    for _ in 0..200 {
        let w = (&eye + &gk * &hk)
            .try_inverse()
            .ok_or_else(|| Error::Unstabilizable("doubling iteration hit a singular matrix".into()))?;
        let a_next = &ak * &w * &ak;
        let g_next = &gk + &ak * &w * &gk * ak.transpose();
        let h_next = &hk + ak.transpose() * &hk * &w * &ak;
        let change = (&h_next - &hk).amax();
        ak = a_next;
        gk = g_next;
        hk = h_next;
        if !hk.iter().all(|v| v.is_finite()) {
            break;
        }
        if change <= 1e-14 * hk.amax().max(1.0) {
            let p = (&hk + hk.transpose()) * 0.5;
            return Ok(p);
        }
    }
    Err(Error::Unstabilizable("Riccati doubling iteration did not converge".into()))
}

/// LQR gain `K` with `u = −K x` for a Riccati solution `P`.
pub fn lqr_gain(a: &Matrix, b: &Matrix, r: &Matrix, p: &Matrix) -> Result<Matrix> {
    let lhs = r + b.transpose() * p * b;
    let rhs = b.transpose() * p * a;
    lhs.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or(Error::Singular(0.0))
}

/// Options of the terminal construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalOptions {
    /// `Q_f` solves the Riccati equation for `(1 + κ)Q`, giving the terminal
    /// decrease a strict margin of `κ‖x‖²_Q`.
    pub inflation: f64,
    /// Boundary samples used to certify nonlinear models.
    pub samples: usize,
    /// Radius of the stage inputs `i ≥ 1` that `u′` must respect.
    pub input_bound: f64,
}

pub fn terminal_ingredients<R: Rng + ?Sized>(
    model: &ControlAffineModel,
    q: &Matrix,
    r: &Matrix,
    opts: TerminalOptions,
    rng: &mut R,
) -> Result<TerminalIngredients> {
    if !is_positive_definite(q) || !is_positive_definite(r) {
        return Err(Error::Config("Q and R must be positive definite".into()));
    }
    let x0 = Vector::zeros(model.state_dim());
    let u0 = Vector::zeros(model.input_dim());
    let (a, b) = model.linearize(&x0, &u0);
    let q_inflated = q * (1.0 + opts.inflation);
    let q_f = solve_dare(&a, &b, &q_inflated, r)?;
    let gain = -lqr_gain(&a, &b, r, &q_f)?;
    let q_f_inv = q_f
        .clone()
        .try_inverse()
        .ok_or(Error::Singular(0.0))?;
    // Largest level on which every feedback channel stays within the bound.
    let mut alpha = f64::INFINITY;
    for i in 0..gain.nrows() {
        let k = gain.row(i).transpose();
        let spread = k.dot(&(&q_f_inv * &k));
        if spread > 0.0 {
            alpha = alpha.min(opts.input_bound.powi(2) / spread);
        }
    }
    if !alpha.is_finite() {
        alpha = 1.0;
    }
    let mut ingredients = TerminalIngredients { q_f, alpha, gain };
    if !model.is_linear() {
        for _ in 0..60 {
            let report = verify_terminal_clf(model, q, r, &ingredients, opts.input_bound, opts.samples, rng);
            if report.pass {
                break;
            }
            ingredients.alpha *= 0.5;
        }
    }
    Ok(ingredients)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfReport {
    pub pass: bool,
    /// `max c_f(f̄(x, u′)) − c_f(x) + c_s(x, u′)`; nonpositive when the
    /// decrease condition holds.
    pub worst_margin: f64,
    pub samples: usize,
}

/// Samples the level set (boundary and interior) and checks the local CLF
/// decrease under the saturated terminal feedback.
pub fn verify_terminal_clf<R: Rng + ?Sized>(
    model: &ControlAffineModel,
    q: &Matrix,
    r: &Matrix,
    ingredients: &TerminalIngredients,
    input_bound: f64,
    samples: usize,
    rng: &mut R,
) -> ClfReport {
    let d = model.state_dim();
    let chol = ingredients
        .q_f
        .clone()
        .cholesky()
        .expect("terminal weight is positive definite");
    let l_t = chol.l().transpose();
    let mut worst = f64::NEG_INFINITY;
    for s in 0..samples.max(1) {
        let x = if s == 0 {
            Vector::zeros(d)
        } else {
            let dir = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let dir = dir.normalize();
            // Half on the boundary, half in the interior.
            let radius = if s % 2 == 0 { 1.0 } else { rng.random_range(0.0f64..1.0).sqrt() };
            let w = dir * (radius * ingredients.alpha.sqrt());
            l_t.clone().solve_upper_triangular(&w).unwrap_or(w)
        };
        let margin = clf_margin(model, q, r, ingredients, input_bound, &x);
        worst = worst.max(margin);
    }
    let tol = 1e-12 * ingredients.alpha.max(1.0);
    ClfReport {
        pass: worst <= tol,
        worst_margin: worst,
        samples: samples.max(1),
    }
}

fn clf_margin(model: &ControlAffineModel, q: &Matrix, r: &Matrix, ing: &TerminalIngredients, input_bound: f64, x: &Vector) -> f64 {
    let u = (&ing.gain * x).map(|v| v.clamp(-input_bound, input_bound));
    let next = model.step_nominal(x, &u);
    let cf = |z: &Vector| z.dot(&(&ing.q_f * z));
    cf(&next) - cf(x) + x.dot(&(q * x)) + u.dot(&(r * &u))
}
