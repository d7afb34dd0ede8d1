//! Condensing of finite-horizon linear(-affine) OCPs into control-only QPs.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::qp::QpProblem;

/// Stage data of a quadratic tracking OCP over horizon `N`:
/// `Σ_{i<N} ‖x_i − x^r_i‖²_Q + ‖u_i − u^r_i‖²_R + ‖x_N − x^r_N‖²_{Q_f}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpSpec {
    pub horizon: usize,
    pub q: Matrix,
    pub r: Matrix,
    pub q_f: Matrix,
    /// `N + 1` state references.
    pub x_ref: Vec<Vector>,
    /// `N` input references.
    pub u_ref: Vec<Vector>,
    /// Per-stage input box `(lower, upper)`, `N` entries.
    pub input_bounds: Vec<(Vector, Vector)>,
    /// Box applied to `x_1 … x_N` (or `x_{N-1}` with a terminal equality).
    pub state_bounds: Option<(Vector, Vector)>,
    /// Enforce `x_N = 0`.
    pub terminal_equality: bool,
}

impl OcpSpec {
    /// Zero references, same input box at every stage, no state rows.
    pub fn regulation(horizon: usize, q: Matrix, r: Matrix, q_f: Matrix, u_lower: Vector, u_upper: Vector) -> Self {
        let d = q.nrows();
        let m = r.nrows();
        Self {
            horizon,
            q,
            r,
            q_f,
            x_ref: vec![Vector::zeros(d); horizon + 1],
            u_ref: vec![Vector::zeros(m); horizon],
            input_bounds: vec![(u_lower, u_upper); horizon],
            state_bounds: None,
            terminal_equality: false,
        }
    }

    fn validate(&self, d: usize, m: usize) -> Result<()> {
        let n = self.horizon;
        let dims = [
            ("stage state weight", d, self.q.nrows()),
            ("terminal weight", d, self.q_f.nrows()),
            ("input weight", m, self.r.nrows()),
            ("state references", n + 1, self.x_ref.len()),
            ("input references", n, self.u_ref.len()),
            ("stage input bounds", n, self.input_bounds.len()),
        ];
        for (context, expected, got) in dims {
            if expected != got {
                return Err(Error::Dimension { context, expected, got });
            }
        }
        Ok(())
    }

    /// Direct evaluation of the cost on a state/input trajectory.
    pub fn rollout_cost(&self, xs: &[Vector], us: &[Vector]) -> f64 {
        let n = self.horizon;
        let mut cost = 0.0;
        for i in 0..n {
            let ex = &xs[i] - &self.x_ref[i];
            let eu = &us[i] - &self.u_ref[i];
            cost += ex.dot(&(&self.q * &ex)) + eu.dot(&(&self.r * &eu));
        }
        let ef = &xs[n] - &self.x_ref[n];
        cost + ef.dot(&(&self.q_f * &ef))
    }
}

/// Affine stage model `x_{i+1} = A_i x_i + B_i u_i + c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineStage {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Vector,
}

/// Condensed QP in the stacked inputs `U = (u_0, …, u_{N-1})` together with
/// the affine state map `x_{i} = x̄_i + Γ_i U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condensed {
    pub qp: QpProblem,
    /// `x̄_0 … x̄_N` (response to `U = 0`).
    pub free_response: Vec<Vector>,
    /// Rows `d·(i-1) .. d·i` map `U` to `x_i − x̄_i` for `i = 1 … N`.
    pub gamma: Matrix,
}

impl Condensed {
    pub fn states(&self, u: &Vector) -> Vec<Vector> {
        let d = self.free_response[0].len();
        let mut xs = vec![self.free_response[0].clone()];
        let gu = &self.gamma * u;
        for i in 1..self.free_response.len() {
            xs.push(&self.free_response[i] + gu.rows(d * (i - 1), d));
        }
        xs
    }
}

pub fn condense_linear_ocp(a: &Matrix, b: &Matrix, x0: &Vector, spec: &OcpSpec) -> Result<Condensed> {
    let stage = AffineStage {
        a: a.clone(),
        b: b.clone(),
        c: Vector::zeros(a.nrows()),
    };
    condense_ltv(&vec![stage; spec.horizon], x0, spec)
}

pub fn condense_ltv(stages: &[AffineStage], x0: &Vector, spec: &OcpSpec) -> Result<Condensed> {
    let n = spec.horizon;
    let d = x0.len();
    let m = spec.r.nrows();
    spec.validate(d, m)?;
    if stages.len() != n {
        return Err(Error::Dimension {
            context: "stage models",
            expected: n,
            got: stages.len(),
        });
    }
    let nu = n * m;

    let mut free = vec![x0.clone()];
    let mut gamma = Matrix::zeros(n * d, nu);
    for i in 0..n {
        let st = &stages[i];
        free.push(&st.a * &free[i] + &st.c);
        // Γ_{i+1} = A_i Γ_i + [0 … B_i … 0].
        if i > 0 {
            let prev = gamma.rows(d * (i - 1), d).into_owned();
            gamma.rows_mut(d * i, d).copy_from(&(&st.a * prev));
        }
        gamma.view_mut((d * i, m * i), (d, m)).copy_from(&st.b);
    }

    let mut qbar = Matrix::zeros(n * d, n * d);
    let mut e = Vector::zeros(n * d);
    for i in 1..=n {
        let w = if i == n { &spec.q_f } else { &spec.q };
        qbar.view_mut((d * (i - 1), d * (i - 1)), (d, d)).copy_from(w);
        e.rows_mut(d * (i - 1), d).copy_from(&(&free[i] - &spec.x_ref[i]));
    }
    let mut rbar = Matrix::zeros(nu, nu);
    let mut ur = Vector::zeros(nu);
    for i in 0..n {
        rbar.view_mut((m * i, m * i), (m, m)).copy_from(&spec.r);
        ur.rows_mut(m * i, m).copy_from(&spec.u_ref[i]);
    }
    let gtq = gamma.tr_mul(&qbar);
    let mut p = (&gtq * &gamma + &rbar) * 2.0;
    p = (&p + p.transpose()) * 0.5;
    let q = (&gtq * &e - &rbar * &ur) * 2.0;
    let e0 = x0 - &spec.x_ref[0];
    let constant = e.dot(&(&qbar * &e)) + ur.dot(&(&rbar * &ur)) + e0.dot(&(&spec.q * &e0));

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, (bl, bu)) in spec.input_bounds.iter().enumerate() {
        for j in 0..m {
            let mut row = vec![0.0; nu];
            row[m * i + j] = 1.0;
            rows.push(row);
            lo.push(bl[j]);
            hi.push(bu[j]);
        }
    }
    if let Some((sl, su)) = &spec.state_bounds {
        let last = if spec.terminal_equality { n.saturating_sub(1) } else { n };
        for i in 1..=last {
            for j in 0..d {
                if sl[j].is_infinite() && su[j].is_infinite() {
                    continue;
                }
                rows.push(gamma.row(d * (i - 1) + j).iter().copied().collect());
                lo.push(sl[j] - free[i][j]);
                hi.push(su[j] - free[i][j]);
            }
        }
    }
    if spec.terminal_equality && n > 0 {
        for j in 0..d {
            rows.push(gamma.row(d * (n - 1) + j).iter().copied().collect());
            lo.push(-free[n][j]);
            hi.push(-free[n][j]);
        }
    }
    let a = Matrix::from_fn(rows.len(), nu, |r, c| rows[r][c]);
    let qp = QpProblem::new(p, q, a, Vector::from_vec(lo), Vector::from_vec(hi))?.with_constant(constant);
    Ok(Condensed {
        qp,
        free_response: free,
        gamma,
    })
}
