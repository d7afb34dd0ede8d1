//! Dense convex QP solver: operator splitting (ADMM) with Ruiz scaling,
//! adaptive step size, infeasibility detection and an active-set polish.

use std::fmt::Write as _;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// `min ½zᵀPz + qᵀz + constant  s.t.  l ≤ Az ≤ u`. Equalities use `l = u`,
/// one-sided rows use infinite bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub p: Matrix,
    pub q: Vector,
    pub a: Matrix,
    pub l: Vector,
    pub u: Vector,
    pub constant: f64,
}

impl QpProblem {
    pub fn new(p: Matrix, q: Vector, a: Matrix, l: Vector, u: Vector) -> Result<Self> {
        let n = q.len();
        let check = |context: &'static str, expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::Dimension { context, expected, got })
            }
        };
        check("QP cost rows", n, p.nrows())?;
        check("QP cost columns", n, p.ncols())?;
        check("QP constraint columns", n, a.ncols())?;
        check("QP lower bounds", a.nrows(), l.len())?;
        check("QP upper bounds", a.nrows(), u.len())?;
        if !crate::linalg::is_symmetric(&p, 1e-10 * p.amax().max(1.0)) {
            return Err(Error::Config("QP cost matrix is not symmetric".into()));
        }
        if l.iter().zip(u.iter()).any(|(lo, hi)| lo > hi || lo.is_nan() || hi.is_nan()) {
            return Err(Error::Config("QP bounds violate l ≤ u".into()));
        }
        Ok(Self {
            p,
            q,
            a,
            l,
            u,
            constant: 0.0,
        })
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn objective(&self, z: &Vector) -> f64 {
        0.5 * z.dot(&(&self.p * z)) + self.q.dot(z) + self.constant
    }

    /// KKT residuals of a primal/dual pair. `y > 0` marks an active upper
    /// bound, `y < 0` an active lower bound.
    pub fn residuals(&self, z: &Vector, y: &Vector) -> KktResiduals {
        let az = &self.a * z;
        let mut primal: f64 = 0.0;
        let mut complementarity: f64 = 0.0;
        for i in 0..self.rows() {
            primal = primal.max(self.l[i] - az[i]).max(az[i] - self.u[i]);
            let slack = if y[i] > 0.0 {
                self.u[i] - az[i]
            } else if y[i] < 0.0 {
                az[i] - self.l[i]
            } else {
                0.0
            };
            let c = if slack.is_finite() { y[i].abs() * slack.abs() } else { y[i].abs() };
            complementarity = complementarity.max(c);
        }
        let dual = crate::linalg::inf_norm(&(&self.p * z + &self.q + self.a.tr_mul(y)));
        KktResiduals {
            primal,
            dual,
            complementarity,
        }
    }

    /// Plain-text dump for failure triage.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# deep-mpc qp v1");
        let _ = writeln!(s, "n {} k {}", self.dim(), self.rows());
        let _ = writeln!(s, "constant {}", self.constant);
        let mut block = |name: &str, m: &Matrix| {
            let _ = writeln!(s, "{name}");
            for row in m.row_iter() {
                let vals: Vec<String> = row.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "{}", vals.join(" "));
            }
        };
        block("P", &self.p);
        block("q", &Matrix::from_row_slice(1, self.dim(), self.q.as_slice()));
        block("A", &self.a);
        block("l", &Matrix::from_row_slice(1, self.rows(), self.l.as_slice()));
        block("u", &Matrix::from_row_slice(1, self.rows(), self.u.as_slice()));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |msg: &str| Error::Parse(format!("QP text: {msg}"));
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split_whitespace().collect();
        let (n, k) = match header.as_slice() {
            ["n", n, "k", k] => (
                n.parse::<usize>().map_err(|_| bad("bad n"))?,
                k.parse::<usize>().map_err(|_| bad("bad k"))?,
            ),
            _ => return Err(bad("expected `n <n> k <k>`")),
        };
        let constant = lines
            .next()
            .and_then(|l| l.strip_prefix("constant"))
            .ok_or_else(|| bad("missing constant"))?
            .trim()
            .parse::<f64>()
            .map_err(|_| bad("bad constant"))?;
        let mut read = |name: &str, rows: usize, cols: usize| -> Result<Matrix> {
            if lines.next() != Some(name) {
                return Err(bad(&format!("expected block `{name}`")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = if cols == 0 { "" } else { lines.next().ok_or_else(|| bad("truncated block"))? };
                for tok in line.split_whitespace() {
                    data.push(tok.parse::<f64>().map_err(|_| bad(&format!("bad number `{tok}`")))?);
                }
            }
            if data.len() != rows * cols {
                return Err(bad(&format!("block `{name}` has {} entries, expected {}", data.len(), rows * cols)));
            }
            Ok(Matrix::from_row_slice(rows, cols, &data))
        };
        let p = read("P", n, n)?;
        let q = read("q", 1, n)?;
        let a = read("A", k, n)?;
        let l = read("l", 1, k)?;
        let u = read("u", 1, k)?;
        let row = |m: Matrix| Vector::from_iterator(m.len(), m.iter().copied());
        Ok(Self::new(p, row(q), a, row(l), row(u))?.with_constant(constant))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.complementarity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSolution {
    pub z: Vector,
    /// Constraint multipliers (sign convention of [`QpProblem::residuals`]).
    pub y: Vector,
    pub objective: f64,
    pub residuals: KktResiduals,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl OcpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpSettings {
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation parameter in (0, 2).
    pub alpha: f64,
    /// ADMM stopping tolerance before polishing.
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Required KKT residual for an `Optimal` status.
    pub tol: f64,
    pub eps_prim_inf: f64,
    pub max_iter: usize,
    pub check_interval: usize,
    pub adaptive_rho_interval: usize,
    pub scaling_iterations: usize,
    pub polish: bool,
    pub max_polish_rounds: usize,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            tol: 1e-8,
            eps_prim_inf: 1e-7,
            max_iter: 40_000,
            check_interval: 10,
            adaptive_rho_interval: 50,
            scaling_iterations: 10,
            polish: true,
            max_polish_rounds: 60,
        }
    }
}

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const RHO_EQ_SCALE: f64 = 1e3;

struct Scaling {
    d: Vector,
    e: Vector,
    c: f64,
}

fn ruiz(prob: &QpProblem, iterations: usize) -> (Scaling, Matrix, Vector, Matrix, Vector, Vector) {
    let n = prob.dim();
    let k = prob.rows();
    let mut p = prob.p.clone();
    let mut q = prob.q.clone();
    let mut a = prob.a.clone();
    let mut d = Vector::from_element(n, 1.0);
    let mut e = Vector::from_element(k, 1.0);
    let norm_scale = |v: f64| if v < 1e-4 { 1.0 } else { 1.0 / v.sqrt() };
    for _ in 0..iterations {
        let dd = Vector::from_fn(n, |j, _| {
            let pc = p.column(j).amax();
            let ac = if k > 0 { a.column(j).amax() } else { 0.0 };
            norm_scale(pc.max(ac))
        });
        let de = Vector::from_fn(k, |i, _| norm_scale(a.row(i).amax()));
        for j in 0..n {
            for i in 0..n {
                p[(i, j)] *= dd[i] * dd[j];
            }
            q[j] *= dd[j];
        }
        for i in 0..k {
            for j in 0..n {
                a[(i, j)] *= de[i] * dd[j];
            }
        }
        d.component_mul_assign(&dd);
        e.component_mul_assign(&de);
    }
    let mean_col = if n > 0 { p.column_iter().map(|c| c.amax()).sum::<f64>() / n as f64 } else { 1.0 };
    let gamma = mean_col.max(q.amax());
    let c = if gamma < 1e-4 { 1.0 } else { (1.0 / gamma).min(1e4) };
    p *= c;
    q *= c;
    let l = prob.l.component_mul(&e);
    let u = prob.u.component_mul(&e);
    (Scaling { d, e, c }, p, q, a, l, u)
}

fn row_rho(l: f64, u: f64, rho: f64) -> f64 {
    if l == f64::NEG_INFINITY && u == f64::INFINITY {
        RHO_MIN
    } else if (u - l).abs() < 1e-12 {
        (RHO_EQ_SCALE * rho).min(RHO_MAX)
    } else {
        rho
    }
}

fn factor(p: &Matrix, a: &Matrix, rho: &Vector, sigma: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let mut k = p.clone();
    for i in 0..k.nrows() {
        k[(i, i)] += sigma;
    }
    let scaled = Matrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * rho[i]);
    k += a.tr_mul(&scaled);
    Cholesky::new(k).ok_or_else(|| Error::Config("QP cost matrix is not positive semidefinite".into()))
}

fn project_box(v: &Vector, l: &Vector, u: &Vector) -> Vector {
    Vector::from_fn(v.len(), |i, _| v[i].max(l[i]).min(u[i]))
}

/// Polished candidate from an active-set guess, corrected until KKT sign and
/// feasibility conditions hold.
fn polish(prob: &QpProblem, z: &Vector, y: &Vector, settings: &QpSettings) -> Option<(Vector, Vector)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Act {
        Free,
        Lower,
        Upper,
        Equal,
    }
    let k = prob.rows();
    let n = prob.dim();
    let az = &prob.a * z;
    let mut act: Vec<Act> = (0..k)
        .map(|i| {
            if (prob.u[i] - prob.l[i]).abs() < 1e-12 {
                Act::Equal
            } else if az[i] - prob.l[i] < -y[i] {
                Act::Lower
            } else if prob.u[i] - az[i] < y[i] {
                Act::Upper
            } else {
                Act::Free
            }
        })
        .collect();
    let tol = settings.tol * 0.1;
    let mut best: Option<(f64, Vector, Vector)> = None;
    for _ in 0..settings.max_polish_rounds {
        let active: Vec<usize> = (0..k).filter(|&i| act[i] != Act::Free).collect();
        let s = active.len();
        let mut kkt = Matrix::zeros(n + s, n + s);
        kkt.view_mut((0, 0), (n, n)).copy_from(&prob.p);
        let mut rhs = Vector::zeros(n + s);
        rhs.rows_mut(0, n).copy_from(&(-&prob.q));
        for (r, &i) in active.iter().enumerate() {
            let row = prob.a.row(i);
            kkt.view_mut((n + r, 0), (1, n)).copy_from(&row);
            kkt.view_mut((0, n + r), (n, 1)).copy_from(&row.transpose());
            rhs[n + r] = match act[i] {
                Act::Lower => prob.l[i],
                _ => prob.u[i],
            };
        }
        let sol = solve_kkt(&kkt, &rhs, n)?;
        let x = sol.rows(0, n).into_owned();
        let mut yy = Vector::zeros(k);
        for (r, &i) in active.iter().enumerate() {
            yy[i] = sol[n + r];
        }
        let res = prob.residuals(&x, &yy).max();
        if best.as_ref().is_none_or(|(b, _, _)| res < *b) {
            best = Some((res, x.clone(), yy.clone()));
        }
        let ax = &prob.a * &x;
        let mut changed = false;
        for i in 0..k {
            if act[i] == Act::Free {
                if ax[i] < prob.l[i] - tol {
                    act[i] = Act::Lower;
                    changed = true;
                } else if ax[i] > prob.u[i] + tol {
                    act[i] = Act::Upper;
                    changed = true;
                }
            }
        }
        if !changed {
            for i in 0..k {
                let wrong = match act[i] {
                    Act::Lower => yy[i] > tol,
                    Act::Upper => yy[i] < -tol,
                    _ => false,
                };
                if wrong {
                    act[i] = Act::Free;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    best.map(|(_, x, y)| (x, y))
}

fn solve_kkt(kkt: &Matrix, rhs: &Vector, n: usize) -> Option<Vector> {
    if let Some(sol) = kkt.clone().lu().solve(rhs) {
        if sol.iter().all(|v| v.is_finite()) && (kkt * &sol - rhs).amax() <= 1e-9 * (1.0 + rhs.amax()) {
            return Some(sol);
        }
    }
    // Dependent active rows: regularize and refine against the exact system.
    let delta = 1e-10;
    let mut reg = kkt.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += if i < n { delta } else { -delta };
    }
    let lu = reg.lu();
    let mut sol = lu.solve(rhs)?;
    for _ in 0..20 {
        let r = rhs - kkt * &sol;
        sol += lu.solve(&r)?;
    }
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

pub fn solve_qp(prob: &QpProblem, settings: &QpSettings) -> Result<OcpSolution> {
    solve_qp_warm(prob, settings, None)
}

/// As [`solve_qp`], optionally warm-started from a primal/dual pair.
pub fn solve_qp_warm(prob: &QpProblem, settings: &QpSettings, warm: Option<(&Vector, &Vector)>) -> Result<OcpSolution> {
    let n = prob.dim();
    let k = prob.rows();
    if k == 0 {
        let chol = Cholesky::new(prob.p.clone())
            .ok_or_else(|| Error::Config("unconstrained QP needs a positive definite cost".into()))?;
        let z = chol.solve(&(-&prob.q));
        let y = Vector::zeros(0);
        let residuals = prob.residuals(&z, &y);
        return Ok(OcpSolution {
            objective: prob.objective(&z),
            status: if residuals.max() <= settings.tol { SolveStatus::Optimal } else { SolveStatus::MaxIter },
            z,
            y,
            residuals,
            iterations: 0,
        });
    }

    let (sc, p, q, a, l, u) = ruiz(prob, settings.scaling_iterations);
    let mut rho_bar = settings.rho;
    let mut rho = Vector::from_fn(k, |i, _| row_rho(l[i], u[i], rho_bar));
    let mut chol = factor(&p, &a, &rho, settings.sigma)?;

    let (mut x, mut y) = match warm {
        Some((zw, yw)) => (zw.component_div(&sc.d), yw.component_div(&sc.e) * sc.c),
        None => (Vector::zeros(n), Vector::zeros(k)),
    };
    let mut z = project_box(&(&a * &x), &l, &u);
    let mut eps_abs = settings.eps_abs;
    let mut eps_rel = settings.eps_rel;
    let mut best: Option<(f64, Vector, Vector)> = None;
    let mut iter = 0;

    let unscale = |x: &Vector, y: &Vector| (x.component_mul(&sc.d), y.component_mul(&sc.e) / sc.c);

    while iter < settings.max_iter {
        iter += 1;
        let rhs = &x * settings.sigma - &q + a.tr_mul(&(rho.component_mul(&z) - &y));
        let x_tilde = chol.solve(&rhs);
        let z_tilde = &a * &x_tilde;
        let x_next = &x_tilde * settings.alpha + &x * (1.0 - settings.alpha);
        let z_relaxed = &z_tilde * settings.alpha + &z * (1.0 - settings.alpha);
        let z_next = project_box(&(&z_relaxed + y.component_div(&rho)), &l, &u);
        let y_next = &y + rho.component_mul(&(&z_relaxed - &z_next));
        let delta_y = &y_next - &y;
        x = x_next;
        z = z_next;
        y = y_next;

        if iter % settings.check_interval != 0 && iter != settings.max_iter {
            continue;
        }

        if primal_infeasible(prob, &delta_y.component_mul(&sc.e), settings.eps_prim_inf) {
            let (zu, yu) = unscale(&x, &y);
            return Ok(OcpSolution {
                objective: prob.objective(&zu),
                residuals: prob.residuals(&zu, &yu),
                z: zu,
                y: yu,
                status: SolveStatus::Infeasible,
                iterations: iter,
            });
        }

        // Residuals in the original problem data.
        let (xu, yu) = unscale(&x, &y);
        let zu = z.component_div(&sc.e);
        let axu = &prob.a * &xu;
        let pxu = &prob.p * &xu;
        let atyu = prob.a.tr_mul(&yu);
        let r_prim = crate::linalg::inf_norm(&(&axu - &zu));
        let r_dual = crate::linalg::inf_norm(&(&pxu + &prob.q + &atyu));
        let prim_scale = crate::linalg::inf_norm(&axu).max(crate::linalg::inf_norm(&zu));
        let dual_scale = crate::linalg::inf_norm(&pxu)
            .max(crate::linalg::inf_norm(&atyu))
            .max(crate::linalg::inf_norm(&prob.q));

        let plain = prob.residuals(&xu, &yu).max();
        if best.as_ref().is_none_or(|(b, _, _)| plain < *b) {
            best = Some((plain, xu.clone(), yu.clone()));
        }

        if r_prim <= eps_abs + eps_rel * prim_scale && r_dual <= eps_abs + eps_rel * dual_scale {
            if settings.polish {
                if let Some((zp, yp)) = polish(prob, &xu, &yu, settings) {
                    let res = prob.residuals(&zp, &yp);
                    if res.max() <= settings.tol {
                        return Ok(OcpSolution {
                            objective: prob.objective(&zp),
                            z: zp,
                            y: yp,
                            residuals: res,
                            status: SolveStatus::Optimal,
                            iterations: iter,
                        });
                    }
                    if best.as_ref().is_none_or(|(b, _, _)| res.max() < *b) {
                        best = Some((res.max(), zp, yp));
                    }
                }
            }
            if plain <= settings.tol {
                break;
            }
            eps_abs = (eps_abs * 0.1).max(1e-14);
            eps_rel = (eps_rel * 0.1).max(1e-14);
        }

        if settings.adaptive_rho_interval > 0 && iter % settings.adaptive_rho_interval == 0 {
            let num = r_prim / prim_scale.max(1e-30);
            let den = r_dual / dual_scale.max(1e-30);
            if num > 0.0 && den > 0.0 {
                let candidate = (rho_bar * (num / den).sqrt()).clamp(RHO_MIN, RHO_MAX);
                if candidate > 5.0 * rho_bar || candidate < 0.2 * rho_bar {
                    rho_bar = candidate;
                    rho = Vector::from_fn(k, |i, _| row_rho(l[i], u[i], rho_bar));
                    chol = factor(&p, &a, &rho, settings.sigma)?;
                }
            }
        }
    }

    let (_, zb, yb) = best.expect("at least one residual check runs");
    let residuals = prob.residuals(&zb, &yb);
    let status = if residuals.max() <= settings.tol {
        SolveStatus::Optimal
    } else {
        log::warn!("QP stopped after {iter} iterations with KKT residual {:.3e}", residuals.max());
        SolveStatus::MaxIter
    };
    Ok(OcpSolution {
        objective: prob.objective(&zb),
        z: zb,
        y: yb,
        residuals,
        status,
        iterations: iter,
    })
}

/// Farkas-type certificate built from the change in the dual iterate.
fn primal_infeasible(prob: &QpProblem, delta_y: &Vector, eps: f64) -> bool {
    let dy = Vector::from_fn(delta_y.len(), |i, _| {
        let mut v = delta_y[i];
        if prob.u[i] == f64::INFINITY {
            v = v.min(0.0);
        }
        if prob.l[i] == f64::NEG_INFINITY {
            v = v.max(0.0);
        }
        v
    });
    let norm = crate::linalg::inf_norm(&dy);
    if norm < 1e-30 {
        return false;
    }
    let support: f64 = (0..dy.len())
        .map(|i| {
            if dy[i] > 0.0 {
                prob.u[i] * dy[i]
            } else if dy[i] < 0.0 {
                prob.l[i] * dy[i]
            } else {
                0.0
            }
        })
        .sum();
    crate::linalg::inf_norm(&prob.a.tr_mul(&dy)) <= eps * norm && support < -eps * norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use rand::Rng;

    fn box_qp(p: Matrix, q: Vector, lo: f64, hi: f64) -> QpProblem {
        let n = q.len();
        QpProblem::new(
            p,
            q,
            Matrix::identity(n, n),
            Vector::from_element(n, lo),
            Vector::from_element(n, hi),
        )
        .unwrap()
    }

    /// Projected gradient with step 1/λ_max as an independent oracle.
    fn projected_gradient(p: &Matrix, q: &Vector, lo: f64, hi: f64, iters: usize) -> Vector {
        let (_, lmax) = crate::linalg::sym_eig_range(p);
        let step = 1.0 / lmax;
        let mut z = Vector::zeros(q.len());
        for _ in 0..iters {
            z = (&z - (p * &z + q) * step).map(|v| v.clamp(lo, hi));
        }
        z
    }

    fn random_spd(n: usize, rng: &mut impl Rng) -> Matrix {
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        m.transpose() * m + Matrix::identity(n, n) * 0.5
    }

    #[test]
    fn unconstrained_quadratic() {
        let b = Vector::from_row_slice(&[1.5, -2.0, 0.25]);
        let prob = QpProblem::new(Matrix::identity(3, 3), -&b, Matrix::zeros(0, 3), Vector::zeros(0), Vector::zeros(0)).unwrap();
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.z - b).amax() < 1e-12);
    }

    #[test]
    fn clamped_scalar() {
        // (z - 2)² = z² - 4z + 4 → P = 2, q = -4.
        let prob = box_qp(Matrix::from_element(1, 1, 2.0), Vector::from_element(1, -4.0), -1.0, 1.0).with_constant(4.0);
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.z[0] - 1.0).abs() < 1e-10);
        assert!((sol.objective - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_box_qps_match_projected_gradient() {
        let mut rng = stream(11, Stream::Fuzz);
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let p = random_spd(n, &mut rng);
            let q = Vector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            let prob = box_qp(p.clone(), q.clone(), -0.5, 0.7);
            let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
            assert!(sol.is_optimal(), "{:?}", sol.residuals);
            let oracle = projected_gradient(&p, &q, -0.5, 0.7, 20_000);
            let fo = prob.objective(&oracle);
            assert!((sol.objective - fo).abs() <= 1e-6 * fo.abs().max(1.0));
        }
    }

    #[test]
    fn equality_and_inequality_rows() {
        // min ‖z‖² s.t. z1 + z2 = 1, z1 ≤ 0.2.
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let prob = QpProblem::new(
            Matrix::identity(2, 2) * 2.0,
            Vector::zeros(2),
            a,
            Vector::from_row_slice(&[1.0, f64::NEG_INFINITY]),
            Vector::from_row_slice(&[1.0, 0.2]),
        )
        .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.z[0] - 0.2).abs() < 1e-10 && (sol.z[1] - 0.8).abs() < 1e-10);
        assert!(sol.residuals.max() <= 1e-8);
    }

    #[test]
    fn detects_infeasibility() {
        // z ≥ 1 and z ≤ -1 through two rows.
        let prob = QpProblem::new(
            Matrix::identity(1, 1),
            Vector::zeros(1),
            Matrix::from_row_slice(2, 1, &[1.0, 1.0]),
            Vector::from_row_slice(&[1.0, f64::NEG_INFINITY]),
            Vector::from_row_slice(&[f64::INFINITY, -1.0]),
        )
        .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn deterministic_and_permutation_invariant() {
        let mut rng = stream(12, Stream::Fuzz);
        let n = 6;
        let p = random_spd(n, &mut rng);
        let q = Vector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let a = Matrix::from_fn(5, n, |_, _| rng.random_range(-1.0..1.0));
        let l = Vector::from_element(5, -0.3);
        let u = Vector::from_element(5, 0.4);
        let prob = QpProblem::new(p.clone(), q.clone(), a.clone(), l.clone(), u.clone()).unwrap();
        let s1 = solve_qp(&prob, &QpSettings::default()).unwrap();
        let s2 = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(s1, s2);
        let perm = [3, 0, 4, 1, 2];
        let ap = Matrix::from_fn(5, n, |i, j| a[(perm[i], j)]);
        let permuted = QpProblem::new(p, q, ap, l, u).unwrap();
        let s3 = solve_qp(&permuted, &QpSettings::default()).unwrap();
        assert!((s1.objective - s3.objective).abs() <= 1e-9 * s1.objective.abs().max(1.0));
    }

    #[test]
    fn optimal_solutions_are_primal_feasible() {
        let mut rng = stream(13, Stream::Fuzz);
        for _ in 0..30 {
            let n = rng.random_range(2..=10);
            let k = rng.random_range(1..=15);
            let p = random_spd(n, &mut rng);
            let q = Vector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let a = Matrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
            let prob = QpProblem::new(p, q, a, Vector::from_element(k, -1.0), Vector::from_element(k, 0.5)).unwrap();
            let s = solve_qp(&prob, &QpSettings::default()).unwrap();
            assert!(s.is_optimal());
            let az = &prob.a * &s.z;
            for i in 0..k {
                assert!(az[i] >= -1.0 - 1e-8 && az[i] <= 0.5 + 1e-8);
            }
        }
    }

    #[test]
    fn text_format_round_trips() {
        let prob = QpProblem::new(
            Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            Vector::from_row_slice(&[0.1, -0.3]),
            Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
            Vector::from_element(1, f64::NEG_INFINITY),
            Vector::from_element(1, 0.25),
        )
        .unwrap()
        .with_constant(1.5);
        assert_eq!(QpProblem::from_text(&prob.to_text()).unwrap(), prob);
    }
}
