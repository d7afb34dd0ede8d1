use crate::linalg::{Matrix, Vector};

/// Central-difference Jacobian, one column per coordinate of `z`.
pub fn finite_diff_jacobian(f: impl Fn(&Vector) -> Vector, z: &Vector, eps: f64) -> Matrix {
    assert!(eps > 0.0, "finite-difference step must be positive");
    let mut cols = Vec::with_capacity(z.len());
    let mut probe = z.clone();
    for j in 0..z.len() {
        probe[j] = z[j] + eps;
        let plus = f(&probe);
        probe[j] = z[j] - eps;
        let minus = f(&probe);
        probe[j] = z[j];
        cols.push((plus - minus) / (2.0 * eps));
    }
    let rows = cols.first().map_or(0, Vector::len);
    Matrix::from_fn(rows, z.len(), |r, c| cols[c][r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::wing_rock_model;

    #[test]
    fn linear_map_recovered() {
        let m = Matrix::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 3.0, 7.0, 0.25]);
        let j = finite_diff_jacobian(|z| &m * z, &Vector::from_row_slice(&[0.3, -1.2]), 1e-4);
        assert!((j - m).amax() < 1e-8);
    }

    #[test]
    fn benchmark_dynamics_jacobian() {
        let model = wing_rock_model();
        let (a, b) = model.linear_parts().unwrap();
        let x = Vector::from_row_slice(&[0.1, -0.2]);
        let u = Vector::from_element(1, 0.3);
        let ja = finite_diff_jacobian(|z| model.step_nominal(z, &u), &x, 1e-6);
        let jb = finite_diff_jacobian(|v| model.step_nominal(&x, v), &u, 1e-6);
        assert!((ja - a).amax() < 1e-9);
        assert!((jb - b).amax() < 1e-9);
    }

    #[test]
    fn quadratic_derivative_at_zero() {
        let eps = 1e-3;
        let j = finite_diff_jacobian(|z| Vector::from_element(1, 3.0 * z[0] * z[0] + z[0].powi(3)), &Vector::zeros(1), eps);
        assert!(j[(0, 0)].abs() <= 2.0 * eps * eps);
    }
}
