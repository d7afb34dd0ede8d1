//! Small dense linear-algebra helpers shared by the solver and the controller.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Induced 2-norm (largest singular value).
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Smallest singular value; zero for an empty matrix.
pub fn min_singular_value(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().min()
}

/// Extreme eigenvalues of a symmetric matrix as `(min, max)`.
pub fn sym_eig_range(m: &Matrix) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    (eig.min(), eig.max())
}

pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `‖v‖²_M = vᵀ M v`.
pub fn weighted_sq(v: &Vector, m: &Matrix) -> f64 {
    v.dot(&(m * v))
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol
}

pub fn is_positive_definite(m: &Matrix) -> bool {
    m.is_square() && !m.is_empty() && sym_eig_range(m).0 > 0.0
}

/// Parses a row-major nested list into a matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Option<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_wing_rock_input_matrix() {
        let b = Matrix::from_column_slice(2, 1, &[0.0, 0.05]);
        assert!((spectral_norm(&b) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rows_round_trip() {
        let m = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(matrix_from_rows(&matrix_to_rows(&m)).unwrap(), m);
        assert!(matrix_from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_none());
    }
}
