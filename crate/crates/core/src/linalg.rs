//! Small dense helpers. Systems here are at most a handful of rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot size below which a system is reported singular.
const PIVOT_TOL: f64 = 1e-13;

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
///
/// Rows and columns are first equilibrated with `1/sqrt(|m_ii|)` (falling
/// back to the row norm on a zero diagonal), which matters for moment
/// matrices whose entries span many orders of magnitude. Exact zeros stay
/// exact through the elimination.
pub fn solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    assert_eq!(n, rhs.len());
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let diag = m[(i, i)].abs();
            let s = if diag > 0.0 { diag } else { m.row(i).amax() };
            if s > 0.0 { 1.0 / s.sqrt() } else { 1.0 }
        })
        .collect();
    let mut a = DMatrix::from_fn(n, n, |i, j| d[i] * m[(i, j)] * d[j]);
    let mut b = DVector::from_fn(n, |i, _| d[i] * rhs[i]);
    let norm = a.amax();
    if norm == 0.0 {
        return Err(Error::SingularGram);
    }

    for col in 0..n {
        let (p, pmax) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pmax <= PIVOT_TOL * norm {
            return Err(Error::SingularGram);
        }
        if p != col {
            a.swap_rows(p, col);
            b.swap_rows(p, col);
        }
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[(r, c)] -= f * a[(col, c)];
            }
            b[r] -= f * b[col];
        }
    }
    let mut y = DVector::zeros(n);
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[(r, c)] * y[c]).sum();
        y[r] = (b[r] - s) / a[(r, r)];
    }
    Ok(DVector::from_fn(n, |i, _| d[i] * y[i]))
}

/// Symmetric positive semidefinite square root `V sqrt(max(L, 0)) V^T`.
///
/// Eigenvalues below `-neg_tol` are an error; the remaining negatives are
/// clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>, neg_tol: f64) -> std::result::Result<DMatrix<f64>, f64> {
    let sym = 0.5 * (m + m.transpose());
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -neg_tol {
        return Err(min);
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// Frobenius norm.
pub fn fro(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_checkerboard_system() {
        // Gram shape for k = 2: odd entries are zero, signs alternate.
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, -3.0, 0.0, -3.0, 0.0, -3.0, 0.0, 11.0]);
        let x = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let rhs = &m * &x;
        let got = solve(&m, &rhs).unwrap();
        assert!((got - x).amax() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let rhs = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(solve(&m, &rhs), Err(Error::SingularGram));
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let rhs = DVector::from_vec(vec![3.0, 4.0]);
        let got = solve(&m, &rhs).unwrap();
        assert_eq!(got.as_slice(), &[4.0, 3.0]);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = psd_sqrt(&m, 1e-12).unwrap();
        assert!((&s * &s - &m).amax() < 1e-13);
        let bad = DMatrix::from_row_slice(1, 1, &[-1.0]);
        assert!(psd_sqrt(&bad, 1e-12).is_err());
    }
}
