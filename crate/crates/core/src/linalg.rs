//! Small dense helpers: a pivot-checked Cholesky factorization and
//! symmetrization of user-supplied matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SmmError};

/// Relative pivot tolerance: a pivot below `PIVOT_TOL * max diagonal` rejects the matrix.
pub const PIVOT_TOL: f64 = 1e-10;

/// Asymmetry above this is reported before symmetrizing.
pub const ASYMMETRY_WARN: f64 = 1e-8;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    l: DMatrix<f64>,
}

impl SpdFactor {
    pub fn new(a: &DMatrix<f64>, what: &str) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SmmError::DimensionMismatch {
                what: format!("{what} (columns)"),
                expected: n,
                found: a.ncols(),
            });
        }
        let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
        let tol = PIVOT_TOL * max_diag;
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !d.is_finite() || d <= tol || max_diag <= 0.0 {
                return Err(SmmError::NotPositiveDefinite {
                    what: what.to_string(),
                    index: j,
                    pivot: d,
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(SpdFactor { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `L⁻¹ b` by forward substitution.
    pub fn forward(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// `A⁻¹ b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// `bᵀ A⁻¹ b`, computed as `‖L⁻¹ b‖²` so it is never negative.
    pub fn inv_quad(&self, b: &DVector<f64>) -> f64 {
        self.forward(b).norm_squared()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }
}

/// Returns `(X + Xᵀ)/2` together with the largest absolute asymmetry `|X_ij − X_ji|`.
pub fn symmetrize(x: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = x.nrows();
    let mut out = x.clone();
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (x[(i, j)] - x[(j, i)]).abs();
            asym = asym.max(d);
            let m = 0.5 * (x[(i, j)] + x[(j, i)]);
            out[(i, j)] = m;
            out[(j, i)] = m;
        }
    }
    (out, asym)
}

/// Ratio of the largest to smallest eigenvalue of a symmetric matrix;
/// infinite when the smallest is not strictly positive.
pub fn condition_estimate(sym: &DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return 1.0;
    }
    let eig = sym.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn vec_from(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Builds a matrix from rows, checking that every row has `ncols` entries.
pub fn mat_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    for r in rows {
        if r.len() != ncols {
            return Err(SmmError::DimensionMismatch {
                what: format!("{what} row length"),
                expected: ncols,
                found: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn mat_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let f = SpdFactor::new(&a, "a").unwrap();
        let x = f.solve(&DVector::from_vec(vec![2.0, 1.0]));
        let r = &a * &x - DVector::from_vec(vec![2.0, 1.0]);
        assert!(r.amax() < 1e-14);
        assert!((f.inv_quad(&DVector::from_vec(vec![2.0, 1.0])) - x.dot(&DVector::from_vec(vec![2.0, 1.0]))).abs() < 1e-14);
    }

    #[test]
    fn rejects_singular_and_indefinite() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            SpdFactor::new(&singular, "s"),
            Err(SmmError::NotPositiveDefinite { index: 1, .. })
        ));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(SpdFactor::new(&indefinite, "s").is_err());
        let tiny = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-11]);
        assert!(SpdFactor::new(&tiny, "s").is_err());
        let zero = DMatrix::<f64>::zeros(1, 1);
        assert!(SpdFactor::new(&zero, "s").is_err());
    }

    #[test]
    fn symmetrize_reports_asymmetry() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        let (s, asym) = symmetrize(&x);
        assert_eq!(s[(0, 1)], 0.1);
        assert_eq!(s[(1, 0)], 0.1);
        assert!((asym - 0.2).abs() < 1e-15);
    }
}
