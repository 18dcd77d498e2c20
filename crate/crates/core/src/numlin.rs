//! Small dense matrices and a cyclic Jacobi eigensolver.
//!
//! Problem sizes here are tiny (a handful of rows), so everything is plain
//! row-major `Vec<f64>` storage with no blocking.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal mass threshold, relative to the Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Default relative tolerance for grouping eigenvalues with the smallest one.
pub const DEFAULT_EIGENSPACE_TOL: f64 = 1e-8;
/// Allowed negativity of `λ_min` of a Gram matrix, relative to `1 + ‖S‖_F`.
pub const PSD_CLAMP_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        DenseMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `A·Aᵀ`, symmetrized as `(M + Mᵀ)/2`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..self.rows {
                g[(i, j)] = dot(self.row(i), self.row(j));
            }
        }
        g.symmetrize();
        g
    }

    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self[(i, j)] * self[(i, j)];
                }
            }
        }
        s.sqrt()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalues in ascending order with matching unit eigenvectors stored as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized first. Sweeps stop once the off-diagonal
/// Frobenius mass drops to `JACOBI_TOL·‖S‖_F` or after
/// `JACOBI_MAX_SWEEPS` sweeps.
pub fn sym_eig(s: &DenseMatrix) -> Result<EigenDecomposition> {
    if s.rows != s.cols {
        return Err(Error::DimensionMismatch {
            expected: s.rows,
            got: s.cols,
        });
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("matrix passed to the eigensolver".into()));
    }
    let n = s.rows;
    let mut a = s.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let threshold = JACOBI_TOL * a.frobenius_norm();

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Rotation angle from the stable tangent formula.
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !a.is_finite() {
        return Err(Error::Eigen("Jacobi iteration produced non-finite values".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Smallest eigenvalue of a Gram matrix, clamped at zero when it is negative
/// only by rounding.
pub fn clamped_min_eigenvalue(gram: &DenseMatrix, eig: &EigenDecomposition) -> Result<f64> {
    let lambda = eig.values.first().copied().unwrap_or(0.0);
    if lambda >= 0.0 {
        return Ok(lambda);
    }
    let slack = PSD_CLAMP_TOL * (1.0 + gram.frobenius_norm());
    if -lambda <= slack {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!(
            "Gram matrix has eigenvalue {lambda:e}, beyond the rounding allowance {slack:e}"
        )))
    }
}

/// `σ_min(A) = sqrt(λ_min(A·Aᵀ))` for a `p×q` matrix with `p ≤ q`.
pub fn smallest_singular_value_of(a: &DenseMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    let g = a.gram();
    let eig = sym_eig(&g)?;
    Ok(clamped_min_eigenvalue(&g, &eig)?.sqrt())
}

/// Orthonormal basis of the eigenspace for the smallest eigenvalue, grouping
/// every eigenvalue `λ` with `λ − λ_min ≤ rel_tol·(1 + ‖S‖_F)`.
///
/// Returns the basis (`p×m`, columns) together with the decomposition it was
/// taken from.
pub fn min_eigenspace(s: &DenseMatrix, rel_tol: f64) -> Result<(DenseMatrix, EigenDecomposition)> {
    if !(rel_tol > 0.0) {
        return Err(Error::Precondition(format!("eigenspace tolerance must be positive, got {rel_tol}")));
    }
    let eig = sym_eig(s)?;
    let basis = eigenspace_basis(s, &eig, rel_tol);
    Ok((basis, eig))
}

pub(crate) fn eigenspace_basis(s: &DenseMatrix, eig: &EigenDecomposition, rel_tol: f64) -> DenseMatrix {
    let n = s.rows();
    let cutoff = eig.values[0] + rel_tol * (1.0 + s.frobenius_norm());
    let m = eig.values.iter().take_while(|&&l| l <= cutoff).count().max(1);
    let mut basis = DenseMatrix::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            basis[(i, j)] = eig.vectors[(i, j)];
        }
    }
    basis
}
