//! Small dense kernels: factorizations, eigensolves, and the deflated
//! pseudo-inverse used on the coarsest level.
//!
//! Everything here is for matrices that fit comfortably in memory (coarsest
//! grids, local aggregate blocks, analysis on small model problems). The
//! heavy lifting is delegated to `nalgebra`; this module fixes a row-major
//! facade and the exact deflation conventions the rest of the crate relies
//! on.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// A zero matrix of the given shape.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    /// The identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for r in rows {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch(
                    "rows of unequal length".to_string(),
                ));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            data: rows.concat(),
        })
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// The entry at (i, j).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    /// Overwrites the entry at (i, j).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ncols + j] = v;
    }

    /// Adds to the entry at (i, j).
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ncols + j] += v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec operand length");
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// Matrix-matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul operand shapes");
        let a = self.to_nalgebra();
        let b = other.to_nalgebra();
        Self::from_nalgebra(&(a * b))
    }

    /// The transpose.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Maximum absolute entry difference to another matrix of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut d = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                d.set(i, j, m[(i, j)]);
            }
        }
        d
    }
}

/// Solves the square linear system `a x = b` by LU with partial pivoting.
pub fn solve_linear(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "linear solve of {}x{} system with rhs length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.to_nalgebra().lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| Error::FactorizationFailed("singular matrix in LU solve".to_string()))?;
    Ok(x.as_slice().to_vec())
}

/// Eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second result.
pub fn sym_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(
            "symmetric eigensolve of non-square matrix".to_string(),
        ));
    }
    let se = a.to_nalgebra().symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_col, se.eigenvectors[(i, old_col)]);
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues of the symmetric generalized problem `m1 x = lambda m2 x`
/// with `m2` symmetric positive definite, in ascending order.
///
/// Uses a Cholesky whitening `m2 = L L^T` and the symmetric eigensolve of
/// `L^{-1} m1 L^{-T}`.
pub fn generalized_sym_eigenvalues(m1: &DenseMatrix, m2: &DenseMatrix) -> Result<Vec<f64>> {
    if m1.nrows() != m1.ncols() || m2.nrows() != m2.ncols() || m1.nrows() != m2.nrows() {
        return Err(Error::DimensionMismatch(
            "generalized eigensolve operands must be square and equal-sized".to_string(),
        ));
    }
    let chol = Cholesky::new(m2.to_nalgebra()).ok_or_else(|| {
        Error::FactorizationFailed("right operand of generalized eigensolve is not SPD".to_string())
    })?;
    let l = chol.l();
    // Whitened operator L^{-1} m1 L^{-T}, built by triangular solves.
    let mut w = m1.to_nalgebra();
    l.solve_lower_triangular_mut(&mut w);
    let mut wt = w.transpose();
    l.solve_lower_triangular_mut(&mut wt);
    // Symmetrize to scrub rounding asymmetry before the eigensolve.
    let sym = (&wt + wt.transpose()) * 0.5;
    let mut values: Vec<f64> = sym.symmetric_eigen().eigenvalues.as_slice().to_vec();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// An orthonormal basis of the orthogonal complement of `v`, as the columns
/// of an `n x (n-1)` matrix.
///
/// Built from the Householder reflector that maps `v` to a multiple of the
/// first coordinate vector; columns 2..n of the reflector span `v`-perp.
pub fn complement_basis(v: &[f64]) -> Result<DenseMatrix> {
    let n = v.len();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 2 || norm == 0.0 {
        return Err(Error::InvalidArgument(
            "complement basis needs a nonzero vector of length >= 2".to_string(),
        ));
    }
    // w = v - sign(v_0) * ||v|| e_0 gives the reflector H = I - 2 w w^T / (w^T w),
    // with the sign chosen to avoid cancellation.
    let alpha = if v[0] >= 0.0 { -norm } else { norm };
    let mut w: Vec<f64> = v.to_vec();
    w[0] -= alpha;
    let wtw: f64 = w.iter().map(|x| x * x).sum();
    let mut z = DenseMatrix::zeros(n, n - 1);
    for j in 1..n {
        // Column j of H is e_j - (2 w_j / w^T w) w.
        let scale = 2.0 * w[j] / wtw;
        for i in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            z.set(i, j - 1, e - scale * w[i]);
        }
    }
    Ok(z)
}

/// A factorized deflated solver for a symmetric positive semidefinite
/// matrix with a known one-dimensional kernel (or none).
///
/// The factorization is of the rank-one-shifted matrix
/// `A + (1/n) * kernel kernel^T * (||A||_inf / ||kernel||^2)`,
/// which is SPD when `A` is SPSD with exactly that kernel; solutions are
/// projected back onto the kernel complement.
#[derive(Debug, Clone)]
pub struct PseudoSolver {
    chol: Cholesky<f64, Dyn>,
    kernel: Option<Vec<f64>>,
    n: usize,
}

impl PseudoSolver {
    /// Factorizes the deflated matrix.
    pub fn new(a: &DenseMatrix, kernel: Option<&[f64]>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(
                "pseudo-solver needs a square matrix".to_string(),
            ));
        }
        let mut m = a.to_nalgebra();
        if let Some(k) = kernel {
            if k.len() != n {
                return Err(Error::DimensionMismatch(
                    "kernel length must match matrix size".to_string(),
                ));
            }
            let ksq: f64 = k.iter().map(|x| x * x).sum();
            if ksq == 0.0 {
                return Err(Error::InvalidArgument(
                    "kernel vector must be nonzero".to_string(),
                ));
            }
            let inf_norm = (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max)
                .max(1.0);
            let scale = inf_norm / (n as f64 * ksq);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += scale * k[i] * k[j];
                }
            }
        }
        let chol = Cholesky::new(m).ok_or_else(|| {
            Error::FactorizationFailed(
                "deflated coarse matrix is not positive definite".to_string(),
            )
        })?;
        Ok(Self {
            chol,
            kernel: kernel.map(<[f64]>::to_vec),
            n,
        })
    }

    /// Convenience constructor from a sparse matrix.
    pub fn from_sparse(a: &crate::sparse::SparseMatrix, kernel: Option<&[f64]>) -> Result<Self> {
        Self::new(&a.to_dense(), kernel)
    }

    /// Problem size.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in the pseudo-inverse sense.
    ///
    /// When a kernel is present the right-hand side must be consistent: its
    /// relative kernel component beyond `1e-6` is an error, smaller
    /// components are projected out as rounding noise. The returned solution
    /// has no kernel component.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_inner(b, true)
    }

    /// Like [`PseudoSolver::solve`] but always projects the kernel component
    /// out of the right-hand side instead of rejecting an inconsistent one.
    /// Multilevel cycles use this on restricted residuals, whose kernel
    /// component is pure rounding noise by construction.
    pub fn solve_lenient(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_inner(b, false)
    }

    fn solve_inner(&self, b: &[f64], strict: bool) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "pseudo-solve of size {} with rhs length {}",
                self.n,
                b.len()
            )));
        }
        let mut rhs = b.to_vec();
        if let Some(k) = &self.kernel {
            let ksq: f64 = k.iter().map(|x| x * x).sum();
            let bk: f64 = rhs.iter().zip(k).map(|(a, b)| a * b).sum();
            let bnorm = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
            let component = bk.abs() / (bnorm * ksq.sqrt()).max(f64::MIN_POSITIVE);
            if strict && bnorm > 0.0 && component > 1e-6 {
                return Err(Error::InconsistentRhs { component });
            }
            let coef = bk / ksq;
            for (r, kv) in rhs.iter_mut().zip(k) {
                *r -= coef * kv;
            }
        }
        let mut x = DVector::from_column_slice(&rhs);
        self.chol.solve_mut(&mut x);
        let mut out = x.as_slice().to_vec();
        if let Some(k) = &self.kernel {
            let ksq: f64 = k.iter().map(|x| x * x).sum();
            let xk: f64 = out.iter().zip(k).map(|(a, b)| a * b).sum();
            let coef = xk / ksq;
            for (o, kv) in out.iter_mut().zip(k) {
                *o -= coef * kv;
            }
        }
        Ok(out)
    }
}

/// Solves `A x = b` in the pseudo-inverse sense in one call.
pub fn dense_pseudo_solve(
    a: &DenseMatrix,
    b: &[f64],
    kernel: Option<&[f64]>,
) -> Result<Vec<f64>> {
    PseudoSolver::new(a, kernel)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::path_graph;

    #[test]
    fn solve_linear_roundtrip() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = solve_linear(&a, &[5.0, 10.0]).unwrap();
        let b = a.matvec(&x);
        assert!((b[0] - 5.0).abs() < 1e-12 && (b[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn sym_eigen_sorted_and_orthonormal() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ])
        .unwrap();
        let (vals, vecs) = sym_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        // Path-3 Dirichlet Laplacian eigenvalues: 2 - sqrt(2), 2, 2 + sqrt(2).
        assert!((vals[0] - (2.0 - 2.0_f64.sqrt())).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - (2.0 + 2.0_f64.sqrt())).abs() < 1e-12);
        let qtq = vecs.transpose().matmul(&vecs);
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn generalized_eigenvalues_reduce_to_standard() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 5.0]]).unwrap();
        let id = DenseMatrix::identity(2);
        let vals = generalized_sym_eigenvalues(&a, &id).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn complement_basis_is_orthonormal_and_orthogonal_to_v() {
        let v = vec![1.0, 1.0, 1.0, 1.0];
        let z = complement_basis(&v).unwrap();
        assert_eq!((z.nrows(), z.ncols()), (4, 3));
        let ztz = z.transpose().matmul(&z);
        assert!(ztz.max_abs_diff(&DenseMatrix::identity(3)) < 1e-12);
        for j in 0..3 {
            let dot: f64 = (0..4).map(|i| z.get(i, j) * v[i]).sum();
            assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_solve_inverts_on_kernel_complement() {
        let a = path_graph(4).unwrap().matrix.to_dense();
        let kernel = vec![1.0; 4];
        // Consistent rhs: A times a mean-free vector.
        let x_true = vec![-1.5, -0.5, 0.5, 1.5];
        let b: Vec<f64> = (0..4).map(|i| a.row(i).iter().zip(&x_true).map(|(u, v)| u * v).sum()).collect();
        let x = dense_pseudo_solve(&a, &b, Some(&kernel)).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-10);
        }
        let mean: f64 = x.iter().sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn pseudo_solve_rejects_inconsistent_rhs() {
        let a = path_graph(3).unwrap().matrix.to_dense();
        let err = dense_pseudo_solve(&a, &[1.0, 1.0, 1.0], Some(&[1.0, 1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::InconsistentRhs { .. }));
    }

    #[test]
    fn pseudo_solve_without_kernel_is_plain_spd_solve() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = dense_pseudo_solve(&a, &[1.0, 2.0], None).unwrap();
        let b = a.matvec(&x);
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12);
    }
}
