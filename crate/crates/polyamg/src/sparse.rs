//! Compressed sparse row matrices.
//!
//! Matrices are stored with both triangles present (no implicit symmetry),
//! column indices sorted within each row, and no explicitly stored zeros
//! after assembly. All operators in this crate are square and symmetric, but
//! the container itself supports rectangular shapes (interpolation operators
//! use them).

use crate::error::{Error, Result};

/// A real matrix in compressed sparse row format.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, column, value) triplets.
    ///
    /// Duplicate coordinates are summed; entries that cancel to exactly zero
    /// are dropped so the stored pattern never contains explicit zeros.
    pub fn assemble(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::IndexOutOfRange(format!(
                    "entry ({i}, {j}) outside {nrows}x{ncols} shape"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        row_offsets.push(0);

        let mut pos = 0;
        for row in 0..nrows {
            while pos < sorted.len() && sorted[pos].0 == row {
                let col = sorted[pos].1;
                let mut sum = 0.0;
                while pos < sorted.len() && sorted[pos].0 == row && sorted[pos].1 == col {
                    sum += sorted[pos].2;
                    pos += 1;
                }
                if sum != 0.0 {
                    col_indices.push(col);
                    values.push(sum);
                }
            }
            row_offsets.push(col_indices.len());
        }

        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// The identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::assemble(n, n, &triplets).expect("identity triplets are in range")
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// The stored value at (i, j), or zero when the entry is absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Iterates over all stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Matrix-vector product `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// Matrix-vector product into a preallocated buffer.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmv of {}x{} matrix with input length {} and output length {}",
                self.nrows,
                self.ncols,
                x.len(),
                y.len()
            )));
        }
        for i in 0..self.nrows {
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            let mut sum = 0.0;
            for p in lo..hi {
                sum += self.values[p] * x[self.col_indices[p]];
            }
            y[i] = sum;
        }
        Ok(())
    }

    /// The operator infinity norm: the maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows)
            .map(|i| {
                let (_, vals) = self.row(i);
                vals.iter().map(|v| v.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// The transpose as a new matrix.
    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::assemble(self.ncols, self.nrows, &triplets).expect("transposed entries are in range")
    }

    /// Whether the matrix equals its transpose up to `tol` entrywise.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        if t.row_offsets != self.row_offsets || t.col_indices != self.col_indices {
            return false;
        }
        self.values
            .iter()
            .zip(&t.values)
            .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Maximum number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        (0..self.nrows)
            .map(|i| self.row_offsets[i + 1] - self.row_offsets[i])
            .max()
            .unwrap_or(0)
    }

    /// Row sums (`A` applied to the all-ones vector).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().sum())
            .collect()
    }

    /// Adjacency lists of the off-diagonal pattern, sorted per vertex.
    ///
    /// Only meaningful for square matrices; the diagonal is skipped.
    pub fn pattern_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nrows];
        for i in 0..self.nrows {
            let (cols, _) = self.row(i);
            for &j in cols {
                if j != i {
                    adj[i].push(j);
                }
            }
        }
        adj
    }

    /// Dense copy in row-major order, for small-problem analysis.
    pub fn to_dense(&self) -> crate::dense::DenseMatrix {
        let mut d = crate::dense::DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            d.set(i, j, v);
        }
        d
    }
}
