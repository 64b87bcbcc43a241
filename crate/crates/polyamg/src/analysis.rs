//! Measurement of the theoretical constants driving the two-grid
//! convergence bound: local Poincaré constants of the aggregates, the
//! weak-approximation constant, the energy stability of the
//! piecewise-constant projection, the smoothing constant, and the
//! spectrum of the dense-assembled two-level preconditioned operator.
//!
//! Everything here is a desk-scale diagnostic: the eigensolves are dense
//! and guarded by a size cap. The production preconditioner never calls
//! into this module.

use crate::aggregation::{aggregate_diameter, galerkin, Partition};
use crate::dense::{
    complement_basis, generalized_sym_eigenvalues, sym_eigen, DenseMatrix, PseudoSolver,
};
use crate::error::{Error, Result};
use crate::multilevel::{prolong_add, restrict};
use crate::problem::Graph;
use crate::smoother::PolySmoother;
use crate::sparse::SparseMatrix;
use serde::Serialize;

/// Largest instance the dense eigensolves accept.
pub const DENSE_CAP: usize = 2000;

/// All measured constants of one two-level instance, in the roles they
/// play inside the bound
/// `K_TG = 8 + 8 c_1 (c_nz c_p c_s + 1)` with `c_1 = 2 c_0 + 3` and
/// `c_s = ln^2(m)/m^2`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    /// Second-smallest eigenvalue of each aggregate's local Laplacian
    /// (infinite for singletons).
    pub lambda_l: Vec<f64>,
    /// `max_l 1/lambda_l`, the weak-approximation constant.
    pub c_p: f64,
    /// Measured energy norm of the piecewise-constant projection.
    pub c_0: f64,
    /// `2 c_0 + 3`.
    pub c_1: f64,
    /// Smoothing constant `ln^2(m)/m^2` of the degree-m smoother.
    pub c_s: f64,
    /// Maximum stored entries in any row of the operator.
    pub c_nz: f64,
    /// The resulting two-grid bound.
    pub k_tg_bound: f64,
    /// Condition number of the dense-assembled two-level operator.
    pub measured_kappa_tl: f64,
    /// BFS diameter of each aggregate's induced subgraph.
    pub diameters: Vec<usize>,
    /// Side diagnostic per aggregate: `|V_l| * diam(G_l)`, the
    /// isoperimetric-flavor upper-bound scale for `1/lambda_l`; reported
    /// only, never used in the bound.
    pub cheeger_scale: Vec<f64>,
}

/// The spectrum summary of the two-level preconditioned operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwoLevelSpectrum {
    /// `lambda_max / lambda_min` over the kernel complement.
    pub kappa: f64,
    /// Smallest eigenvalue of `B A` off the kernel.
    pub lambda_min: f64,
    /// Largest eigenvalue of `B A` (at most 1 up to rounding).
    pub lambda_max: f64,
}

/// Second-smallest eigenvalue of each aggregate's induced unweighted
/// Laplacian; singletons report positive infinity (they impose no
/// constraint, contributing `1/lambda_l = 0`).
///
/// Edge weights on `g` are deliberately ignored: the weak-approximation
/// constant compares the plain Euclidean norm against the combinatorial
/// energy, so the local eigenproblems are unweighted by definition.
pub fn local_poincare(p: &Partition, g: &Graph) -> Result<Vec<f64>> {
    if g.num_vertices() != p.aggregate_of.len() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} vertices, graph has {}",
            p.aggregate_of.len(),
            g.num_vertices()
        )));
    }
    let members = p.members();
    if let Some(big) = members.iter().find(|m| m.len() > DENSE_CAP) {
        return Err(Error::DenseCapExceeded {
            size: big.len(),
            cap: DENSE_CAP,
        });
    }
    // Local index of each vertex inside its aggregate.
    let mut local = vec![0usize; p.aggregate_of.len()];
    for mem in &members {
        for (idx, &v) in mem.iter().enumerate() {
            local[v] = idx;
        }
    }
    let mut locals: Vec<DenseMatrix> = members
        .iter()
        .map(|m| DenseMatrix::zeros(m.len(), m.len()))
        .collect();
    for &(i, j) in g.edges() {
        let l = p.aggregate_of[i];
        if p.aggregate_of[j] != l {
            continue;
        }
        let (a, b) = (local[i], local[j]);
        let m = &mut locals[l];
        m.add_to(a, a, 1.0);
        m.add_to(b, b, 1.0);
        m.add_to(a, b, -1.0);
        m.add_to(b, a, -1.0);
    }
    locals
        .iter()
        .map(|m| {
            if m.nrows() < 2 {
                return Ok(f64::INFINITY);
            }
            let (values, _) = sym_eigen(m)?;
            Ok(values[1])
        })
        .collect()
}

/// Both sides of the weak approximation property for one vector:
/// `(||v - Qv||^2, c_p * (Av, v))` with `Q` the aggregate-averaging
/// projection, `A` the Laplacian of `g`, and `c_p` from
/// [`local_poincare`].
///
/// For unit edge weights the first component never exceeds the second;
/// weighted graphs get the same diagnostic without that guarantee, since
/// `c_p` stays defined through the unweighted local problems.
pub fn check_wap(p: &Partition, g: &Graph, v: &[f64]) -> Result<(f64, f64)> {
    if v.len() != g.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on a graph with {} vertices",
            v.len(),
            g.num_vertices()
        )));
    }
    let lambda = local_poincare(p, g)?;
    let c_p = lambda.iter().map(|l| 1.0 / l).fold(0.0, f64::max);
    let qv = crate::aggregation::project_q(p, v)?;
    let lhs: f64 = v.iter().zip(&qv).map(|(a, b)| (a - b) * (a - b)).sum();
    let a = crate::problem::laplacian_from_graph(g)?.matrix;
    let av = a.spmv(v)?;
    let energy: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
    Ok((lhs, c_p * energy))
}

/// Measured energy stability of the aggregate-averaging projection:
/// the largest generalized eigenvalue of `(Q A Q) w = mu A w` on the
/// complement of the kernel (detected from the row sums).
pub fn measure_q_stability(p: &Partition, a: &SparseMatrix) -> Result<f64> {
    let n = a.nrows();
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            size: n,
            cap: DENSE_CAP,
        });
    }
    if p.aggregate_of.len() != n {
        return Err(Error::DimensionMismatch(
            "partition does not match the operator size".to_string(),
        ));
    }
    let ad = a.to_dense();
    // Q A Q column by column.
    let mut qaq = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let qe = crate::aggregation::project_q(p, &e)?;
        let aqe = a.spmv(&qe)?;
        let col = crate::aggregation::project_q(p, &aqe)?;
        for i in 0..n {
            qaq.set(i, j, col[i]);
        }
    }
    let (m1, m2) = if has_constant_kernel(a) {
        let z = complement_basis(&vec![1.0; n])?;
        let zt = z.transpose();
        (
            zt.matmul(&qaq).matmul(&z),
            zt.matmul(&ad).matmul(&z),
        )
    } else {
        (qaq, ad)
    };
    let values = generalized_sym_eigenvalues(&m1, &m2)?;
    Ok(values.iter().fold(0.0, |acc: f64, &v| acc.max(v)))
}

/// The two-grid constant `8 + 8 (2 c_0 + 3) (c_nz c_p c_s + 1)` with
/// `c_s = ln^2(m)/m^2`.
pub fn ktg_bound(c_0: f64, c_p: f64, c_nz: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "the smoothing constant is only monotone for degree >= 2, got {m}"
        )));
    }
    if !(c_0 >= 0.0 && c_p >= 0.0 && c_nz >= 0.0) {
        return Err(Error::InvalidArgument(
            "constants in the two-grid bound must be nonnegative".to_string(),
        ));
    }
    let c_1 = 2.0 * c_0 + 3.0;
    let c_s = smoothing_constant(m);
    Ok(8.0 + 8.0 * c_1 * (c_nz * c_p * c_s + 1.0))
}

/// `ln^2(m)/m^2`.
pub fn smoothing_constant(m: usize) -> f64 {
    let lm = (m as f64).ln();
    lm * lm / (m as f64 * m as f64)
}

/// Densely assembles the symmetrized two-level preconditioner
/// `B = R_bar + (I - RA) P A_H^+ P^T (I - AR)` for the given smoother and
/// measures the spectrum of `B A` on the kernel complement through the
/// symmetric form `A^{1/2} B A^{1/2}`.
///
/// Returns the eigenvalue range and condition number, after verifying
/// `lambda_max <= 1 + 1e-8` (the preconditioner never overestimates) and
/// `lambda_min > 0` (it stays positive definite).
pub fn measure_two_level(
    a: &SparseMatrix,
    p: &Partition,
    smoother: &PolySmoother,
) -> Result<TwoLevelSpectrum> {
    let mut apply_r = |r: &[f64]| smoother.apply(a, r);
    measure_two_level_with(a, p, &mut apply_r)
}

/// [`measure_two_level`] for an arbitrary symmetric smoother action.
pub fn measure_two_level_with(
    a: &SparseMatrix,
    p: &Partition,
    apply_r: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<TwoLevelSpectrum> {
    let n = a.nrows();
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            size: n,
            cap: DENSE_CAP,
        });
    }
    if p.aggregate_of.len() != n {
        return Err(Error::DimensionMismatch(
            "partition does not match the operator size".to_string(),
        ));
    }
    let has_kernel = has_constant_kernel(a);
    let ah = galerkin(a, p)?;
    let coarse_kernel: Option<Vec<f64>> = has_kernel.then(|| vec![1.0; p.num_aggregates]);
    let coarse = PseudoSolver::from_sparse(&ah, coarse_kernel.as_deref())?;

    // One application of B: pre-smooth from zero, exact coarse correction,
    // post-smooth.
    let mut apply_b = |r: &[f64]| -> Result<Vec<f64>> {
        let mut x = apply_r(r)?;
        let ax = a.spmv(&x)?;
        let res: Vec<f64> = r.iter().zip(&ax).map(|(ri, yi)| ri - yi).collect();
        let e = coarse.solve_lenient(&restrict(p, &res))?;
        prolong_add(p, &e, &mut x);
        let ax = a.spmv(&x)?;
        let res: Vec<f64> = r.iter().zip(&ax).map(|(ri, yi)| ri - yi).collect();
        let corr = apply_r(&res)?;
        Ok(x.iter().zip(&corr).map(|(xi, ci)| xi + ci).collect())
    };

    let mut b = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = apply_b(&e)?;
        for i in 0..n {
            b.set(i, j, col[i]);
        }
    }

    // Symmetric square root of A.
    let (avals, avecs) = sym_eigen(&a.to_dense())?;
    let roots: Vec<f64> = avals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let mut half = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for (k, &root) in roots.iter().enumerate() {
                sum += avecs.get(i, k) * root * avecs.get(j, k);
            }
            half.set(i, j, sum);
        }
    }

    let mut s = half.matmul(&b).matmul(&half);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (s.get(i, j) + s.get(j, i));
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    let (mut values, _) = sym_eigen(&s)?;
    if has_kernel {
        // A^{1/2} annihilates the kernel, leaving one exact zero.
        let zero = values.remove(0);
        let top = values.last().copied().unwrap_or(1.0);
        if zero.abs() > 1e-8 * top.abs().max(1.0) {
            return Err(Error::Breakdown(format!(
                "expected a single kernel eigenvalue near zero, found {zero:e}"
            )));
        }
    }
    let lambda_min = values.first().copied().unwrap_or(f64::NAN);
    let lambda_max = values.last().copied().unwrap_or(f64::NAN);
    if !(lambda_max <= 1.0 + 1e-8) {
        return Err(Error::Breakdown(format!(
            "two-level operator exceeds its spectral bound: lambda_max = {lambda_max}"
        )));
    }
    if !(lambda_min > 0.0) {
        return Err(Error::Breakdown(format!(
            "two-level operator is not positive definite on the complement: \
             lambda_min = {lambda_min:e}"
        )));
    }
    Ok(TwoLevelSpectrum {
        kappa: lambda_max / lambda_min,
        lambda_min,
        lambda_max,
    })
}

/// Builds the full constants report for one two-level instance.
pub fn constants_report(
    g: &Graph,
    p: &Partition,
    a: &SparseMatrix,
    smoother: &PolySmoother,
) -> Result<ConstantsReport> {
    let lambda_l = local_poincare(p, g)?;
    let c_p = lambda_l.iter().map(|l| 1.0 / l).fold(0.0, f64::max);
    let c_0 = measure_q_stability(p, a)?;
    let c_nz = a.max_row_nnz() as f64;
    let m = smoother.degree;
    let k_tg_bound = ktg_bound(c_0, c_p, c_nz, m)?;
    let spectrum = measure_two_level(a, p, smoother)?;
    let adj = g.adjacency();
    let diameters: Vec<usize> = (0..p.num_aggregates)
        .map(|l| aggregate_diameter(&adj, p, l))
        .collect();
    let cheeger_scale: Vec<f64> = diameters
        .iter()
        .zip(&p.sizes)
        .map(|(&d, &s)| s as f64 * d as f64)
        .collect();
    Ok(ConstantsReport {
        lambda_l,
        c_p,
        c_0,
        c_1: 2.0 * c_0 + 3.0,
        c_s: smoothing_constant(m),
        c_nz,
        k_tg_bound,
        measured_kappa_tl: spectrum.kappa,
        diameters,
        cheeger_scale,
    })
}

/// Whether the operator annihilates constants (all row sums negligible).
fn has_constant_kernel(a: &SparseMatrix) -> bool {
    let scale = a.inf_norm().max(1.0);
    a.row_sums().iter().all(|s| s.abs() <= 1e-12 * scale)
}
