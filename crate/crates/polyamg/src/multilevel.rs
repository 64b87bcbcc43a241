//! Multilevel hierarchy construction and the AMLI-cycle preconditioners.
//!
//! A [`Hierarchy`] stacks coarsening levels built by distance-k aggregation
//! until the operator is small enough for a deflated direct solve. Between
//! two consecutive levels the preconditioner smooths with the polynomial
//! smoother and corrects through one of two junctions:
//!
//! * the stationary cycle stabilizes the recursive coarse preconditioner
//!   with a shifted-and-scaled Chebyshev polynomial of order `inner`, so
//!   the cycle stays a fixed symmetric positive definite operator suitable
//!   for ordinary conjugate gradients;
//! * the nonlinear cycle runs `inner` steps of flexible conjugate gradients
//!   on the coarse level, preconditioned by the cycle itself, which
//!   requires a flexible outer iteration.
//!
//! When the next level is already the coarsest, both junctions collapse to
//! the direct solve.

use crate::aggregation::{build_aggregates, condense, galerkin, mis_distance_k, Partition};
use crate::dense::PseudoSolver;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::smoother::{cheb, PolySmoother};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};

/// Which junction the cycle uses between non-coarsest levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    /// Stationary cycle: stabilized Chebyshev junction (linear operator).
    Amli,
    /// Nonlinear cycle: inner flexible-CG junction.
    Namli,
}

/// All tunables of hierarchy construction and cycle application.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleConfig {
    /// Junction kind between non-coarsest levels.
    pub cycle: CycleKind,
    /// Smoothing steps before the coarse correction.
    pub pre_smooth: usize,
    /// Smoothing steps after the coarse correction (must equal pre_smooth).
    pub post_smooth: usize,
    /// Junction order: stabilization degree resp. inner FCG steps.
    pub inner: usize,
    /// Polynomial smoother degree m.
    pub degree: usize,
    /// Aggregation radius k (independent set in the distance-k graph).
    pub mis_power: usize,
    /// Smoother interval ratio: the smoother targets [lambda1/kappa, lambda1].
    pub kappa: f64,
    /// Left end of the stabilization interval [theta0, 1].
    pub amli_theta0: f64,
    /// Coarsening stops when a level has fewer rows than this.
    pub coarsest_size: usize,
    /// Seed for all randomized choices (per-level seeds derive from it).
    pub seed: u64,
    /// Aggregates smaller than this fraction of the mean size are absorbed.
    pub absorb_frac: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            cycle: CycleKind::Amli,
            pre_smooth: 1,
            post_smooth: 1,
            inner: 2,
            degree: 4,
            mis_power: 4,
            kappa: 10.0,
            amli_theta0: 0.1,
            coarsest_size: 100,
            seed: 0,
            absorb_frac: 0.9,
        }
    }
}

impl CycleConfig {
    /// Rejects parameter combinations that break the cycle's guarantees.
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::InvalidArgument(
                "smoother degree must be at least 1".to_string(),
            ));
        }
        if self.inner < 1 {
            return Err(Error::InvalidArgument(
                "junction order `inner` must be at least 1".to_string(),
            ));
        }
        if self.mis_power < 1 {
            return Err(Error::InvalidArgument(
                "aggregation radius `mis_power` must be at least 1".to_string(),
            ));
        }
        if !(self.kappa > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "smoother interval ratio kappa must exceed 1, got {}",
                self.kappa
            )));
        }
        if !(self.amli_theta0 > 0.0 && self.amli_theta0 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "amli_theta0 must lie strictly inside (0, 1), got {}",
                self.amli_theta0
            )));
        }
        if self.coarsest_size < 1 {
            return Err(Error::InvalidArgument(
                "coarsest_size must be at least 1".to_string(),
            ));
        }
        if self.pre_smooth != self.post_smooth || self.pre_smooth < 1 {
            return Err(Error::InvalidArgument(
                "pre- and post-smoothing counts must be equal and at least 1 \
                 so the cycle stays symmetric"
                    .to_string(),
            ));
        }
        if !(self.absorb_frac >= 0.0 && self.absorb_frac.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "absorb_frac must be a nonnegative number, got {}",
                self.absorb_frac
            )));
        }
        Ok(())
    }
}

/// One level of the hierarchy. The coarsest level carries no partition or
/// smoother.
#[derive(Debug, Clone)]
pub struct Level {
    /// The operator on this level.
    pub a: SparseMatrix,
    /// Aggregation mapping this level to the next coarser one.
    pub partition: Option<Partition>,
    /// Polynomial smoother for this level.
    pub smoother: Option<PolySmoother>,
    /// Spectral upper bound used for the smoother (the row-sum norm).
    pub lambda1: f64,
}

/// Counts of operator applications during one cycle, per level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleStats {
    /// Cycle entries per level (the finest counts the outer call itself).
    pub b_applies: Vec<usize>,
    /// Smoother applications per level.
    pub smoother_applies: Vec<usize>,
    /// Direct solves on the coarsest level.
    pub coarse_solves: usize,
}

impl CycleStats {
    fn new(levels: usize) -> Self {
        Self {
            b_applies: vec![0; levels],
            smoother_applies: vec![0; levels],
            coarse_solves: 0,
        }
    }
}

/// Chebyshev coefficients on `[theta0, 1]` of the stabilization polynomial
/// `s` of degree `nu - 1` defined by
/// `1 - t s(t) = T_nu(y(t)) / T_nu(y(0))`, where `y` maps `[theta0, 1]`
/// onto `[-1, 1]`.
///
/// On `[theta0, 1]` the right side is bounded by `1/|T_nu(y(0))| < 1` and
/// `s` is strictly positive on `(0, 1]`, so composing `s` with a symmetric
/// positive definite preconditioned operator keeps the junction symmetric
/// positive definite for every `nu >= 1`.
pub fn stabilization_coeffs(nu: usize, theta0: f64) -> Result<Vec<f64>> {
    if nu < 1 {
        return Err(Error::InvalidArgument(
            "stabilization order must be at least 1".to_string(),
        ));
    }
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "stabilization interval end theta0 must lie in (0, 1), got {theta0}"
        )));
    }
    let y0 = -(1.0 + theta0) / (1.0 - theta0);
    let tn0 = chebyshev_value(nu, y0);
    let mut n_cheb = vec![0.0; nu + 1];
    n_cheb[0] = 1.0;
    n_cheb[nu] -= 1.0 / tn0;
    let mid = (1.0 + theta0) / 2.0;
    let half = (1.0 - theta0) / 2.0;
    let (s, residual) = cheb::divide_by_x(&n_cheb, mid, half);
    debug_assert!(residual.abs() < 1e-10, "stabilization division residual");
    Ok(s)
}

/// The uniform bound of `|1 - t s(t)|` on `[theta0, 1]` for the
/// stabilization polynomial of [`stabilization_coeffs`]: `1/|T_nu(y(0))|`.
pub fn stabilization_contraction(nu: usize, theta0: f64) -> Result<f64> {
    if nu < 1 {
        return Err(Error::InvalidArgument(
            "stabilization order must be at least 1".to_string(),
        ));
    }
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "stabilization interval end theta0 must lie in (0, 1), got {theta0}"
        )));
    }
    let y0 = -(1.0 + theta0) / (1.0 - theta0);
    Ok(1.0 / chebyshev_value(nu, y0).abs())
}

/// T_n(y) by the three-term recurrence (valid for any real y).
fn chebyshev_value(n: usize, y: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = y;
    if n == 0 {
        return prev;
    }
    for _ in 2..=n {
        let next = 2.0 * y * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Aggregate-summed restriction `P^T v`.
pub fn restrict(p: &Partition, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.num_aggregates];
    for (i, &aggr) in p.aggregate_of.iter().enumerate() {
        out[aggr] += v[i];
    }
    out
}

/// Adds the prolonged coarse vector `P e` into `x`.
pub fn prolong_add(p: &Partition, e: &[f64], x: &mut [f64]) {
    for (xi, &aggr) in x.iter_mut().zip(&p.aggregate_of) {
        *xi += e[aggr];
    }
}

/// One symmetrized two-grid step used by the theory-checking utilities:
/// exact coarse correction first, one smoothing step after:
/// `y = w + P (coarse solve of P^T (f - A w))`, then
/// `v = y + R (f - A y)`.
pub fn two_level_apply(
    a: &SparseMatrix,
    partition: &Partition,
    smoother: &PolySmoother,
    coarse_solver: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    w: &[f64],
    f: &[f64],
) -> Result<Vec<f64>> {
    if w.len() != a.nrows() || f.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "two-level step on {} rows with vectors of length {} and {}",
            a.nrows(),
            w.len(),
            f.len()
        )));
    }
    let aw = a.spmv(w)?;
    let res: Vec<f64> = f.iter().zip(&aw).map(|(fi, yi)| fi - yi).collect();
    let d = restrict(partition, &res);
    let e = coarse_solver(&d)?;
    if e.len() != partition.num_aggregates {
        return Err(Error::DimensionMismatch(
            "coarse solver returned a vector of the wrong length".to_string(),
        ));
    }
    let mut y = w.to_vec();
    prolong_add(partition, &e, &mut y);
    smoother.smoothed_iterate(a, f, &y)
}

/// A ready-to-apply multilevel preconditioner.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    /// The levels, finest first; the last one is solved directly.
    pub levels: Vec<Level>,
    /// The construction parameters.
    pub config: CycleConfig,
    coarsest: PseudoSolver,
    kernel: Option<Vec<f64>>,
    s_cheb: Vec<f64>,
}

impl Hierarchy {
    /// Builds the full hierarchy: repeated aggregation and Galerkin
    /// projection while the operator has at least `coarsest_size` rows,
    /// then a deflated factorization of the coarsest operator.
    pub fn setup(problem: &ProblemInstance, config: CycleConfig) -> Result<Self> {
        config.validate()?;
        let mut levels = Vec::new();
        let mut a = problem.matrix.clone();
        let mut level_index = 0usize;
        while a.nrows() >= config.coarsest_size {
            let lambda1 = a.inf_norm();
            let adj = a.pattern_adjacency();
            let seed = config.seed.wrapping_add(level_index as u64);
            let roots = mis_distance_k(&adj, config.mis_power, Some(seed));
            let p = build_aggregates(&adj, &roots, config.mis_power)?;
            let p = condense(&adj, &p, config.absorb_frac);
            if p.num_aggregates >= a.nrows() {
                return Err(Error::CoarseningStagnated {
                    level: level_index,
                    n: a.nrows(),
                });
            }
            let smoother = PolySmoother::build(lambda1 / config.kappa, lambda1, config.degree)?;
            let coarse = galerkin(&a, &p)?;
            levels.push(Level {
                a,
                partition: Some(p),
                smoother: Some(smoother),
                lambda1,
            });
            a = coarse;
            level_index += 1;
        }
        let lambda1 = a.inf_norm();
        let kernel = problem.kernel.clone();
        let coarse_kernel: Option<Vec<f64>> = kernel.as_ref().map(|_| vec![1.0; a.nrows()]);
        let coarsest = PseudoSolver::from_sparse(&a, coarse_kernel.as_deref())?;
        levels.push(Level {
            a,
            partition: None,
            smoother: None,
            lambda1,
        });
        let s_cheb = stabilization_coeffs(config.inner, config.amli_theta0)?;
        Ok(Self {
            levels,
            config,
            coarsest,
            kernel,
            s_cheb,
        })
    }

    /// Number of levels including the coarsest.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// The finest-level operator.
    pub fn finest(&self) -> &SparseMatrix {
        &self.levels[0].a
    }

    /// The kernel of the finest operator, when it has one.
    pub fn kernel(&self) -> Option<&[f64]> {
        self.kernel.as_deref()
    }

    /// The deflated direct solver of the coarsest level.
    pub fn coarsest_solver(&self) -> &PseudoSolver {
        &self.coarsest
    }

    /// Applies the preconditioner on the finest level: `z = B r`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut stats = CycleStats::new(self.levels.len());
        self.cycle(0, r, &mut stats)
    }

    /// Like [`Hierarchy::apply`], also returning per-level work counts.
    pub fn apply_instrumented(&self, r: &[f64]) -> Result<(Vec<f64>, CycleStats)> {
        let mut stats = CycleStats::new(self.levels.len());
        let z = self.cycle(0, r, &mut stats)?;
        Ok((z, stats))
    }

    /// One cycle on level `j` from a zero initial guess.
    fn cycle(&self, j: usize, r: &[f64], stats: &mut CycleStats) -> Result<Vec<f64>> {
        let level = &self.levels[j];
        if r.len() != level.a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "cycle on level {j} of size {} with residual length {}",
                level.a.nrows(),
                r.len()
            )));
        }
        stats.b_applies[j] += 1;
        if j + 1 == self.levels.len() {
            stats.coarse_solves += 1;
            return self.coarsest.solve_lenient(r);
        }
        let a = &level.a;
        let smoother = level.smoother.as_ref().expect("fine level has a smoother");
        let partition = level.partition.as_ref().expect("fine level has a partition");

        // Pre-smoothing from the zero initial guess.
        let mut x = smoother.apply(a, r)?;
        stats.smoother_applies[j] += 1;
        for _ in 1..self.config.pre_smooth {
            x = smoother.smoothed_iterate(a, r, &x)?;
            stats.smoother_applies[j] += 1;
        }

        // Coarse correction through the junction.
        let ax = a.spmv(&x)?;
        let res: Vec<f64> = r.iter().zip(&ax).map(|(ri, yi)| ri - yi).collect();
        let d = restrict(partition, &res);
        let e = if j + 2 == self.levels.len() {
            // The next level is solved exactly; no junction polynomial or
            // inner iteration can improve on that.
            stats.b_applies[j + 1] += 1;
            stats.coarse_solves += 1;
            self.coarsest.solve_lenient(&d)?
        } else {
            match self.config.cycle {
                CycleKind::Amli => self.amli_correction(j + 1, &d, stats)?,
                CycleKind::Namli => self.namli_correction(j + 1, &d, stats)?,
            }
        };
        prolong_add(partition, &e, &mut x);

        // Post-smoothing.
        for _ in 0..self.config.post_smooth {
            x = smoother.smoothed_iterate(a, r, &x)?;
            stats.smoother_applies[j] += 1;
        }
        Ok(x)
    }

    /// The stabilized junction on level `j`: `e = s(B A) B d` evaluated by
    /// the Clenshaw recurrence in the operator `Y = (B A - mid I)/half`,
    /// which costs exactly `inner` cycle applications on level `j`.
    pub fn amli_coarse_correction(&self, j: usize, d: &[f64]) -> Result<Vec<f64>> {
        let mut stats = CycleStats::new(self.levels.len());
        self.amli_correction(j, d, &mut stats)
    }

    fn amli_correction(&self, j: usize, d: &[f64], stats: &mut CycleStats) -> Result<Vec<f64>> {
        let s = &self.s_cheb;
        let nu = s.len();
        let bd = self.cycle(j, d, stats)?;
        if nu == 1 {
            return Ok(bd.iter().map(|x| x * s[0]).collect());
        }
        let mid = (1.0 + self.config.amli_theta0) / 2.0;
        let half = (1.0 - self.config.amli_theta0) / 2.0;
        let a = &self.levels[j].a;
        let mut b1: Vec<f64> = bd.iter().map(|x| x * s[nu - 1]).collect();
        let mut b2 = vec![0.0; d.len()];
        for k in (1..nu - 1).rev() {
            let yb = self.apply_y(a, j, &b1, mid, half, stats)?;
            let next: Vec<f64> = yb
                .iter()
                .zip(&b2)
                .zip(&bd)
                .map(|((y, b), c)| 2.0 * y - b + s[k] * c)
                .collect();
            b2 = b1;
            b1 = next;
        }
        let yb = self.apply_y(a, j, &b1, mid, half, stats)?;
        Ok(yb
            .iter()
            .zip(&b2)
            .zip(&bd)
            .map(|((y, b), c)| y - b + s[0] * c)
            .collect())
    }

    /// One application of `Y v = (B(A v) - mid v)/half` on level `j`.
    fn apply_y(
        &self,
        a: &SparseMatrix,
        j: usize,
        v: &[f64],
        mid: f64,
        half: f64,
        stats: &mut CycleStats,
    ) -> Result<Vec<f64>> {
        let av = a.spmv(v)?;
        let bav = self.cycle(j, &av, stats)?;
        Ok(bav
            .iter()
            .zip(v)
            .map(|(m, vi)| (m - mid * vi) / half)
            .collect())
    }

    /// The nonlinear junction on level `j`: at most `inner` steps of
    /// flexible conjugate gradients on `A_j e = d` from a zero guess,
    /// preconditioned by the cycle on level `j`, with full explicit
    /// A-orthogonalization of the search directions.
    pub fn namli_coarse_correction(&self, j: usize, d: &[f64]) -> Result<Vec<f64>> {
        let mut stats = CycleStats::new(self.levels.len());
        self.namli_correction(j, d, &mut stats)
    }

    fn namli_correction(&self, j: usize, d: &[f64], stats: &mut CycleStats) -> Result<Vec<f64>> {
        let a = &self.levels[j].a;
        let n = d.len();
        let mut x = vec![0.0; n];
        let mut r = d.to_vec();
        let dnorm = norm2(d);
        if dnorm == 0.0 {
            return Ok(x);
        }
        let mut dirs: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        for _ in 0..self.config.inner {
            if norm2(&r) <= 1e-14 * dnorm {
                break;
            }
            let mut p = self.cycle(j, &r, stats)?;
            for (pi, api, energy) in &dirs {
                let beta = dot(&p, api) / energy;
                for (pc, pic) in p.iter_mut().zip(pi) {
                    *pc -= beta * pic;
                }
            }
            let ap = a.spmv(&p)?;
            let energy = dot(&p, &ap);
            if energy <= 0.0 {
                return Err(Error::Breakdown(format!(
                    "inner direction with nonpositive energy {energy:e} on level {j}"
                )));
            }
            let alpha = dot(&r, &p) / energy;
            for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
                *xi += alpha * pi;
                *ri -= alpha * api;
            }
            dirs.push((p, ap, energy));
        }
        Ok(x)
    }

    /// Grid and operator complexity: total rows resp. stored entries over
    /// all levels, relative to the finest level.
    pub fn complexities(&self) -> (f64, f64) {
        let n0 = self.levels[0].a.nrows() as f64;
        let nnz0 = self.levels[0].a.nnz() as f64;
        let grid = self.levels.iter().map(|l| l.a.nrows() as f64).sum::<f64>() / n0;
        let operator = self.levels.iter().map(|l| l.a.nnz() as f64).sum::<f64>() / nnz0;
        (grid, operator)
    }

    /// An order-sensitive FNV-1a digest of every level array: sizes,
    /// sparsity patterns, stored values (by bit pattern), aggregate maps,
    /// spectral estimates, and smoother coefficients. Equal hashes for
    /// equal seeds make setup determinism checkable at a glance.
    pub fn structure_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let eat = |h: &mut u64, x: u64| {
            *h ^= x;
            *h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        eat(&mut h, self.levels.len() as u64);
        for level in &self.levels {
            eat(&mut h, level.a.nrows() as u64);
            eat(&mut h, level.a.nnz() as u64);
            for i in 0..level.a.nrows() {
                let (cols, vals) = level.a.row(i);
                eat(&mut h, cols.len() as u64);
                for (&c, &v) in cols.iter().zip(vals) {
                    eat(&mut h, c as u64);
                    eat(&mut h, v.to_bits());
                }
            }
            eat(&mut h, level.lambda1.to_bits());
            if let Some(p) = &level.partition {
                for &aggr in &p.aggregate_of {
                    eat(&mut h, aggr as u64 + 1);
                }
            }
            if let Some(s) = &level.smoother {
                eat(&mut h, s.degree as u64);
                for &c in &s.cheb_coeffs {
                    eat(&mut h, c.to_bits());
                }
            }
        }
        h
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
