//! Outer Krylov solvers: preconditioned conjugate gradients for fixed
//! (linear) preconditioners and flexible conjugate gradients with periodic
//! restart for preconditioners that vary between applications.
//!
//! Both solvers support singular consistent systems: when a kernel vector
//! is supplied, the residual and the preconditioned residual are projected
//! onto the kernel complement once per iteration, which keeps the iterates
//! from drifting along the kernel in finite precision.

use crate::error::{Error, Result};
use crate::multilevel::CycleConfig;
use crate::sparse::SparseMatrix;
use serde::Serialize;
use std::time::Instant;

/// One history entry per iteration (entry 0 is the initial state).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationRecord {
    /// Relative A-norm of the error against the known solution, when the
    /// solve runs in manufactured mode.
    pub rel_a_norm_error: Option<f64>,
    /// Relative Euclidean residual norm.
    pub rel_residual: f64,
}

/// Outcome of one outer solve. The timing, complexity, and configuration
/// fields beyond the solver's own counters are filled in by the caller
/// that owns the preconditioner.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// Iterations performed (history has one more entry).
    pub iterations: usize,
    /// Whether the stopping criterion was met within `max_iter`.
    pub converged: bool,
    /// Per-iteration monitored quantities, starting at the initial guess.
    pub history: Vec<IterationRecord>,
    /// Preconditioner construction time, filled by the caller.
    pub setup_seconds: f64,
    /// Time spent in the iteration loop.
    pub solve_seconds: f64,
    /// Grid complexity of the preconditioner, filled by the caller.
    pub grid_complexity: f64,
    /// Operator complexity of the preconditioner, filled by the caller.
    pub operator_complexity: f64,
    /// The cycle configuration used, filled by the caller.
    pub config_echo: Option<CycleConfig>,
}

impl SolveReport {
    fn new() -> Self {
        Self {
            iterations: 0,
            converged: false,
            history: Vec::new(),
            setup_seconds: 0.0,
            solve_seconds: 0.0,
            grid_complexity: 1.0,
            operator_complexity: 1.0,
            config_echo: None,
        }
    }

    /// The last recorded relative A-norm error, when one was monitored.
    pub fn final_rel_a_norm_error(&self) -> Option<f64> {
        self.history.last().and_then(|r| r.rel_a_norm_error)
    }

    /// The last recorded relative residual.
    pub fn final_rel_residual(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.rel_residual)
    }
}

/// What the stopping criterion measures.
#[derive(Debug, Clone, Copy)]
pub enum Monitor<'a> {
    /// Manufactured mode: relative A-norm of the error against a known
    /// solution, at one extra matrix-vector product per iteration.
    ANormError {
        /// The system operator.
        a: &'a SparseMatrix,
        /// The known solution.
        u_star: &'a [f64],
    },
    /// Blind mode: relative preconditioned residual norm
    /// `sqrt(r^T B r)`, available without a known solution.
    PreconditionedResidual,
}

/// The manufactured-mode monitor measuring
/// `|x_k - u_star|_A / |x_0 - u_star|_A`.
pub fn a_norm_error_monitor<'a>(a: &'a SparseMatrix, u_star: &'a [f64]) -> Monitor<'a> {
    Monitor::ANormError { a, u_star }
}

impl Monitor<'_> {
    /// Unnormalized A-norm of the current error, in manufactured mode.
    fn a_norm_of_error(&self, x: &[f64]) -> Result<Option<f64>> {
        match self {
            Monitor::ANormError { a, u_star } => {
                let diff: Vec<f64> = x.iter().zip(*u_star).map(|(xi, ui)| xi - ui).collect();
                let ad = a.spmv(&diff)?;
                Ok(Some(dot(&diff, &ad).max(0.0).sqrt()))
            }
            Monitor::PreconditionedResidual => Ok(None),
        }
    }
}

/// Preconditioned conjugate gradients for a fixed linear symmetric
/// positive definite preconditioner.
///
/// Stops when the monitored quantity falls to `tol` times its initial
/// value; the check runs before the first iteration, so `tol >= 1`
/// returns the initial guess. A search direction with nonpositive energy
/// aborts with a diagnostic; running out of iterations returns
/// `converged = false`.
#[allow(clippy::too_many_arguments)]
pub fn pcg(
    a: &SparseMatrix,
    f: &[f64],
    precond: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
    kernel: Option<&[f64]>,
    monitor: &Monitor,
) -> Result<(Vec<f64>, SolveReport)> {
    check_lengths(a, f, x0, kernel)?;
    let clock = Instant::now();
    let mut report = SolveReport::new();
    let mut x = x0.to_vec();
    let ax = a.spmv(&x)?;
    let mut r: Vec<f64> = f.iter().zip(&ax).map(|(fi, yi)| fi - yi).collect();
    project_out(kernel, &mut r);

    let norms = InitialNorms::measure(&r, &x, monitor)?;
    let record = norms.record(&r, &x, monitor)?;
    report.history.push(record);
    if initial_quantity(&record, monitor) <= tol || norms.trivial(monitor) {
        report.converged = true;
        report.solve_seconds = clock.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut z = precond(&r)?;
    project_out(kernel, &mut z);
    norms.preconditioned(&r, &z); // seed the blind-mode baseline with (r0, z0)
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for k in 1..=max_iter {
        let ap = a.spmv(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Breakdown(format!(
                "conjugate-gradient direction with nonpositive energy {pap:e} at iteration {k}"
            )));
        }
        let alpha = rz / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        project_out(kernel, &mut r);
        report.iterations = k;

        match monitor {
            Monitor::ANormError { .. } => {
                let record = norms.record(&r, &x, monitor)?;
                report.history.push(record);
                if record.rel_a_norm_error.unwrap_or(f64::INFINITY) <= tol {
                    report.converged = true;
                    break;
                }
                z = precond(&r)?;
                project_out(kernel, &mut z);
            }
            Monitor::PreconditionedResidual => {
                z = precond(&r)?;
                project_out(kernel, &mut z);
                let record = norms.record(&r, &x, monitor)?;
                report.history.push(record);
                if norms.preconditioned(&r, &z) <= tol {
                    report.converged = true;
                    break;
                }
            }
        }

        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_new;
    }
    report.solve_seconds = clock.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Flexible preconditioned conjugate gradients with periodic hard restart.
///
/// Every new direction is explicitly A-orthogonalized against the
/// directions stored since the last restart; every `restart` iterations
/// the stored directions are discarded (the iterate is kept), bounding
/// memory at `restart` direction pairs. With a fixed linear symmetric
/// positive definite preconditioner the iterates coincide with [`pcg`]
/// until the first restart.
#[allow(clippy::too_many_arguments)]
pub fn fcg(
    a: &SparseMatrix,
    f: &[f64],
    precond: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
    restart: usize,
    kernel: Option<&[f64]>,
    monitor: &Monitor,
) -> Result<(Vec<f64>, SolveReport)> {
    check_lengths(a, f, x0, kernel)?;
    if restart < 1 {
        return Err(Error::InvalidArgument(
            "restart period must be at least 1".to_string(),
        ));
    }
    let clock = Instant::now();
    let mut report = SolveReport::new();
    let mut x = x0.to_vec();
    let ax = a.spmv(&x)?;
    let mut r: Vec<f64> = f.iter().zip(&ax).map(|(fi, yi)| fi - yi).collect();
    project_out(kernel, &mut r);

    let norms = InitialNorms::measure(&r, &x, monitor)?;
    let record = norms.record(&r, &x, monitor)?;
    report.history.push(record);
    if initial_quantity(&record, monitor) <= tol || norms.trivial(monitor) {
        report.converged = true;
        report.solve_seconds = clock.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut z = precond(&r)?;
    project_out(kernel, &mut z);
    norms.preconditioned(&r, &z); // seed the blind-mode baseline with (r0, z0)
    let mut memory: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();

    for k in 1..=max_iter {
        if k > 1 && (k - 1) % restart == 0 {
            memory.clear();
        }
        let mut p = z.clone();
        for (pi, api, energy) in &memory {
            let beta = dot(&p, api) / energy;
            for (pc, pic) in p.iter_mut().zip(pi) {
                *pc -= beta * pic;
            }
        }
        let ap = a.spmv(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Breakdown(format!(
                "flexible direction with nonpositive energy {pap:e} at iteration {k}"
            )));
        }
        let alpha = dot(&r, &p) / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        project_out(kernel, &mut r);
        memory.push((p, ap, pap));
        debug_assert!(memory.len() <= restart, "direction memory exceeded");
        report.iterations = k;

        match monitor {
            Monitor::ANormError { .. } => {
                let record = norms.record(&r, &x, monitor)?;
                report.history.push(record);
                if record.rel_a_norm_error.unwrap_or(f64::INFINITY) <= tol {
                    report.converged = true;
                    break;
                }
                z = precond(&r)?;
                project_out(kernel, &mut z);
            }
            Monitor::PreconditionedResidual => {
                z = precond(&r)?;
                project_out(kernel, &mut z);
                let record = norms.record(&r, &x, monitor)?;
                report.history.push(record);
                if norms.preconditioned(&r, &z) <= tol {
                    report.converged = true;
                    break;
                }
            }
        }
    }
    report.solve_seconds = clock.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Initial norms the relative quantities are measured against.
struct InitialNorms {
    residual: f64,
    a_norm_error: Option<f64>,
    preconditioned: std::cell::Cell<f64>,
}

impl InitialNorms {
    fn measure(r0: &[f64], x0: &[f64], monitor: &Monitor) -> Result<Self> {
        Ok(Self {
            residual: norm2(r0),
            a_norm_error: monitor.a_norm_of_error(x0)?,
            preconditioned: std::cell::Cell::new(f64::NAN),
        })
    }

    /// A history record for the current state.
    fn record(&self, r: &[f64], x: &[f64], monitor: &Monitor) -> Result<IterationRecord> {
        let rel_residual = if self.residual > 0.0 {
            norm2(r) / self.residual
        } else {
            0.0
        };
        let rel_a_norm_error = match (monitor.a_norm_of_error(x)?, self.a_norm_error) {
            (Some(e), Some(e0)) => Some(if e0 > 0.0 { e / e0 } else { 0.0 }),
            _ => None,
        };
        Ok(IterationRecord {
            rel_a_norm_error,
            rel_residual,
        })
    }

    /// Relative preconditioned residual `sqrt(r^T z)`, normalizing by the
    /// first value seen (which is the initial one: the first call happens
    /// with r0, z0).
    fn preconditioned(&self, r: &[f64], z: &[f64]) -> f64 {
        let value = dot(r, z).max(0.0).sqrt();
        if self.preconditioned.get().is_nan() {
            self.preconditioned.set(value);
        }
        let denom = self.preconditioned.get();
        if denom > 0.0 {
            value / denom
        } else {
            0.0
        }
    }

    /// Whether the initial state already has nothing to solve.
    fn trivial(&self, monitor: &Monitor) -> bool {
        match monitor {
            Monitor::ANormError { .. } => self.a_norm_error == Some(0.0),
            Monitor::PreconditionedResidual => self.residual == 0.0,
        }
    }
}

fn initial_quantity(record: &IterationRecord, monitor: &Monitor) -> f64 {
    match monitor {
        Monitor::ANormError { .. } => record.rel_a_norm_error.unwrap_or(1.0),
        Monitor::PreconditionedResidual => record.rel_residual,
    }
}

fn check_lengths(a: &SparseMatrix, f: &[f64], x0: &[f64], kernel: Option<&[f64]>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(
            "outer solver needs a square operator".to_string(),
        ));
    }
    if f.len() != n || x0.len() != n || kernel.is_some_and(|k| k.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "outer solver on {n} rows got rhs length {}, guess length {}",
            f.len(),
            x0.len()
        )));
    }
    Ok(())
}

/// Removes the kernel component of `v` in place.
fn project_out(kernel: Option<&[f64]>, v: &mut [f64]) {
    if let Some(k) = kernel {
        let ksq: f64 = k.iter().map(|x| x * x).sum();
        if ksq == 0.0 {
            return;
        }
        let c = v.iter().zip(k).map(|(a, b)| a * b).sum::<f64>() / ksq;
        for (vi, ki) in v.iter_mut().zip(k) {
            *vi -= c * ki;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
