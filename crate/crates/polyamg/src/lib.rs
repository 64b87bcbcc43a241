//! Aggregation-based algebraic multigrid preconditioning for graph
//! Laplacian systems, built from three pieces that are usually heuristic
//! but are exact here:
//!
//! - **Aggressive coarsening**: aggregates grown around a maximal
//!   independent set of the distance-`k` graph, giving coarsening factors
//!   near `k²` in 2D with piecewise-constant (0/1) interpolation and
//!   entry-summation Galerkin coarse operators ([`aggregation`]).
//! - **Optimal polynomial smoothing**: the relaxation applies `q(A)` where
//!   `q` is the best uniform approximation to `1/x` on a spectral
//!   interval, constructed by an exchange algorithm and verified against
//!   its closed-form error `δ^m (κ−1)/2` ([`smoother`]).
//! - **Stabilized cycles**: stationary AMLI (a Chebyshev polynomial in the
//!   preconditioned coarse operator at every junction) or nonlinear AMLI
//!   (inner flexible-CG junctions), preconditioning conjugate gradients
//!   resp. flexible conjugate gradients ([`multilevel`], [`krylov`]).
//!
//! A dense analysis toolkit measures the constants of the two-grid theory
//! and checks the measured spectrum against the closed-form bound
//! ([`analysis`]), and an experiment harness reproduces iteration-count
//! tables and emits schema-stable reports ([`experiment`]).
//!
//! # Quick start
//!
//! ```
//! use polyamg::multilevel::{CycleConfig, Hierarchy};
//! use polyamg::krylov::{pcg, a_norm_error_monitor};
//! use polyamg::problem::{grid2d, manufacture_rhs};
//!
//! let problem = grid2d(16).unwrap();
//! let config = CycleConfig { mis_power: 2, coarsest_size: 20, ..CycleConfig::default() };
//! let hierarchy = Hierarchy::setup(&problem, config).unwrap();
//!
//! let (u_star, f) = manufacture_rhs(&problem, 7);
//! let monitor = a_norm_error_monitor(&problem.matrix, &u_star);
//! let mut precond = |r: &[f64]| hierarchy.apply(r);
//! let (x, report) = pcg(
//!     &problem.matrix, &f, &mut precond, &vec![0.0; 256],
//!     1e-8, 100, hierarchy.kernel(), &monitor,
//! ).unwrap();
//! assert!(report.converged);
//! ```
//!
//! The [`guide`] module holds the full user guide; the same text builds
//! as an mdBook from the repository's `book/` directory.

// Numeric kernels walk several parallel arrays in lockstep, and parameter
// guards negate comparisons deliberately so that NaN fails closed.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod analysis;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod io;
pub mod krylov;
pub mod multilevel;
pub mod problem;
pub mod smoother;
pub mod sparse;

pub use aggregation::Partition;
pub use error::{Error, Result};
pub use krylov::{a_norm_error_monitor, fcg, pcg, Monitor, SolveReport};
pub use multilevel::{CycleConfig, CycleKind, Hierarchy};
pub use problem::{grid2d, grid3d, Graph, ProblemInstance};
pub use smoother::PolySmoother;
pub use sparse::SparseMatrix;

/// The user guide, one module per chapter. The chapters live in the
/// repository's `book/` directory (built with mdBook) and are included
/// here verbatim so every code example runs as a documentation test.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}

    #[doc = include_str!("../../../book/src/laplacians.md")]
    pub mod laplacians {}

    #[doc = include_str!("../../../book/src/smoothers.md")]
    pub mod smoothers {}

    #[doc = include_str!("../../../book/src/coarsening.md")]
    pub mod coarsening {}

    #[doc = include_str!("../../../book/src/cycles.md")]
    pub mod cycles {}

    #[doc = include_str!("../../../book/src/krylov.md")]
    pub mod krylov {}

    #[doc = include_str!("../../../book/src/analysis.md")]
    pub mod analysis {}

    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
