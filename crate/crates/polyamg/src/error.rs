//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while assembling, coarsening, or solving.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A row/column index is outside the declared matrix shape.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A parameter value is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Underlying file I/O failed.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    /// A graph or matrix file could not be parsed.
    #[error("parse failure at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An input graph has a positive off-diagonal entry, so it is not a
    /// (weighted) Laplacian candidate.
    #[error("positive off-diagonal entry at ({row}, {col}): {value}")]
    PositiveOffDiagonal { row: usize, col: usize, value: f64 },

    /// The input graph is not connected.
    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },

    /// The vertex set handed to aggregation does not cover the graph within
    /// distance `k`, i.e. it is not a maximal independent set on the
    /// distance-`k` graph.
    #[error("aggregation seed set is not maximal: vertex {vertex} is farther than {k} from every root")]
    NotMaximal { vertex: usize, k: usize },

    /// The exchange iteration for the best uniform inverse approximation
    /// failed to equioscillate.
    #[error("polynomial equioscillation did not converge after {iterations} iterations (spread {spread:.3e})")]
    RemezStalled { iterations: usize, spread: f64 },

    /// A constructed polynomial failed validation against its closed-form
    /// error value.
    #[error("polynomial validation failed: measured error {measured:.12e}, closed form {expected:.12e}")]
    ApproximationMismatch { measured: f64, expected: f64 },

    /// The inverse-approximation polynomial is not strictly positive on the
    /// target interval, so it cannot act as an SPD smoother.
    #[error("smoother polynomial of degree {degree} is not positive on (0, {lambda1}]; increase the degree")]
    IndefiniteSmoother { degree: usize, lambda1: f64 },

    /// Coarsening made no progress: the coarse matrix is as large as the
    /// fine one.
    #[error("coarsening stagnated at level {level}: {n} aggregates for {n} vertices")]
    CoarseningStagnated { level: usize, n: usize },

    /// A right-hand side has a component in the operator kernel that is too
    /// large to attribute to rounding.
    #[error("right-hand side is inconsistent: kernel component {component:.3e} exceeds tolerance")]
    InconsistentRhs { component: f64 },

    /// Dense factorization failed (matrix not SPD after deflation, or
    /// numerically singular).
    #[error("dense factorization failed: {0}")]
    FactorizationFailed(String),

    /// A Krylov iteration hit a direction of non-positive curvature, so the
    /// operator or preconditioner is not SPD in floating point.
    #[error("iteration breakdown: {0}")]
    Breakdown(String),

    /// A dense computation was requested on a problem above the supported
    /// size cap.
    #[error("dense computation cap exceeded: size {size} > cap {cap}")]
    DenseCapExceeded { size: usize, cap: usize },
}
