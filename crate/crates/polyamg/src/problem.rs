//! Graph Laplacian problem construction: grids, explicit graphs, file
//! ingestion, and manufactured right-hand sides.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::path::Path;

/// An undirected graph with optional positive edge weights and optional
/// nonnegative boundary (diagonal) terms.
#[derive(Debug, Clone)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    weights: Option<Vec<f64>>,
    boundary: Vec<(usize, f64)>,
}

impl Graph {
    /// Builds an unweighted graph, normalizing each edge to (min, max) order.
    ///
    /// Self-loops and duplicate edges are rejected; connectivity is checked
    /// where a Laplacian is built, not here.
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::IndexOutOfRange(format!(
                    "edge ({a}, {b}) outside vertex range 0..{num_vertices}"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        let mut sorted = normalized.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate edge".to_string()));
        }
        Ok(Self {
            num_vertices,
            edges: normalized,
            weights: None,
            boundary: Vec::new(),
        })
    }

    /// Attaches positive edge weights, parallel to the edge list.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch(
                "one weight per edge required".to_string(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::InvalidArgument(format!("non-positive edge weight {w}")));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Attaches boundary terms (vertex, d) with d > 0.
    pub fn with_boundary(mut self, boundary: Vec<(usize, f64)>) -> Result<Self> {
        for &(i, d) in &boundary {
            if i >= self.num_vertices {
                return Err(Error::IndexOutOfRange(format!(
                    "boundary vertex {i} outside range"
                )));
            }
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "boundary term at vertex {i} must be positive, got {d}"
                )));
            }
        }
        self.boundary = boundary;
        Ok(self)
    }

    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// The normalized edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge weights, if attached.
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Boundary terms as (vertex, d) pairs.
    pub fn boundary(&self) -> &[(usize, f64)] {
        &self.boundary
    }

    /// Adjacency lists, sorted per vertex.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Whether every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        first_unreachable(&self.adjacency()).is_none()
    }
}

/// Index of the first vertex unreachable from vertex 0, if any.
pub(crate) fn first_unreachable(adj: &[Vec<usize>]) -> Option<usize> {
    let n = adj.len();
    if n == 0 {
        return None;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen.iter().position(|s| !s)
}

/// A ready-to-solve symmetric positive semidefinite system.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    /// The operator: a (possibly boundary-augmented) graph Laplacian.
    pub matrix: SparseMatrix,
    /// Kernel vector (the constants) when the operator is singular; absent
    /// when boundary terms make it definite.
    pub kernel: Option<Vec<f64>>,
    /// Human-readable problem name for reports.
    pub label: String,
}

/// Assembles the weighted graph Laplacian of `g`, plus boundary terms.
///
/// Diagonal entries are the weighted vertex degrees plus `d_i`; off-diagonal
/// entries are the negated edge weights. The kernel is the constant vector
/// exactly when no boundary terms are present.
pub fn laplacian_from_graph(g: &Graph) -> Result<ProblemInstance> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(Error::InvalidArgument("empty graph".to_string()));
    }
    if let Some(v) = first_unreachable(&g.adjacency()) {
        return Err(Error::Disconnected { vertex: v });
    }
    let mut triplets = Vec::with_capacity(4 * g.edges().len() + n);
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        let w = g.weights().map_or(1.0, |ws| ws[e]);
        triplets.push((a, b, -w));
        triplets.push((b, a, -w));
        triplets.push((a, a, w));
        triplets.push((b, b, w));
    }
    for &(i, d) in g.boundary() {
        triplets.push((i, i, d));
    }
    let matrix = SparseMatrix::assemble(n, n, &triplets)?;
    let kernel = if g.boundary().is_empty() {
        Some(vec![1.0; n])
    } else {
        None
    };
    Ok(ProblemInstance {
        matrix,
        kernel,
        label: format!("graph({n})"),
    })
}

/// The path graph on `n` vertices as a Laplacian problem.
pub fn path_graph(n: usize) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("path needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let mut p = laplacian_from_graph(&Graph::new(n, &edges)?)?;
    p.label = format!("path({n})");
    Ok(p)
}

/// The unweighted Laplacian of the n-by-n grid graph (4-neighbor stencil).
pub fn grid2d(n: usize) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid2d needs n >= 2, got {n}")));
    }
    let id = |i: usize, j: usize| i * n + j;
    let mut edges = Vec::with_capacity(2 * n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if j + 1 < n {
                edges.push((id(i, j), id(i, j + 1)));
            }
            if i + 1 < n {
                edges.push((id(i, j), id(i + 1, j)));
            }
        }
    }
    let mut p = laplacian_from_graph(&Graph::new(n * n, &edges)?)?;
    p.label = format!("grid2d({n})");
    Ok(p)
}

/// The unweighted Laplacian of the n-by-n-by-n grid graph (6-neighbor).
pub fn grid3d(n: usize) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid3d needs n >= 2, got {n}")));
    }
    let id = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut edges = Vec::with_capacity(3 * n * n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if k + 1 < n {
                    edges.push((id(i, j, k), id(i, j, k + 1)));
                }
                if j + 1 < n {
                    edges.push((id(i, j, k), id(i, j + 1, k)));
                }
                if i + 1 < n {
                    edges.push((id(i, j, k), id(i + 1, j, k)));
                }
            }
        }
    }
    let mut p = laplacian_from_graph(&Graph::new(n * n * n, &edges)?)?;
    p.label = format!("grid3d({n})");
    Ok(p)
}

/// On-disk graph formats accepted by [`read_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// Matrix Market coordinate file holding the Laplacian itself.
    MatrixMarket,
    /// Text edge list, one `i j [w]` per line, 0-based, `#` comments.
    EdgeList,
}

/// Reads a Laplacian problem from a file.
///
/// Edge lists go through [`laplacian_from_graph`]. A Matrix Market file is
/// interpreted as the operator itself: it must be symmetric with
/// non-positive off-diagonals (which become edge weights `w = -a_ij`) and
/// nonnegative row sums (which become boundary terms).
pub fn read_graph(path: &Path, format: GraphFormat) -> Result<ProblemInstance> {
    let label = path
        .file_stem()
        .map_or_else(|| "graph-file".to_string(), |s| s.to_string_lossy().into_owned());
    let mut p = match format {
        GraphFormat::EdgeList => {
            let (n, edges, weights) = crate::io::read_edge_list(path)?;
            let g = Graph::new(n, &edges)?;
            let g = match weights {
                Some(w) => g.with_weights(w)?,
                None => g,
            };
            laplacian_from_graph(&g)?
        }
        GraphFormat::MatrixMarket => {
            let a = crate::io::read_matrix_market(path)?;
            problem_from_matrix(a)?
        }
    };
    p.label = label;
    Ok(p)
}

/// Validates a symmetric M-matrix-like operator and wraps it as a problem.
fn problem_from_matrix(a: SparseMatrix) -> Result<ProblemInstance> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operator must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if !a.is_symmetric(0.0) {
        return Err(Error::InvalidArgument(
            "operator read from file is not symmetric".to_string(),
        ));
    }
    for (i, j, v) in a.iter() {
        if i != j && v > 0.0 {
            return Err(Error::PositiveOffDiagonal { row: i, col: j, value: v });
        }
    }
    if let Some(v) = first_unreachable(&a.pattern_adjacency()) {
        return Err(Error::Disconnected { vertex: v });
    }
    let scale = a.inf_norm().max(1.0);
    let sums = a.row_sums();
    if let Some((i, &s)) = sums
        .iter()
        .enumerate()
        .find(|(_, &s)| s < -1e-12 * scale)
    {
        return Err(Error::InvalidArgument(format!(
            "row {i} has negative row sum {s}; not a boundary-augmented Laplacian"
        )));
    }
    let singular = sums.iter().all(|&s| s.abs() <= 1e-12 * scale);
    let kernel = singular.then(|| vec![1.0; n]);
    Ok(ProblemInstance {
        matrix: a,
        kernel,
        label: format!("matrix({n})"),
    })
}

/// Recovers the underlying graph of an assembled Laplacian: strict-upper
/// off-diagonal entries become edges with weight `-a_ij`, and positive row
/// sums become boundary terms. Uniform unit weights are normalized to an
/// unweighted graph.
pub fn graph_from_matrix(a: &SparseMatrix) -> Result<Graph> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operator must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for (i, j, v) in a.iter() {
        if i >= j || v == 0.0 {
            continue;
        }
        if v > 0.0 {
            return Err(Error::PositiveOffDiagonal { row: i, col: j, value: v });
        }
        edges.push((i, j));
        weights.push(-v);
    }
    let mut g = Graph::new(n, &edges)?;
    if !weights.iter().all(|&w| w == 1.0) {
        g = g.with_weights(weights)?;
    }
    let scale = a.inf_norm().max(1.0);
    let boundary: Vec<(usize, f64)> = a
        .row_sums()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1e-12 * scale)
        .map(|(i, &s)| (i, s))
        .collect();
    if !boundary.is_empty() {
        g = g.with_boundary(boundary)?;
    }
    Ok(g)
}

/// Draws a manufactured solution and its right-hand side.
///
/// The solution is seeded uniform on (-1, 1), projected orthogonal to the
/// kernel when one is present; the right-hand side is `A u*`, consistent by
/// construction.
pub fn manufacture_rhs(p: &ProblemInstance, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let n = p.matrix.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if let Some(k) = &p.kernel {
        let ksq: f64 = k.iter().map(|x| x * x).sum();
        let uk: f64 = u.iter().zip(k).map(|(a, b)| a * b).sum();
        let coef = uk / ksq;
        for (ui, ki) in u.iter_mut().zip(k) {
            *ui -= coef * ki;
        }
    }
    let f = p.matrix.spmv(&u).expect("square operator");
    (u, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{dense_pseudo_solve, sym_eigen};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn path2_laplacian() {
        let p = path_graph(2).unwrap();
        assert_eq!(p.matrix.get(0, 0), 1.0);
        assert_eq!(p.matrix.get(0, 1), -1.0);
        assert_eq!(p.matrix.get(1, 0), -1.0);
        assert_eq!(p.matrix.get(1, 1), 1.0);
        assert!(p.kernel.is_some());
    }

    #[test]
    fn boundary_term_removes_kernel() {
        let g = Graph::new(2, &[(0, 1)])
            .unwrap()
            .with_boundary(vec![(0, 1.0)])
            .unwrap();
        let p = laplacian_from_graph(&g).unwrap();
        assert_eq!(p.matrix.get(0, 0), 2.0);
        assert_eq!(p.matrix.get(1, 1), 1.0);
        assert_eq!(p.matrix.get(0, 1), -1.0);
        assert!(p.kernel.is_none());
    }

    #[test]
    fn triangle_laplacian() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = laplacian_from_graph(&g).unwrap();
        for i in 0..3 {
            assert_eq!(p.matrix.get(i, i), 2.0);
        }
        for s in p.matrix.row_sums() {
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn disconnected_graph_rejected() {
        let g = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            laplacian_from_graph(&g),
            Err(Error::Disconnected { vertex: 2 })
        ));
    }

    #[test]
    fn graph_rejects_self_loops_and_duplicates() {
        assert!(Graph::new(3, &[(1, 1)]).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn grid2d_small_cases() {
        let p = grid2d(2).unwrap();
        for i in 0..4 {
            assert_eq!(p.matrix.get(i, i), 2.0);
        }
        assert_eq!(p.matrix.nnz(), 4 + 2 * 2 * 2);

        let p3 = grid2d(3).unwrap();
        assert_eq!(p3.matrix.nrows(), 9);
        assert_eq!(p3.matrix.nnz(), 33);
        assert_eq!(p3.matrix.inf_norm(), 8.0);
    }

    #[test]
    fn grid3d_small_cases() {
        let p = grid3d(2).unwrap();
        assert_eq!(p.matrix.nrows(), 8);
        for i in 0..8 {
            assert_eq!(p.matrix.get(i, i), 3.0);
        }
        let p3 = grid3d(3).unwrap();
        assert_eq!(p3.matrix.nrows(), 27);
        assert_eq!(p3.matrix.nnz(), 27 + 2 * 3 * 9 * 2);
        assert_eq!(p3.matrix.inf_norm(), 12.0);
    }

    #[test]
    fn grids_reject_degenerate_sizes() {
        assert!(grid2d(1).is_err());
        assert!(grid3d(0).is_err());
    }

    #[test]
    fn grid_nnz_formula() {
        for n in 2..8 {
            assert_eq!(grid2d(n).unwrap().matrix.nnz(), n * n + 2 * 2 * n * (n - 1));
            assert_eq!(
                grid3d(n).unwrap().matrix.nnz(),
                n * n * n + 2 * 3 * n * n * (n - 1)
            );
        }
    }

    #[test]
    fn graph_from_matrix_roundtrips() {
        // Unweighted grid: recovered graph rebuilds the exact operator and
        // stays unweighted.
        let p = grid2d(4).unwrap();
        let g = graph_from_matrix(&p.matrix).unwrap();
        assert!(g.weights().is_none());
        assert!(g.boundary().is_empty());
        assert_eq!(g.edges().len(), 2 * 4 * 3);
        let rebuilt = laplacian_from_graph(&g).unwrap();
        assert_eq!(rebuilt.matrix.nnz(), p.matrix.nnz());
        for (i, j, v) in p.matrix.iter() {
            assert_eq!(rebuilt.matrix.get(i, j), v);
        }

        // Weighted + boundary.
        let g0 = Graph::new(3, &[(0, 1), (1, 2)])
            .unwrap()
            .with_weights(vec![2.0, 0.5])
            .unwrap()
            .with_boundary(vec![(2, 0.25)])
            .unwrap();
        let p0 = laplacian_from_graph(&g0).unwrap();
        let g1 = graph_from_matrix(&p0.matrix).unwrap();
        assert_eq!(g1.weights().unwrap(), &[2.0, 0.5]);
        assert_eq!(g1.boundary(), &[(2, 0.25)]);
        let p1 = laplacian_from_graph(&g1).unwrap();
        for (i, j, v) in p0.matrix.iter() {
            assert!((p1.matrix.get(i, j) - v).abs() < 1e-15);
        }
    }

    #[test]
    fn manufacture_is_deterministic_and_consistent() {
        let p = grid2d(4).unwrap();
        let (u1, f1) = manufacture_rhs(&p, 7);
        let (u2, f2) = manufacture_rhs(&p, 7);
        assert_eq!(u1, u2);
        assert_eq!(f1, f2);
        let (u3, _) = manufacture_rhs(&p, 8);
        assert_ne!(u1, u3);

        let fk: f64 = f1.iter().sum();
        let fnorm = f1.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(fk.abs() <= 1e-12 * fnorm.max(1.0));
        let uk: f64 = u1.iter().sum();
        assert!(uk.abs() < 1e-12);
    }

    #[test]
    fn manufactured_solution_recovered_by_dense_solve() {
        let p = grid2d(4).unwrap();
        let (u, f) = manufacture_rhs(&p, 0);
        let x = dense_pseudo_solve(&p.matrix.to_dense(), &f, p.kernel.as_deref()).unwrap();
        for (xi, ui) in x.iter().zip(&u) {
            assert!((xi - ui).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn random_laplacians_are_psd(n in 2usize..20, extra in 0usize..30, seed in 0u64..500) {
            // Random connected graph: a path plus `extra` random chords.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            for _ in 0..extra {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let p = laplacian_from_graph(&Graph::new(n, &edges).unwrap()).unwrap();
            prop_assert!(p.matrix.is_symmetric(0.0));
            for (i, j, v) in p.matrix.iter() {
                if i != j {
                    prop_assert!(v <= 0.0);
                }
            }
            let (vals, _) = sym_eigen(&p.matrix.to_dense()).unwrap();
            prop_assert!(vals[0] >= -1e-12 * p.matrix.inf_norm());
        }
    }
}
