//! Graph coarsening: distance-k maximal independent sets, aggregate growth
//! by simultaneous BFS, size regularization, piecewise-constant transfer
//! operators, and the Galerkin coarse operator.
//!
//! All operations work on plain adjacency lists so they apply equally to
//! explicit graphs ([`crate::problem::Graph::adjacency`]) and to the
//! sparsity pattern of coarse operators
//! ([`crate::sparse::SparseMatrix::pattern_adjacency`]). The distance-k
//! graph is never formed: distances are explored by BFS balls of radius k.

use crate::error::{Error, Result};
use crate::problem::Graph;
use crate::sparse::SparseMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// A disjoint cover of the vertices by connected aggregates, each grown
/// from a root of a distance-k independent set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Number of aggregates n_H.
    pub num_aggregates: usize,
    /// Aggregate id of every vertex (total map).
    pub aggregate_of: Vec<usize>,
    /// One root vertex per aggregate (the seed it grew from).
    pub roots: Vec<usize>,
    /// Per-aggregate cardinalities.
    pub sizes: Vec<usize>,
}

impl Partition {
    /// Vertex lists per aggregate, in ascending vertex order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.num_aggregates];
        for (v, &a) in self.aggregate_of.iter().enumerate() {
            m[a].push(v);
        }
        m
    }

    /// Exhaustively checks the partition invariants on its graph:
    /// total disjoint cover, nonempty connected aggregates, roots belonging
    /// to their aggregates and pairwise farther than `k` apart.
    pub fn validate(&self, adj: &[Vec<usize>], k: usize) -> Result<()> {
        let n = adj.len();
        if self.aggregate_of.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "partition covers {} vertices, graph has {n}",
                self.aggregate_of.len()
            )));
        }
        if self.roots.len() != self.num_aggregates || self.sizes.len() != self.num_aggregates {
            return Err(Error::DimensionMismatch(
                "roots/sizes length must equal num_aggregates".to_string(),
            ));
        }
        let members = self.members();
        for (l, mem) in members.iter().enumerate() {
            if mem.is_empty() {
                return Err(Error::InvalidArgument(format!("aggregate {l} is empty")));
            }
            if mem.len() != self.sizes[l] {
                return Err(Error::InvalidArgument(format!(
                    "aggregate {l} has {} members but declared size {}",
                    mem.len(),
                    self.sizes[l]
                )));
            }
            let root = self.roots[l];
            if self.aggregate_of[root] != l {
                return Err(Error::InvalidArgument(format!(
                    "root {root} of aggregate {l} is assigned elsewhere"
                )));
            }
            // Connectivity inside the aggregate by restricted BFS.
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([mem[0]]);
            seen[mem[0]] = true;
            let mut count = 1;
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] && self.aggregate_of[w] == l {
                        seen[w] = true;
                        count += 1;
                        queue.push_back(w);
                    }
                }
            }
            if count != mem.len() {
                return Err(Error::InvalidArgument(format!(
                    "aggregate {l} is disconnected"
                )));
            }
        }
        // Roots pairwise farther than k: BFS ball of radius k around each
        // root must contain no other root.
        for (l, &r) in self.roots.iter().enumerate() {
            let dist = bfs_capped(adj, &[r], k);
            for (other, &s) in self.roots.iter().enumerate() {
                if other != l && dist[s] <= k as u32 {
                    return Err(Error::InvalidArgument(format!(
                        "roots {r} and {s} are within distance {k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// BFS distances from a set of sources, capped at `cap`; unreached vertices
/// (within the cap) keep u32::MAX.
fn bfs_capped(adj: &[Vec<usize>], sources: &[usize], cap: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d as usize >= cap {
            continue;
        }
        for &w in &adj[v] {
            if dist[w] > d + 1 {
                dist[w] = d + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Greedy maximal independent set in the distance-k graph.
///
/// Vertices are visited in natural order when `seed` is `None`, otherwise in
/// a seeded random permutation. A vertex is selected when no already
/// selected vertex lies within distance k; selection then marks its BFS
/// ball of radius k. Returns the roots in selection order.
pub fn mis_distance_k(adj: &[Vec<usize>], k: usize, seed: Option<u64>) -> Vec<usize> {
    let n = adj.len();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(s) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        order.shuffle(&mut rng);
    }
    // dist_to_s[v] = distance from the selected set, capped at k.
    let mut dist_to_s = vec![u32::MAX; n];
    let mut selected = Vec::new();
    let mut queue = VecDeque::new();
    for &v in &order {
        if dist_to_s[v] <= k as u32 {
            continue;
        }
        selected.push(v);
        dist_to_s[v] = 0;
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            let d = dist_to_s[u];
            if d as usize >= k {
                continue;
            }
            for &w in &adj[u] {
                if dist_to_s[w] > d + 1 {
                    dist_to_s[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    selected
}

/// Grows aggregates from the roots by simultaneous BFS rounds.
///
/// In each round every unassigned vertex adjacent to an assigned one joins
/// an aggregate; when several fronts reach it in the same round, the
/// aggregate with the smaller root vertex id wins. MIS maximality
/// guarantees assignment within k rounds; a vertex left over afterwards
/// means `roots` was not maximal.
pub fn build_aggregates(adj: &[Vec<usize>], roots: &[usize], k: usize) -> Result<Partition> {
    let n = adj.len();
    let unassigned = usize::MAX;
    let mut aggregate_of = vec![unassigned; n];
    for (l, &r) in roots.iter().enumerate() {
        if r >= n {
            return Err(Error::IndexOutOfRange(format!("root {r} outside graph")));
        }
        if aggregate_of[r] != unassigned {
            return Err(Error::InvalidArgument(format!("duplicate root {r}")));
        }
        aggregate_of[r] = l;
    }
    let mut frontier: Vec<usize> = roots.to_vec();
    for _ in 0..k {
        // Best candidate aggregate per vertex for this round.
        let mut best: Vec<usize> = vec![unassigned; n];
        let mut touched = Vec::new();
        for &v in &frontier {
            let l = aggregate_of[v];
            for &w in &adj[v] {
                if aggregate_of[w] != unassigned {
                    continue;
                }
                if best[w] == unassigned {
                    best[w] = l;
                    touched.push(w);
                } else if roots[l] < roots[best[w]] {
                    best[w] = l;
                }
            }
        }
        if touched.is_empty() {
            break;
        }
        touched.sort_unstable();
        for &w in &touched {
            aggregate_of[w] = best[w];
        }
        frontier = touched;
    }
    if let Some(v) = aggregate_of.iter().position(|&a| a == unassigned) {
        return Err(Error::NotMaximal { vertex: v, k });
    }
    let mut sizes = vec![0usize; roots.len()];
    for &a in &aggregate_of {
        sizes[a] += 1;
    }
    Ok(Partition {
        num_aggregates: roots.len(),
        aggregate_of,
        roots: roots.to_vec(),
        sizes,
    })
}

/// Absorbs undersized aggregates into a neighboring aggregate to even out
/// the coarsening factor.
///
/// Aggregates smaller than `absorb_frac` times the entry average size are
/// merged (in ascending id order) into the smallest adjacent surviving
/// aggregate, preferring the one sharing more boundary edges on a size tie,
/// then the smaller id. Ids are compacted preserving order; surviving roots
/// are a subset of the input roots, so all partition invariants survive.
pub fn condense(adj: &[Vec<usize>], p: &Partition, absorb_frac: f64) -> Partition {
    let n = adj.len();
    let nh = p.num_aggregates;
    let threshold = absorb_frac * n as f64 / nh as f64;
    let mut aggregate_of = p.aggregate_of.clone();
    let mut members = p.members();
    let mut alive = vec![true; nh];

    for a in 0..nh {
        if !alive[a] || members[a].len() as f64 >= threshold {
            continue;
        }
        // Count boundary edges to each live neighboring aggregate.
        let mut counts: Vec<(usize, usize)> = Vec::new(); // (aggregate, edge count)
        for &v in &members[a] {
            for &w in &adj[v] {
                let b = aggregate_of[w];
                if b != a && alive[b] {
                    match counts.iter_mut().find(|(agg, _)| *agg == b) {
                        Some((_, c)) => *c += 1,
                        None => counts.push((b, 1)),
                    }
                }
            }
        }
        let Some(&(receiver, _)) = counts.iter().min_by_key(|&&(b, c)| {
            (members[b].len(), std::cmp::Reverse(c), b)
        }) else {
            continue;
        };
        let moved = std::mem::take(&mut members[a]);
        for &v in &moved {
            aggregate_of[v] = receiver;
        }
        members[receiver].extend(moved);
        alive[a] = false;
    }

    // Compact ids, preserving order.
    let mut remap = vec![usize::MAX; nh];
    let mut roots = Vec::new();
    for a in 0..nh {
        if alive[a] {
            remap[a] = roots.len();
            roots.push(p.roots[a]);
        }
    }
    let aggregate_of: Vec<usize> = aggregate_of.into_iter().map(|a| remap[a]).collect();
    let mut sizes = vec![0usize; roots.len()];
    for &a in &aggregate_of {
        sizes[a] += 1;
    }
    Partition {
        num_aggregates: roots.len(),
        aggregate_of,
        roots,
        sizes,
    }
}

/// The piecewise-constant interpolation P: n-by-n_H with a single unit
/// entry per row at the vertex's aggregate.
pub fn interpolation(p: &Partition) -> SparseMatrix {
    let triplets: Vec<_> = p
        .aggregate_of
        .iter()
        .enumerate()
        .map(|(i, &a)| (i, a, 1.0))
        .collect();
    SparseMatrix::assemble(p.aggregate_of.len(), p.num_aggregates, &triplets)
        .expect("partition indices are in range")
}

/// The l2-orthogonal projection onto the piecewise-constant space:
/// per-aggregate averaging.
pub fn project_q(p: &Partition, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != p.aggregate_of.len() {
        return Err(Error::DimensionMismatch(format!(
            "project_q on {} vertices with vector length {}",
            p.aggregate_of.len(),
            v.len()
        )));
    }
    let mut sums = vec![0.0; p.num_aggregates];
    for (i, &a) in p.aggregate_of.iter().enumerate() {
        sums[a] += v[i];
    }
    for (s, &c) in sums.iter_mut().zip(&p.sizes) {
        *s /= c as f64;
    }
    Ok(p.aggregate_of.iter().map(|&a| sums[a]).collect())
}

/// The Galerkin coarse operator A_H = P^T A P, computed by one pass of
/// entry summation: every stored A_ij contributes to (A_H) at
/// (aggregate(i), aggregate(j)).
pub fn galerkin(a: &SparseMatrix, p: &Partition) -> Result<SparseMatrix> {
    if a.nrows() != p.aggregate_of.len() || a.ncols() != p.aggregate_of.len() {
        return Err(Error::DimensionMismatch(format!(
            "galerkin of {}x{} operator with partition of {} vertices",
            a.nrows(),
            a.ncols(),
            p.aggregate_of.len()
        )));
    }
    let triplets: Vec<_> = a
        .iter()
        .map(|(i, j, v)| (p.aggregate_of[i], p.aggregate_of[j], v))
        .collect();
    SparseMatrix::assemble(p.num_aggregates, p.num_aggregates, &triplets)
}

/// The quotient graph: aggregates as vertices, an edge where any fine edge
/// crosses between two aggregates.
pub fn coarse_graph(adj: &[Vec<usize>], p: &Partition) -> Result<Graph> {
    let mut edges = std::collections::BTreeSet::new();
    for (v, neighbors) in adj.iter().enumerate() {
        let a = p.aggregate_of[v];
        for &w in neighbors {
            let b = p.aggregate_of[w];
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::new(p.num_aggregates, &edges)
}

/// All-pairs BFS eccentricity of one aggregate's induced subgraph; used by
/// coarsening diagnostics.
pub fn aggregate_diameter(adj: &[Vec<usize>], p: &Partition, aggregate: usize) -> usize {
    let members: Vec<usize> = p
        .aggregate_of
        .iter()
        .enumerate()
        .filter(|&(_, &a)| a == aggregate)
        .map(|(v, _)| v)
        .collect();
    let mut diameter = 0;
    for &start in &members {
        let mut dist = vec![u32::MAX; adj.len()];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if p.aggregate_of[w] == aggregate && dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for &v in &members {
            if dist[v] != u32::MAX {
                diameter = diameter.max(dist[v] as usize);
            }
        }
    }
    diameter
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{grid2d, path_graph, Graph};

    fn path_adj(n: usize) -> Vec<Vec<usize>> {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap().adjacency()
    }

    /// Exact all-pairs check of independence and maximality.
    fn assert_mis(adj: &[Vec<usize>], s: &[usize], k: usize) {
        let dist = |from: usize| bfs_capped(adj, &[from], adj.len());
        for (i, &a) in s.iter().enumerate() {
            let d = dist(a);
            for &b in &s[i + 1..] {
                assert!(d[b] as usize > k, "roots {a}, {b} too close");
            }
        }
        let from_s = bfs_capped(adj, s, adj.len());
        for v in 0..adj.len() {
            assert!(from_s[v] as usize <= k, "vertex {v} uncovered");
        }
    }

    #[test]
    fn mis_path5_natural_order() {
        let adj = path_adj(5);
        let s = mis_distance_k(&adj, 2, None);
        assert_eq!(s, vec![0, 3]);
        assert_mis(&adj, &s, 2);
    }

    #[test]
    fn mis_single_vertex_and_complete_graph() {
        assert_eq!(mis_distance_k(&[Vec::new()], 3, None), vec![0]);
        let k4 = Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
            .unwrap()
            .adjacency();
        assert_eq!(mis_distance_k(&k4, 1, None).len(), 1);
        assert_eq!(mis_distance_k(&k4, 1, Some(42)).len(), 1);
    }

    #[test]
    fn mis_is_independent_and_maximal_on_grids() {
        let adj = grid2d(8).unwrap().matrix.pattern_adjacency();
        for seed in [None, Some(0), Some(1)] {
            for k in 1..=4 {
                let s = mis_distance_k(&adj, k, seed);
                assert_mis(&adj, &s, k);
            }
        }
    }

    #[test]
    fn mis_deterministic_per_seed() {
        let adj = grid2d(6).unwrap().matrix.pattern_adjacency();
        assert_eq!(mis_distance_k(&adj, 2, Some(7)), mis_distance_k(&adj, 2, Some(7)));
        assert_ne!(mis_distance_k(&adj, 2, Some(7)), mis_distance_k(&adj, 2, None));
    }

    #[test]
    fn aggregates_path5_tie_goes_to_root_3() {
        let adj = path_adj(5);
        let p = build_aggregates(&adj, &[0, 3], 2).unwrap();
        assert_eq!(p.aggregate_of, vec![0, 0, 1, 1, 1]);
        assert_eq!(p.sizes, vec![2, 3]);
        assert_eq!(p.roots, vec![0, 3]);
        p.validate(&adj, 2).unwrap();
    }

    #[test]
    fn aggregates_single_root_covers_path2() {
        let adj = path_adj(2);
        let p = build_aggregates(&adj, &[0], 1).unwrap();
        assert_eq!(p.aggregate_of, vec![0, 0]);
    }

    #[test]
    fn aggregates_error_when_seed_set_not_maximal() {
        let adj = path_adj(6);
        // Root 0 with k=2 cannot reach vertices 3..5.
        let err = build_aggregates(&adj, &[0], 2).unwrap_err();
        assert!(matches!(err, Error::NotMaximal { vertex: 3, k: 2 }));
    }

    #[test]
    fn aggregates_grid8_k4_properties() {
        let adj = grid2d(8).unwrap().matrix.pattern_adjacency();
        for seed in [None, Some(0)] {
            let s = mis_distance_k(&adj, 4, seed);
            let p = build_aggregates(&adj, &s, 4).unwrap();
            p.validate(&adj, 4).unwrap();
            for &size in &p.sizes {
                assert!((1..=41).contains(&size));
            }
        }
    }

    #[test]
    fn smaller_root_id_wins_ties() {
        // Star path: 0 - 1 - 2 with roots 0 and 2; vertex 1 is reached by
        // both in round 1 and must join root 0.
        let adj = path_adj(3);
        let p = build_aggregates(&adj, &[2, 0], 1).unwrap();
        // roots[0] = 2, roots[1] = 0; vertex 1 ties and root id 0 < 2 wins.
        assert_eq!(p.aggregate_of[1], 1);
    }

    #[test]
    fn condense_absorbs_small_aggregates() {
        // Path-7 with roots {0, 3, 6} at k=1 gives sizes {2, 3, 2}; with an
        // aggressive threshold the small ends get absorbed into the middle.
        let adj = path_adj(7);
        let p = build_aggregates(&adj, &[0, 3, 6], 2).unwrap();
        assert_eq!(p.sizes, vec![2, 3, 2]);
        let c = condense(&adj, &p, 1.0); // threshold ~2.33: absorbs both ends
        assert!(c.num_aggregates < 3);
        c.validate(&adj, 0).unwrap();
        let total: usize = c.sizes.iter().sum();
        assert_eq!(total, 7);
    }

    #[test]
    fn condense_noop_when_frac_zero() {
        let adj = path_adj(5);
        let p = build_aggregates(&adj, &[0, 3], 2).unwrap();
        let c = condense(&adj, &p, 0.0);
        assert_eq!(c, p);
    }

    #[test]
    fn interpolation_rows_and_identity() {
        let adj = path_adj(4);
        let p = build_aggregates(&adj, &[0, 3], 2).unwrap();
        assert_eq!(p.aggregate_of, vec![0, 0, 1, 1]);
        let pm = interpolation(&p);
        assert_eq!(pm.nrows(), 4);
        assert_eq!(pm.ncols(), 2);
        for i in 0..4 {
            let (cols, vals) = pm.row(i);
            assert_eq!(cols, &[p.aggregate_of[i]]);
            assert_eq!(vals, &[1.0]);
        }

        let singletons = Partition {
            num_aggregates: 3,
            aggregate_of: vec![0, 1, 2],
            roots: vec![0, 1, 2],
            sizes: vec![1, 1, 1],
        };
        assert_eq!(interpolation(&singletons), SparseMatrix::identity(3));
    }

    #[test]
    fn ptp_is_diagonal_of_sizes() {
        let adj = grid2d(6).unwrap().matrix.pattern_adjacency();
        let s = mis_distance_k(&adj, 2, Some(0));
        let p = build_aggregates(&adj, &s, 2).unwrap();
        let pm = interpolation(&p);
        let ptp = pm.transpose().to_dense().matmul(&pm.to_dense());
        for i in 0..p.num_aggregates {
            for j in 0..p.num_aggregates {
                let want = if i == j { p.sizes[i] as f64 } else { 0.0 };
                assert_eq!(ptp.get(i, j), want);
            }
        }
    }

    #[test]
    fn project_q_averages_and_is_orthogonal_projection() {
        let p = Partition {
            num_aggregates: 2,
            aggregate_of: vec![0, 0, 1, 1],
            roots: vec![0, 2],
            sizes: vec![2, 2],
        };
        let qv = project_q(&p, &[1.0, 3.0, 5.0, 9.0]).unwrap();
        assert_eq!(qv, vec![2.0, 2.0, 7.0, 7.0]);

        let v = vec![0.25, -1.0, 2.0, 0.5];
        let qv = project_q(&p, &v).unwrap();
        let qqv = project_q(&p, &qv).unwrap();
        for (a, b) in qv.iter().zip(&qqv) {
            assert!((a - b).abs() < 1e-15, "Q must be idempotent");
        }
        // Pythagoras: ||v - Qv||^2 + ||Qv||^2 = ||v||^2.
        let n2 = |x: &[f64]| x.iter().map(|y| y * y).sum::<f64>();
        let diff: Vec<f64> = v.iter().zip(&qv).map(|(a, b)| a - b).collect();
        assert!((n2(&diff) + n2(&qv) - n2(&v)).abs() < 1e-14);
    }

    #[test]
    fn galerkin_path4_and_singletons() {
        let prob = path_graph(4).unwrap();
        let p = Partition {
            num_aggregates: 2,
            aggregate_of: vec![0, 0, 1, 1],
            roots: vec![0, 2],
            sizes: vec![2, 2],
        };
        let ah = galerkin(&prob.matrix, &p).unwrap();
        assert_eq!(ah.get(0, 0), 1.0);
        assert_eq!(ah.get(0, 1), -1.0);
        assert_eq!(ah.get(1, 0), -1.0);
        assert_eq!(ah.get(1, 1), 1.0);
        assert_eq!(ah.nnz(), 4);

        let singletons = Partition {
            num_aggregates: 4,
            aggregate_of: vec![0, 1, 2, 3],
            roots: vec![0, 1, 2, 3],
            sizes: vec![1; 4],
        };
        assert_eq!(galerkin(&prob.matrix, &singletons).unwrap(), prob.matrix);
    }

    #[test]
    fn galerkin_matches_dense_triple_product() {
        let prob = grid2d(6).unwrap();
        let adj = prob.matrix.pattern_adjacency();
        let s = mis_distance_k(&adj, 2, Some(3));
        let p = build_aggregates(&adj, &s, 2).unwrap();
        let ah = galerkin(&prob.matrix, &p).unwrap();

        let pd = interpolation(&p).to_dense();
        let dense = pd.transpose().matmul(&prob.matrix.to_dense()).matmul(&pd);
        assert!(ah.to_dense().max_abs_diff(&dense) < 1e-12);
        assert!(ah.nnz() <= prob.matrix.nnz());
        // Kernel propagation: coarse row sums vanish.
        for s in ah.row_sums() {
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_graph_path4_is_path2() {
        let adj = path_adj(4);
        let p = build_aggregates(&adj, &[0, 3], 2).unwrap();
        let cg = coarse_graph(&adj, &p).unwrap();
        assert_eq!(cg.num_vertices(), 2);
        assert_eq!(cg.edges(), &[(0, 1)]);
    }

    #[test]
    fn coarse_graph_matches_galerkin_pattern() {
        let prob = grid2d(6).unwrap();
        let adj = prob.matrix.pattern_adjacency();
        let s = mis_distance_k(&adj, 2, Some(5));
        let p = build_aggregates(&adj, &s, 2).unwrap();
        let cg = coarse_graph(&adj, &p).unwrap();
        let ah = galerkin(&prob.matrix, &p).unwrap();
        let mut from_matrix = std::collections::BTreeSet::new();
        for (i, j, _) in ah.iter() {
            if i < j {
                from_matrix.insert((i, j));
            }
        }
        let from_graph: std::collections::BTreeSet<(usize, usize)> =
            cg.edges().iter().copied().collect();
        assert_eq!(from_graph, from_matrix);
        assert!(cg.is_connected());
    }

    #[test]
    fn diameter_of_path_aggregate() {
        let adj = path_adj(5);
        let p = build_aggregates(&adj, &[0, 3], 2).unwrap();
        assert_eq!(aggregate_diameter(&adj, &p, 0), 1);
        assert_eq!(aggregate_diameter(&adj, &p, 1), 2);
    }
}
