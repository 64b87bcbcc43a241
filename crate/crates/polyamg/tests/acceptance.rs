//! The twelve release gates, one test per numbered criterion.
//!
//! Each test prints one `PASS criterion N` line with its measured numbers
//! (visible under `--nocapture`); the harness line `test criterion_NN_...`
//! is the pass/fail verdict. Every tolerance here is frozen — a miss is a
//! regression, not noise.

use std::collections::HashSet;
use std::time::Instant;

use polyamg::aggregation::{build_aggregates, condense, galerkin, mis_distance_k, Partition};
use polyamg::analysis::{check_wap, constants_report, measure_two_level};
use polyamg::dense::DenseMatrix;
use polyamg::experiment::{build_problem, run_solve, ProblemKind, RunConfig};
use polyamg::krylov::a_norm_error_monitor;
use polyamg::problem::{graph_from_matrix, laplacian_from_graph, manufacture_rhs};
use polyamg::smoother::{best_inverse_approx, error_em, min_degree};
use polyamg::{
    fcg, grid2d, grid3d, pcg, CycleConfig, CycleKind, Graph, Hierarchy, PolySmoother,
    SparseMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The protocol coarsening pipeline: seeded distance-k MIS, BFS
/// aggregation, small-aggregate condensation with the default threshold.
fn protocol_partition(a: &SparseMatrix, k: usize, seed: u64) -> Partition {
    let adj = a.pattern_adjacency();
    let roots = mis_distance_k(&adj, k, Some(seed));
    let p = build_aggregates(&adj, &roots, k).expect("aggregation should succeed");
    condense(&adj, &p, CycleConfig::default().absorb_frac)
}

/// A random connected weighted graph: a random spanning tree plus up to
/// `2n` extra edges, weights uniform in [0.1, 10).
fn random_connected_graph(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u.min(v), u.max(v)));
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let weights: Vec<f64> = edges.iter().map(|_| rng.gen_range(0.1..10.0)).collect();
    Graph::new(n, &edges)
        .expect("random edges are valid")
        .with_weights(weights)
        .expect("random weights are positive")
}

fn uniform_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn criterion_01_polynomial_error_matches_closed_form() {
    let clock = Instant::now();
    let grid = 100_000usize;
    let mut e4_kappa10 = 0.0;
    for &kappa in &[2.0, 10.0, 100.0] {
        for m in 1..=8 {
            let approx = best_inverse_approx(1.0 / kappa, 1.0, m).expect("exchange converges");
            let mut measured: f64 = 0.0;
            for j in 0..=grid {
                let x = 1.0 / kappa + (1.0 - 1.0 / kappa) * j as f64 / grid as f64;
                measured = measured.max((1.0 - x * approx.q_at(x)).abs());
            }
            let formula = error_em(m, kappa).expect("closed form");
            let rel = (measured - formula).abs() / formula;
            assert!(
                rel <= 1e-6,
                "FAIL criterion 1: m={m} kappa={kappa}: grid maximum {measured:.12e} \
                 vs delta^m (kappa-1)/2 = {formula:.12e} (relative {rel:.3e})"
            );
            if m == 4 && (kappa - 10.0).abs() < 1e-12 {
                e4_kappa10 = measured;
            }
        }
    }
    let pinned = 0.327_743_560_174_486_64;
    let rel = (e4_kappa10 - pinned).abs() / pinned;
    assert!(
        rel <= 1e-6,
        "FAIL criterion 1: E_4(kappa = 10) measured {e4_kappa10:.12} vs pinned {pinned:.12}"
    );
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        elapsed < 5.0,
        "FAIL criterion 1: sweep took {elapsed:.2} s (budget 5 s)"
    );
    println!(
        "PASS criterion 1: 24 (m, kappa) pairs match delta^m (kappa-1)/2 within 1e-6 \
         on a 100001-point grid; E_4(10) = {e4_kappa10:.9}; {elapsed:.2} s"
    );
}

#[test]
fn criterion_02_degree_rule_gives_four() {
    let m = min_degree(0.5, 10.0, 1.0).expect("degree rule");
    assert_eq!(m, 4, "FAIL criterion 2: min_degree(0.5, 10, 1) = {m}, want 4");
    println!("PASS criterion 2: min_degree(rho = 0.5, kappa = 10, lambda1 = 1) = 4");
}

#[test]
fn criterion_03_equioscillation_of_built_smoothers() {
    // Every (kappa, m) pair the positivity screen admits, on a
    // deliberately non-unit interval.
    let mut cases: Vec<(f64, usize)> = (1..=8).map(|m| (2.0, m)).collect();
    cases.extend((2..=8).map(|m| (10.0, m)));
    cases.extend([(100.0, 20), (100.0, 21)]);
    let lambda1 = 3.7;
    for &(kappa, m) in &cases {
        let s = PolySmoother::build(lambda1 / kappa, lambda1, m)
            .unwrap_or_else(|e| panic!("FAIL criterion 3: build m={m} kappa={kappa}: {e}"));
        let points = s.alternation_points();
        assert_eq!(
            points.len(),
            m + 2,
            "FAIL criterion 3: m={m} kappa={kappa}: {} alternation points, want m+2",
            points.len()
        );
        let h = s.alternation_level();
        let last = *points.last().expect("nonempty alternation");
        assert!(
            (last - lambda1).abs() <= 1e-9 * lambda1,
            "FAIL criterion 3: m={m} kappa={kappa}: last point {last} is not lambda1"
        );
        let mut previous_sign = 0.0f64;
        for (i, &t) in points.iter().enumerate() {
            let err = 1.0 / t - s.q_at(t);
            let rel = (err.abs() - h.abs()).abs() / h.abs();
            assert!(
                rel <= 1e-8,
                "FAIL criterion 3: m={m} kappa={kappa}: |1/x - q| at point {i} is \
                 {:.12e}, level {:.12e} (relative {rel:.3e})",
                err.abs(),
                h.abs()
            );
            assert!(
                err.signum() * previous_sign <= 0.0,
                "FAIL criterion 3: m={m} kappa={kappa}: no sign change at point {i}"
            );
            previous_sign = err.signum();
        }
    }
    println!(
        "PASS criterion 3: {} built smoothers equioscillate at m+2 points \
         (uniform to 1e-8, lambda1 included)",
        cases.len()
    );
}

#[test]
fn criterion_04_apply_matches_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0usize;
    for &n in &[5usize, 17, 40] {
        for &m in &[1usize, 3, 4, 6] {
            // Random symmetric diagonally dominant operator.
            let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
            let mut diagonal = vec![0.0f64; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.4) {
                        let v = rng.gen_range(-1.0..1.0);
                        triplets.push((i, j, v));
                        triplets.push((j, i, v));
                        diagonal[i] += v.abs();
                        diagonal[j] += v.abs();
                    }
                }
            }
            for (i, d) in diagonal.iter().enumerate() {
                triplets.push((i, i, d + rng.gen_range(0.5..2.0)));
            }
            let a = SparseMatrix::assemble(n, n, &triplets).expect("assembly");
            let lambda1 = a.inf_norm();
            // Ratio 2 keeps every degree positive, including m = 1.
            let s = PolySmoother::build(lambda1 / 2.0, lambda1, m).expect("smoother");
            let r = uniform_vector(n, &mut rng);

            let fast = s.apply(&a, &r).expect("recurrence apply");

            let dense = a.to_dense();
            let da = nalgebra::DMatrix::from_fn(n, n, |i, j| dense.get(i, j));
            let eig = da.symmetric_eigen();
            let vt_r = eig.eigenvectors.transpose() * nalgebra::DVector::from_vec(r.clone());
            let scaled = nalgebra::DVector::from_iterator(
                n,
                vt_r.iter()
                    .zip(eig.eigenvalues.iter())
                    .map(|(c, &lam)| c * s.q_at(lam)),
            );
            let oracle = &eig.eigenvectors * scaled;

            let scale = oracle.amax().max(1.0);
            let worst = fast
                .iter()
                .zip(oracle.iter())
                .map(|(f, o)| (f - o).abs())
                .fold(0.0f64, f64::max);
            assert!(
                worst <= 1e-10 * scale,
                "FAIL criterion 4: n={n} m={m}: max deviation {worst:.3e} \
                 against eigendecomposition (scale {scale:.3e})"
            );
            checked += 1;
        }
    }
    println!(
        "PASS criterion 4: {checked} symmetric operators up to 40x40 match the \
         eigendecomposition evaluation of q_m(A) r to 1e-10"
    );
}

#[test]
fn criterion_05_partition_invariants_at_distance_four() {
    let clock = Instant::now();
    let mut factors = Vec::new();
    for problem in [
        grid2d(64).expect("grid2d"),
        grid3d(16).expect("grid3d"),
    ] {
        let a = &problem.matrix;
        let adj = a.pattern_adjacency();
        let roots = mis_distance_k(&adj, 4, Some(0));
        let p = build_aggregates(&adj, &roots, 4).expect("aggregation");
        let p = condense(&adj, &p, CycleConfig::default().absorb_frac);
        p.validate(&adj, 4).unwrap_or_else(|e| {
            panic!("FAIL criterion 5: {} partition invalid: {e}", problem.label)
        });
        let factor = a.nrows() as f64 / p.num_aggregates as f64;
        assert!(
            (15.0..=60.0).contains(&factor),
            "FAIL criterion 5: {} coarsening factor {factor:.2} outside [15, 60]",
            problem.label
        );
        factors.push(format!("{} {:.1}", problem.label, factor));
    }
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        elapsed < 10.0,
        "FAIL criterion 5: exhaustive validation took {elapsed:.2} s (budget 10 s)"
    );
    println!(
        "PASS criterion 5: disjoint connected aggregates, roots pairwise farther \
         than 4; factors {}; {elapsed:.2} s",
        factors.join(", ")
    );
}

#[test]
fn criterion_06_galerkin_matches_dense_triple_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..50 {
        let n = rng.gen_range(5..=200);
        let graph = random_connected_graph(n, &mut rng);
        let problem = laplacian_from_graph(&graph).expect("laplacian");
        let a = &problem.matrix;
        let adj = a.pattern_adjacency();
        let k = rng.gen_range(1..=3);
        let roots = mis_distance_k(&adj, k, Some(rng.gen()));
        let p = build_aggregates(&adj, &roots, k).expect("aggregation");
        let p = condense(&adj, &p, CycleConfig::default().absorb_frac);

        let coarse = galerkin(a, &p).expect("galerkin");

        let mut dense_p = DenseMatrix::zeros(n, p.num_aggregates);
        for (i, &l) in p.aggregate_of.iter().enumerate() {
            dense_p.set(i, l, 1.0);
        }
        let oracle = dense_p.transpose().matmul(&a.to_dense()).matmul(&dense_p);
        let scale = (0..oracle.nrows())
            .flat_map(|i| oracle.row(i).iter().copied())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1.0);
        let diff = coarse.to_dense().max_abs_diff(&oracle);
        assert!(
            diff <= 1e-12 * scale,
            "FAIL criterion 6: case {case} (n={n}, k={k}): galerkin deviates \
             {diff:.3e} from dense P^T A P (scale {scale:.3e})"
        );
        // The input Laplacian is singular with constant kernel, so the
        // coarse operator must keep zero row sums.
        for (i, sum) in coarse.row_sums().iter().enumerate() {
            assert!(
                sum.abs() <= 1e-11 * scale,
                "FAIL criterion 6: case {case}: coarse row {i} sums to {sum:.3e}"
            );
        }
    }
    println!(
        "PASS criterion 6: 50 random instances up to 200 unknowns match dense \
         P^T A P entrywise; coarse row sums vanish"
    );
}

#[test]
fn criterion_07_weak_approximation_never_violated() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0usize;

    let problem = grid2d(8).expect("grid2d");
    let a = &problem.matrix;
    let g = graph_from_matrix(a).expect("graph recovery");
    let adj = a.pattern_adjacency();
    for t in 0..10usize {
        let k = 1 + (t % 3);
        let roots = mis_distance_k(&adj, k, Some(rng.gen()));
        let p = build_aggregates(&adj, &roots, k).expect("aggregation");
        let p = condense(&adj, &p, CycleConfig::default().absorb_frac);
        for _ in 0..1000 {
            let v = uniform_vector(a.nrows(), &mut rng);
            let (lhs, rhs) = check_wap(&p, &g, &v).expect("wap check");
            assert!(
                lhs <= rhs * (1.0 + 1e-10) + 1e-12,
                "FAIL criterion 7: grid2d(8) partition {t}: ||v - Qv||^2 = {lhs:.6e} \
                 exceeds c_p (Av, v) = {rhs:.6e}"
            );
            total += 1;
        }
    }

    for instance in 0..10usize {
        let n = rng.gen_range(10..=100);
        let graph = random_connected_graph(n, &mut rng);
        let problem = laplacian_from_graph(&graph).expect("laplacian");
        let adj = problem.matrix.pattern_adjacency();
        let k = rng.gen_range(1..=3);
        let roots = mis_distance_k(&adj, k, Some(rng.gen()));
        let p = build_aggregates(&adj, &roots, k).expect("aggregation");
        let p = condense(&adj, &p, CycleConfig::default().absorb_frac);
        for _ in 0..1000 {
            let v = uniform_vector(n, &mut rng);
            let (lhs, rhs) = check_wap(&p, &graph, &v).expect("wap check");
            assert!(
                lhs <= rhs * (1.0 + 1e-10) + 1e-12,
                "FAIL criterion 7: random graph {instance} (n={n}): \
                 ||v - Qv||^2 = {lhs:.6e} exceeds c_p (Av, v) = {rhs:.6e}"
            );
            total += 1;
        }
    }
    println!("PASS criterion 7: 0 violations in {total} weak-approximation checks");
}

#[test]
fn criterion_08_two_level_spectral_equivalence() {
    let clock = Instant::now();
    let problem = grid2d(16).expect("grid2d");
    let a = &problem.matrix;
    let p = protocol_partition(a, 2, 0);
    let lambda1 = a.inf_norm();
    let s = PolySmoother::build(lambda1 / 10.0, lambda1, 4).expect("smoother");
    let g = graph_from_matrix(a).expect("graph recovery");

    let spectrum = measure_two_level(a, &p, &s).expect("dense two-level assembly");
    assert!(
        spectrum.lambda_min > 0.0,
        "FAIL criterion 8: lambda_min(BA) = {:.3e} not positive",
        spectrum.lambda_min
    );
    assert!(
        spectrum.lambda_max <= 1.0 + 1e-8,
        "FAIL criterion 8: lambda_max(BA) = {:.12} exceeds 1 + 1e-8",
        spectrum.lambda_max
    );

    let report = constants_report(&g, &p, a, &s).expect("constants report");
    assert!(
        report.measured_kappa_tl <= report.k_tg_bound,
        "FAIL criterion 8: measured kappa_TL = {:.4} exceeds K_TG bound {:.4}",
        report.measured_kappa_tl,
        report.k_tg_bound
    );
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        elapsed < 30.0,
        "FAIL criterion 8: measurement took {elapsed:.2} s (budget 30 s)"
    );
    println!(
        "PASS criterion 8: eig(BA) in ({:.3e}, {:.9}], kappa_TL = {:.4} <= \
         K_TG bound {:.2}; {elapsed:.2} s",
        spectrum.lambda_min, spectrum.lambda_max, report.measured_kappa_tl, report.k_tg_bound
    );
}

#[test]
fn criterion_09_protocol_iteration_bands() {
    let clock = Instant::now();
    let solve = |problem: ProblemKind, n: usize, cycle: CycleKind| -> usize {
        let cfg = RunConfig {
            problem,
            n,
            cycle,
            ..RunConfig::default()
        };
        let outcome = run_solve(&cfg).expect("protocol solve");
        assert!(
            outcome.report.converged,
            "FAIL criterion 9: {} {:?} did not converge in {} iterations",
            outcome.report.problem, cycle, outcome.report.iterations
        );
        outcome.report.iterations
    };

    let a128 = solve(ProblemKind::Grid2d, 128, CycleKind::Amli);
    let a256 = solve(ProblemKind::Grid2d, 256, CycleKind::Amli);
    let a512 = solve(ProblemKind::Grid2d, 512, CycleKind::Amli);
    let na128 = solve(ProblemKind::Grid2d, 128, CycleKind::Namli);
    let na256 = solve(ProblemKind::Grid2d, 256, CycleKind::Namli);
    let na512 = solve(ProblemKind::Grid2d, 512, CycleKind::Namli);

    assert!(
        (12..=32).contains(&a512),
        "FAIL criterion 9: grid2d(512) amli took {a512} iterations, band [12, 32]"
    );
    assert!(
        (12..=30).contains(&na512),
        "FAIL criterion 9: grid2d(512) namli took {na512} iterations, band [12, 30]"
    );
    assert!(
        na512 <= a512 + 1,
        "FAIL criterion 9: namli ({na512}) worse than amli + 1 ({a512} + 1) at 512^2"
    );
    for (small, big, label) in [
        (a128, a256, "amli 128->256"),
        (a256, a512, "amli 256->512"),
        (na128, na256, "namli 128->256"),
        (na256, na512, "namli 256->512"),
    ] {
        assert!(
            big <= small + 4,
            "FAIL criterion 9: {label} grew {small} -> {big} (more than +4)"
        );
    }

    let a3d = solve(ProblemKind::Grid3d, 64, CycleKind::Amli);
    let na3d = solve(ProblemKind::Grid3d, 64, CycleKind::Namli);
    assert!(
        (14..=35).contains(&a3d),
        "FAIL criterion 9: grid3d(64) amli took {a3d} iterations, band [14, 35]"
    );
    assert!(
        (14..=33).contains(&na3d),
        "FAIL criterion 9: grid3d(64) namli took {na3d} iterations, band [14, 33]"
    );
    let elapsed = clock.elapsed().as_secs_f64();
    println!(
        "PASS criterion 9: grid2d amli {a128}/{a256}/{a512}, namli \
         {na128}/{na256}/{na512} at 128/256/512; grid3d(64) amli {a3d}, \
         namli {na3d}; {elapsed:.1} s"
    );
}

#[test]
fn criterion_10_complexity_bounds_at_scale() {
    let mut summaries = Vec::new();
    for (problem, n) in [(ProblemKind::Grid2d, 256), (ProblemKind::Grid3d, 64)] {
        let cfg = RunConfig {
            problem,
            n,
            ..RunConfig::default()
        };
        let instance = build_problem(&cfg).expect("problem");
        let hierarchy =
            Hierarchy::setup(&instance, cfg.cycle_config().expect("config")).expect("setup");
        let (grid, operator) = hierarchy.complexities();
        assert!(
            grid < 1.05,
            "FAIL criterion 10: {} grid complexity {grid:.4} >= 1.05",
            instance.label
        );
        assert!(
            operator < 1.06,
            "FAIL criterion 10: {} operator complexity {operator:.4} >= 1.06",
            instance.label
        );
        summaries.push(format!("{} {grid:.4}/{operator:.4}", instance.label));
    }
    println!(
        "PASS criterion 10: complexities under 1.05/1.06 — {}",
        summaries.join(", ")
    );
}

#[test]
fn criterion_11_flexible_cg_reduces_to_pcg() {
    let problem = grid2d(8).expect("grid2d");
    let a = &problem.matrix;
    let n = a.nrows();
    let (u_star, f) = manufacture_rhs(&problem, 11);
    let x0 = vec![0.0; n];
    let kernel = problem.kernel.as_deref();
    let diagonal: Vec<f64> = (0..n)
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter()
                .zip(vals)
                .find(|(&c, _)| c == i)
                .map(|(_, &v)| v)
                .expect("laplacian diagonal")
        })
        .collect();
    // The same fixed linear SPD preconditioner for both methods.
    let jacobi = |r: &[f64]| -> polyamg::Result<Vec<f64>> {
        Ok(r.iter().zip(&diagonal).map(|(ri, di)| ri / di).collect())
    };
    let mut for_pcg = jacobi;
    let mut for_fcg = jacobi;

    let monitor = a_norm_error_monitor(a, &u_star);
    let (x_pcg, rep_pcg) =
        pcg(a, &f, &mut for_pcg, &x0, 1e-10, 200, kernel, &monitor).expect("pcg");
    let (x_fcg, rep_fcg) =
        fcg(a, &f, &mut for_fcg, &x0, 1e-10, 200, 200, kernel, &monitor).expect("fcg");

    assert_eq!(
        rep_pcg.iterations, rep_fcg.iterations,
        "FAIL criterion 11: pcg took {} iterations, fcg {}",
        rep_pcg.iterations, rep_fcg.iterations
    );
    let scale = x_pcg.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let worst = x_pcg
        .iter()
        .zip(&x_fcg)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    assert!(
        worst <= 1e-10 * scale,
        "FAIL criterion 11: solutions deviate by {worst:.3e} (scale {scale:.3e})"
    );
    for (i, (rp, rf)) in rep_pcg.history.iter().zip(&rep_fcg.history).enumerate() {
        let diff = (rp.rel_residual - rf.rel_residual).abs();
        assert!(
            diff <= 1e-10 * rp.rel_residual.max(1.0),
            "FAIL criterion 11: iterate {i}: relative residuals {:.12e} vs {:.12e}",
            rp.rel_residual,
            rf.rel_residual
        );
    }
    println!(
        "PASS criterion 11: fcg with restart >= max_iter reproduces pcg — {} \
         iterations, iterates within 1e-10",
        rep_pcg.iterations
    );
}

#[test]
fn criterion_12_identical_seeds_identical_runs() {
    for cycle in [CycleKind::Amli, CycleKind::Namli] {
        let cfg = RunConfig {
            n: 32,
            cycle,
            seed: 20_260_816,
            ..RunConfig::default()
        };
        let first = run_solve(&cfg).expect("first run");
        let second = run_solve(&cfg).expect("second run");
        assert_eq!(
            first.report.iterations, second.report.iterations,
            "FAIL criterion 12: {cycle:?} iteration counts differ"
        );
        assert_eq!(
            first.report.final_rel_a_norm_error.to_bits(),
            second.report.final_rel_a_norm_error.to_bits(),
            "FAIL criterion 12: {cycle:?} final errors differ"
        );
        assert_eq!(
            first.solution.len(),
            second.solution.len(),
            "FAIL criterion 12: {cycle:?} solution lengths differ"
        );
        assert!(
            first
                .solution
                .iter()
                .zip(&second.solution)
                .all(|(a, b)| a.to_bits() == b.to_bits()),
            "FAIL criterion 12: {cycle:?} solutions differ"
        );

        let instance = build_problem(&cfg).expect("problem");
        let config = cfg.cycle_config().expect("config");
        let h1 = Hierarchy::setup(&instance, config).expect("first setup");
        let h2 = Hierarchy::setup(&instance, config).expect("second setup");
        assert_eq!(
            h1.structure_hash(),
            h2.structure_hash(),
            "FAIL criterion 12: {cycle:?} hierarchy hashes differ"
        );
    }
    println!(
        "PASS criterion 12: identical config and seed reproduce iteration counts, \
         solutions, and hierarchy hashes for both cycles"
    );
}
