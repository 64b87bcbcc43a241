//! End-to-end experiment drivers: problem construction, preconditioned
//! solves against manufactured solutions, table-style sweeps over sizes
//! and cycle kinds, the constants pipeline, and standalone coarsening.
//! Every driver emits a schema-stable report (JSON or CSV).

use crate::aggregation::{
    aggregate_diameter, build_aggregates, coarse_graph, condense, mis_distance_k, Partition,
};
use crate::analysis::{constants_report, ConstantsReport};
use crate::error::{Error, Result};
use crate::krylov::{a_norm_error_monitor, fcg, pcg, SolveReport};
use crate::multilevel::{CycleConfig, CycleKind, Hierarchy};
use crate::problem::{
    graph_from_matrix, grid2d, grid3d, manufacture_rhs, read_graph, GraphFormat,
    ProblemInstance,
};
use crate::smoother::{min_degree, PolySmoother};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Which generator builds the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// `n`-by-`n` grid Laplacian (5-point stencil).
    Grid2d,
    /// `n`-by-`n`-by-`n` grid Laplacian (7-point stencil).
    Grid3d,
    /// Laplacian read from `path` (Matrix Market or edge list).
    GraphFile,
}

/// Serialization format of written reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// Pretty-printed JSON (the schema-documented form).
    Json,
    /// One fixed header line plus one data row per record.
    Csv,
}

/// Full experiment configuration. The defaults reproduce the reference
/// protocol: degree-4 smoother (equivalently, target contraction 0.5 at
/// ratio 10), distance-4 aggregation, two inner stabilization steps,
/// restart length 5, tolerance 1e-8, direct solve below 100 unknowns.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Problem family.
    pub problem: ProblemKind,
    /// Grid side length (ignored for file problems).
    pub n: usize,
    /// Input file for [`ProblemKind::GraphFile`].
    pub path: Option<PathBuf>,
    /// Preconditioner cycle kind.
    pub cycle: CycleKind,
    /// Smoother degree; `None` derives the smallest degree whose error
    /// bound meets `rho` at ratio `kappa`.
    pub degree: Option<usize>,
    /// Aggregation radius `k`.
    pub mis_power: usize,
    /// Smoother interval ratio `lambda1 / lambda0`.
    pub kappa: f64,
    /// Target smoother error bound used when `degree` is absent.
    pub rho: f64,
    /// Stabilization degree (amli) or inner iteration count (namli).
    pub inner: usize,
    /// Flexible-CG restart length (namli only).
    pub restart: usize,
    /// Relative stopping tolerance for the outer iteration.
    pub tol: f64,
    /// Outer iteration cap.
    pub max_iter: usize,
    /// Direct-solve threshold for hierarchy construction.
    pub coarsest_size: usize,
    /// Seed for every randomized choice in the run.
    pub seed: u64,
    /// Where to write the report, if anywhere.
    pub report_path: Option<PathBuf>,
    /// Report serialization format.
    pub report_format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Grid2d,
            n: 64,
            path: None,
            cycle: CycleKind::Amli,
            degree: None,
            mis_power: 4,
            kappa: 10.0,
            rho: 0.5,
            inner: 2,
            restart: 5,
            tol: 1e-8,
            max_iter: 500,
            coarsest_size: 100,
            seed: 0,
            report_path: None,
            report_format: ReportFormat::Json,
        }
    }
}

impl RunConfig {
    /// The smoother degree actually used: explicit, or the smallest degree
    /// meeting the target contraction `rho`.
    pub fn resolve_degree(&self) -> Result<usize> {
        match self.degree {
            Some(d) => Ok(d),
            None => min_degree(self.rho, self.kappa, 1.0),
        }
    }

    /// The hierarchy configuration this run config induces.
    pub fn cycle_config(&self) -> Result<CycleConfig> {
        let config = CycleConfig {
            cycle: self.cycle,
            inner: self.inner,
            degree: self.resolve_degree()?,
            mis_power: self.mis_power,
            kappa: self.kappa,
            coarsest_size: self.coarsest_size,
            seed: self.seed,
            ..CycleConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// One level's summary in the written report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSummary {
    /// Unknowns on this level.
    pub n: usize,
    /// Stored entries on this level.
    pub nnz: usize,
    /// Upper spectral estimate used by this level's smoother.
    pub lambda1: f64,
}

/// The schema-stable solve report. Field order is the documented key
/// order of the JSON object.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    /// Problem label, e.g. `grid2d(512)` or a file stem.
    pub problem: String,
    /// Number of unknowns.
    pub n: usize,
    /// Stored entries of the finest operator.
    pub nnz: usize,
    /// Per-level sizes, finest first.
    pub levels: Vec<LevelSummary>,
    /// Sum of level sizes over the finest size.
    pub grid_complexity: f64,
    /// Sum of level nnz over the finest nnz.
    pub operator_complexity: f64,
    /// Which cycle preconditioned the solve.
    pub cycle: CycleKind,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Whether the tolerance was met within the iteration cap.
    pub converged: bool,
    /// Last relative A-norm error against the manufactured solution.
    pub final_rel_a_norm_error: f64,
    /// Hierarchy construction wall time.
    pub setup_seconds: f64,
    /// Iteration loop wall time.
    pub solve_seconds: f64,
    /// The seed the run used.
    pub seed: u64,
}

/// Everything a solve run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// The schema-stable report (written to disk when requested).
    pub report: RunReport,
    /// The solver-side record, including the iteration history.
    pub solve: SolveReport,
    /// The computed solution.
    pub solution: Vec<f64>,
}

/// Builds the operator a config describes.
pub fn build_problem(cfg: &RunConfig) -> Result<ProblemInstance> {
    match cfg.problem {
        ProblemKind::Grid2d => grid2d(cfg.n),
        ProblemKind::Grid3d => grid3d(cfg.n),
        ProblemKind::GraphFile => {
            let path = cfg.path.as_deref().ok_or_else(|| {
                Error::InvalidArgument("graph-file problems need a path".to_string())
            })?;
            let format = match path.extension().and_then(|e| e.to_str()) {
                Some("mtx") => GraphFormat::MatrixMarket,
                _ => GraphFormat::EdgeList,
            };
            read_graph(path, format)
        }
    }
}

/// Runs one preconditioned solve against a manufactured solution: build
/// the problem, set up the hierarchy, solve with conjugate gradients
/// (stationary cycle) or flexible conjugate gradients (nonlinear cycle),
/// and write the report when a path is configured.
///
/// The manufactured solution uses a seed offset from the config seed so
/// it stays independent of the coarsening randomness.
pub fn run_solve(cfg: &RunConfig) -> Result<RunOutcome> {
    let problem = build_problem(cfg)?;
    let config = cfg.cycle_config()?;
    let clock = Instant::now();
    let hierarchy = Hierarchy::setup(&problem, config)?;
    let setup_seconds = clock.elapsed().as_secs_f64();

    let (u_star, f) = manufacture_rhs(&problem, cfg.seed.wrapping_add(1234));
    let x0 = vec![0.0; problem.matrix.nrows()];
    let monitor = a_norm_error_monitor(&problem.matrix, &u_star);
    let mut precond = |r: &[f64]| hierarchy.apply(r);
    let (solution, mut solve) = match cfg.cycle {
        CycleKind::Amli => pcg(
            &problem.matrix,
            &f,
            &mut precond,
            &x0,
            cfg.tol,
            cfg.max_iter,
            hierarchy.kernel(),
            &monitor,
        )?,
        CycleKind::Namli => fcg(
            &problem.matrix,
            &f,
            &mut precond,
            &x0,
            cfg.tol,
            cfg.max_iter,
            cfg.restart,
            hierarchy.kernel(),
            &monitor,
        )?,
    };

    let (grid_complexity, operator_complexity) = hierarchy.complexities();
    solve.setup_seconds = setup_seconds;
    solve.grid_complexity = grid_complexity;
    solve.operator_complexity = operator_complexity;
    solve.config_echo = Some(config);

    let report = RunReport {
        problem: problem.label.clone(),
        n: problem.matrix.nrows(),
        nnz: problem.matrix.nnz(),
        levels: hierarchy
            .levels
            .iter()
            .map(|l| LevelSummary {
                n: l.a.nrows(),
                nnz: l.a.nnz(),
                lambda1: l.lambda1,
            })
            .collect(),
        grid_complexity,
        operator_complexity,
        cycle: cfg.cycle,
        iterations: solve.iterations,
        converged: solve.converged,
        final_rel_a_norm_error: solve.final_rel_a_norm_error().unwrap_or(f64::NAN),
        setup_seconds,
        solve_seconds: solve.solve_seconds,
        seed: cfg.seed,
    };
    if let Some(path) = &cfg.report_path {
        write_solve_report(&report, path, cfg.report_format)?;
    }
    Ok(RunOutcome {
        report,
        solve,
        solution,
    })
}

/// Serializes a solve report in the documented JSON schema.
pub fn report_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization is infallible")
}

/// Fixed CSV header for solve reports.
pub const SOLVE_CSV_HEADER: &str = "problem,n,nnz,num_levels,grid_complexity,\
operator_complexity,cycle,iterations,converged,final_rel_a_norm_error,\
setup_seconds,solve_seconds,seed";

/// Serializes a solve report as a fixed-header CSV (levels collapse to a
/// count; the JSON form carries the full per-level detail).
pub fn report_csv(report: &RunReport) -> String {
    let cycle = cycle_label(report.cycle);
    format!(
        "{}\n{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        SOLVE_CSV_HEADER,
        report.problem,
        report.n,
        report.nnz,
        report.levels.len(),
        report.grid_complexity,
        report.operator_complexity,
        cycle,
        report.iterations,
        report.converged,
        report.final_rel_a_norm_error,
        report.setup_seconds,
        report.solve_seconds,
        report.seed
    )
}

fn cycle_label(kind: CycleKind) -> &'static str {
    match kind {
        CycleKind::Amli => "amli",
        CycleKind::Namli => "namli",
    }
}

/// Writes a solve report to `path` in the requested format.
pub fn write_solve_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report_json(report),
        ReportFormat::Csv => report_csv(report),
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// One cell of an experiment table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    /// Problem label.
    pub problem: String,
    /// Unknowns (0 when the problem itself failed to build).
    pub n: usize,
    /// Stored entries of the finest operator.
    pub nnz: usize,
    /// Cycle kind of this cell.
    pub cycle: CycleKind,
    /// Iterations, absent when the cell failed.
    pub iterations: Option<usize>,
    /// Whether the cell converged.
    pub converged: bool,
    /// Grid complexity of the hierarchy.
    pub grid_complexity: f64,
    /// Operator complexity of the hierarchy.
    pub operator_complexity: f64,
    /// Hierarchy construction wall time.
    pub setup_seconds: f64,
    /// Iteration loop wall time.
    pub solve_seconds: f64,
    /// Failure reason when the cell errored; the sweep continues.
    pub error: Option<String>,
    /// Scalability warning when iterations grew by more than 5 against
    /// the previous size of the same problem family and cycle.
    pub warning: Option<String>,
}

/// The full sweep result: one row per (problem, size, cycle), in request
/// order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentTable {
    /// The rows, ordered as requested.
    pub rows: Vec<TableRow>,
}

/// Fixed CSV header for experiment tables.
pub const TABLE_CSV_HEADER: &str = "problem,n,nnz,cycle,iterations,converged,\
grid_complexity,operator_complexity,setup_seconds,solve_seconds,error,warning";

impl ExperimentTable {
    /// Serializes the table as a fixed-header CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TABLE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let iterations = row
                .iterations
                .map_or(String::new(), |i| i.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                row.problem,
                row.n,
                row.nnz,
                cycle_label(row.cycle),
                iterations,
                row.converged,
                row.grid_complexity,
                row.operator_complexity,
                row.setup_seconds,
                row.solve_seconds,
                csv_quote(row.error.as_deref()),
                csv_quote(row.warning.as_deref()),
            ));
        }
        out
    }

    /// Serializes the table as pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialization is infallible")
    }
}

fn csv_quote(field: Option<&str>) -> String {
    match field {
        None => String::new(),
        Some(s) => format!("\"{}\"", s.replace('"', "\"\"")),
    }
}

/// Iteration-growth guard: warns when a cell needs more than 5 extra
/// iterations compared to the previous (smaller) size of the same series.
fn growth_warning(previous: Option<usize>, current: usize) -> Option<String> {
    match previous {
        Some(prev) if current > prev + 5 => Some(format!(
            "iterations grew from {prev} to {current} against the previous size"
        )),
        _ => None,
    }
}

/// Runs the cross product of problems, sizes, and cycles, one solve per
/// cell. A failing cell records its error in-row and the sweep continues.
pub fn run_table(
    sizes: &[usize],
    problems: &[ProblemKind],
    cycles: &[CycleKind],
    base: &RunConfig,
) -> ExperimentTable {
    let mut table = ExperimentTable::default();
    let mut last_iterations: HashMap<(ProblemKind, CycleKind), usize> = HashMap::new();
    for &problem in problems {
        for &n in sizes {
            for &cycle in cycles {
                let cfg = RunConfig {
                    problem,
                    n,
                    cycle,
                    report_path: None,
                    ..base.clone()
                };
                let row = match run_solve(&cfg) {
                    Ok(outcome) => {
                        let warning = outcome
                            .report
                            .converged
                            .then(|| {
                                growth_warning(
                                    last_iterations.get(&(problem, cycle)).copied(),
                                    outcome.report.iterations,
                                )
                            })
                            .flatten();
                        last_iterations.insert((problem, cycle), outcome.report.iterations);
                        TableRow {
                            problem: outcome.report.problem,
                            n: outcome.report.n,
                            nnz: outcome.report.nnz,
                            cycle,
                            iterations: Some(outcome.report.iterations),
                            converged: outcome.report.converged,
                            grid_complexity: outcome.report.grid_complexity,
                            operator_complexity: outcome.report.operator_complexity,
                            setup_seconds: outcome.report.setup_seconds,
                            solve_seconds: outcome.report.solve_seconds,
                            error: None,
                            warning,
                        }
                    }
                    Err(e) => TableRow {
                        problem: format!("{problem:?}").to_lowercase(),
                        n: 0,
                        nnz: 0,
                        cycle,
                        iterations: None,
                        converged: false,
                        grid_complexity: 0.0,
                        operator_complexity: 0.0,
                        setup_seconds: 0.0,
                        solve_seconds: 0.0,
                        error: Some(e.to_string()),
                        warning: None,
                    },
                };
                table.rows.push(row);
            }
        }
    }
    if let Some(path) = &base.report_path {
        let text = match base.report_format {
            ReportFormat::Json => table.to_json(),
            ReportFormat::Csv => table.to_csv(),
        };
        if std::fs::write(path, text).is_err() {
            // Reported through the caller's exit handling; rows stand.
        }
    }
    table
}

/// Runs the constants pipeline on the configured problem: one level of
/// aggregation, the configured smoother, and the dense two-level
/// measurements. Always writes JSON when a report path is set.
pub fn run_analysis(cfg: &RunConfig) -> Result<ConstantsReport> {
    let problem = build_problem(cfg)?;
    let config = cfg.cycle_config()?;
    let a = &problem.matrix;
    let g = graph_from_matrix(a)?;
    let adj = a.pattern_adjacency();
    let roots = mis_distance_k(&adj, config.mis_power, Some(config.seed));
    let partition = build_aggregates(&adj, &roots, config.mis_power)?;
    let partition = condense(&adj, &partition, config.absorb_frac);
    let lambda1 = a.inf_norm();
    let smoother = PolySmoother::build(lambda1 / config.kappa, lambda1, config.degree)?;
    let report = constants_report(&g, &partition, a, &smoother)?;
    if let Some(path) = &cfg.report_path {
        let text =
            serde_json::to_string_pretty(&report).expect("report serialization is infallible");
        std::fs::write(path, text)?;
    }
    Ok(report)
}

/// Metrics of a standalone coarsening pass.
#[derive(Debug, Clone, Serialize)]
pub struct CoarsenReport {
    /// Problem label.
    pub problem: String,
    /// Fine vertices.
    pub n: usize,
    /// Aggregates after condensation.
    pub num_aggregates: usize,
    /// `n / num_aggregates`.
    pub coarsening_factor: f64,
    /// `(aggregate size, count)` pairs, ascending by size.
    pub size_histogram: Vec<(usize, usize)>,
    /// BFS diameter of each aggregate's induced subgraph.
    pub diameters: Vec<usize>,
}

/// A standalone coarsening pass: the partition, the coarse graph, and
/// the metrics.
#[derive(Debug, Clone)]
pub struct CoarsenOutcome {
    /// The metrics summary.
    pub report: CoarsenReport,
    /// The validated partition.
    pub partition: Partition,
    /// The aggregate quotient graph.
    pub coarse_graph: crate::problem::Graph,
}

/// Runs aggregation alone on the configured problem. When a report path
/// is set, the metrics go there (JSON), the partition to
/// `<path>.partition.txt`, and the coarse graph to `<path>.coarse.txt`.
pub fn coarsen_only(cfg: &RunConfig) -> Result<CoarsenOutcome> {
    let problem = build_problem(cfg)?;
    let config = cfg.cycle_config()?;
    let adj = problem.matrix.pattern_adjacency();
    let roots = mis_distance_k(&adj, config.mis_power, Some(config.seed));
    let partition = build_aggregates(&adj, &roots, config.mis_power)?;
    let partition = condense(&adj, &partition, config.absorb_frac);
    partition.validate(&adj, config.mis_power)?;
    let coarse = coarse_graph(&adj, &partition)?;

    let mut histogram: HashMap<usize, usize> = HashMap::new();
    for &s in &partition.sizes {
        *histogram.entry(s).or_insert(0) += 1;
    }
    let mut size_histogram: Vec<(usize, usize)> = histogram.into_iter().collect();
    size_histogram.sort_unstable();
    let diameters: Vec<usize> = (0..partition.num_aggregates)
        .map(|l| aggregate_diameter(&adj, &partition, l))
        .collect();
    let n = problem.matrix.nrows();
    let report = CoarsenReport {
        problem: problem.label.clone(),
        n,
        num_aggregates: partition.num_aggregates,
        coarsening_factor: n as f64 / partition.num_aggregates as f64,
        size_histogram,
        diameters,
    };

    if let Some(path) = &cfg.report_path {
        let text =
            serde_json::to_string_pretty(&report).expect("report serialization is infallible");
        std::fs::write(path, text)?;
        crate::io::write_partition(
            &suffixed(path, ".partition.txt"),
            &partition.aggregate_of,
            partition.num_aggregates,
        )?;
        crate::io::write_edge_list(
            &suffixed(path, ".coarse.txt"),
            coarse.num_vertices(),
            coarse.edges(),
        )?;
    }
    Ok(CoarsenOutcome {
        report,
        partition,
        coarse_graph: coarse,
    })
}

/// `path` with `suffix` appended to the file name.
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn small_grid_config(n: usize, cycle: CycleKind) -> RunConfig {
        RunConfig {
            n,
            cycle,
            mis_power: 2,
            coarsest_size: 20,
            ..RunConfig::default()
        }
    }

    #[test]
    fn defaults_reproduce_the_protocol() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.resolve_degree().unwrap(), 4);
        assert_eq!(cfg.mis_power, 4);
        assert_eq!(cfg.kappa, 10.0);
        assert_eq!(cfg.inner, 2);
        assert_eq!(cfg.restart, 5);
        assert_eq!(cfg.tol, 1e-8);
        assert_eq!(cfg.coarsest_size, 100);
        assert_eq!(cfg.max_iter, 500);
        let cc = cfg.cycle_config().unwrap();
        assert_eq!(cc.degree, 4);
        assert_eq!(cc.pre_smooth, 1);
        assert_eq!(cc.post_smooth, 1);
        // An explicit degree overrides the derived one.
        let explicit = RunConfig {
            degree: Some(2),
            ..RunConfig::default()
        };
        assert_eq!(explicit.resolve_degree().unwrap(), 2);
    }

    #[test]
    fn solve_converges_on_a_small_grid() {
        let cfg = small_grid_config(16, CycleKind::Amli);
        let out = run_solve(&cfg).unwrap();
        assert!(out.report.converged);
        assert!(out.report.iterations <= 40, "{}", out.report.iterations);
        assert_eq!(out.report.n, 256);
        assert_eq!(out.report.nnz, 256 + 2 * 2 * 16 * 15);
        assert!(out.report.levels.len() >= 2);
        assert_eq!(out.report.levels[0].n, 256);
        assert!(out.report.grid_complexity > 1.0);
        assert!(out.report.operator_complexity >= out.report.grid_complexity * 0.5);
        assert!(out.report.final_rel_a_norm_error <= cfg.tol);
        assert_eq!(out.solution.len(), 256);
    }

    #[test]
    fn namli_solve_converges_on_a_small_grid() {
        let cfg = small_grid_config(16, CycleKind::Namli);
        let out = run_solve(&cfg).unwrap();
        assert!(out.report.converged);
        assert!(out.report.iterations <= 40);
        assert_eq!(out.report.cycle, CycleKind::Namli);
    }

    #[test]
    fn unit_tolerance_converges_immediately() {
        let cfg = RunConfig {
            tol: 1.0,
            ..small_grid_config(8, CycleKind::Amli)
        };
        let out = run_solve(&cfg).unwrap();
        assert!(out.report.converged);
        assert_eq!(out.report.iterations, 0);
    }

    #[test]
    fn report_json_matches_the_documented_schema() {
        let cfg = small_grid_config(8, CycleKind::Amli);
        let out = run_solve(&cfg).unwrap();
        let value: Value = serde_json::from_str(&report_json(&out.report)).unwrap();
        let mut keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        let mut expected = vec![
            "problem",
            "n",
            "nnz",
            "levels",
            "grid_complexity",
            "operator_complexity",
            "cycle",
            "iterations",
            "converged",
            "final_rel_a_norm_error",
            "setup_seconds",
            "solve_seconds",
            "seed",
        ];
        expected.sort_unstable();
        assert_eq!(keys, expected);
        let level = &value["levels"][0];
        let mut level_keys: Vec<&str> =
            level.as_object().unwrap().keys().map(String::as_str).collect();
        level_keys.sort_unstable();
        assert_eq!(level_keys, vec!["lambda1", "n", "nnz"]);
        assert_eq!(value["problem"], "grid2d(8)");
        assert_eq!(value["cycle"], "amli");
    }

    #[test]
    fn identical_config_and_seed_give_identical_reports() {
        let cfg = small_grid_config(10, CycleKind::Namli);
        let mut a = run_solve(&cfg).unwrap().report;
        let mut b = run_solve(&cfg).unwrap().report;
        for r in [&mut a, &mut b] {
            r.setup_seconds = 0.0;
            r.solve_seconds = 0.0;
        }
        assert_eq!(report_json(&a), report_json(&b));
    }

    #[test]
    fn csv_report_has_the_fixed_header() {
        let cfg = small_grid_config(8, CycleKind::Amli);
        let out = run_solve(&cfg).unwrap();
        let csv = report_csv(&out.report);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SOLVE_CSV_HEADER);
        let data = lines.next().unwrap();
        assert!(data.starts_with("grid2d(8),64,"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn report_file_is_written_when_requested() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let cfg = RunConfig {
            report_path: Some(path.clone()),
            ..small_grid_config(8, CycleKind::Amli)
        };
        run_solve(&cfg).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["n"], 64);
    }

    #[test]
    fn table_runs_the_requested_cross_product_in_order() {
        let base = RunConfig {
            mis_power: 2,
            coarsest_size: 20,
            ..RunConfig::default()
        };
        let table = run_table(
            &[8, 12],
            &[ProblemKind::Grid2d],
            &[CycleKind::Amli, CycleKind::Namli],
            &base,
        );
        assert_eq!(table.rows.len(), 4);
        let labels: Vec<&str> = table.rows.iter().map(|r| r.problem.as_str()).collect();
        assert_eq!(
            labels,
            vec!["grid2d(8)", "grid2d(8)", "grid2d(12)", "grid2d(12)"]
        );
        assert_eq!(table.rows[0].cycle, CycleKind::Amli);
        assert_eq!(table.rows[1].cycle, CycleKind::Namli);
        for row in &table.rows {
            assert!(row.error.is_none());
            assert!(row.converged);
            assert!(row.iterations.is_some());
        }
        let csv = table.to_csv();
        assert!(csv.starts_with(TABLE_CSV_HEADER));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn table_records_cell_failures_and_continues() {
        let base = RunConfig::default();
        let table = run_table(
            &[8],
            &[ProblemKind::GraphFile, ProblemKind::Grid2d],
            &[CycleKind::Amli],
            &RunConfig {
                mis_power: 2,
                coarsest_size: 20,
                ..base
            },
        );
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].error.is_some());
        assert!(table.rows[0].iterations.is_none());
        assert!(table.rows[1].error.is_none());
        assert!(table.rows[1].converged);
        // The failed cell still renders in CSV.
        assert!(table.to_csv().contains("graph-file") || table.to_csv().contains("graphfile"));
    }

    #[test]
    fn growth_warning_thresholds() {
        assert!(growth_warning(None, 100).is_none());
        assert!(growth_warning(Some(20), 25).is_none());
        assert!(growth_warning(Some(20), 26).is_some());
    }

    #[test]
    fn analysis_pipeline_on_a_small_grid() {
        let cfg = RunConfig {
            n: 8,
            mis_power: 2,
            ..RunConfig::default()
        };
        let report = run_analysis(&cfg).unwrap();
        assert_eq!(report.c_nz, 5.0);
        assert!(report.measured_kappa_tl <= report.k_tg_bound);
        assert!(report.c_0.is_finite() && report.c_0 >= 1.0 - 1e-12);
    }

    #[test]
    fn coarsening_a_path_with_radius_one_gives_small_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let graph_path = dir.path().join("path.txt");
        crate::io::write_edge_list(
            &graph_path,
            20,
            &(0..19).map(|i| (i, i + 1)).collect::<Vec<_>>(),
        )
        .unwrap();
        let report_path = dir.path().join("coarsen.json");
        let cfg = RunConfig {
            problem: ProblemKind::GraphFile,
            path: Some(graph_path),
            mis_power: 1,
            report_path: Some(report_path.clone()),
            ..RunConfig::default()
        };
        let out = coarsen_only(&cfg).unwrap();
        assert!(out.partition.sizes.iter().all(|&s| s <= 3), "{:?}", out.partition.sizes);
        assert!(out.report.coarsening_factor > 1.0);
        assert_eq!(out.report.n, 20);
        assert_eq!(
            out.report.size_histogram.iter().map(|(_, c)| c).sum::<usize>(),
            out.report.num_aggregates
        );
        assert_eq!(out.coarse_graph.num_vertices(), out.report.num_aggregates);

        // All three files landed.
        assert!(report_path.exists());
        let aggregate_of =
            crate::io::read_partition(&suffixed(&report_path, ".partition.txt")).unwrap();
        assert_eq!(aggregate_of, out.partition.aggregate_of);
        let (cn, cedges, _) =
            crate::io::read_edge_list(&suffixed(&report_path, ".coarse.txt")).unwrap();
        assert_eq!(cn, out.report.num_aggregates);
        assert_eq!(cedges.len(), out.coarse_graph.edges().len());
    }

    #[test]
    fn graph_file_problems_require_a_path() {
        let cfg = RunConfig {
            problem: ProblemKind::GraphFile,
            ..RunConfig::default()
        };
        assert!(matches!(
            build_problem(&cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn config_round_trips_through_serde() {
        let cfg = RunConfig {
            problem: ProblemKind::Grid3d,
            cycle: CycleKind::Namli,
            degree: Some(3),
            ..RunConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"grid3d\""));
        assert!(json.contains("\"namli\""));
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.problem, ProblemKind::Grid3d);
        assert_eq!(back.degree, Some(3));
        // Partial configs pick up the documented defaults.
        let partial: RunConfig = serde_json::from_str("{\"n\": 128}").unwrap();
        assert_eq!(partial.n, 128);
        assert_eq!(partial.restart, 5);
        assert_eq!(partial.resolve_degree().unwrap(), 4);
    }
}
