//! Command-line driver for the aggregation multigrid solver.
//!
//! Four verbs cover the workflow: `solve` runs one preconditioned solve
//! against a manufactured solution, `table` sweeps sizes and cycles into
//! an iteration table, `analyze` measures the two-level theory constants
//! on a small problem, and `coarsen` runs aggregation alone and reports
//! its metrics. Exit codes are stable: 0 on success (converged solve,
//! completed measurement), 1 when a solve finished without reaching
//! tolerance, 2 on any error, with a one-line reason on stderr.
//!
//! Every flag that is omitted falls back to the reference protocol
//! defaults of [`RunConfig`], so `polyamg solve` with no arguments runs
//! the degree-4 smoother with distance-4 aggregation on a 64x64 grid.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Prints to stdout, ignoring a consumer that hangs up early
/// (e.g. `polyamg analyze | head`), which would otherwise panic.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

/// Line-terminated variant of [`out!`].
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

use polyamg::experiment::{
    coarsen_only, run_analysis, run_solve, run_table, ProblemKind, ReportFormat, RunConfig,
    RunOutcome,
};
use polyamg::{CycleKind, Result};

#[derive(Debug, Parser)]
#[command(
    name = "polyamg",
    version,
    about = "Polynomial-smoothed aggregation multigrid for graph Laplacians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a hierarchy and solve one system with a manufactured solution.
    Solve(CommonArgs),
    /// Sweep sizes and cycles, one solve per cell, and print a CSV table.
    Table(TableArgs),
    /// Measure the two-level theory constants on the configured problem.
    Analyze(CommonArgs),
    /// Run aggregation alone and report coarsening metrics.
    Coarsen(CommonArgs),
}

/// Flags shared by all verbs. Every field mirrors one [`RunConfig`]
/// field; omitted flags keep the protocol default.
#[derive(Debug, Args)]
struct CommonArgs {
    /// Problem family: grid2d, grid3d, or graph-file [default: grid2d].
    #[arg(long, value_parser = parse_problem)]
    problem: Option<ProblemKind>,

    /// Grid side length; ignored for graph-file problems [default: 64].
    #[arg(long)]
    n: Option<usize>,

    /// Input file for graph-file problems (Matrix Market or edge list).
    #[arg(long)]
    path: Option<PathBuf>,

    /// Preconditioner cycle: amli or namli [default: amli].
    #[arg(long, value_parser = parse_cycle)]
    cycle: Option<CycleKind>,

    /// Smoother degree; derived from --rho and --kappa when omitted.
    #[arg(long)]
    degree: Option<usize>,

    /// Aggregation radius k [default: 4].
    #[arg(long)]
    mis_power: Option<usize>,

    /// Smoother interval ratio lambda1/lambda0 [default: 10].
    #[arg(long)]
    kappa: Option<f64>,

    /// Target smoother error bound when --degree is omitted [default: 0.5].
    #[arg(long)]
    rho: Option<f64>,

    /// Stabilization degree (amli) or inner iterations (namli) [default: 2].
    #[arg(long)]
    inner: Option<usize>,

    /// Flexible-CG restart length, namli only [default: 5].
    #[arg(long)]
    restart: Option<usize>,

    /// Relative stopping tolerance [default: 1e-8].
    #[arg(long)]
    tol: Option<f64>,

    /// Outer iteration cap [default: 500].
    #[arg(long)]
    max_iter: Option<usize>,

    /// Direct-solve threshold for the coarsest level [default: 100].
    #[arg(long)]
    coarsest_size: Option<usize>,

    /// Seed for every randomized choice in the run [default: 0].
    #[arg(long)]
    seed: Option<u64>,

    /// Write the report here; stdout always gets a summary.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Report file format: json or csv [default: json].
    #[arg(long, value_parser = parse_format)]
    report_format: Option<ReportFormat>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated grid side lengths, one table row group per size.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,

    /// Comma-separated cycles to compare [default: amli,namli].
    #[arg(long, value_delimiter = ',', value_parser = parse_cycle)]
    cycles: Option<Vec<CycleKind>>,

    /// Comma-separated problem families [default: the --problem value].
    #[arg(long, value_delimiter = ',', value_parser = parse_problem)]
    problems: Option<Vec<ProblemKind>>,
}

fn parse_problem(s: &str) -> std::result::Result<ProblemKind, String> {
    match s {
        "grid2d" => Ok(ProblemKind::Grid2d),
        "grid3d" => Ok(ProblemKind::Grid3d),
        "graph-file" => Ok(ProblemKind::GraphFile),
        other => Err(format!(
            "unknown problem `{other}` (expected grid2d, grid3d, or graph-file)"
        )),
    }
}

fn parse_cycle(s: &str) -> std::result::Result<CycleKind, String> {
    match s {
        "amli" => Ok(CycleKind::Amli),
        "namli" => Ok(CycleKind::Namli),
        other => Err(format!("unknown cycle `{other}` (expected amli or namli)")),
    }
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        other => Err(format!("unknown format `{other}` (expected json or csv)")),
    }
}

impl CommonArgs {
    /// Folds the given flags onto the protocol defaults, so the library's
    /// [`RunConfig::default`] stays the single source of truth.
    fn into_config(self) -> RunConfig {
        let base = RunConfig::default();
        RunConfig {
            problem: self.problem.unwrap_or(base.problem),
            n: self.n.unwrap_or(base.n),
            path: self.path,
            cycle: self.cycle.unwrap_or(base.cycle),
            degree: self.degree,
            mis_power: self.mis_power.unwrap_or(base.mis_power),
            kappa: self.kappa.unwrap_or(base.kappa),
            rho: self.rho.unwrap_or(base.rho),
            inner: self.inner.unwrap_or(base.inner),
            restart: self.restart.unwrap_or(base.restart),
            tol: self.tol.unwrap_or(base.tol),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            coarsest_size: self.coarsest_size.unwrap_or(base.coarsest_size),
            seed: self.seed.unwrap_or(base.seed),
            report_path: self.report,
            report_format: self.report_format.unwrap_or(base.report_format),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve(args) => solve(args.into_config()),
        Command::Table(args) => table(args),
        Command::Analyze(args) => analyze(args.into_config()),
        Command::Coarsen(args) => coarsen(args.into_config()),
    }
}

fn solve(cfg: RunConfig) -> Result<ExitCode> {
    let RunOutcome { report, solve, .. } = run_solve(&cfg)?;
    outln!(
        "{} n={} nnz={} levels={} grid_complexity={:.4} operator_complexity={:.4}",
        report.problem,
        report.n,
        report.nnz,
        report.levels.len(),
        report.grid_complexity,
        report.operator_complexity,
    );
    outln!(
        "{} iterations={} converged={} final_rel_a_norm_error={:.3e} \
         setup_seconds={:.3} solve_seconds={:.3}",
        cycle_name(report.cycle),
        report.iterations,
        report.converged,
        report.final_rel_a_norm_error,
        report.setup_seconds,
        report.solve_seconds,
    );
    if report.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "not converged within {} iterations (relative residual {:.3e})",
            solve.iterations,
            solve
                .history
                .last()
                .map_or(f64::NAN, |record| record.rel_residual)
        );
        Ok(ExitCode::from(1))
    }
}

fn table(args: TableArgs) -> Result<ExitCode> {
    let sizes = args.sizes;
    let cycles = args
        .cycles
        .unwrap_or_else(|| vec![CycleKind::Amli, CycleKind::Namli]);
    let base = args.common.into_config();
    let problems = args.problems.unwrap_or_else(|| vec![base.problem]);

    // Write the report file here rather than inside the sweep, so a
    // write failure surfaces as exit code 2.
    let report_path = base.report_path.clone();
    let sweep_base = RunConfig {
        report_path: None,
        ..base.clone()
    };
    let result = run_table(&sizes, &problems, &cycles, &sweep_base);
    out!("{}", result.to_csv());
    for row in &result.rows {
        if let Some(warning) = &row.warning {
            eprintln!("warning: {} {}: {warning}", row.problem, cycle_name(row.cycle));
        }
    }
    if let Some(path) = report_path {
        let text = match base.report_format {
            ReportFormat::Json => result.to_json(),
            ReportFormat::Csv => result.to_csv(),
        };
        std::fs::write(path, text)?;
    }
    let all_converged = result.rows.iter().all(|row| row.converged);
    if all_converged {
        Ok(ExitCode::SUCCESS)
    } else {
        for row in result.rows.iter().filter(|row| !row.converged) {
            let reason = row.error.as_deref().unwrap_or("did not reach tolerance");
            eprintln!(
                "failed cell: {} n={} {}: {reason}",
                row.problem,
                row.n,
                cycle_name(row.cycle)
            );
        }
        Ok(ExitCode::from(1))
    }
}

fn analyze(cfg: RunConfig) -> Result<ExitCode> {
    let report = run_analysis(&cfg)?;
    outln!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serialization is infallible")
    );
    Ok(ExitCode::SUCCESS)
}

fn coarsen(cfg: RunConfig) -> Result<ExitCode> {
    let outcome = coarsen_only(&cfg)?;
    outln!(
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("report serialization is infallible")
    );
    Ok(ExitCode::SUCCESS)
}

fn cycle_name(cycle: CycleKind) -> &'static str {
    match cycle {
        CycleKind::Amli => "amli",
        CycleKind::Namli => "namli",
    }
}
