//! `kpdkit`: exact and approximate Kronecker product decomposition from the
//! command line.
//!
//! Subcommands: `exact`, `nkp`, `sumkpd`, `matkpd`. Inputs use the
//! hypermatrix text format (`dims:` header plus values; `#` comments);
//! `matkpd` also accepts plain whitespace rows. Reports go to stdout and are
//! byte-reproducible for a fixed seed; timing goes into a trailing comment
//! line.

mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kpdkit_core::io::{format_f64, read_hypermatrix, read_matrix};
use kpdkit_core::matform::{expand_by_splits, mat_sum_kpd, MatKpdProblem, MatKpdReport};
use kpdkit_core::matrix::Matrix;
use kpdkit_core::mda::exact_decompose;
use kpdkit_core::sumkpd::{greedy_sum, SumConfig, SumStatus};
use kpdkit_core::sva::{nkp_multistart, InitKind, SvaConfig};
use kpdkit_core::tensor::Hypermatrix;

use report::Report;

#[derive(Parser)]
#[command(
    name = "kpdkit",
    about = "Kronecker product decomposition of dense hypermatrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test exact single-term decomposability (monic decomposition).
    ///
    /// Exit code 0 when decomposable, 1 when not, 2 on error.
    Exact {
        /// Hypermatrix file.
        input: PathBuf,
        /// Relative residual below which the input counts as decomposable.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Nearest Kronecker product by multi-start alternating updates.
    Nkp {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also report the clustered histogram of stationary errors.
        #[arg(long)]
        histogram: bool,
    },
    /// Greedy finite-sum KPD by residual deflation.
    Sumkpd {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sum: SumArgs,
    },
    /// Matrix-form KPD: factor a matrix into Kronecker products of blocks.
    Matkpd {
        /// Matrix file (hypermatrix format with two axes, or plain rows).
        input: PathBuf,
        /// Row dimensions of the factors, e.g. 4,4.
        #[arg(long, value_delimiter = ',', required = true)]
        row_dims: Vec<usize>,
        /// Column dimensions of the factors, e.g. 4,4.
        #[arg(long, value_delimiter = ',', required = true)]
        col_dims: Vec<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sum: SumArgs,
        /// Additionally split every 2x2 factor into rank-one pairs and
        /// distribute, yielding terms of 2x1 and 1x2 factors.
        #[arg(long)]
        expand_splits: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    /// Start factors uniform on [0, 1).
    Unit,
    /// Start factors uniform on [-0.5, 0.5).
    Centered,
}

impl InitArg {
    fn to_core(self) -> InitKind {
        match self {
            InitArg::Unit => InitKind::UnitInterval,
            InitArg::Centered => InitKind::Centered,
        }
    }

    fn name(self) -> &'static str {
        match self {
            InitArg::Unit => "unit",
            InitArg::Centered => "centered",
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence tolerance on successive reconstructions.
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Sweep cap per restart.
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    /// Independent random restarts.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Root RNG seed; falls back to $KPDKIT_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Initialization menu for the random starts.
    #[arg(long, value_enum, default_value_t = InitArg::Unit)]
    init: InitArg,
    /// Gap under which stationary errors share a histogram cluster.
    #[arg(long, default_value_t = 1e-2)]
    cluster_tol: f64,
    /// Worker threads for parallel restarts; results are identical for any
    /// thread count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SumArgs {
    /// Stop when the residual norm falls below this.
    #[arg(long, default_value_t = 1e-8)]
    eps_sum: f64,
    /// Cap on the number of terms.
    #[arg(long, default_value_t = 32)]
    max_terms: usize,
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("KPDKIT_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("KPDKIT_SEED is not a valid seed: `{text}`")),
        Err(_) => Ok(0),
    }
}

fn setup_threads(threads: Option<usize>) -> Result<(), String> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    Ok(())
}

fn solver_config(args: &SolverArgs) -> Result<SvaConfig, String> {
    Ok(SvaConfig {
        eps: args.eps,
        max_sweeps: args.max_sweeps,
        restarts: args.restarts,
        seed: resolve_seed(args.seed)?,
        init: args.init.to_core(),
        cluster_tol: args.cluster_tol,
    })
}

fn echo_solver(r: &mut Report, cfg: &SvaConfig, args: &SolverArgs) {
    r.kv_f64("eps", cfg.eps);
    r.kv("max-sweeps", cfg.max_sweeps);
    r.kv("restarts", cfg.restarts);
    r.kv("seed", cfg.seed);
    r.kv("init", args.init.name());
    r.kv_f64("cluster-tol", cfg.cluster_tol);
    match args.threads {
        Some(n) => r.kv("threads", n),
        None => r.kv("threads", "default"),
    }
}

fn echo_dims(r: &mut Report, key: &str, dims: &[usize]) {
    let text = dims
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    r.kv(key, text);
}

fn status_name(status: SumStatus) -> &'static str {
    match status {
        SumStatus::Converged => "converged",
        SumStatus::MaxTerms => "max-terms",
        SumStatus::Stalled => "stalled",
    }
}

fn load_hypermatrix(path: &Path) -> Result<Hypermatrix, String> {
    read_hypermatrix(path).map_err(|e| e.to_string())
}

fn cmd_exact(input: PathBuf, tol: f64) -> Result<(String, u8), String> {
    let h = load_hypermatrix(&input)?;
    let result = exact_decompose(&h, tol).map_err(|e| e.to_string())?;

    let mut r = Report::new("exact");
    r.kv("input", input.display());
    echo_dims(&mut r, "input-dims", h.shape().dims());
    r.kv_f64("tol", tol);
    r.kv(
        "verdict",
        if result.decomposable {
            "decomposable"
        } else {
            "not-decomposable"
        },
    );
    r.kv_f64("scale", result.factors.scale);
    r.kv_f64("residual", result.residual);
    r.kv_f64("residual-squared", result.residual * result.residual);
    for (s, factor) in result.factors.factors.iter().enumerate() {
        r.vector_payload(&format!("factor {}", s + 1), factor);
    }
    let code = u8::from(!result.decomposable);
    Ok((r.finish(), code))
}

fn cmd_nkp(input: PathBuf, args: SolverArgs, histogram: bool) -> Result<(String, u8), String> {
    setup_threads(args.threads)?;
    let cfg = solver_config(&args)?;
    let h = load_hypermatrix(&input)?;
    let (best, hist) =
        nkp_multistart(h.vectorize(), h.shape(), &cfg).map_err(|e| e.to_string())?;

    let mut r = Report::new("nkp");
    r.kv("input", input.display());
    echo_dims(&mut r, "input-dims", h.shape().dims());
    echo_solver(&mut r, &cfg, &args);
    r.kv_f64("error", best.error);
    r.kv_f64("error-squared", best.error * best.error);
    r.kv("sweeps", best.sweeps);
    r.kv("converged", best.converged);
    for (s, factor) in best.factors.factors.iter().enumerate() {
        r.vector_payload(&format!("factor {}", s + 1), factor);
    }
    if histogram {
        r.kv("histogram-clusters", hist.clusters.len());
        for (i, c) in hist.clusters.iter().enumerate() {
            r.raw_line(&format!(
                "cluster {}: error {} hits {}",
                i + 1,
                format_f64(c.error),
                c.hits
            ));
        }
    }
    Ok((r.finish(), 0))
}

fn cmd_sumkpd(input: PathBuf, args: SolverArgs, sum: SumArgs) -> Result<(String, u8), String> {
    setup_threads(args.threads)?;
    let cfg = SumConfig {
        eps_sum: sum.eps_sum,
        max_terms: sum.max_terms,
        inner: solver_config(&args)?,
    };
    let h = load_hypermatrix(&input)?;
    let result = greedy_sum(h.vectorize(), h.shape(), &cfg).map_err(|e| e.to_string())?;

    let mut r = Report::new("sumkpd");
    r.kv("input", input.display());
    echo_dims(&mut r, "input-dims", h.shape().dims());
    r.kv_f64("eps-sum", cfg.eps_sum);
    r.kv("max-terms", cfg.max_terms);
    echo_solver(&mut r, &cfg.inner, &args);
    r.kv("status", status_name(result.status));
    r.kv("terms", result.terms.len());
    for (k, term) in result.terms.iter().enumerate() {
        for (s, factor) in term.factors.iter().enumerate() {
            r.vector_payload(&format!("term {} factor {}", k + 1, s + 1), factor);
        }
    }
    r.raw_line("residual-table:");
    for (k, norm) in result.residual_norms.iter().enumerate() {
        r.raw_line(&format!(
            "term {}: norm {} squared {}",
            k + 1,
            format_f64(*norm),
            format_f64(norm * norm)
        ));
    }
    Ok((r.finish(), 0))
}

fn emit_mat_report(r: &mut Report, result: &MatKpdReport) {
    r.kv("status", status_name(result.status));
    r.kv("terms", result.terms.len());
    for (k, term) in result.terms.iter().enumerate() {
        for (s, m) in term.matrices.iter().enumerate() {
            r.matrix_payload(&format!("term {} factor {}", k + 1, s + 1), m);
        }
    }
    r.raw_line("residual-table:");
    for (k, (norm, sq)) in result
        .residual_norms
        .iter()
        .zip(&result.residual_squares)
        .enumerate()
    {
        r.raw_line(&format!(
            "term {}: norm {} squared {}",
            k + 1,
            format_f64(*norm),
            format_f64(*sq)
        ));
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_matkpd(
    input: PathBuf,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    args: SolverArgs,
    sum: SumArgs,
    expand_splits: bool,
) -> Result<(String, u8), String> {
    setup_threads(args.threads)?;
    let cfg = SumConfig {
        eps_sum: sum.eps_sum,
        max_terms: sum.max_terms,
        inner: solver_config(&args)?,
    };
    let matrix = read_matrix(&input).map_err(|e| e.to_string())?;
    let problem =
        MatKpdProblem::new(matrix, row_dims.clone(), col_dims.clone()).map_err(|e| e.to_string())?;
    let result = mat_sum_kpd(&problem, &cfg).map_err(|e| e.to_string())?;

    let mut r = Report::new("matkpd");
    r.kv("input", input.display());
    r.kv(
        "input-dims",
        format!("{} {}", problem.matrix.rows(), problem.matrix.cols()),
    );
    echo_dims(&mut r, "row-dims", &row_dims);
    echo_dims(&mut r, "col-dims", &col_dims);
    r.kv_f64("eps-sum", cfg.eps_sum);
    r.kv("max-terms", cfg.max_terms);
    echo_solver(&mut r, &cfg.inner, &args);
    emit_mat_report(&mut r, &result);

    if expand_splits {
        let expanded = expand_by_splits(&result.terms).map_err(|e| e.to_string())?;
        r.kv("split-terms", expanded.len());
        for (k, term) in expanded.iter().enumerate() {
            for (s, m) in term.matrices.iter().enumerate() {
                r.matrix_payload(&format!("split-term {} factor {}", k + 1, s + 1), m);
            }
        }
        let mut recon = Matrix::zeros(problem.matrix.rows(), problem.matrix.cols());
        for term in &expanded {
            recon = recon.add(&term.reconstruct()).map_err(|e| e.to_string())?;
        }
        let err = recon
            .sub(&problem.matrix)
            .map_err(|e| e.to_string())?
            .frobenius_norm();
        r.kv_f64("split-reconstruction-error", err);
    }
    Ok((r.finish(), 0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Exact { input, tol } => cmd_exact(input, tol),
        Command::Nkp {
            input,
            solver,
            histogram,
        } => cmd_nkp(input, solver, histogram),
        Command::Sumkpd { input, solver, sum } => cmd_sumkpd(input, solver, sum),
        Command::Matkpd {
            input,
            row_dims,
            col_dims,
            solver,
            sum,
            expand_splits,
        } => cmd_matkpd(input, row_dims, col_dims, solver, sum, expand_splits),
    };
    match outcome {
        Ok((report, code)) => {
            print!("{report}");
            ExitCode::from(code)
        }
        Err(msg) => {
            let mut out = String::new();
            let _ = writeln!(out, "error: {msg}");
            eprint!("{out}");
            ExitCode::from(2)
        }
    }
}
