//! Command-line benchmark driver: load or synthesize a symmetric matrix,
//! run the selected eigenvector methods, and write a convergence-trace CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use eigencd::bench::{emit_trace, reference_eigenvalue, run_benchmark, Method, RunSpec};
use eigencd::graph::load_edge_list;
use eigencd::matrix::{normalized_laplacian, synthetic_spiked, ColumnOp, SymmetricMatrix};

#[derive(Parser, Debug)]
#[command(
    name = "eigencd",
    about = "Leading-eigenvector benchmark: shift-and-invert with coordinate-wise solvers vs. power-method baselines"
)]
struct Args {
    /// Edge-list file (one 'u v' pair per line, '#' comments allowed); the
    /// matrix is the scaled negated normalized Laplacian of the graph.
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,

    /// Synthetic spiked matrix as 'd,delta' (top eigenvalue 1, gap delta).
    #[arg(long, value_name = "D,DELTA")]
    synthetic: Option<String>,

    /// Comma-separated methods: power, cpm, si-gsl, si-cyclic, si-random,
    /// si-acdm, si-agd. Defaults to all of them.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,

    /// Final-shift slack target. Defaults to 0.05 for graph inputs and
    /// 1e-4 for synthetic matrices.
    #[arg(long)]
    delta_tilde: Option<f64>,

    /// Target accuracy used by the theory-driven iteration counts.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,

    /// Passes spent on each shifted subproblem.
    #[arg(long, default_value_t = 4.0)]
    subproblem_passes: f64,

    /// Total pass budget per method.
    #[arg(long, default_value_t = 100.0)]
    budget_passes: f64,

    /// Coordinates updated per iteration by the coordinate-wise power method.
    #[arg(long, default_value_t = 8)]
    cpm_k: usize,

    /// Power steps per outer shift-tightening iteration.
    #[arg(long, default_value_t = 10)]
    m1: usize,

    /// Scale applied to the normalized Laplacian spectrum (graph inputs).
    #[arg(long, default_value_t = 0.5)]
    scale: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Skip the reference eigenvalue (suboptimality column stays empty).
    #[arg(long)]
    no_reference: bool,

    /// Output CSV path; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_matrix(args: &Args) -> Result<(SymmetricMatrix, bool), String> {
    if let Some(path) = &args.input {
        let file = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
        let graph = load_edge_list(BufReader::new(file)).map_err(|e| e.to_string())?;
        let m = normalized_laplacian(&graph, args.scale).map_err(|e| e.to_string())?;
        Ok((m, false))
    } else if let Some(spec) = &args.synthetic {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 2 {
            return Err("--synthetic expects 'd,delta'".to_string());
        }
        let d: usize = parts[0]
            .trim()
            .parse()
            .map_err(|e| format!("bad dimension in --synthetic: {e}"))?;
        let delta: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| format!("bad gap in --synthetic: {e}"))?;
        let m = synthetic_spiked(d, delta, args.seed).map_err(|e| e.to_string())?;
        Ok((m, true))
    } else {
        Err("one of --input or --synthetic is required".to_string())
    }
}

/// Cached reference eigenvalue stored beside the input file as
/// `<input>.rho1`, so repeated benchmarks on large graphs skip the long
/// reference computation.
fn cached_reference(matrix: &SymmetricMatrix, args: &Args) -> Result<f64, String> {
    let cache = args.input.as_ref().map(|p| {
        let mut q = p.as_os_str().to_owned();
        q.push(".rho1");
        PathBuf::from(q)
    });
    if let Some(path) = &cache {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(value) = text.trim().parse::<f64>() {
                return Ok(value);
            }
        }
    }
    let value = reference_eigenvalue(matrix, args.seed).map_err(|e| e.to_string())?;
    if let Some(path) = &cache {
        // A stale cache is worse than none; ignore write failures.
        let _ = std::fs::write(path, format!("{value:.16e}\n"));
    }
    Ok(value)
}

fn run(args: &Args) -> Result<(), String> {
    let (matrix, is_synthetic) = build_matrix(args)?;
    let delta_tilde = args
        .delta_tilde
        .unwrap_or(if is_synthetic { 1e-4 } else { 0.05 });
    let mut spec = RunSpec::new(delta_tilde);
    if !args.methods.is_empty() {
        spec.methods = args.methods.clone();
    }
    spec.epsilon = args.epsilon;
    spec.subproblem_passes = args.subproblem_passes;
    spec.budget_passes = args.budget_passes;
    spec.seed = args.seed;
    spec.cpm_k = args.cpm_k.min(matrix.dim()).max(1);
    spec.m1 = args.m1;
    let reference = if args.no_reference {
        None
    } else {
        Some(cached_reference(&matrix, args)?)
    };
    let rows = run_benchmark(&matrix, &spec, reference).map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            let mut w = BufWriter::new(file);
            emit_trace(&rows, &mut w).map_err(|e| e.to_string())?;
            w.flush().map_err(|e| e.to_string())?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            emit_trace(&rows, &mut w).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
