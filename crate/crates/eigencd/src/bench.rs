//! Benchmark harness: run several methods from a shared random start, attach
//! suboptimality against a reference eigenvalue, and emit the combined trace
//! as CSV.

use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{cpm_run, power_method};
use crate::error::{Error, Result};
use crate::matrix::ColumnOp;
use crate::oracle::{SpectrumOracle, MAX_ORACLE_DIM};
use crate::shift_invert::{run_si_from, SIConfig, SolverSpec};
use crate::solvers::{Budget, RuleKind};
use crate::trace::TraceRecord;
use crate::util::random_unit_vector;

/// A method selectable on the benchmark command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Power,
    Cpm,
    Si(SolverSpec),
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Power => "power",
            Method::Cpm => "cpm",
            Method::Si(spec) => spec.label(),
        }
    }

    pub fn all() -> Vec<Method> {
        vec![
            Method::Power,
            Method::Cpm,
            Method::Si(SolverSpec::Cd(RuleKind::Gsl)),
            Method::Si(SolverSpec::Cd(RuleKind::Cyclic)),
            Method::Si(SolverSpec::Cd(RuleKind::Random)),
            Method::Si(SolverSpec::Acdm),
            Method::Si(SolverSpec::Agd),
        ]
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "power" => Ok(Method::Power),
            "cpm" => Ok(Method::Cpm),
            "si-gsl" => Ok(Method::Si(SolverSpec::Cd(RuleKind::Gsl))),
            "si-cyclic" => Ok(Method::Si(SolverSpec::Cd(RuleKind::Cyclic))),
            "si-random" => Ok(Method::Si(SolverSpec::Cd(RuleKind::Random))),
            "si-acdm" => Ok(Method::Si(SolverSpec::Acdm)),
            "si-agd" => Ok(Method::Si(SolverSpec::Agd)),
            "si-exact" => Ok(Method::Si(SolverSpec::Exact)),
            other => Err(format!(
                "unknown method '{other}' (expected power, cpm, si-gsl, si-cyclic, si-random, si-acdm, si-agd, or si-exact)"
            )),
        }
    }
}

/// Everything needed to run one benchmark over a fixed matrix.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub methods: Vec<Method>,
    pub delta_tilde: f64,
    pub epsilon: f64,
    /// Fixed per-subproblem budget (in passes) for shift-and-invert methods.
    pub subproblem_passes: f64,
    /// Total pass budget each method may spend.
    pub budget_passes: f64,
    pub seed: u64,
    /// Coordinates updated per iteration by the coordinate-wise power method.
    pub cpm_k: usize,
    /// Power steps per outer Phase I iteration.
    pub m1: usize,
    /// Phase II power steps (the total pass budget usually binds first).
    pub m2: usize,
}

impl RunSpec {
    pub fn new(delta_tilde: f64) -> Self {
        RunSpec {
            methods: Method::all(),
            delta_tilde,
            epsilon: 1e-3,
            subproblem_passes: 4.0,
            budget_passes: 100.0,
            seed: 0,
            cpm_k: 8,
            m1: 10,
            m2: 10_000,
            }
    }
}

/// Reference top eigenvalue: dense eigendecomposition when the dimension
/// allows it, otherwise long power iteration validated by its residual norm
/// (which bounds the distance from the Rayleigh quotient to some eigenvalue).
pub fn reference_eigenvalue<M: ColumnOp>(matrix: &M, seed: u64) -> Result<f64> {
    if matrix.dim() <= MAX_ORACLE_DIM {
        let oracle = SpectrumOracle::compute(matrix)?;
        return Ok(oracle.eigenvalue(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0 = random_unit_vector(&mut rng, matrix.dim());
    let tolerance = 1e-9;
    let res = power_method(matrix, &w0, 200_000, None)?;
    if res.residual > tolerance {
        return Err(Error::ReferenceNotConverged { tolerance });
    }
    Ok(res.rayleigh)
}

fn run_method<M: ColumnOp>(
    matrix: &M,
    method: Method,
    spec: &RunSpec,
    w0: &[f64],
) -> Result<Vec<TraceRecord>> {
    match method {
        Method::Power => {
            let iters = spec.budget_passes.ceil() as usize;
            Ok(power_method(matrix, w0, iters, Some(spec.budget_passes))?.trace)
        }
        Method::Cpm => {
            // Generous iteration cap; the pass budget is the real stop.
            let iters = ((spec.budget_passes * matrix.dim() as f64
                / spec.cpm_k as f64)
                .ceil() as usize)
                .max(1)
                .saturating_add(1);
            Ok(cpm_run(matrix, w0, spec.cpm_k, iters, Some(spec.budget_passes))?.trace)
        }
        Method::Si(solver) => {
            let mut config = SIConfig::new(spec.delta_tilde, solver);
            config.epsilon = spec.epsilon;
            config.m1 = spec.m1;
            config.m2 = spec.m2;
            config.subproblem_budget = Budget::FixedPasses(spec.subproblem_passes);
            config.seed = spec.seed;
            config.max_total_passes = Some(spec.budget_passes);
            Ok(run_si_from(matrix, &config, w0.to_vec())?.trace)
        }
    }
}

/// Run every requested method from the same seeded random start. When a
/// reference eigenvalue is given, each row's suboptimality is
/// `reference - rayleigh`. Rows come back sorted by method label, then pass
/// count.
pub fn run_benchmark<M: ColumnOp>(
    matrix: &M,
    spec: &RunSpec,
    reference: Option<f64>,
) -> Result<Vec<TraceRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w0 = random_unit_vector(&mut rng, matrix.dim());
    let mut rows = Vec::new();
    for &method in &spec.methods {
        let mut trace = run_method(matrix, method, spec, &w0)?;
        if let Some(rho1) = reference {
            for row in trace.iter_mut() {
                row.suboptimality = Some(rho1 - row.rayleigh);
            }
        }
        rows.extend(trace);
    }
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.passes.partial_cmp(&b.passes).unwrap())
    });
    Ok(rows)
}

/// Write trace rows as CSV: header `method,passes,seconds,rayleigh,
/// suboptimality`, floats with 17 significant digits, and an empty
/// suboptimality field when no reference is available.
pub fn emit_trace<W: Write>(rows: &[TraceRecord], out: &mut W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyTrace);
    }
    writeln!(out, "method,passes,seconds,rayleigh,suboptimality")?;
    for row in rows {
        let sub = match row.suboptimality {
            Some(v) => format!("{v:.16e}"),
            None => String::new(),
        };
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{}",
            row.method, row.passes, row.seconds, row.rayleigh, sub
        )?;
    }
    Ok(())
}
