//! Coordinate-wise leading eigenvector computation.
//!
//! Computes the top eigenvector of a large symmetric matrix by the
//! shift-and-invert power method, where each inexact power step minimizes a
//! strongly convex quadratic with coordinate descent (greedy, cyclic, or
//! random selection), non-uniformly accelerated coordinate descent, or
//! accelerated gradient descent. Includes classic power-method and
//! coordinate-wise power-method baselines, graph Laplacian and synthetic
//! spiked-matrix inputs, rank-one deflation for trailing eigenvectors, and a
//! CSV benchmark harness that reports progress per coordinate-pass.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod oracle;
pub mod shift_invert;
pub mod solvers;
pub mod trace;
pub mod util;

pub use baselines::{cpm_run, power_method, BaselineResult};
pub use bench::{emit_trace, reference_eigenvalue, run_benchmark, Method, RunSpec};
pub use error::{Error, Result};
pub use graph::{load_edge_list, EdgeGraph};
pub use matrix::{
    normalized_laplacian, synthetic_spiked, ColumnOp, DeflatedOperator, SymmetricMatrix,
};
pub use shift_invert::{
    compute_schedule, estimate_delta, inexact_power_step, phase1_locate, phase2_refine, run_si,
    run_si_from, warm_start_vector, EigResult, PhaseIState, SIConfig, SolverSpec,
};
pub use solvers::{
    cd_update, solve_acdm, solve_agd, solve_cd, suboptimality_bound, Budget, CoordRule, RuleKind,
    ShiftedProblem, SolverState,
};
pub use trace::TraceRecord;
