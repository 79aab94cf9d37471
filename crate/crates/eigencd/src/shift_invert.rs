//! Shift-and-invert power method for the leading eigenvector.
//!
//! Outer iterations apply `(lambda*I - A)^{-1}` approximately by minimizing
//! the strongly convex quadratic `0.5 x'(lambda*I - A)x - w'x` with one of the
//! coordinate-wise solvers (or accelerated gradient descent / a dense exact
//! solve). Phase I walks the shift `lambda` down toward the top eigenvalue
//! until the estimated slack is at most `delta_tilde`; Phase II runs a fixed
//! number of accurate power steps at the final shift.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::ColumnOp;
use crate::oracle::exact_shifted_solve;
use crate::solvers::{
    solve_acdm_from_state, solve_agd, solve_cd_from_state, Budget, CoordRule, RuleKind,
    ShiftedProblem, SolverState,
};
use crate::trace::TraceRecord;
use crate::util::{dot, norm, normalize, random_unit_vector, sign_fix};

/// Hard cap on Phase I outer iterations before giving up.
pub const PHASE1_OUTER_CAP: usize = 200;

/// Which inner solver handles each shifted least-squares subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverSpec {
    /// Coordinate descent with the given selection rule.
    Cd(RuleKind),
    /// Non-uniform accelerated coordinate descent.
    Acdm,
    /// Full-gradient accelerated (Nesterov) descent.
    Agd,
    /// Dense LU solve; only for small instrumented runs.
    Exact,
}

impl SolverSpec {
    /// Label used in trace/CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            SolverSpec::Cd(RuleKind::Gsl) => "si-gsl",
            SolverSpec::Cd(RuleKind::Cyclic) => "si-cyclic",
            SolverSpec::Cd(RuleKind::Random) => "si-random",
            SolverSpec::Cd(RuleKind::Acdm) => "si-acdm",
            SolverSpec::Acdm => "si-acdm",
            SolverSpec::Agd => "si-agd",
            SolverSpec::Exact => "si-exact",
        }
    }
}

/// Configuration for a shift-and-invert run.
#[derive(Debug, Clone)]
pub struct SIConfig {
    /// Target slack of the final shift above the top eigenvalue; the method
    /// stops tightening the shift once the estimated slack is below this.
    pub delta_tilde: f64,
    /// Accuracy constant in (0, 1]; controls the probe-quality floor
    /// `sigma_lower = 1 + ((1 - c2)/c2) * delta_tilde`.
    pub c2: f64,
    /// Target potential-function accuracy for Phase II (used by the
    /// theory-mode schedule).
    pub epsilon: f64,
    /// Power steps per Phase I outer iteration.
    pub m1: usize,
    /// Power steps in Phase II.
    pub m2: usize,
    pub solver: SolverSpec,
    /// Budget for every subproblem when `theory_mode` is off.
    pub subproblem_budget: Budget,
    pub seed: u64,
    /// When set, derive `m1`, `m2`, and per-phase ratio budgets from the
    /// convergence analysis instead of the fixed settings above.
    pub theory_mode: bool,
    /// Stop Phase II early once the cumulative pass count reaches this.
    pub max_total_passes: Option<f64>,
    /// Smoothness constant override for the AGD inner solver.
    pub agd_lip_override: Option<f64>,
}

impl SIConfig {
    pub fn new(delta_tilde: f64, solver: SolverSpec) -> Self {
        SIConfig {
            delta_tilde,
            c2: 1.0,
            epsilon: 1e-6,
            m1: 10,
            m2: 60,
            solver,
            subproblem_budget: Budget::FixedPasses(4.0),
            seed: 0,
            theory_mode: false,
            max_total_passes: None,
            agd_lip_override: None,
        }
    }

    /// Probe-quality floor: the probe Rayleigh-like value `w'u` must exceed
    /// `sigma_lower / 8` for the slack estimate to be meaningful.
    pub fn sigma_lower(&self) -> f64 {
        1.0 + ((1.0 - self.c2) / self.c2) * self.delta_tilde
    }

    fn validate(&self) {
        assert!(
            self.delta_tilde > 0.0 && self.delta_tilde <= 1.0,
            "delta_tilde must lie in (0, 1]"
        );
        assert!(self.c2 > 0.0 && self.c2 <= 1.0, "c2 must lie in (0, 1]");
        assert!(
            self.epsilon > 0.0 && self.epsilon < 1.0,
            "epsilon must lie in (0, 1)"
        );
        assert!(self.m1 >= 1 && self.m2 >= 1, "m1 and m2 must be positive");
    }
}

/// State recorded after each Phase I outer iteration.
#[derive(Debug, Clone)]
pub struct PhaseIState {
    /// Outer iteration index, starting at 1.
    pub s: usize,
    /// Shift used during this outer iteration.
    pub lambda_prev: f64,
    /// Shift after this iteration's update: `lambda_prev - delta_s / 2`.
    pub lambda_s: f64,
    /// Estimated slack `lambda_prev - rho_1` (up to a factor in [1/2, 1]).
    pub delta_s: f64,
    /// Iterate after the `m1` power steps of this outer iteration.
    pub w: Vec<f64>,
    /// Unnormalized probe solution used for the slack estimate.
    pub u: Vec<f64>,
}

/// Output of Phase I.
#[derive(Debug, Clone)]
pub struct Phase1Output {
    pub lambda_f: f64,
    pub w: Vec<f64>,
    pub history: Vec<PhaseIState>,
    pub trace: Vec<TraceRecord>,
    pub passes: f64,
}

/// Final result of a shift-and-invert run.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Unit-norm leading eigenvector estimate, sign-fixed so its largest-
    /// magnitude entry is positive.
    pub w: Vec<f64>,
    /// Rayleigh quotient `w'Aw` (the eigenvalue estimate).
    pub rayleigh: f64,
    /// Final shift used in Phase II.
    pub lambda_f: f64,
    pub trace: Vec<TraceRecord>,
    pub phase1_outer_iters: usize,
    /// Residual norm `||Aw - rayleigh * w||`.
    pub residual: f64,
}

/// Per-phase iteration counts and subproblem accuracy ratios derived from the
/// convergence analysis.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub m1: usize,
    pub m2: usize,
    /// Required initial-to-final suboptimality ratio for Phase I power steps.
    pub phase1_ratio: f64,
    /// Ratio for the probe subproblems.
    pub probe_ratio: f64,
    /// Ratio for Phase II power steps.
    pub phase2_ratio: f64,
}

/// Phase I power steps per outer iteration for a worst-case random start in
/// dimension `d` (initial alignment squared taken as `1/d`).
pub fn phase1_power_steps(d: usize) -> usize {
    assert!(d >= 1);
    (8.0 * (16.0 * d as f64).ln()).ceil() as usize
}

/// Phase II power steps needed to reduce the potential from `g0` to
/// `sqrt(epsilon)`, using the per-step contraction factor 7/9.
pub fn phase2_power_steps(g0: f64, epsilon: f64) -> usize {
    assert!(g0 > 0.0 && epsilon > 0.0 && epsilon < 1.0);
    let steps = 0.5 * (g0 * g0 / epsilon).ln() / (9.0_f64 / 7.0).ln();
    steps.ceil().max(1.0) as usize
}

/// Upper estimate of the Phase II initial potential from the final shift and
/// an eigenvalue estimate: `sqrt(lambda_f * d / (lambda_f - rho_hat))`.
pub fn g0_upper_estimate(lambda_f: f64, rho_hat: f64, d: usize) -> f64 {
    assert!(lambda_f > rho_hat);
    (lambda_f * d as f64 / (lambda_f - rho_hat)).sqrt()
}

/// Full theory-mode schedule. `g0` is the Phase II initial-potential bound.
pub fn compute_schedule(d: usize, delta_tilde: f64, epsilon: f64, g0: f64) -> Schedule {
    let m1 = phase1_power_steps(d);
    let m2 = phase2_power_steps(g0, epsilon);
    // 32 * 10^(2*m1 + 1) / delta_tilde^(2*m1), computed in log space since it
    // overflows f64 for realistic m1.
    let log_ratio = 32.0_f64.ln() + (2 * m1 + 1) as f64 * 10.0_f64.ln()
        - 2.0 * m1 as f64 * delta_tilde.ln();
    let phase1_ratio = if log_ratio >= f64::MAX.ln() {
        f64::MAX
    } else {
        log_ratio.exp()
    };
    Schedule {
        m1,
        m2,
        phase1_ratio,
        probe_ratio: 1024.0 / (delta_tilde * delta_tilde),
        phase2_ratio: 100.0 * g0.max(1.0),
    }
}

/// Warm start for the power-step subproblem at shift `problem.lambda()`:
/// `w / (w'(lambda*I - A)w)`, which for a unit previous iterate equals
/// `w / (lambda - w'Aw)`.
pub fn warm_start_vector<M: ColumnOp>(w_prev: &[f64], problem: &ShiftedProblem<'_, M>) -> Result<Vec<f64>> {
    let n = norm(w_prev);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnit { norm: n });
    }
    let quad = problem.lambda() - problem.matrix().quadratic_form(w_prev)?;
    if quad <= 0.0 {
        return Err(Error::NonPositiveQuadraticForm { value: quad });
    }
    Ok(w_prev.iter().map(|&wi| wi / quad).collect())
}

/// Slack estimate from the probe: `delta = 0.5 / (w'u - sigma_lower/8)`.
/// Errors if the probe is too inaccurate for the estimate to be valid.
pub fn estimate_delta(w: &[f64], u: &[f64], sigma_lower: f64) -> Result<f64> {
    let wu = dot(w, u);
    let threshold = sigma_lower / 8.0;
    if wu <= threshold {
        return Err(Error::ProbeTooInaccurate {
            value: wu,
            threshold,
        });
    }
    Ok(0.5 / (wu - threshold))
}

/// Internal bookkeeping shared by both phases: cumulative pass counter,
/// wall clock, trace rows, and the per-subproblem seed stream.
struct Driver<'a, M: ColumnOp> {
    matrix: &'a M,
    config: &'a SIConfig,
    label: String,
    trace: Vec<TraceRecord>,
    passes: f64,
    started: Instant,
    steps: u64,
}

impl<'a, M: ColumnOp> Driver<'a, M> {
    fn new(matrix: &'a M, config: &'a SIConfig) -> Self {
        Driver {
            matrix,
            config,
            label: config.solver.label().to_string(),
            trace: Vec::new(),
            passes: 0.0,
            started: Instant::now(),
            steps: 0,
        }
    }

    fn record(&mut self, rayleigh: f64) {
        self.trace.push(TraceRecord {
            method: self.label.clone(),
            passes: self.passes,
            seconds: self.started.elapsed().as_secs_f64(),
            rayleigh,
            suboptimality: None,
        });
    }

    /// Approximately minimize the shifted quadratic with target `w`, warm
    /// started from the previous iterate. `w` must be unit norm with
    /// `aw = A*w` and `rayleigh = w'Aw` already available. Returns the
    /// unnormalized solution; pass accounting is updated in place.
    fn subproblem(
        &mut self,
        lambda: f64,
        w: &[f64],
        aw: &[f64],
        rayleigh: f64,
        budget: &Budget,
        solver: SolverSpec,
    ) -> Result<Vec<f64>> {
        // Clip the strong-convexity estimate away from zero; with inexact
        // probes the shift can get close enough to the top eigenvalue that
        // the raw value lambda - w'Aw underflows or briefly goes negative.
        let mu_hat = (lambda - rayleigh).max(self.config.delta_tilde / 4.0);
        let problem = ShiftedProblem::new(self.matrix, lambda, w.to_vec(), mu_hat)?;
        // Warm start x0 = w / (w'(lambda*I - A)w), using the clipped value in
        // the denominator for the same reason. Its gradient
        // (lambda*I - A)x0 - w reuses the matvec already paid for, so no
        // extra pass is charged here.
        let alpha = 1.0 / mu_hat;
        let x0: Vec<f64> = w.iter().map(|&wi| alpha * wi).collect();
        let g0: Vec<f64> = w
            .iter()
            .zip(aw)
            .map(|(&wi, &awi)| alpha * (lambda * wi - awi) - wi)
            .collect();
        self.steps += 1;
        let seed = self
            .config
            .seed
            .wrapping_add(self.steps.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let state = SolverState::with_gradient(x0, g0);
        let out = match solver {
            SolverSpec::Cd(kind) => {
                let rule = CoordRule { kind, seed };
                solve_cd_from_state(&problem, &rule, budget, state)
            }
            SolverSpec::Acdm => solve_acdm_from_state(&problem, budget, state, seed),
            SolverSpec::Agd => {
                // solve_agd recomputes its own gradient internally; its pass
                // accounting already covers that.
                solve_agd(&problem, budget, state.x, self.config.agd_lip_override)?
            }
            SolverSpec::Exact => {
                let x = exact_shifted_solve(self.matrix, lambda, w)?;
                self.passes += self.matrix.dim() as f64; // count as one dense solve sweep
                return Ok(x);
            }
        };
        self.passes += out.passes(self.matrix.dim());
        Ok(out.x)
    }

    /// One inexact power step at shift `lambda`. Takes and returns the
    /// `(w, aw, rayleigh)` triple; records a trace row for the new iterate.
    fn power_step(
        &mut self,
        lambda: f64,
        w: &[f64],
        aw: &[f64],
        rayleigh: f64,
        budget: &Budget,
    ) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut x = self.subproblem(lambda, w, aw, rayleigh, budget, self.config.solver)?;
        let n = normalize(&mut x);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroIterate);
        }
        // The matvec for the new iterate feeds the next warm start and the
        // Rayleigh quotient; charge it as one pass.
        let aw_next = self.matrix.apply(&x)?;
        self.passes += 1.0;
        let rayleigh_next = dot(&x, &aw_next);
        self.record(rayleigh_next);
        Ok((x, aw_next, rayleigh_next))
    }
}

fn theory_warn(ratio: f64) {
    if !ratio.is_finite() || ratio >= f64::MAX {
        log::warn!(
            "theory-mode subproblem ratio overflows f64; the per-subproblem pass cap will bind"
        );
    }
}

struct Phase1Inner {
    lambda_f: f64,
    w: Vec<f64>,
    aw: Vec<f64>,
    rayleigh: f64,
    history: Vec<PhaseIState>,
}

fn phase1_inner<M: ColumnOp>(driver: &mut Driver<'_, M>, w0: Vec<f64>) -> Result<Phase1Inner> {
    let config = driver.config;
    let d = driver.matrix.dim();
    if w0.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: w0.len(),
        });
    }
    let (m1, step_budget, probe_budget) = if config.theory_mode {
        let sched = compute_schedule(d, config.delta_tilde, config.epsilon, 1.0);
        theory_warn(sched.phase1_ratio);
        (
            sched.m1,
            Budget::TargetRatio {
                ratio: sched.phase1_ratio,
            },
            Budget::TargetRatio {
                ratio: sched.probe_ratio,
            },
        )
    } else {
        // The probe runs once per outer iteration and a bad slack estimate
        // derails the whole shift schedule, so give it a bigger budget than
        // the per-step solves.
        let probe = match config.subproblem_budget {
            Budget::FixedPasses(p) => Budget::FixedPasses(4.0 * p),
            b => b,
        };
        (config.m1, config.subproblem_budget, probe)
    };

    let mut w = w0;
    let n = normalize(&mut w);
    if n == 0.0 {
        return Err(Error::ZeroIterate);
    }
    let mut aw = driver.matrix.apply(&w)?;
    let mut rayleigh = dot(&w, &aw);
    driver.record(rayleigh);

    let mut lambda = 1.0 + config.delta_tilde;
    let sigma_lower = config.sigma_lower();
    let mut history = Vec::new();
    loop {
        let s = history.len() + 1;
        if s > PHASE1_OUTER_CAP {
            return Err(Error::OuterIterationCap {
                cap: PHASE1_OUTER_CAP,
                best_lambda: lambda,
            });
        }
        for _ in 0..m1 {
            let (w2, aw2, r2) = driver.power_step(lambda, &w, &aw, rayleigh, &step_budget)?;
            w = w2;
            aw = aw2;
            rayleigh = r2;
        }
        // The shift schedule is only as good as the probe, so always solve
        // probes with the deterministic, monotone greedy rule (or exactly,
        // when the main solver is exact) rather than the power-step solver.
        let probe_solver = match config.solver {
            SolverSpec::Exact => SolverSpec::Exact,
            _ => SolverSpec::Cd(RuleKind::Gsl),
        };
        let u = driver.subproblem(lambda, &w, &aw, rayleigh, &probe_budget, probe_solver)?;
        // The true slack is at most lambda - w'Aw because the Rayleigh
        // quotient lower-bounds the top eigenvalue; an unconverged probe can
        // claim far more, so cap the estimate there.
        let delta_s = estimate_delta(&w, &u, sigma_lower)?.min(lambda - rayleigh);
        // An over-optimistic probe can overshoot the slack; never move the
        // shift below the current Rayleigh quotient plus the target margin.
        let lambda_next = (lambda - delta_s / 2.0).max(rayleigh + config.delta_tilde / 4.0);
        history.push(PhaseIState {
            s,
            lambda_prev: lambda,
            lambda_s: lambda_next,
            delta_s,
            w: w.clone(),
            u,
        });
        lambda = lambda_next;
        if delta_s <= config.delta_tilde {
            break;
        }
    }
    Ok(Phase1Inner {
        lambda_f: lambda,
        w,
        aw,
        rayleigh,
        history,
    })
}

/// One standalone inexact power step: approximately apply
/// `(lambda*I - A)^{-1}` to the unit vector `w` with the configured solver
/// and budget, then renormalize. Returns the new unit iterate and the passes
/// spent.
pub fn inexact_power_step<M: ColumnOp>(
    matrix: &M,
    lambda: f64,
    w: &[f64],
    config: &SIConfig,
) -> Result<(Vec<f64>, f64)> {
    let n = norm(w);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnit { norm: n });
    }
    let mut driver = Driver::new(matrix, config);
    let aw = matrix.apply(w)?;
    let rayleigh = dot(w, &aw);
    let (w_next, _, _) = driver.power_step(lambda, w, &aw, rayleigh, &config.subproblem_budget)?;
    Ok((w_next, driver.passes))
}

/// Phase I: walk the shift down from `1 + delta_tilde` until the estimated
/// slack above the top eigenvalue is at most `delta_tilde`. `w0` need not be
/// normalized.
pub fn phase1_locate<M: ColumnOp>(
    matrix: &M,
    config: &SIConfig,
    w0: Vec<f64>,
) -> Result<Phase1Output> {
    config.validate();
    let mut driver = Driver::new(matrix, config);
    let inner = phase1_inner(&mut driver, w0)?;
    Ok(Phase1Output {
        lambda_f: inner.lambda_f,
        w: inner.w,
        history: inner.history,
        trace: driver.trace,
        passes: driver.passes,
    })
}

fn phase2_inner<M: ColumnOp>(
    driver: &mut Driver<'_, M>,
    lambda_f: f64,
    mut w: Vec<f64>,
    mut aw: Vec<f64>,
    mut rayleigh: f64,
) -> Result<(Vec<f64>, f64)> {
    let config = driver.config;
    let (m2, budget) = if config.theory_mode {
        let g0 = g0_upper_estimate(lambda_f, rayleigh, driver.matrix.dim());
        let sched = compute_schedule(driver.matrix.dim(), config.delta_tilde, config.epsilon, g0);
        (
            sched.m2,
            Budget::TargetRatio {
                ratio: sched.phase2_ratio,
            },
        )
    } else {
        (config.m2, config.subproblem_budget)
    };
    for _ in 0..m2 {
        if let Some(cap) = config.max_total_passes {
            if driver.passes >= cap {
                break;
            }
        }
        let (w2, aw2, r2) = driver.power_step(lambda_f, &w, &aw, rayleigh, &budget)?;
        w = w2;
        aw = aw2;
        rayleigh = r2;
    }
    Ok((w, rayleigh))
}

fn finalize<M: ColumnOp>(
    matrix: &M,
    mut w: Vec<f64>,
    rayleigh: f64,
    lambda_f: f64,
    trace: Vec<TraceRecord>,
    phase1_outer_iters: usize,
) -> Result<EigResult> {
    sign_fix(&mut w);
    let aw = matrix.apply(&w)?;
    let residual = norm(
        &aw.iter()
            .zip(&w)
            .map(|(&ai, &wi)| ai - rayleigh * wi)
            .collect::<Vec<_>>(),
    );
    Ok(EigResult {
        w,
        rayleigh,
        lambda_f,
        trace,
        phase1_outer_iters,
        residual,
    })
}

/// Phase II alone: run accurate power steps at a fixed shift from the given
/// start vector.
pub fn phase2_refine<M: ColumnOp>(
    matrix: &M,
    lambda_f: f64,
    w0: Vec<f64>,
    config: &SIConfig,
) -> Result<EigResult> {
    config.validate();
    let mut driver = Driver::new(matrix, config);
    let mut w = w0;
    let n = normalize(&mut w);
    if n == 0.0 {
        return Err(Error::ZeroIterate);
    }
    let aw = matrix.apply(&w)?;
    let rayleigh = dot(&w, &aw);
    driver.record(rayleigh);
    let (w, rayleigh) = phase2_inner(&mut driver, lambda_f, w, aw, rayleigh)?;
    finalize(matrix, w, rayleigh, lambda_f, driver.trace, 0)
}

/// Full shift-and-invert run from an explicit start vector.
pub fn run_si_from<M: ColumnOp>(matrix: &M, config: &SIConfig, w0: Vec<f64>) -> Result<EigResult> {
    config.validate();
    let mut driver = Driver::new(matrix, config);
    let inner = phase1_inner(&mut driver, w0)?;
    let outer = inner.history.len();
    let (w, rayleigh) = phase2_inner(&mut driver, inner.lambda_f, inner.w, inner.aw, inner.rayleigh)?;
    finalize(matrix, w, rayleigh, inner.lambda_f, driver.trace, outer)
}

/// Full shift-and-invert run from a seeded random unit start vector.
pub fn run_si<M: ColumnOp>(matrix: &M, config: &SIConfig) -> Result<EigResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w0 = random_unit_vector(&mut rng, matrix.dim());
    run_si_from(matrix, config, w0)
}
