//! Least-squares solvers for the shifted quadratic
//! `f(x) = 1/2 x'(lambda I - A) x - y'x`: coordinate descent with
//! Gauss-Southwell-Lipschitz / cyclic / uniform-random selection,
//! non-uniformly sampled accelerated randomized coordinate descent, and
//! full-gradient accelerated gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::ColumnOp;
use crate::util::dot;

/// Hard cap on passes for ratio-budget solves. Past this the solver returns
/// its best iterate flagged as budget-capped.
pub const RATIO_MODE_PASS_CAP: f64 = 200.0;

/// The shifted quadratic together with its cached smoothness quantities,
/// all computed in one diagonal scan.
#[derive(Debug, Clone)]
pub struct ShiftedProblem<'a, M: ColumnOp> {
    matrix: &'a M,
    lambda: f64,
    y: Vec<f64>,
    lip: Vec<f64>,
    lip_mean: f64,
    lip_max: f64,
    lip_sqrt_sum: f64,
    mu_hat: f64,
}

impl<'a, M: ColumnOp> ShiftedProblem<'a, M> {
    pub fn new(matrix: &'a M, lambda: f64, y: Vec<f64>, mu_hat: f64) -> Result<Self> {
        let d = matrix.dim();
        if y.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: y.len(),
            });
        }
        assert!(mu_hat > 0.0, "mu_hat must be positive");
        let mut lip = Vec::with_capacity(d);
        let (mut sum, mut max, mut sqrt_sum) = (0.0f64, 0.0f64, 0.0f64);
        for (i, &aii) in matrix.diag().iter().enumerate() {
            let li = lambda - aii;
            if li <= 0.0 {
                return Err(Error::ShiftTooSmall {
                    index: i,
                    diag: aii,
                    lambda,
                });
            }
            sum += li;
            max = max.max(li);
            sqrt_sum += li.sqrt();
            lip.push(li);
        }
        Ok(Self {
            matrix,
            lambda,
            y,
            lip,
            lip_mean: sum / d as f64,
            lip_max: max,
            lip_sqrt_sum: sqrt_sum,
            mu_hat,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &M {
        self.matrix
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn lip(&self) -> &[f64] {
        &self.lip
    }

    pub fn lip_mean(&self) -> f64 {
        self.lip_mean
    }

    pub fn lip_max(&self) -> f64 {
        self.lip_max
    }

    pub fn lip_sqrt_sum(&self) -> f64 {
        self.lip_sqrt_sum
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    /// `(lambda I - A) x - y`, one matvec.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = self.matrix.apply(x)?;
        Ok(x.iter()
            .zip(&ax)
            .zip(&self.y)
            .map(|((&xi, &axi), &yi)| self.lambda * xi - axi - yi)
            .collect())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.apply(x).expect("dimension fixed by problem");
        let quad: f64 = x
            .iter()
            .zip(&ax)
            .map(|(&xi, &axi)| xi * (self.lambda * xi - axi))
            .sum();
        0.5 * quad - dot(&self.y, x)
    }
}

/// Iterate, maintained gradient and update counters for one solver run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub updates: u64,
    pub budget_capped: bool,
}

impl SolverState {
    pub fn new<M: ColumnOp>(problem: &ShiftedProblem<M>, x: Vec<f64>) -> Result<Self> {
        let g = problem.gradient(&x)?;
        Ok(Self {
            x,
            g,
            updates: 0,
            budget_capped: false,
        })
    }

    /// Like `new`, but with a caller-supplied gradient (saves the matvec when
    /// the caller already has it, e.g. from the warm-start computation).
    pub fn with_gradient(x: Vec<f64>, g: Vec<f64>) -> Self {
        Self {
            x,
            g,
            updates: 0,
            budget_capped: false,
        }
    }

    pub fn passes(&self, dim: usize) -> f64 {
        self.updates as f64 / dim as f64
    }
}

/// Stopping rule for a single least-squares subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Exactly `ceil(passes * d)` coordinate updates.
    FixedPasses(f64),
    /// Stop once the strong-convexity suboptimality bound has dropped by
    /// `ratio` relative to the initial bound, with a hard cap of
    /// [`RATIO_MODE_PASS_CAP`] passes.
    TargetRatio { ratio: f64 },
}

/// Coordinate selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Gsl,
    Cyclic,
    Random,
    Acdm,
}

#[derive(Debug, Clone, Copy)]
pub struct CoordRule {
    pub kind: RuleKind,
    pub seed: u64,
}

impl CoordRule {
    pub fn new(kind: RuleKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn selector(&self) -> CoordSelector {
        CoordSelector {
            kind: self.kind,
            cursor: 0,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
        }
    }
}

/// Runtime state of a selection rule: the cyclic cursor starts at 0 for each
/// new subproblem; random selection is deterministic per seed.
pub struct CoordSelector {
    kind: RuleKind,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl CoordSelector {
    /// Picks the next coordinate. GSL scans the full gradient (dense score
    /// pass) and returns the lowest index among exact ties.
    pub fn select<M: ColumnOp>(
        &mut self,
        state: &SolverState,
        problem: &ShiftedProblem<M>,
    ) -> usize {
        let d = problem.dim();
        match self.kind {
            RuleKind::Gsl => {
                let mut best = 0usize;
                let mut best_score = f64::NEG_INFINITY;
                for i in 0..d {
                    let score = state.g[i].abs() / problem.lip()[i].sqrt();
                    if score > best_score {
                        best_score = score;
                        best = i;
                    }
                }
                best
            }
            RuleKind::Cyclic => {
                let j = self.cursor;
                self.cursor = (self.cursor + 1) % d;
                j
            }
            RuleKind::Random => self.rng.gen_range(0..d),
            RuleKind::Acdm => panic!("ACDM has its own solver; use solve_acdm"),
        }
    }
}

/// One exact coordinate minimization: `delta = -g[j]/L_j`, then the gradient
/// is maintained with a single column scan.
pub fn cd_update<M: ColumnOp>(state: &mut SolverState, problem: &ShiftedProblem<M>, j: usize) {
    let delta = -state.g[j] / problem.lip()[j];
    state.x[j] += delta;
    problem
        .matrix()
        .for_each_in_column(j, &mut |i, a| state.g[i] -= delta * a);
    state.g[j] += problem.lambda() * delta;
    state.updates += 1;
}

/// The standard strong-convexity stopping surrogate
/// `||g||^2 / (2 mu_hat) >= f(x) - f*`; zero iff the gradient vanishes.
pub fn suboptimality_bound<M: ColumnOp>(state: &SolverState, problem: &ShiftedProblem<M>) -> f64 {
    dot(&state.g, &state.g) / (2.0 * problem.mu_hat())
}

fn fixed_update_count(passes: f64, d: usize) -> u64 {
    (passes * d as f64).ceil() as u64
}

/// Plain coordinate descent under one of the GSL/cyclic/random rules.
pub fn solve_cd<M: ColumnOp>(
    problem: &ShiftedProblem<M>,
    rule: &CoordRule,
    budget: &Budget,
    x0: Vec<f64>,
) -> Result<SolverState> {
    let state = SolverState::new(problem, x0)?;
    Ok(solve_cd_from_state(problem, rule, budget, state))
}

/// As `solve_cd` but starting from a state whose gradient was already
/// computed by the caller.
pub fn solve_cd_from_state<M: ColumnOp>(
    problem: &ShiftedProblem<M>,
    rule: &CoordRule,
    budget: &Budget,
    mut state: SolverState,
) -> SolverState {
    assert!(
        rule.kind != RuleKind::Acdm,
        "ACDM has its own solver; use solve_acdm"
    );
    let d = problem.dim();
    let mut selector = rule.selector();
    match *budget {
        Budget::FixedPasses(passes) => {
            let total = fixed_update_count(passes, d);
            for _ in 0..total {
                let j = selector.select(&state, problem);
                cd_update(&mut state, problem, j);
            }
        }
        Budget::TargetRatio { ratio } => {
            let target = suboptimality_bound(&state, problem) / ratio;
            let cap = fixed_update_count(RATIO_MODE_PASS_CAP, d);
            loop {
                if suboptimality_bound(&state, problem) <= target {
                    break;
                }
                if state.updates >= cap {
                    state.budget_capped = true;
                    break;
                }
                // check once per pass
                for _ in 0..d {
                    let j = selector.select(&state, problem);
                    cd_update(&mut state, problem, j);
                }
            }
        }
    }
    state
}

/// Accelerated randomized coordinate descent with sampling probability
/// proportional to `sqrt(L_i)`. Two coupled sequences `y` (primal) and `z`
/// are maintained together with their gradients, so each update costs one
/// column scan plus O(d) vector work.
pub fn solve_acdm<M: ColumnOp>(
    problem: &ShiftedProblem<M>,
    budget: &Budget,
    x0: Vec<f64>,
    seed: u64,
) -> Result<SolverState> {
    let state = SolverState::new(problem, x0)?;
    Ok(solve_acdm_from_state(problem, budget, state, seed))
}

pub fn solve_acdm_from_state<M: ColumnOp>(
    problem: &ShiftedProblem<M>,
    budget: &Budget,
    state0: SolverState,
    seed: u64,
) -> SolverState {
    let d = problem.dim();
    let s = problem.lip_sqrt_sum();
    let theta = (problem.mu_hat().sqrt() / s).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // cumulative sampling distribution p_i = sqrt(L_i) / sum sqrt(L_j)
    let mut cdf = Vec::with_capacity(d);
    let mut acc = 0.0;
    for &li in problem.lip() {
        acc += li.sqrt() / s;
        cdf.push(acc);
    }

    let x0 = state0.x.clone();
    let f0 = problem.objective(&x0);

    let mut y = state0.x.clone();
    let mut z = state0.x;
    let mut gy = state0.g.clone();
    let mut gz = state0.g;
    let mut updates: u64 = 0;
    let mut capped = false;

    let mut x = vec![0.0; d];
    let mut gx = vec![0.0; d];

    let (total, ratio_target) = match *budget {
        Budget::FixedPasses(passes) => (fixed_update_count(passes, d), None),
        Budget::TargetRatio { ratio } => {
            let b0 = dot(&gy, &gy) / (2.0 * problem.mu_hat());
            (fixed_update_count(RATIO_MODE_PASS_CAP, d), Some(b0 / ratio))
        }
    };

    while updates < total {
        if let Some(target) = ratio_target {
            if updates.is_multiple_of(d as u64)
                && dot(&gy, &gy) / (2.0 * problem.mu_hat()) <= target
            {
                break;
            }
        }

        let c1 = 1.0 / (1.0 + theta);
        let c2 = theta / (1.0 + theta);
        for i in 0..d {
            x[i] = c1 * y[i] + c2 * z[i];
            gx[i] = c1 * gy[i] + c2 * gz[i];
        }

        let u: f64 = rng.gen();
        let j = cdf.partition_point(|&c| c < u).min(d - 1);
        let pj = problem.lip()[j].sqrt() / s;
        let gxj = gx[j];

        // primal step: exact coordinate minimization from x
        let step_y = gxj / problem.lip()[j];
        y.copy_from_slice(&x);
        y[j] -= step_y;
        gy.copy_from_slice(&gx);
        problem
            .matrix()
            .for_each_in_column(j, &mut |i, a| gy[i] += step_y * a);
        gy[j] -= problem.lambda() * step_y;

        // dual step: momentum-weighted estimate-sequence center
        let step_z = theta * gxj / (problem.mu_hat() * pj);
        for i in 0..d {
            z[i] = (1.0 - theta) * z[i] + theta * x[i];
            gz[i] = (1.0 - theta) * gz[i] + theta * gx[i];
        }
        z[j] -= step_z;
        problem
            .matrix()
            .for_each_in_column(j, &mut |i, a| gz[i] += step_z * a);
        gz[j] -= problem.lambda() * step_z;

        updates += 1;
    }

    if matches!(budget, Budget::TargetRatio { .. })
        && updates >= total
        && ratio_target.is_some_and(|t| dot(&gy, &gy) / (2.0 * problem.mu_hat()) > t)
    {
        capped = true;
    }

    // the accelerated sequence is not monotone; fall back to x0 if it ever
    // ends worse than it started
    if problem.objective(&y) > f0 {
        let g0 = problem.gradient(&x0).expect("dimension fixed");
        return SolverState {
            x: x0,
            g: g0,
            updates,
            budget_capped: capped,
        };
    }

    SolverState {
        x: y,
        g: gy,
        updates,
        budget_capped: capped,
    }
}

/// Nesterov accelerated gradient descent with constant momentum for the
/// `L`-smooth, `mu_hat`-strongly-convex quadratic. One iteration is one full
/// gradient, charged as `d` coordinate-update cost units.
pub fn solve_agd<M: ColumnOp>(
    problem: &ShiftedProblem<M>,
    budget: &Budget,
    x0: Vec<f64>,
    lip_global_override: Option<f64>,
) -> Result<SolverState> {
    let d = problem.dim();
    // conservative global smoothness bound: lambda + ||A||_{1->inf}
    let lip_global = lip_global_override
        .unwrap_or_else(|| problem.lambda() + problem.matrix().max_abs_row_sum());
    let q = (problem.mu_hat() / lip_global).min(1.0);
    let beta = (1.0 - q.sqrt()) / (1.0 + q.sqrt());

    let mut x = x0;
    let mut v = x.clone();
    let mut g = problem.gradient(&v)?;
    let mut iters: u64 = 0;
    let mut capped = false;

    let (max_iters, ratio_target) = match *budget {
        Budget::FixedPasses(passes) => (passes.ceil() as u64, None),
        Budget::TargetRatio { ratio } => {
            let b0 = dot(&g, &g) / (2.0 * problem.mu_hat());
            (RATIO_MODE_PASS_CAP as u64, Some(b0 / ratio))
        }
    };

    while iters < max_iters {
        if let Some(target) = ratio_target {
            if dot(&g, &g) / (2.0 * problem.mu_hat()) <= target {
                break;
            }
        }
        let mut x_next = v.clone();
        for i in 0..d {
            x_next[i] -= g[i] / lip_global;
        }
        for i in 0..d {
            v[i] = x_next[i] + beta * (x_next[i] - x[i]);
        }
        x = x_next;
        g = problem.gradient(&v)?;
        iters += 1;
    }

    if ratio_target.is_some_and(|t| dot(&g, &g) / (2.0 * problem.mu_hat()) > t) {
        capped = true;
    }

    let g_x = problem.gradient(&x)?;
    Ok(SolverState {
        x,
        g: g_x,
        updates: iters * d as u64,
        budget_capped: capped,
    })
}
