//! Baseline eigenvector methods: the classic power method and a
//! coordinate-wise power method that updates only the `k` coordinates with
//! the largest relative change per iteration.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::matrix::ColumnOp;
use crate::trace::TraceRecord;
use crate::util::{dot, norm, normalize, sign_fix};

/// Result of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineResult {
    /// Unit-norm estimate, sign-fixed so its largest-magnitude entry is
    /// positive.
    pub w: Vec<f64>,
    pub rayleigh: f64,
    pub trace: Vec<TraceRecord>,
    /// Residual norm `||Aw - rayleigh * w||`.
    pub residual: f64,
}

fn finalize<M: ColumnOp>(
    matrix: &M,
    mut w: Vec<f64>,
    rayleigh: f64,
    trace: Vec<TraceRecord>,
) -> Result<BaselineResult> {
    sign_fix(&mut w);
    let aw = matrix.apply(&w)?;
    let residual = norm(
        &aw.iter()
            .zip(&w)
            .map(|(&ai, &wi)| ai - rayleigh * wi)
            .collect::<Vec<_>>(),
    );
    Ok(BaselineResult {
        w,
        rayleigh,
        trace,
        residual,
    })
}

/// Classic power method: `w <- A w / ||A w||`. Each iteration costs one pass.
/// Stops after `iters` iterations or once the cumulative pass count reaches
/// `max_passes`, whichever comes first.
pub fn power_method<M: ColumnOp>(
    matrix: &M,
    w0: &[f64],
    iters: usize,
    max_passes: Option<f64>,
) -> Result<BaselineResult> {
    let started = Instant::now();
    let mut w = w0.to_vec();
    let n = normalize(&mut w);
    if n == 0.0 {
        return Err(Error::ZeroIterate);
    }
    let mut aw = matrix.apply(&w)?;
    if norm(&aw) == 0.0 {
        return Err(Error::NullspaceStart);
    }
    let mut rayleigh = dot(&w, &aw);
    let mut passes = 0.0;
    let mut trace = vec![TraceRecord {
        method: "power".to_string(),
        passes,
        seconds: started.elapsed().as_secs_f64(),
        rayleigh,
        suboptimality: None,
    }];
    for _ in 0..iters {
        if let Some(cap) = max_passes {
            if passes >= cap {
                break;
            }
        }
        let mut next = aw;
        let m = normalize(&mut next);
        if m == 0.0 {
            return Err(Error::ZeroIterate);
        }
        w = next;
        aw = matrix.apply(&w)?;
        passes += 1.0;
        rayleigh = dot(&w, &aw);
        trace.push(TraceRecord {
            method: "power".to_string(),
            passes,
            seconds: started.elapsed().as_secs_f64(),
            rayleigh,
            suboptimality: None,
        });
    }
    finalize(matrix, w, rayleigh, trace)
}

/// Indices of the `k` largest-magnitude entries of `c`, breaking magnitude
/// ties toward the lowest index.
fn top_k_indices(c: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.len()).collect();
    idx.sort_by(|&a, &b| {
        c[b].abs()
            .partial_cmp(&c[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    idx.truncate(k.min(c.len()));
    idx
}

/// Coordinate-wise power method. Each iteration scores every coordinate by
/// `c_i = (Ax)_i / (x'Ax) - x_i`, rewrites the `k` highest-scoring
/// coordinates as `x_j <- (Ax)_j / (x'Ax)`, renormalizes, and maintains `Ax`
/// incrementally by scanning only the `k` touched columns. With `k = d` one
/// iteration reproduces a full power step.
pub fn cpm_run<M: ColumnOp>(
    matrix: &M,
    w0: &[f64],
    k: usize,
    iters: usize,
    max_passes: Option<f64>,
) -> Result<BaselineResult> {
    let d = matrix.dim();
    assert!(k >= 1 && k <= d, "k must lie in 1..=d");
    let started = Instant::now();
    let mut x = w0.to_vec();
    if x.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let n = normalize(&mut x);
    if n == 0.0 {
        return Err(Error::ZeroIterate);
    }
    let mut ax = matrix.apply(&x)?;
    let mut units = 0.0_f64;
    let mut rayleigh = dot(&x, &ax);
    let mut trace = vec![TraceRecord {
        method: "cpm".to_string(),
        passes: 0.0,
        seconds: started.elapsed().as_secs_f64(),
        rayleigh,
        suboptimality: None,
    }];
    for _ in 0..iters {
        if let Some(cap) = max_passes {
            if units / d as f64 >= cap {
                break;
            }
        }
        let xax = dot(&x, &ax);
        if xax <= 0.0 {
            return Err(Error::NonPositiveQuadraticForm { value: xax });
        }
        let c: Vec<f64> = ax.iter().zip(&x).map(|(&ai, &xi)| ai / xax - xi).collect();
        let selected = top_k_indices(&c, k);
        // Rewrite the selected coordinates, then fold each change into Ax by
        // scanning just that column. Targets come from the pre-update Ax so
        // all selected coordinates move simultaneously.
        let targets: Vec<(usize, f64)> = selected.iter().map(|&j| (j, ax[j] / xax)).collect();
        for (j, new_xj) in targets {
            let delta = new_xj - x[j];
            x[j] = new_xj;
            if delta != 0.0 {
                matrix.for_each_in_column(j, &mut |i, v| {
                    ax[i] += delta * v;
                    units += 1.0;
                });
            }
        }
        let m = norm(&x);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::ZeroIterate);
        }
        for v in x.iter_mut() {
            *v /= m;
        }
        for v in ax.iter_mut() {
            *v /= m;
        }
        rayleigh = dot(&x, &ax);
        trace.push(TraceRecord {
            method: "cpm".to_string(),
            passes: units / d as f64,
            seconds: started.elapsed().as_secs_f64(),
            rayleigh,
            suboptimality: None,
        });
    }
    finalize(matrix, x, rayleigh, trace)
}
