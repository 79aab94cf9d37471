//! Dense reference surface: full spectra, exact shifted solves and the
//! theory quantities used by the invariant tests. Everything here refuses
//! dimensions above [`MAX_ORACLE_DIM`]; it exists to check the sparse
//! iterative path, not to replace it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::ColumnOp;
use crate::util::dot;

pub const MAX_ORACLE_DIM: usize = 1000;

/// Full eigendecomposition, eigenvalues descending, eigenvectors orthonormal.
#[derive(Debug, Clone)]
pub struct SpectrumOracle {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
}

impl SpectrumOracle {
    /// Dense matrix assembled from an operator's columns.
    pub fn dense_of<M: ColumnOp>(m: &M) -> Result<DMatrix<f64>> {
        let d = m.dim();
        if d > MAX_ORACLE_DIM {
            return Err(Error::OracleTooLarge {
                dim: d,
                max: MAX_ORACLE_DIM,
            });
        }
        let mut dense = DMatrix::zeros(d, d);
        for j in 0..d {
            m.for_each_in_column(j, &mut |i, v| dense[(i, j)] = v);
        }
        Ok(dense)
    }

    pub fn compute<M: ColumnOp>(m: &M) -> Result<Self> {
        let dense = Self::dense_of(m)?;
        let d = dense.nrows();
        let eig = dense.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("finite eigenvalues")
        });
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().cloned().collect())
            .collect();
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// k-th largest eigenvalue (0-indexed).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    /// rho_1 - rho_2.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0] - self.eigenvalues[1]
    }

    /// |w' p1| for a unit w.
    pub fn alignment(&self, w: &[f64]) -> f64 {
        dot(w, &self.eigenvectors[0]).abs()
    }

    /// The accurate-regime potential
    /// `G(w) = sqrt(sum_{i>=2} xi_i^2/beta_i) / sqrt(xi_1^2/beta_1)`
    /// for the shifted inverse at `lambda`.
    pub fn potential(&self, w: &[f64], lambda: f64) -> f64 {
        let mut num = 0.0;
        for i in 1..self.dim() {
            let xi = dot(w, &self.eigenvectors[i]);
            num += xi * xi * (lambda - self.eigenvalues[i]);
        }
        let xi1 = dot(w, &self.eigenvectors[0]);
        (num / (xi1 * xi1 * (lambda - self.eigenvalues[0]))).sqrt()
    }
}

/// Quantities from the convergence analysis, derived from a full spectrum.
/// Test surface only.
#[derive(Debug, Clone)]
pub struct TheoryParams {
    pub betas: Vec<f64>,
    pub gamma: f64,
    pub g0: f64,
    pub t1: usize,
    pub t2: usize,
    pub kappa: f64,
    pub sigma_upper: f64,
}

impl TheoryParams {
    pub fn new(
        oracle: &SpectrumOracle,
        lambda: f64,
        delta_tilde: f64,
        epsilon: f64,
        w0: &[f64],
    ) -> Self {
        let betas: Vec<f64> = oracle
            .eigenvalues
            .iter()
            .map(|&rho| 1.0 / (lambda - rho))
            .collect();
        let gamma = (3.0 * betas[0] + betas[1]) / (betas[0] + 3.0 * betas[1]);
        let g0 = oracle.potential(w0, lambda);
        let xi01_sq = {
            let xi = dot(w0, oracle.eigenvector(0));
            xi * xi
        };
        let t1 = ((2.0 / epsilon) * (4.0 / (epsilon * xi01_sq)).ln()).ceil() as usize;
        let t2 = (0.5 * (g0 * g0 / epsilon).ln() / gamma.ln()).ceil() as usize;
        let d = oracle.dim();
        let kappa = (lambda - oracle.eigenvalue(d - 1)) / (lambda - oracle.eigenvalue(0));
        TheoryParams {
            betas,
            gamma,
            g0,
            t1,
            t2,
            kappa,
            sigma_upper: 4.0 / delta_tilde,
        }
    }
}

/// Exact solve of `(lambda I - A) x = y` via dense factorization.
pub fn exact_shifted_solve<M: ColumnOp>(matrix: &M, lambda: f64, y: &[f64]) -> Result<Vec<f64>> {
    let d = matrix.dim();
    if y.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: y.len(),
        });
    }
    let dense = SpectrumOracle::dense_of(matrix)?;
    let shifted = DMatrix::identity(d, d) * lambda - dense;
    let sol = shifted
        .lu()
        .solve(&DVector::from_column_slice(y))
        .ok_or(Error::ZeroIterate)?;
    Ok(sol.iter().cloned().collect())
}
