//! Sparse symmetric matrix storage with per-column access, Laplacian
//! construction, synthetic spiked spectra and deflation.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::util::gaussian_vec;

/// Column access to a symmetric linear operator. Coordinate solvers only ever
/// touch one column (plus the cached diagonal) per update.
pub trait ColumnOp {
    fn dim(&self) -> usize;

    /// Dense cache of the diagonal.
    fn diag(&self) -> &[f64];

    /// Visits the nonzero entries (row, value) of column `j`.
    fn for_each_in_column(&self, j: usize, f: &mut dyn FnMut(usize, f64));

    /// Matrix-vector product.
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if v.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; d];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                self.for_each_in_column(j, &mut |i, a| out[i] += a * vj);
            }
        }
        Ok(out)
    }

    /// v'Av; the caller normalizes for a Rayleigh quotient.
    fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        let av = self.apply(v)?;
        Ok(v.iter().zip(&av).map(|(a, b)| a * b).sum())
    }

    /// max_i sum_j |A[ij]|, an upper bound on the spectral radius.
    fn max_abs_row_sum(&self) -> f64 {
        let mut sums = vec![0.0; self.dim()];
        for j in 0..self.dim() {
            self.for_each_in_column(j, &mut |i, a| sums[i] += a.abs());
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

/// Symmetric matrix stored as per-column sparse lists with both triangles
/// materialized, so a column access is one contiguous scan. The diagonal is
/// cached densely because every coordinate stepsize needs `lambda - A[jj]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    columns: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from entries of the upper triangle (`i <= j`, each pair once).
    /// The mirrored entry is inserted automatically so the stored pattern is
    /// exactly symmetric.
    pub fn from_upper_triplets(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut columns = vec![Vec::new(); dim];
        let mut diag = vec![0.0; dim];
        for &(i, j, v) in entries {
            if i > j {
                return Err(Error::IndexOutOfRange { index: i, dim: j });
            }
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, dim });
            }
            if v == 0.0 {
                continue;
            }
            columns[j].push((i, v));
            if i != j {
                columns[i].push((j, v));
            } else {
                diag[i] = v;
            }
        }
        for col in &mut columns {
            col.sort_unstable_by_key(|&(i, _)| i);
        }
        Ok(Self { dim, columns, diag })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: m.ncols(),
            });
        }
        let mut entries = Vec::new();
        for j in 0..dim {
            for i in 0..=j {
                // symmetrize so the stored pattern is exactly symmetric
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                entries.push((i, j, v));
            }
        }
        Self::from_upper_triplets(dim, &entries)
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Entry lookup; O(nnz(column)). Mostly a test convenience.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j]
            .iter()
            .find(|&&(r, _)| r == i)
            .map_or(0.0, |&(_, v)| v)
    }
}

impl ColumnOp for SymmetricMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn for_each_in_column(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(i, v) in &self.columns[j] {
            f(i, v);
        }
    }
}

/// Normalized graph Laplacian `D^{-1/2} (D - W) D^{-1/2}`, multiplied by
/// `scale`. Degree-0 nodes get an all-zero row/column (their `D^{-1/2}`
/// entry is defined as 0), contributing eigenvalue 0.
pub fn normalized_laplacian(graph: &EdgeGraph, scale: f64) -> Result<SymmetricMatrix> {
    assert!(scale > 0.0, "scale must be positive");
    let d = graph.node_count;
    let degrees = graph.degrees();
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&deg| if deg == 0 { 0.0 } else { 1.0 / (deg as f64).sqrt() })
        .collect();

    let mut entries = Vec::with_capacity(graph.edges.len() + d);
    for (i, &deg) in degrees.iter().enumerate() {
        if deg > 0 {
            entries.push((i, i, scale));
        }
    }
    for &(a, b) in &graph.edges {
        let (i, j) = (a.min(b), a.max(b));
        entries.push((i, j, -scale * inv_sqrt[i] * inv_sqrt[j]));
    }
    SymmetricMatrix::from_upper_triplets(d, &entries)
}

/// Dense-as-sparse symmetric matrix with eigenvalues `{1, 1-delta, 1-2*delta, ...}`
/// under a seeded random rotation. The rotation is the QR orthogonal factor of
/// a seeded standard-Gaussian matrix, sign-fixed so the factor is
/// deterministic per seed.
pub fn synthetic_spiked(d: usize, delta: f64, seed: u64) -> Result<SymmetricMatrix> {
    assert!(d >= 2, "dimension must be at least 2");
    if !(delta > 0.0 && delta < 1.0 / (d as f64 - 1.0)) {
        return Err(Error::SpikedDeltaOutOfRange { delta, dim: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_vec(d, d, gaussian_vec(&mut rng, d * d));
    let qr = g.qr();
    let r = qr.r();
    let mut u = qr.q();
    // sign-fix: force positive diagonal of R
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| {
        1.0 - delta * k as f64
    }));
    let a = &u * s * u.transpose();
    SymmetricMatrix::from_dense(&a)
}

/// `A' = (I - p1 p1')A(I - p1 p1')` evaluated column by column without
/// materializing `A'`, using the cached `A p1`.
#[derive(Debug, Clone)]
pub struct DeflatedOperator<'a> {
    base: &'a SymmetricMatrix,
    p1: Vec<f64>,
    ap1: Vec<f64>,
    diag: Vec<f64>,
    p_ap: f64, // p1' A p1
}

impl<'a> DeflatedOperator<'a> {
    pub fn new(base: &'a SymmetricMatrix, p1: Vec<f64>) -> Result<Self> {
        let norm: f64 = p1.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit { norm });
        }
        let ap1 = base.apply(&p1)?;
        let p_ap: f64 = p1.iter().zip(&ap1).map(|(a, b)| a * b).sum();
        let diag: Vec<f64> = (0..base.dim())
            .map(|j| base.diag()[j] - 2.0 * p1[j] * ap1[j] + p1[j] * p1[j] * p_ap)
            .collect();
        Ok(Self {
            base,
            p1,
            ap1,
            diag,
            p_ap,
        })
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn base(&self) -> &SymmetricMatrix {
        self.base
    }

    /// Column j of the deflated operator as a dense vector:
    /// `(I - p1 p1') (A[:,j] - p1[j] * (A p1))`.
    pub fn deflated_column(&self, j: usize) -> Result<Vec<f64>> {
        let d = self.base.dim();
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, dim: d });
        }
        let mut col = vec![0.0; d];
        for &(i, v) in self.base.column(j) {
            col[i] = v;
        }
        let pj = self.p1[j];
        for (c, &ap) in col.iter_mut().zip(&self.ap1) {
            *c -= pj * ap;
        }
        let proj: f64 = self.p1.iter().zip(&col).map(|(a, b)| a * b).sum();
        for (c, &p) in col.iter_mut().zip(&self.p1) {
            *c -= proj * p;
        }
        Ok(col)
    }
}

impl ColumnOp for DeflatedOperator<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn for_each_in_column(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        let col = self.deflated_column(j).expect("index checked by caller");
        for (i, v) in col.into_iter().enumerate() {
            if v != 0.0 {
                f(i, v);
            }
        }
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if v.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: v.len(),
            });
        }
        // (I - pp')A(I - pp') v, three O(d)/O(nnz) sweeps
        let pv: f64 = self.p1.iter().zip(v).map(|(a, b)| a * b).sum();
        let proj: Vec<f64> = v
            .iter()
            .zip(&self.p1)
            .map(|(&x, &p)| x - pv * p)
            .collect();
        let mut out = self.base.apply(&proj)?;
        let p_out: f64 = self.p1.iter().zip(&out).map(|(a, b)| a * b).sum();
        for (o, &p) in out.iter_mut().zip(&self.p1) {
            *o -= p_out * p;
        }
        Ok(out)
    }

    fn max_abs_row_sum(&self) -> f64 {
        // crude but valid: ||A'|| <= ||A|| for an orthogonal projection sandwich
        self.base.max_abs_row_sum() + self.p_ap.abs()
    }
}
