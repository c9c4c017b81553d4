//! Spectral embeddings: normalized-Laplacian eigenvectors for the standard
//! blockmodel and SCORE eigenvector ratios for the degree-corrected one.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, LaplacianMatrix};

const MAX_SWEEPS: usize = 100_000;
/// Coordinates below this magnitude do not fix an eigenvector's sign.
const SIGN_EPS: f64 = 1e-10;
/// Leading-eigenvector entries below this magnitude make SCORE ratios meaningless.
pub const SCORE_MIN_ENTRY: f64 = 1e-12;

/// Row-major `n x k` matrix of node coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * k {
            return Err(Error::Dimension(format!(
                "embedding of {n}x{k} needs {} values, got {}",
                n * k,
                data.len()
            )));
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "embedding entry ({}, {}) is not finite",
                p / k.max(1),
                p % k.max(1)
            )));
        }
        Ok(EmbeddingMatrix { n, k, data })
    }

    /// Builds from row vectors; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("ragged embedding rows".into()));
        }
        Self::new(rows.len(), k, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.k + c]).collect()
    }
}

/// Full eigendecomposition of a symmetric matrix, ordered by decreasing
/// absolute eigenvalue.
///
/// Ties in `|λ|` are broken by signed value (descending), then by the index of
/// the first coordinate of maximal magnitude. Each eigenvector is unit-norm
/// with its first non-negligible coordinate positive.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::Dimension(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                n,
                m.ncols()
            )));
        }
        if n == 0 {
            return Ok(Spectrum {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            });
        }
        let asym = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
            .fold(0.0, f64::max);
        let scale = m.amax().max(1.0);
        if asym > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symmetric (max deviation {asym:e})"
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("matrix has non-finite entries".into()));
        }

        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS).ok_or_else(|| {
            Error::Eigen(format!(
                "symmetric QR did not converge for n = {n} (Frobenius norm {:e}, max entry {:e})",
                m.norm(),
                m.amax()
            ))
        })?;

        let first_max = |c: usize| -> usize {
            let col = eig.eigenvectors.column(c);
            let mx = col.amax();
            col.iter()
                .position(|v| (v.abs() - mx).abs() <= 1e-12)
                .unwrap_or(0)
        };
        let lam = &eig.eigenvalues;
        let tol = 1e-10 * lam.amax().max(1.0);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (la, lb) = (lam[a], lam[b]);
            if (la.abs() - lb.abs()).abs() > tol {
                return lb.abs().partial_cmp(&la.abs()).unwrap_or(Ordering::Equal);
            }
            if (la - lb).abs() > tol {
                return lb.partial_cmp(&la).unwrap_or(Ordering::Equal);
            }
            first_max(a).cmp(&first_max(b)).then(a.cmp(&b))
        });

        let values = order.iter().map(|&c| lam[c]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let col = eig.eigenvectors.column(src);
            let norm = col.norm();
            let sign = col
                .iter()
                .find(|v| v.abs() > SIGN_EPS)
                .map_or(1.0, |v| v.signum());
            vectors.set_column(dst, &(col * (sign / norm)));
        }
        Ok(Spectrum { values, vectors })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// The `k` leading eigenpairs.
    pub fn top(&self, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
        check_k(k, self.len())?;
        Ok((
            self.values[..k].to_vec(),
            self.vectors.columns(0, k).into_owned(),
        ))
    }

    /// Rows of the `k` leading eigenvectors.
    pub fn embedding(&self, k: usize) -> Result<EmbeddingMatrix> {
        check_k(k, self.len())?;
        let n = self.len();
        let data = (0..n)
            .flat_map(|i| (0..k).map(move |c| (i, c)))
            .map(|(i, c)| self.vectors[(i, c)])
            .collect();
        EmbeddingMatrix::new(n, k, data)
    }

    /// SCORE coordinates `(1, v2/v1, .., vk/v1)` with ratios clipped to
    /// `[-ln n, ln n]`.
    pub fn ratio_embedding(&self, k: usize) -> Result<EmbeddingMatrix> {
        check_k(k, self.len())?;
        let n = self.len();
        if k == 1 {
            return EmbeddingMatrix::new(n, 1, vec![1.0; n]);
        }
        let lead = self.vectors.column(0);
        if let Some((index, v)) = lead
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() < SCORE_MIN_ENTRY)
        {
            return Err(Error::DegenerateRatio {
                index,
                value: v.abs(),
            });
        }
        let clip = (n as f64).ln();
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            data.push(1.0);
            for c in 1..k {
                data.push((self.vectors[(i, c)] / lead[i]).clamp(-clip, clip));
            }
        }
        EmbeddingMatrix::new(n, k, data)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// The `k` eigenpairs of largest absolute eigenvalue.
pub fn top_eigenpairs(m: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_k(k, m.nrows())?;
    Spectrum::of(m)?.top(k)
}

/// Leading `k` eigenvectors of the normalized Laplacian.
pub fn spectral_embed(l: &LaplacianMatrix, k: usize) -> Result<EmbeddingMatrix> {
    check_k(k, l.n())?;
    Spectrum::of(l.matrix())?.embedding(k)
}

/// SCORE embedding from the adjacency eigenvectors.
pub fn score_embed(a: &AdjacencyMatrix, k: usize) -> Result<EmbeddingMatrix> {
    check_k(k, a.n())?;
    if k == 1 {
        return EmbeddingMatrix::new(a.n(), 1, vec![1.0; a.n()]);
    }
    Spectrum::of(&a.to_dense())?.ratio_embedding(k)
}
