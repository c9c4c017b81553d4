//! Block statistics, maximum likelihood fits and log-likelihoods for the
//! standard (Bernoulli) and degree-corrected (Poisson) blockmodels.
//!
//! Off-diagonal edge counts `m_ab` count every edge joining communities `a`
//! and `b`, whatever the node order. Blocks are the unordered pairs `a <= b`,
//! indexed by [`pair_index`].
//!
//! The degree-corrected likelihood sums over ordered block pairs and counts
//! edge endpoints, as in Karrer and Newman: a within-community edge adds 2 to
//! its block count, a between-community edge adds 1 to each of `(a, b)` and
//! `(b, a)`. See [`BlockCounts::endpoint_count`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::labeling::{pair_count, pair_index, pairs, Labeling};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs whenever
/// the multiplying count is nonzero.
pub const LOG_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sbm,
    Dcbm,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Sbm => "sbm",
            Model::Dcbm => "dcbm",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbm" => Ok(Model::Sbm),
            "dcbm" => Ok(Model::Dcbm),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// Community sizes, possible-pair counts `n_ab` and edge counts `m_ab`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub pairs: Vec<u64>,
    pub edges: Vec<u64>,
}

impl BlockCounts {
    pub fn pair(&self, a: usize, b: usize) -> u64 {
        self.pairs[pair_index(self.k, a, b)]
    }

    pub fn edge(&self, a: usize, b: usize) -> u64 {
        self.edges[pair_index(self.k, a, b)]
    }

    pub fn total_edges(&self) -> u64 {
        self.edges.iter().sum()
    }

    /// Edge endpoints in `a` whose other end lies in `b`: `2 m_aa` on the
    /// diagonal, `m_ab` otherwise. Summing over `b` gives the total degree of
    /// community `a`.
    pub fn endpoint_count(&self, a: usize, b: usize) -> u64 {
        let m = self.edge(a, b);
        if a == b {
            2 * m
        } else {
            m
        }
    }

    /// [`Self::endpoint_count`] for every block, in pair order.
    pub fn endpoint_counts(&self) -> Vec<u64> {
        pairs(self.k).map(|(a, b)| self.endpoint_count(a, b)).collect()
    }
}

/// Maximum number of node pairs between communities of the given sizes.
#[inline]
pub(crate) fn possible_pairs(a: usize, b: usize, size_a: usize, size_b: usize) -> u64 {
    if a == b {
        (size_a as u64) * (size_a as u64).saturating_sub(1) / 2
    } else {
        size_a as u64 * size_b as u64
    }
}

fn check_len(a: &AdjacencyMatrix, z: &Labeling) -> Result<()> {
    if a.n() != z.len() {
        return Err(Error::Dimension(format!(
            "graph has {} nodes but labeling has {}",
            a.n(),
            z.len()
        )));
    }
    Ok(())
}

pub fn block_counts(a: &AdjacencyMatrix, z: &Labeling) -> Result<BlockCounts> {
    check_len(a, z)?;
    let k = z.k();
    let sizes = z.sizes();
    let pairs_: Vec<u64> = pairs(k)
        .map(|(x, y)| possible_pairs(x, y, sizes[x], sizes[y]))
        .collect();
    let mut edges = vec![0u64; pair_count(k)];
    for (i, j) in a.edges() {
        edges[pair_index(k, z.get(i), z.get(j))] += 1;
    }
    Ok(BlockCounts {
        k,
        sizes,
        pairs: pairs_,
        edges,
    })
}

/// Edge counts from every node into every community, row-major `n x k`.
pub fn node_block_degrees(a: &AdjacencyMatrix, z: &Labeling) -> Vec<u32> {
    let k = z.k();
    let mut out = vec![0u32; a.n() * k];
    for i in 0..a.n() {
        for &j in a.neighbors(i) {
            out[i * k + z.get(j)] += 1;
        }
    }
    out
}

/// Block probabilities of the standard blockmodel.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pub k: usize,
    pub theta: Vec<f64>,
    /// Blocks without any possible pair; their probability is reported as 0.
    pub undefined: Vec<usize>,
}

impl SbmParams {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.theta[pair_index(self.k, a, b)]
    }
}

/// Block rates and node degree effects of the degree-corrected blockmodel.
#[derive(Debug, Clone, PartialEq)]
pub struct DcbmParams {
    pub k: usize,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    /// Communities whose total degree is zero; their nodes get `omega = 0`.
    pub zero_degree_communities: Vec<usize>,
}

impl DcbmParams {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.theta[pair_index(self.k, a, b)]
    }
}

/// `theta_ab = m_ab / n_ab`.
pub fn sbm_mle(counts: &BlockCounts) -> SbmParams {
    let mut undefined = Vec::new();
    let theta = counts
        .edges
        .iter()
        .zip(&counts.pairs)
        .enumerate()
        .map(|(idx, (&m, &n))| {
            if n == 0 {
                undefined.push(idx);
                0.0
            } else {
                m as f64 / n as f64
            }
        })
        .collect();
    SbmParams {
        k: counts.k,
        theta,
        undefined,
    }
}

#[inline]
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.max(LOG_EPS).ln()
    }
}

/// Bernoulli log-likelihood aggregated by block.
pub fn sbm_loglik_counts(counts: &BlockCounts, params: &SbmParams) -> f64 {
    counts
        .edges
        .iter()
        .zip(&counts.pairs)
        .zip(&params.theta)
        .map(|((&m, &n), &t)| {
            let m = m as f64;
            let non = n as f64 - m;
            xlogy(m, t) + xlogy(non, 1.0 - t)
        })
        .sum()
}

/// `sum_{i<j} [A_ij log θ + (1 - A_ij) log(1 - θ)]` with `0 log 0 = 0`.
pub fn sbm_loglik(a: &AdjacencyMatrix, z: &Labeling, params: &SbmParams) -> Result<f64> {
    if params.k != z.k() {
        return Err(Error::Dimension(format!(
            "parameters for k = {} but labeling has k = {}",
            params.k,
            z.k()
        )));
    }
    Ok(sbm_loglik_counts(&block_counts(a, z)?, params))
}

/// `theta_ab` = endpoint count of block `(a, b)`,
/// `omega_i = d_i / (total degree of i's community)`.
pub fn dcbm_mle(a: &AdjacencyMatrix, z: &Labeling) -> Result<DcbmParams> {
    let counts = block_counts(a, z)?;
    Ok(dcbm_mle_from(&counts, a, z))
}

pub(crate) fn dcbm_mle_from(counts: &BlockCounts, a: &AdjacencyMatrix, z: &Labeling) -> DcbmParams {
    let deg = a.degrees();
    let mut totals = vec![0usize; z.k()];
    for (i, &d) in deg.as_slice().iter().enumerate() {
        totals[z.get(i)] += d;
    }
    let omega = deg
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let t = totals[z.get(i)];
            if t == 0 {
                0.0
            } else {
                d as f64 / t as f64
            }
        })
        .collect();
    let zero_degree_communities = (0..z.k())
        .filter(|&c| totals[c] == 0 && counts.sizes[c] > 0)
        .collect();
    DcbmParams {
        k: z.k(),
        theta: counts.endpoint_counts().into_iter().map(|m| m as f64).collect(),
        omega,
        zero_degree_communities,
    }
}

/// `2 sum_i d_i log ω_i + sum_{a,b} (M_ab log θ_ab - θ_ab)` over ordered block
/// pairs, `M` the endpoint counts. Equals twice the Poisson log-likelihood of
/// the upper triangle with self-loop rates `ω_i² θ_aa / 2`, up to factorials.
pub fn dcbm_loglik(a: &AdjacencyMatrix, z: &Labeling, params: &DcbmParams) -> Result<f64> {
    let counts = block_counts(a, z)?;
    if params.k != z.k() || params.omega.len() != a.n() {
        return Err(Error::Dimension("DCBM parameters do not match graph/labeling".into()));
    }
    Ok(dcbm_loglik_counts(&counts, &a.degrees().0, params))
}

pub(crate) fn dcbm_loglik_counts(counts: &BlockCounts, degrees: &[usize], params: &DcbmParams) -> f64 {
    let degree_term: f64 = degrees
        .iter()
        .zip(&params.omega)
        .map(|(&d, &w)| {
            if d == 0 {
                0.0
            } else {
                d as f64 * w.max(LOG_EPS).ln()
            }
        })
        .sum();
    let block_term: f64 = pairs(counts.k)
        .zip(&params.theta)
        .map(|((a, b), &t)| {
            let m = counts.endpoint_count(a, b) as f64;
            let log_part = if m == 0.0 { 0.0 } else { m * t.max(LOG_EPS).ln() };
            // (a, b) and (b, a) are the same parameter
            let orientations = if a == b { 1.0 } else { 2.0 };
            orientations * (log_part - t)
        })
        .sum();
    2.0 * degree_term + block_term
}

/// Expected adjacency `ω_i ω_j θ_{z_i z_j}` (zero diagonal), row-major.
pub fn dcbm_expected_adjacency(z: &Labeling, theta: &[f64], omega: &[f64]) -> Vec<f64> {
    let n = z.len();
    let k = z.k();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i * n + j] = omega[i] * omega[j] * theta[pair_index(k, z.get(i), z.get(j))];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// z = (1,1,1,2,2), edges {1-2, 2-3, 1-4, 4-5} in one-based labels.
    fn five() -> (AdjacencyMatrix, Labeling) {
        let a = AdjacencyMatrix::from_edges(5, [(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let z = Labeling::from_one_based(2, &[1, 1, 1, 2, 2]).unwrap();
        (a, z)
    }

    #[test]
    fn counts_of_five_node_example() {
        let (a, z) = five();
        let c = block_counts(&a, &z).unwrap();
        assert_eq!(c.sizes, vec![3, 2]);
        assert_eq!(c.pairs, vec![3, 6, 1]);
        assert_eq!(c.edges, vec![2, 1, 1]);
        assert_eq!(c.total_edges() as usize, a.edge_count());
    }

    #[test]
    fn counts_of_trivial_graphs() {
        let z = Labeling::from_one_based(2, &[1, 2, 1, 2]).unwrap();
        let c = block_counts(&AdjacencyMatrix::empty(4), &z).unwrap();
        assert!(c.edges.iter().all(|&m| m == 0));
        assert!(sbm_mle(&c).theta.iter().all(|&t| t == 0.0));

        let k5 = AdjacencyMatrix::from_upper(5, |_, _| true);
        let c = block_counts(&k5, &Labeling::single(5)).unwrap();
        assert_eq!(c.edges, vec![10]);
        assert_eq!(c.pairs, vec![10]);
        let p = sbm_mle(&c);
        assert_eq!(p.theta, vec![1.0]);
        assert_eq!(sbm_loglik(&k5, &Labeling::single(5), &p).unwrap(), 0.0);
    }

    #[test]
    fn sbm_mle_and_loglik_five_node() {
        let (a, z) = five();
        let p = sbm_mle(&block_counts(&a, &z).unwrap());
        assert!((p.theta[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.theta[1] - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(p.theta[2], 1.0);
        let ll = sbm_loglik(&a, &z, &p).unwrap();
        assert!((ll - (-4.6129)).abs() < 1e-4, "{ll}");
    }

    #[test]
    fn sbm_loglik_uniform_half() {
        let (a, z) = five();
        let p = SbmParams {
            k: 2,
            theta: vec![0.5; 3],
            undefined: vec![],
        };
        let ll = sbm_loglik(&a, &z, &p).unwrap();
        assert!((ll - 10.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((ll + 6.9315).abs() < 1e-4);
    }

    #[test]
    fn singleton_block_is_undefined() {
        let a = AdjacencyMatrix::from_edges(3, [(0, 1)]).unwrap();
        let z = Labeling::from_one_based(2, &[1, 1, 2]).unwrap();
        let p = sbm_mle(&block_counts(&a, &z).unwrap());
        assert_eq!(p.undefined, vec![2]);
        assert_eq!(p.theta[2], 0.0);
    }

    #[test]
    fn dcbm_mle_five_node() {
        let (a, z) = five();
        let p = dcbm_mle(&a, &z).unwrap();
        assert_eq!(p.theta, vec![4.0, 1.0, 2.0]);
        let want = [0.4, 0.4, 0.2, 2.0 / 3.0, 1.0 / 3.0];
        for (w, e) in p.omega.iter().zip(want) {
            assert!((w - e).abs() < 1e-15);
        }
        let ll = dcbm_loglik(&a, &z, &p).unwrap();
        // degree term 2 sum d log ω ≈ -14.3683; blocks 4 ln 4 - 4 + 2 ln 2 - 2 - 2
        let want = 2.0 * (2.0 * 0.4f64.ln() * 2.0 + 0.2f64.ln() + 2.0 * (2.0f64 / 3.0).ln() + (1.0f64 / 3.0).ln())
            + 4.0 * 4f64.ln()
            - 4.0
            + 2.0 * 2f64.ln()
            - 2.0
            - 2.0;
        assert!((ll - want).abs() < 1e-12, "{ll}");
        assert!((ll - (-15.4368)).abs() < 1e-4, "{ll}");
    }

    #[test]
    fn dcbm_star_and_single_edge() {
        let star = AdjacencyMatrix::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let p = dcbm_mle(&star, &Labeling::single(4)).unwrap();
        assert_eq!(p.theta, vec![6.0]);
        assert_eq!(p.omega, vec![0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);

        let edge = AdjacencyMatrix::from_edges(2, [(0, 1)]).unwrap();
        let z = Labeling::single(2);
        let p = dcbm_mle(&edge, &z).unwrap();
        let ll = dcbm_loglik(&edge, &z, &p).unwrap();
        assert!((ll - (-2.0 * 2f64.ln() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn dcbm_isolated_node_contributes_nothing() {
        let a = AdjacencyMatrix::from_edges(3, [(0, 1)]).unwrap();
        let z = Labeling::single(3);
        let p = dcbm_mle(&a, &z).unwrap();
        assert_eq!(p.omega[2], 0.0);
        let ll = dcbm_loglik(&a, &z, &p).unwrap();
        assert!((ll - (-2.0 * 2f64.ln() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_degree_community_is_flagged() {
        let a = AdjacencyMatrix::from_edges(3, [(0, 1)]).unwrap();
        let z = Labeling::from_one_based(2, &[1, 1, 2]).unwrap();
        let p = dcbm_mle(&a, &z).unwrap();
        assert_eq!(p.zero_degree_communities, vec![1]);
    }
}
