//! Composite-likelihood BIC: sensitivity (Hessian) diagonal, leave-one-vertex-out
//! jackknife covariance, estimated model complexity, and the sweep over
//! candidate community numbers.
//!
//! The composite log-likelihood is the blockmodel log-likelihood under working
//! independence of edges given labels. Its Hessian in the block parameters is
//! diagonal, so the estimated complexity reduces to
//! `sum_ab Var_jack(θ_ab) * H_ab` over the estimable blocks.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::blockmodel::{
    block_counts, dcbm_loglik_counts, dcbm_mle_from, node_block_degrees, possible_pairs, sbm_loglik_counts,
    sbm_mle, BlockCounts, DcbmParams, Model, SbmParams,
};
use crate::cluster::Clusterer;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::kmeans::KMeansConfig;
use crate::labeling::{pair_count, pair_index, pairs, Labeling};

/// Fitted block parameters of either model.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockFit {
    Sbm(SbmParams),
    Dcbm(DcbmParams),
}

impl BlockFit {
    /// Fits the model by maximum likelihood for a fixed labeling.
    pub fn fit(a: &AdjacencyMatrix, z: &Labeling, model: Model) -> Result<(BlockCounts, BlockFit)> {
        let counts = block_counts(a, z)?;
        let fit = match model {
            Model::Sbm => BlockFit::Sbm(sbm_mle(&counts)),
            Model::Dcbm => BlockFit::Dcbm(dcbm_mle_from(&counts, a, z)),
        };
        Ok((counts, fit))
    }

    pub fn model(&self) -> Model {
        match self {
            BlockFit::Sbm(_) => Model::Sbm,
            BlockFit::Dcbm(_) => Model::Dcbm,
        }
    }

    pub fn theta(&self) -> &[f64] {
        match self {
            BlockFit::Sbm(p) => &p.theta,
            BlockFit::Dcbm(p) => &p.theta,
        }
    }

    pub fn loglik(&self, counts: &BlockCounts, degrees: &[usize]) -> f64 {
        match self {
            BlockFit::Sbm(p) => sbm_loglik_counts(counts, p),
            BlockFit::Dcbm(p) => dcbm_loglik_counts(counts, degrees, p),
        }
    }
}

/// Diagonal of the negative Hessian of the composite log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianDiagonal {
    pub values: Vec<f64>,
    /// Blocks whose estimate sits on the boundary (or is undefined); they are
    /// left out of every complexity sum and their value is 0.
    pub excluded: Vec<bool>,
}

impl HessianDiagonal {
    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|&&e| e).count()
    }

    /// Number of estimable block parameters.
    pub fn estimable(&self) -> usize {
        self.excluded.len() - self.excluded_count()
    }
}

/// Whether a block's estimate lies where the composite score is undefined.
fn degenerate_block(model: Model, m: u64, n: u64) -> bool {
    match model {
        Model::Sbm => n == 0 || m == 0 || m == n,
        Model::Dcbm => m == 0,
    }
}

/// Hessian diagonal from block counts and the fitted parameters.
pub fn hessian_from_counts(counts: &BlockCounts, fit: &BlockFit) -> HessianDiagonal {
    let model = fit.model();
    let theta = fit.theta();
    let mut values = Vec::with_capacity(theta.len());
    let mut excluded = Vec::with_capacity(theta.len());
    for idx in 0..theta.len() {
        let (m, n) = (counts.edges[idx], counts.pairs[idx]);
        let t = theta[idx];
        let bad = degenerate_block(model, m, n) || !(t > 0.0) || (model == Model::Sbm && t >= 1.0);
        excluded.push(bad);
        values.push(if bad {
            0.0
        } else {
            match model {
                Model::Sbm => {
                    let m = m as f64;
                    m / (t * t) + (n as f64 - m) / ((1.0 - t) * (1.0 - t))
                }
                Model::Dcbm => 1.0 / t,
            }
        });
    }
    HessianDiagonal { values, excluded }
}

/// Negative Hessian diagonal at `fit` for labeling `z`.
pub fn hessian_diag(a: &AdjacencyMatrix, z: &Labeling, fit: &BlockFit) -> Result<HessianDiagonal> {
    if fit.theta().len() != pair_count(z.k()) {
        return Err(Error::Dimension("parameters do not match labeling".into()));
    }
    Ok(hessian_from_counts(&block_counts(a, z)?, fit))
}

/// Composite score `u(θ_ab)` evaluated at `fit`, one entry per block
/// (zero for excluded blocks).
pub fn composite_score(counts: &BlockCounts, fit: &BlockFit) -> Vec<f64> {
    let h = hessian_from_counts(counts, fit);
    pairs(counts.k)
        .zip(fit.theta())
        .enumerate()
        .map(|(idx, ((a, b), &t))| {
            if h.excluded[idx] {
                return 0.0;
            }
            match fit.model() {
                Model::Sbm => {
                    let m = counts.edges[idx] as f64;
                    m / t - (counts.pairs[idx] as f64 - m) / (1.0 - t)
                }
                Model::Dcbm => counts.endpoint_count(a, b) as f64 / t - 1.0,
            }
        })
        .collect()
}

/// Jackknife covariance of the block estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct JackknifeCovariance {
    pub matrix: DMatrix<f64>,
    /// Count of (deletion, block) combinations where removing the vertex
    /// left the block without possible pairs; they contribute zero deviation.
    pub degenerate_deletions: usize,
}

impl JackknifeCovariance {
    pub fn variance(&self, block: usize) -> f64 {
        self.matrix[(block, block)]
    }
}

/// Leave-one-vertex-out jackknife
/// `((N-1)/N) sum_l (θ^(-l) - θ)(θ^(-l) - θ)^T` with the labeling held fixed.
///
/// Each deletion is applied to the block counts incrementally. For the
/// degree-corrected model only the block rates enter; the degree effects are
/// nuisance parameters and do not appear in the complexity.
pub fn jackknife_cov(a: &AdjacencyMatrix, z: &Labeling, model: Model) -> Result<JackknifeCovariance> {
    let counts = block_counts(a, z)?;
    if a.n() < 3 {
        return Err(Error::InvalidArgument(format!(
            "jackknife needs at least 3 nodes, got {}",
            a.n()
        )));
    }
    Ok(jackknife_from_counts(a, z, &counts, model))
}

pub(crate) fn jackknife_from_counts(
    a: &AdjacencyMatrix,
    z: &Labeling,
    counts: &BlockCounts,
    model: Model,
) -> JackknifeCovariance {
    let n = a.n();
    let k = z.k();
    let p = pair_count(k);
    let theta_full: Vec<f64> = match model {
        Model::Sbm => counts
            .edges
            .iter()
            .zip(&counts.pairs)
            .map(|(&m, &np)| if np == 0 { 0.0 } else { m as f64 / np as f64 })
            .collect(),
        Model::Dcbm => counts.endpoint_counts().into_iter().map(|m| m as f64).collect(),
    };
    let to_block = node_block_degrees(a, z);
    let mut acc = DMatrix::<f64>::zeros(p, p);
    let mut degenerate = 0usize;
    let mut idx = vec![0usize; k];
    let mut dev = vec![0.0; k];

    for l in 0..n {
        let c = z.get(l);
        let d_l = &to_block[l * k..(l + 1) * k];
        // only blocks (c, b) change when a vertex of community c is removed
        for b in 0..k {
            let block = pair_index(k, c, b);
            idx[b] = block;
            let m_full = counts.edges[block];
            let m_minus = m_full - d_l[b] as u64;
            dev[b] = match model {
                Model::Sbm => {
                    if counts.pairs[block] == 0 {
                        0.0
                    } else {
                        let size_c = counts.sizes[c] - 1;
                        let size_b = if b == c { size_c } else { counts.sizes[b] };
                        let n_minus = possible_pairs(c, b, size_c, size_b);
                        if n_minus == 0 {
                            degenerate += 1;
                            0.0
                        } else {
                            m_minus as f64 / n_minus as f64 - theta_full[block]
                        }
                    }
                }
                // a within-community edge carries two endpoints
                Model::Dcbm => -(d_l[b] as f64) * if b == c { 2.0 } else { 1.0 },
            };
        }
        for x in 0..k {
            if dev[x] == 0.0 {
                continue;
            }
            for y in 0..k {
                acc[(idx[x], idx[y])] += dev[x] * dev[y];
            }
        }
    }
    acc *= (n as f64 - 1.0) / n as f64;
    JackknifeCovariance {
        matrix: acc,
        degenerate_deletions: degenerate,
    }
}

/// `trace(Var_jack * H)` over estimable blocks; only the covariance diagonal
/// enters because `H` is diagonal.
pub fn complexity_dhat(h: &HessianDiagonal, v: &JackknifeCovariance) -> Result<f64> {
    if v.matrix.nrows() != h.values.len() || v.matrix.ncols() != h.values.len() {
        return Err(Error::Dimension(format!(
            "Hessian has {} blocks, covariance is {}x{}",
            h.values.len(),
            v.matrix.nrows(),
            v.matrix.ncols()
        )));
    }
    Ok(h
        .values
        .iter()
        .enumerate()
        .filter(|(b, _)| !h.excluded[*b])
        .map(|(b, &hv)| v.variance(b) * hv)
        .sum())
}

/// `-2 loglik + complexity * ln(N(N-1)/2)`.
pub fn criterion(loglik: f64, complexity: f64, n: usize) -> f64 {
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    -2.0 * loglik + complexity * pairs.ln()
}

/// Which penalty the CL-BIC column uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComplexityMode {
    /// Jackknife-estimated complexity.
    #[default]
    Jackknife,
    /// The classical parameter count `k(k+1)/2`; makes CL-BIC coincide with BIC.
    Dimension,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub model: Model,
    pub seed: u64,
    pub kmeans: KMeansConfig,
    pub complexity: ComplexityMode,
}

impl SelectionConfig {
    pub fn new(model: Model, k_min: usize, k_max: usize, seed: u64) -> Self {
        SelectionConfig {
            k_min,
            k_max,
            model,
            seed,
            kmeans: KMeansConfig::default(),
            complexity: ComplexityMode::Jackknife,
        }
    }
}

/// Candidate range used when none is given.
pub const DEFAULT_K_RANGE: (usize, usize) = (1, 18);

/// k-means seed used when none is given.
pub const DEFAULT_SEED: u64 = 1;

/// Degeneracy notes attached to a candidate `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flag {
    /// Clustering left this many communities empty.
    EmptyCommunities(usize),
    /// k-means saw fewer distinct points than `k`.
    DegenerateKMeans,
    /// Blocks left out of the complexity sum.
    ExcludedBlocks(usize),
    /// Jackknife deletions that emptied a block.
    DegenerateDeletions(usize),
    /// Communities with zero total degree (DCBM).
    ZeroDegreeCommunities(usize),
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::EmptyCommunities(c) => write!(f, "empty_communities={c}"),
            Flag::DegenerateKMeans => f.write_str("degenerate_kmeans"),
            Flag::ExcludedBlocks(c) => write!(f, "excluded_blocks={c}"),
            Flag::DegenerateDeletions(c) => write!(f, "degenerate_deletions={c}"),
            Flag::ZeroDegreeCommunities(c) => write!(f, "zero_degree_communities={c}"),
        }
    }
}

impl std::str::FromStr for Flag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "degenerate_kmeans" {
            return Ok(Flag::DegenerateKMeans);
        }
        let (key, val) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("bad flag {s:?}")))?;
        let c: usize = val
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad flag count in {s:?}")))?;
        match key {
            "empty_communities" => Ok(Flag::EmptyCommunities(c)),
            "excluded_blocks" => Ok(Flag::ExcludedBlocks(c)),
            "degenerate_deletions" => Ok(Flag::DegenerateDeletions(c)),
            "zero_degree_communities" => Ok(Flag::ZeroDegreeCommunities(c)),
            _ => Err(Error::InvalidArgument(format!("unknown flag {key:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRecord {
    pub k: usize,
    pub loglik: f64,
    pub d_hat: f64,
    /// Parameter count `k(k+1)/2` used by the BIC column.
    pub dimension: usize,
    pub clbic: f64,
    pub bic: f64,
    pub labeling: Labeling,
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub n: usize,
    pub model: Model,
    pub seed: u64,
    pub records: Vec<SelectionRecord>,
    pub chosen_clbic: usize,
    pub chosen_bic: usize,
}

impl SelectionResult {
    pub fn record(&self, k: usize) -> Option<&SelectionRecord> {
        self.records.iter().find(|r| r.k == k)
    }
}

/// Smallest `k` attaining the minimum of `key`.
fn argmin_k(records: &[SelectionRecord], key: impl Fn(&SelectionRecord) -> f64) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for r in records {
        let v = key(r);
        match best {
            Some((_, b)) if !(v < b) => {}
            _ => best = Some((r.k, v)),
        }
    }
    best.map_or(0, |b| b.0)
}

/// Evaluates one candidate `k` on a fixed labeling.
pub fn evaluate_labeling(
    a: &AdjacencyMatrix,
    z: &Labeling,
    model: Model,
    mode: ComplexityMode,
) -> Result<SelectionRecord> {
    let (counts, fit) = BlockFit::fit(a, z, model)?;
    let degrees = a.degrees();
    let loglik = fit.loglik(&counts, degrees.as_slice());
    let h = hessian_from_counts(&counts, &fit);
    let jack = jackknife_from_counts(a, z, &counts, model);
    let dimension = pair_count(z.k());
    let d_hat = match mode {
        ComplexityMode::Jackknife => complexity_dhat(&h, &jack)?,
        ComplexityMode::Dimension => dimension as f64,
    };

    let mut flags = Vec::new();
    let empty = z.empty_communities();
    if empty > 0 {
        flags.push(Flag::EmptyCommunities(empty));
    }
    if h.excluded_count() > 0 {
        flags.push(Flag::ExcludedBlocks(h.excluded_count()));
    }
    if jack.degenerate_deletions > 0 {
        flags.push(Flag::DegenerateDeletions(jack.degenerate_deletions));
    }
    if let BlockFit::Dcbm(p) = &fit {
        if !p.zero_degree_communities.is_empty() {
            flags.push(Flag::ZeroDegreeCommunities(p.zero_degree_communities.len()));
        }
    }
    Ok(SelectionRecord {
        k: z.k(),
        loglik,
        d_hat,
        dimension,
        clbic: criterion(loglik, d_hat, a.n()),
        bic: criterion(loglik, dimension as f64, a.n()),
        labeling: z.clone(),
        flags,
    })
}

/// Runs cluster -> fit -> complexity -> criteria for every candidate `k` and
/// picks the minimizers (ties go to the smaller `k`).
pub fn select_k(a: &AdjacencyMatrix, cfg: &SelectionConfig) -> Result<SelectionResult> {
    let n = a.n();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "model selection needs at least 3 nodes, got {n}"
        )));
    }
    if cfg.k_min == 0 || cfg.k_min > cfg.k_max || cfg.k_max > n {
        return Err(Error::InvalidArgument(format!(
            "candidate range {}..={} invalid for {n} nodes",
            cfg.k_min, cfg.k_max
        )));
    }
    let clusterer = if cfg.k_max > 1 {
        Some(Clusterer::with_config(a, cfg.model, cfg.kmeans)?)
    } else {
        None
    };
    let records = (cfg.k_min..=cfg.k_max)
        .into_par_iter()
        .map(|k| {
            let fit = match &clusterer {
                Some(c) => c.cluster(k, cfg.seed)?,
                None => crate::kmeans::KMeansFit {
                    labeling: Labeling::single(n),
                    wcss: 0.0,
                    history: Vec::new(),
                    degenerate: false,
                },
            };
            let mut rec = evaluate_labeling(a, &fit.labeling, cfg.model, cfg.complexity)?;
            if fit.degenerate {
                rec.flags.insert(0, Flag::DegenerateKMeans);
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let chosen_clbic = argmin_k(&records, |r| r.clbic);
    let chosen_bic = argmin_k(&records, |r| r.bic);
    Ok(SelectionResult {
        n,
        model: cfg.model,
        seed: cfg.seed,
        records,
        chosen_clbic,
        chosen_bic,
    })
}

/// Pairs `(a, b)` of all blocks, in parameter order.
pub fn block_pairs(k: usize) -> Vec<(usize, usize)> {
    pairs(k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five() -> (AdjacencyMatrix, Labeling) {
        let a = AdjacencyMatrix::from_edges(5, [(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let z = Labeling::from_one_based(2, &[1, 1, 1, 2, 2]).unwrap();
        (a, z)
    }

    #[test]
    fn hessian_five_node_cross_block() {
        let (a, z) = five();
        let (_, fit) = BlockFit::fit(&a, &z, Model::Sbm).unwrap();
        let h = hessian_diag(&a, &z, &fit).unwrap();
        assert!((h.values[1] - 43.2).abs() < 1e-10);
        assert!((h.values[1] - 6.0 / (1.0 / 6.0 * 5.0 / 6.0)).abs() < 1e-10);
        // θ_22 = 1 sits on the boundary
        assert!(h.excluded[2]);
        assert!(!h.excluded[0]);
    }

    #[test]
    fn hessian_dcbm_reciprocal() {
        let (a, z) = five();
        let (_, fit) = BlockFit::fit(&a, &z, Model::Dcbm).unwrap();
        let h = hessian_diag(&a, &z, &fit).unwrap();
        assert_eq!(h.values, vec![0.25, 1.0, 0.5]);
    }

    #[test]
    fn hessian_complete_graph_excluded() {
        let k4 = AdjacencyMatrix::from_upper(4, |_, _| true);
        let z = Labeling::single(4);
        let (_, fit) = BlockFit::fit(&k4, &z, Model::Sbm).unwrap();
        let h = hessian_diag(&k4, &z, &fit).unwrap();
        assert_eq!(h.excluded, vec![true]);
        assert_eq!(h.estimable(), 0);
    }

    #[test]
    fn jackknife_zero_for_complete_graph() {
        let k6 = AdjacencyMatrix::from_upper(6, |_, _| true);
        let v = jackknife_cov(&k6, &Labeling::single(6), Model::Sbm).unwrap();
        assert_eq!(v.matrix, DMatrix::zeros(1, 1));
    }

    #[test]
    fn jackknife_five_node_block_22() {
        let (a, z) = five();
        let v = jackknife_cov(&a, &z, Model::Sbm).unwrap();
        // deleting node 4 or 5 leaves block (2,2) without pairs
        assert_eq!(v.degenerate_deletions, 2);
        assert_eq!(v.variance(2), 0.0);
        // block (1,1): θ = 2/3; deleting nodes 1, 2, 3 gives 1, 0, 1; nodes 4, 5 change nothing
        let want = 0.8 * ((1.0f64 / 3.0).powi(2) * 2.0 + (2.0f64 / 3.0).powi(2));
        assert!((v.variance(0) - want).abs() < 1e-12);
    }

    #[test]
    fn complexity_trace() {
        let h = HessianDiagonal {
            values: vec![2.0, 4.0],
            excluded: vec![false, false],
        };
        let v = JackknifeCovariance {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.25])),
            degenerate_deletions: 0,
        };
        assert_eq!(complexity_dhat(&h, &v).unwrap(), 2.0);
        let zero = JackknifeCovariance {
            matrix: DMatrix::zeros(2, 2),
            degenerate_deletions: 0,
        };
        assert_eq!(complexity_dhat(&h, &zero).unwrap(), 0.0);
    }

    #[test]
    fn criterion_formula() {
        let c = criterion(-100.0, 3.0, 10);
        assert!((c - (200.0 + 3.0 * 45f64.ln())).abs() < 1e-12);
        assert!((c - 211.420).abs() < 1e-3);
        assert_eq!(criterion(-7.5, 0.0, 10), 15.0);
    }

    #[test]
    fn flags_round_trip() {
        for f in [
            Flag::EmptyCommunities(2),
            Flag::DegenerateKMeans,
            Flag::ExcludedBlocks(3),
            Flag::DegenerateDeletions(1),
            Flag::ZeroDegreeCommunities(4),
        ] {
            assert_eq!(f.to_string().parse::<Flag>().unwrap(), f);
        }
    }

    #[test]
    fn argmin_prefers_smaller_k() {
        let rec = |k, v| SelectionRecord {
            k,
            loglik: 0.0,
            d_hat: 0.0,
            dimension: 0,
            clbic: v,
            bic: v,
            labeling: Labeling::single(1),
            flags: vec![],
        };
        assert_eq!(argmin_k(&[rec(1, 3.0), rec(2, 1.0), rec(3, 1.0)], |r| r.clbic), 2);
    }

    #[test]
    fn disjoint_cliques_choose_two() {
        let a = AdjacencyMatrix::from_edges(
            20,
            (0..20)
                .flat_map(|i| (i + 1..20).map(move |j| (i, j)))
                .filter(|&(i, j)| (i < 10) == (j < 10)),
        )
        .unwrap();
        let res = select_k(&a, &SelectionConfig::new(Model::Sbm, 1, 5, 1)).unwrap();
        // every block of the planted split is degenerate: zero loglik, zero penalty
        assert_eq!(res.record(2).unwrap().clbic, 0.0);
        assert_eq!(res.chosen_clbic, 2);
        assert_eq!(res.records.len(), 5);
    }
}
