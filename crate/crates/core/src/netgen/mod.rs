//! Correlation-contaminated blockmodel networks.
//!
//! Rows of the upper triangle are drawn independently. Within row `i`, the
//! edge indicators `A_ij` (`j > i`) threshold a correlated Gaussian vector:
//! `A_ij = 1{W_j >= -μ_j}` with `μ_j = Φ⁻¹(P_ij)`, so each edge keeps its
//! blockmodel marginal exactly while edges sharing endpoint `i` are dependent.

mod normal;
mod orthant;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_sf, threshold_from_theta};
pub use orthant::orthant_prob;

use crate::blockmodel::Model;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::labeling::{pair_index, Labeling};
use crate::rng;

/// Correlation among the Gaussian coordinates of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    /// Independent coordinates.
    #[default]
    None,
    /// `ρ_jl = ρ` for all `j != l` (requires `ρ >= 0`).
    Equal { rho: f64 },
    /// `ρ_jl = ρ^|j-l|` in node index distance.
    Decaying { rho: f64 },
}

impl Structure {
    fn validate(&self) -> Result<()> {
        match *self {
            Structure::None => Ok(()),
            Structure::Equal { rho } if (0.0..=1.0).contains(&rho) => Ok(()),
            Structure::Equal { rho } => Err(Error::InvalidSpec(format!(
                "equal correlation must lie in [0, 1], got {rho}"
            ))),
            Structure::Decaying { rho } if (-1.0..=1.0).contains(&rho) => Ok(()),
            Structure::Decaying { rho } => Err(Error::InvalidSpec(format!(
                "decaying correlation must lie in [-1, 1], got {rho}"
            ))),
        }
    }

    /// Correlation between coordinates `j` and `l`.
    pub fn rho(&self, j: usize, l: usize) -> f64 {
        if j == l {
            return 1.0;
        }
        match *self {
            Structure::None => 0.0,
            Structure::Equal { rho } => rho,
            Structure::Decaying { rho } => rho.powi(j.abs_diff(l) as i32),
        }
    }

    /// Fills `out[t]` with a Gaussian vector over coordinates `idx` (ascending).
    fn sample(&self, idx: &[usize], rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match *self {
            Structure::None => {
                for w in out.iter_mut() {
                    *w = rng.sample(StandardNormal);
                }
            }
            Structure::Equal { rho } => {
                let common: f64 = rng.sample(StandardNormal);
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                for w in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *w = a * common + b * z;
                }
            }
            Structure::Decaying { rho } => {
                let mut prev = 0.0;
                for (t, w) in out.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    *w = if t == 0 {
                        z
                    } else {
                        let r = rho.powi((idx[t] - idx[t - 1]) as i32);
                        r * prev + (1.0 - r * r).max(0.0).sqrt() * z
                    };
                    prev = *w;
                }
            }
        }
    }
}

/// Whether one structure spans the whole row or structures apply per
/// community of the column node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// One structure over all columns of the row, across community boundaries.
    #[default]
    Global,
    /// Columns are grouped by community; groups are mutually independent.
    /// The row node's own community uses `within`, every other community
    /// uses `between`.
    Blockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSpec {
    #[serde(default)]
    pub scope: Scope,
    #[serde(default)]
    pub within: Structure,
    #[serde(default)]
    pub between: Structure,
}

impl CorrelationSpec {
    pub fn independent() -> Self {
        Self::default()
    }

    pub fn global(s: Structure) -> Self {
        CorrelationSpec {
            scope: Scope::Global,
            within: s,
            between: Structure::None,
        }
    }

    pub fn blockwise(within: Structure, between: Structure) -> Self {
        CorrelationSpec {
            scope: Scope::Blockwise,
            within,
            between,
        }
    }

    fn validate(&self) -> Result<()> {
        self.within.validate()?;
        self.between.validate()?;
        if self.scope == Scope::Global && self.between != Structure::None {
            return Err(Error::InvalidSpec(
                "global scope uses a single structure; put it in `within`".into(),
            ));
        }
        Ok(())
    }
}

/// Distribution of the degree effects `ω_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaDist {
    #[default]
    ConstantOne,
    /// Uniform[0, 2] w.p. 0.8, 2/11 w.p. 0.1, 20/11 w.p. 0.1.
    Knmixture,
    Uniform { lo: f64, hi: f64 },
}

impl OmegaDist {
    /// Largest value the distribution can produce.
    pub fn sup(&self) -> f64 {
        match *self {
            OmegaDist::ConstantOne => 1.0,
            OmegaDist::Knmixture => 2.0,
            OmegaDist::Uniform { hi, .. } => hi,
        }
    }

    fn validate(&self) -> Result<()> {
        if let OmegaDist::Uniform { lo, hi } = *self {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "uniform omega needs 0 <= lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            OmegaDist::ConstantOne => 1.0,
            OmegaDist::Knmixture => {
                let u: f64 = rng.random();
                if u < 0.8 {
                    rng.random_range(0.0..2.0)
                } else if u < 0.9 {
                    2.0 / 11.0
                } else {
                    20.0 / 11.0
                }
            }
            OmegaDist::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }
}

/// I.i.d. draws of `n` degree effects.
pub fn draw_omega(dist: OmegaDist, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, rng::DOMAIN_OMEGA, 0);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

fn default_gamma() -> f64 {
    1.0
}

fn default_reps() -> usize {
    1
}

/// Full description of a simulated blockmodel experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub model: Model,
    pub sizes: Vec<usize>,
    /// Symmetric `K x K` block probabilities (SBM) or base rates (DCBM).
    pub theta: Vec<Vec<f64>>,
    /// Scale applied to the DCBM rates; must be 1 for the SBM.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub corr: CorrelationSpec,
    #[serde(default)]
    pub omega: OmegaDist,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SimSpec {
    /// `K x K` matrix with `within` on the diagonal and `between` elsewhere.
    pub fn planted_theta(k: usize, within: f64, between: f64) -> Vec<Vec<f64>> {
        (0..k)
            .map(|a| (0..k).map(|b| if a == b { within } else { between }).collect())
            .collect()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn labels(&self) -> Labeling {
        Labeling::from_sizes(&self.sizes)
    }

    /// Block parameters in pair order, already multiplied by `gamma`.
    pub fn scaled_theta(&self) -> Vec<f64> {
        let k = self.k();
        crate::labeling::pairs(k)
            .map(|(a, b)| self.theta[a][b] * self.gamma)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 || self.sizes.contains(&0) {
            return Err(Error::InvalidSpec("community sizes must be positive".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidSpec("reps must be at least 1".into()));
        }
        if self.theta.len() != k || self.theta.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidSpec(format!("theta must be {k} x {k}")));
        }
        for a in 0..k {
            for b in 0..k {
                let t = self.theta[a][b];
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::InvalidSpec(format!("theta[{a}][{b}] = {t} is invalid")));
                }
                if t != self.theta[b][a] {
                    return Err(Error::InvalidSpec(format!("theta is asymmetric at ({a}, {b})")));
                }
            }
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidSpec(format!("gamma must be positive, got {}", self.gamma)));
        }
        self.corr.validate()?;
        self.omega.validate()?;
        match self.model {
            Model::Sbm => {
                if self.gamma != 1.0 {
                    return Err(Error::InvalidSpec("gamma applies to the dcbm only".into()));
                }
                if self.omega != OmegaDist::ConstantOne {
                    return Err(Error::InvalidSpec("omega applies to the dcbm only".into()));
                }
                if self.theta.iter().flatten().any(|&t| t > 1.0) {
                    return Err(Error::InvalidSpec("sbm probabilities must lie in [0, 1]".into()));
                }
            }
            Model::Dcbm => {
                let sup = self.omega.sup();
                let worst = self.theta.iter().flatten().fold(0.0f64, |m, &t| m.max(t)) * self.gamma * sup * sup;
                if worst >= 1.0 {
                    return Err(Error::InvalidSpec(format!(
                        "edge probabilities reach {worst:.4} >= 1 under the omega range"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parameters used to draw a degree-corrected network.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDcbm {
    /// `gamma * theta` in pair order.
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

impl PlantedDcbm {
    /// Expected adjacency `ω_i ω_j γθ_{z_i z_j}`, zero diagonal, row-major.
    pub fn expected_adjacency(&self, z: &Labeling) -> Vec<f64> {
        crate::blockmodel::dcbm_expected_adjacency(z, &self.theta, &self.omega)
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedNetwork {
    pub adjacency: AdjacencyMatrix,
    pub labels: Labeling,
    pub planted: Option<PlantedDcbm>,
}

/// Draws replicate `rep` of `spec`; deterministic in `(spec.seed, rep)`.
pub fn generate(spec: &SimSpec, rep: u64) -> Result<SimulatedNetwork> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, rng::DOMAIN_GENERATE, rep);
    generate_with(spec, &mut rng)
}

fn generate_with(spec: &SimSpec, rng: &mut ChaCha8Rng) -> Result<SimulatedNetwork> {
    let z = spec.labels();
    let n = z.len();
    let k = z.k();
    let theta = spec.scaled_theta();
    let omega: Vec<f64> = match spec.model {
        Model::Sbm => vec![1.0; n],
        Model::Dcbm => (0..n).map(|_| spec.omega.sample(rng)).collect(),
    };
    // for the sbm every threshold depends only on the block pair
    let block_mu: Vec<f64> = theta.iter().map(|&t| normal::threshold_or_infinite(t)).collect();

    // column groups of each row: one for global scope, one per community otherwise
    let groups: Vec<Vec<usize>> = match spec.corr.scope {
        Scope::Global => vec![(0..n).collect()],
        Scope::Blockwise => {
            let mut g = vec![Vec::new(); k];
            for j in 0..n {
                g[z.get(j)].push(j);
            }
            g
        }
    };

    let mut upper = vec![false; n * n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let zi = z.get(i);
        for (gidx, group) in groups.iter().enumerate() {
            let start = group.partition_point(|&j| j <= i);
            let cols = &group[start..];
            if cols.is_empty() {
                continue;
            }
            let structure = match spec.corr.scope {
                Scope::Global => spec.corr.within,
                Scope::Blockwise if gidx == zi => spec.corr.within,
                Scope::Blockwise => spec.corr.between,
            };
            let out = &mut w[..cols.len()];
            structure.sample(cols, rng, out);
            for (t, &j) in cols.iter().enumerate() {
                let block = pair_index(k, zi, z.get(j));
                let mu = match spec.model {
                    Model::Sbm => block_mu[block],
                    Model::Dcbm => normal::threshold_or_infinite(omega[i] * omega[j] * theta[block]),
                };
                upper[i * n + j] = out[t] >= -mu;
            }
        }
    }
    let adjacency = AdjacencyMatrix::from_upper(n, |i, j| upper[i * n + j]);
    let planted = (spec.model == Model::Dcbm).then(|| PlantedDcbm { theta, omega });
    Ok(SimulatedNetwork {
        adjacency,
        labels: z,
        planted,
    })
}

/// Thresholded multivariate normal with an arbitrary correlation matrix.
#[derive(Debug, Clone)]
pub struct GaussianThreshold {
    factor: DMatrix<f64>,
}

impl GaussianThreshold {
    /// Factors `corr` (symmetric, unit diagonal, positive semidefinite).
    pub fn new(corr: &DMatrix<f64>) -> Result<Self> {
        let n = corr.nrows();
        if corr.ncols() != n {
            return Err(Error::Dimension("correlation matrix must be square".into()));
        }
        for i in 0..n {
            if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "correlation diagonal at {i} is {}",
                    corr[(i, i)]
                )));
            }
        }
        let spec = crate::spectral::Spectrum::of(corr)?;
        if let Some(&min) = spec.values().iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "correlation matrix is not positive semidefinite (eigenvalue {min:e})"
                )));
            }
        }
        let mut factor = spec.vectors().clone();
        for (c, &v) in spec.values().iter().enumerate() {
            let s = v.max(0.0).sqrt();
            factor.column_mut(c).scale_mut(s);
        }
        Ok(GaussianThreshold { factor })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// One binary vector with `P(x_j = 1) = Φ(μ_j)`.
    pub fn sample(&self, mus: &[f64], rng: &mut impl Rng) -> Result<Vec<bool>> {
        let n = self.dim();
        if mus.len() != n {
            return Err(Error::Dimension(format!(
                "{} thresholds for a {n}-dimensional correlation",
                mus.len()
            )));
        }
        let z = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = &self.factor * z;
        Ok(w.iter().zip(mus).map(|(&wj, &mu)| wj >= -mu).collect())
    }
}

/// Draws one correlated binary row: `x_j = 1{W_j >= -μ_j}`, `W ~ N(0, corr)`.
pub fn correlated_bernoulli_row(mus: &[f64], corr: &DMatrix<f64>, rng: &mut impl Rng) -> Result<Vec<bool>> {
    GaussianThreshold::new(corr)?.sample(mus, rng)
}

/// Dense correlation matrix of a structure over coordinates `0..n`.
pub fn structure_matrix(s: Structure, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |j, l| s.rho(j, l))
}

/// Fixed settings of the paper-style simulation studies.
pub mod presets {
    use super::*;

    /// Community sizes cycling through 60, 90, 120, 150.
    pub fn sizes(k: usize) -> Vec<usize> {
        [60, 90, 120, 150].iter().copied().cycle().take(k).collect()
    }

    /// Correlation across whole rows, 0.35 within / 0.05 between.
    pub fn simulation1(k: usize, s: Structure, reps: usize, seed: u64) -> SimSpec {
        SimSpec {
            model: Model::Sbm,
            sizes: sizes(k),
            theta: SimSpec::planted_theta(k, 0.35, 0.05),
            gamma: 1.0,
            corr: CorrelationSpec::global(s),
            omega: OmegaDist::ConstantOne,
            reps,
            seed,
        }
    }

    /// Same probabilities as [`simulation1`], correlation blockwise.
    pub fn simulation2(k: usize, within: Structure, between: Structure, reps: usize, seed: u64) -> SimSpec {
        SimSpec {
            corr: CorrelationSpec::blockwise(within, between),
            ..simulation1(k, Structure::None, reps, seed)
        }
    }

    /// Last community connects to everyone at 0.35: a community of hubs.
    pub fn simulation3(k: usize, within: Structure, reps: usize, seed: u64) -> SimSpec {
        let mut theta = SimSpec::planted_theta(k, 0.35, 0.05);
        let hub = k - 1;
        for b in 0..k {
            theta[b][hub] = 0.35;
            theta[hub][b] = 0.35;
        }
        SimSpec {
            theta,
            ..simulation2(k, within, Structure::None, reps, seed)
        }
    }

    /// Degree-corrected: rates 7 within / 1 between, scaled by `gamma`.
    pub fn simulation4(k: usize, s: Structure, gamma: f64, omega: OmegaDist, reps: usize, seed: u64) -> SimSpec {
        SimSpec {
            model: Model::Dcbm,
            sizes: sizes(k),
            theta: SimSpec::planted_theta(k, 7.0, 1.0),
            gamma,
            corr: CorrelationSpec::global(s),
            omega,
            reps,
            seed,
        }
    }
}
