//! Community labels for a candidate `k`: spectral clustering for the standard
//! blockmodel, SCORE for the degree-corrected one.

use crate::blockmodel::Model;
use crate::error::Result;
use crate::graph::AdjacencyMatrix;
use crate::kmeans::{kmeans_with, KMeansConfig, KMeansFit};
use crate::labeling::Labeling;
use crate::spectral::Spectrum;

/// Holds the eigendecomposition of one graph so that every candidate `k`
/// reuses it.
#[derive(Debug, Clone)]
pub struct Clusterer {
    n: usize,
    model: Model,
    spectrum: Option<Spectrum>,
    kmeans: KMeansConfig,
}

impl Clusterer {
    /// Decomposes the Laplacian (SBM) or the adjacency matrix (DCBM).
    pub fn new(a: &AdjacencyMatrix, model: Model) -> Result<Self> {
        Self::with_config(a, model, KMeansConfig::default())
    }

    pub fn with_config(a: &AdjacencyMatrix, model: Model, kmeans: KMeansConfig) -> Result<Self> {
        let spectrum = match model {
            Model::Sbm => Spectrum::of(a.laplacian()?.matrix())?,
            Model::Dcbm => Spectrum::of(&a.to_dense())?,
        };
        Ok(Clusterer {
            n: a.n(),
            model,
            spectrum: Some(spectrum),
            kmeans,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn spectrum(&self) -> Option<&Spectrum> {
        self.spectrum.as_ref()
    }

    /// Labels for `k` communities; `k = 1` never touches the spectrum.
    pub fn cluster(&self, k: usize, seed: u64) -> Result<KMeansFit> {
        if k == 1 {
            return Ok(KMeansFit {
                labeling: Labeling::single(self.n),
                wcss: 0.0,
                history: Vec::new(),
                degenerate: false,
            });
        }
        let spectrum = self.spectrum.as_ref().expect("spectrum computed at construction");
        let points = match self.model {
            Model::Sbm => spectrum.embedding(k)?,
            Model::Dcbm => spectrum.ratio_embedding(k)?,
        };
        kmeans_with(&points, k, seed, &self.kmeans)
    }
}

/// Labels `a` with `k` communities. `k = 1` short-circuits without any
/// eigendecomposition.
pub fn cluster(a: &AdjacencyMatrix, k: usize, model: Model, seed: u64) -> Result<Labeling> {
    if k == 1 {
        return Ok(Labeling::single(a.n()));
    }
    Ok(Clusterer::new(a, model)?.cluster(k, seed)?.labeling)
}
