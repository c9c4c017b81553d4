//! Community-number selection for stochastic blockmodels.
//!
//! Candidate labelings come from spectral clustering (SBM) or SCORE (DCBM).
//! Each candidate `k` is scored by the composite-likelihood BIC, whose penalty
//! uses a jackknife estimate of the effective model complexity, alongside the
//! ordinary BIC.

pub mod bench;
pub mod blockmodel;
pub mod cluster;
pub mod error;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod labeling;
pub mod metrics;
pub mod netgen;
pub mod rng;
pub mod selection;
pub mod spectral;

pub use blockmodel::{BlockCounts, DcbmParams, Model, SbmParams};
pub use error::{Error, Result};
pub use graph::AdjacencyMatrix;
pub use labeling::Labeling;
pub use selection::{select_k, SelectionConfig, SelectionRecord, SelectionResult};
