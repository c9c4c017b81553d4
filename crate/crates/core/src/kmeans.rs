//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::labeling::Labeling;
use crate::rng;
use crate::spectral::EmbeddingMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative decrease of the within-cluster sum of squares
    /// falls to this level.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 20,
            max_iter: 300,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labeling: Labeling,
    /// Within-cluster sum of squares of the returned labeling.
    pub wcss: f64,
    /// WCSS after every Lloyd update of the winning restart.
    pub history: Vec<f64>,
    /// Set when `k` exceeds the number of distinct points; duplicates then
    /// share a label and some clusters stay empty.
    pub degenerate: bool,
}

/// k-means with default settings, deterministic given `seed`.
pub fn kmeans(points: &EmbeddingMatrix, k: usize, seed: u64) -> Result<KMeansFit> {
    kmeans_with(points, k, seed, &KMeansConfig::default())
}

pub fn kmeans_with(
    points: &EmbeddingMatrix,
    k: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<KMeansFit> {
    let n = points.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k-means needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if k == 1 {
        let labeling = Labeling::single(n);
        let wcss = wcss_of(points, &labeling);
        return Ok(KMeansFit {
            labeling,
            wcss,
            history: vec![wcss],
            degenerate: false,
        });
    }

    let distinct = distinct_rows(points);
    if distinct.len() < k {
        let labeling = Labeling::new(k, distinct_labels(points, &distinct))?;
        return Ok(KMeansFit {
            labeling,
            wcss: 0.0,
            history: vec![0.0],
            degenerate: true,
        });
    }

    let mut rng = rng::stream(seed, rng::DOMAIN_KMEANS, k as u64);
    let mut best: Option<(Vec<usize>, f64, Vec<f64>)> = None;
    for _ in 0..cfg.restarts.max(1) {
        let centers = plus_plus(points, k, &mut rng);
        let (labels, wcss, history) = lloyd(points, centers, k, cfg);
        if best.as_ref().is_none_or(|b| wcss < b.1) {
            best = Some((labels, wcss, history));
        }
    }
    let (labels, wcss, history) = best.expect("at least one restart");
    Ok(KMeansFit {
        labeling: Labeling::new(k, labels)?,
        wcss,
        history,
        degenerate: false,
    })
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_rows(points: &EmbeddingMatrix) -> Vec<usize> {
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..points.n() {
        if !reps.iter().any(|&r| points.row(r) == points.row(i)) {
            reps.push(i);
        }
    }
    reps
}

fn distinct_labels(points: &EmbeddingMatrix, reps: &[usize]) -> Vec<usize> {
    (0..points.n())
        .map(|i| {
            reps.iter()
                .position(|&r| points.row(r) == points.row(i))
                .expect("every row has a representative")
        })
        .collect()
}

fn plus_plus(points: &EmbeddingMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.n();
    let d = points.k();
    let mut centers = Vec::with_capacity(k * d);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(points.row(first));
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(first))).collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(points.row(i), &c));
        }
        centers.extend_from_slice(&c);
    }
    centers
}

fn assign(points: &EmbeddingMatrix, centers: &[f64], k: usize, labels: &mut [usize], cost: &mut [f64]) {
    let d = points.k();
    for i in 0..points.n() {
        let row = points.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dc = sq_dist(row, &centers[c * d..(c + 1) * d]);
            if dc < best_d {
                best_d = dc;
                best = c;
            }
        }
        labels[i] = best;
        cost[i] = best_d;
    }
}

/// Recomputes centers as cluster means. Empty clusters take the point that is
/// currently worst served, which can only lower the objective.
fn update(points: &EmbeddingMatrix, labels: &mut [usize], cost: &mut [f64], k: usize) -> Vec<f64> {
    let d = points.k();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] == 0 {
            let far = (0..points.n())
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                cost[i] = 0.0;
            }
        }
    }
    let mut centers = vec![0.0; k * d];
    for (i, &l) in labels.iter().enumerate() {
        for (c, x) in centers[l * d..(l + 1) * d].iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            centers[c * d..(c + 1) * d].iter_mut().for_each(|v| *v *= inv);
        }
    }
    centers
}

fn lloyd(
    points: &EmbeddingMatrix,
    mut centers: Vec<f64>,
    k: usize,
    cfg: &KMeansConfig,
) -> (Vec<usize>, f64, Vec<f64>) {
    let n = points.n();
    let d = points.k();
    let mut labels = vec![0usize; n];
    let mut cost = vec![0.0; n];
    let mut history = Vec::new();
    let mut prev = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        assign(points, &centers, k, &mut labels, &mut cost);
        centers = update(points, &mut labels, &mut cost, k);
        let wcss: f64 = (0..n)
            .map(|i| {
                let l = labels[i];
                sq_dist(points.row(i), &centers[l * d..(l + 1) * d])
            })
            .sum();
        history.push(wcss);
        if prev.is_finite() && prev - wcss <= cfg.tol * prev {
            break;
        }
        prev = wcss;
    }
    let wcss = *history.last().unwrap_or(&0.0);
    (labels, wcss, history)
}

/// Within-cluster sum of squares of a labeling around its cluster means.
pub fn wcss_of(points: &EmbeddingMatrix, z: &Labeling) -> f64 {
    let d = points.k();
    let k = z.k();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for i in 0..points.n() {
        let l = z.get(i);
        counts[l] += 1;
        for (s, x) in sums[l * d..(l + 1) * d].iter_mut().zip(points.row(i)) {
            *s += x;
        }
    }
    (0..points.n())
        .map(|i| {
            let l = z.get(i);
            let c = counts[l] as f64;
            points
                .row(i)
                .iter()
                .zip(&sums[l * d..(l + 1) * d])
                .map(|(x, s)| (x - s / c).powi(2))
                .sum::<f64>()
        })
        .sum()
}
