//! Brute-force oracles shared by the integration tests. Everything here is
//! recomputed pair by pair from the adjacency matrix, never from block counts.

#![allow(dead_code)]

pub mod laws;

use clbic::{AdjacencyMatrix, Labeling, Model};
use proptest::prelude::*;

pub const EPS: f64 = 1e-10;

fn block(k: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // row-major upper triangle including the diagonal
    a * k - a * (a + 1) / 2 + b
}

pub fn blocks(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Edge and pair counts per block, excluding `skip` if given.
pub fn counts(a: &AdjacencyMatrix, z: &Labeling, skip: Option<usize>) -> (Vec<f64>, Vec<f64>) {
    let k = z.k();
    let (mut m, mut p) = (vec![0.0; blocks(k)], vec![0.0; blocks(k)]);
    for i in 0..a.n() {
        for j in i + 1..a.n() {
            if Some(i) == skip || Some(j) == skip {
                continue;
            }
            let b = block(k, z.get(i), z.get(j));
            p[b] += 1.0;
            m[b] += a.get(i, j) as f64;
        }
    }
    (m, p)
}

/// Endpoint counts: within blocks count each edge twice.
pub fn endpoints(a: &AdjacencyMatrix, z: &Labeling, skip: Option<usize>) -> Vec<f64> {
    let k = z.k();
    let (m, _) = counts(a, z, skip);
    let mut out = m;
    for c in 0..k {
        out[block(k, c, c)] *= 2.0;
    }
    out
}

fn ln(x: f64) -> f64 {
    x.max(EPS).ln()
}

/// `sum_{i<j} [A log θ + (1 - A) log(1 - θ)]`.
pub fn sbm_loglik(a: &AdjacencyMatrix, z: &Labeling, theta: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.n() {
        for j in i + 1..a.n() {
            let t = theta[block(z.k(), z.get(i), z.get(j))];
            s += if a.has_edge(i, j) { ln(t) } else { ln(1.0 - t) };
        }
    }
    s
}

/// Twice the Poisson log-likelihood over `i <= j` with self-pair rate
/// `ω_i² θ_aa / 2`, at the closed-form maximizer.
pub fn dcbm_loglik_at_mle(a: &AdjacencyMatrix, z: &Labeling) -> f64 {
    let n = a.n();
    let k = z.k();
    let deg: Vec<f64> = (0..n).map(|i| a.neighbors(i).len() as f64).collect();
    let mut tot = vec![0.0; k];
    for i in 0..n {
        tot[z.get(i)] += deg[i];
    }
    let omega: Vec<f64> = (0..n)
        .map(|i| if tot[z.get(i)] == 0.0 { 0.0 } else { deg[i] / tot[z.get(i)] })
        .collect();
    let theta = endpoints(a, z, None);
    let mut s = 0.0;
    for i in 0..n {
        for j in i..n {
            let t = theta[block(k, z.get(i), z.get(j))];
            let lambda = if i == j { omega[i] * omega[i] * t / 2.0 } else { omega[i] * omega[j] * t };
            let x = a.get(i, j) as f64;
            if x > 0.0 {
                s += x * ln(lambda);
            }
            s -= lambda;
        }
    }
    2.0 * s
}

/// Block estimates after deleting `skip`, recomputed from scratch. `None`
/// marks a block with no remaining pairs.
fn estimates(a: &AdjacencyMatrix, z: &Labeling, model: Model, skip: Option<usize>) -> Vec<Option<f64>> {
    match model {
        Model::Sbm => {
            let (m, p) = counts(a, z, skip);
            m.iter().zip(&p).map(|(&m, &p)| (p > 0.0).then(|| m / p)).collect()
        }
        Model::Dcbm => endpoints(a, z, skip).into_iter().map(Some).collect(),
    }
}

/// Leave-one-vertex-out jackknife covariance, row-major.
pub fn jackknife(a: &AdjacencyMatrix, z: &Labeling, model: Model) -> Vec<f64> {
    let n = a.n();
    let p = blocks(z.k());
    let full = estimates(a, z, model, None);
    let mut v = vec![0.0; p * p];
    for l in 0..n {
        let minus = estimates(a, z, model, Some(l));
        let dev: Vec<f64> = (0..p)
            .map(|b| match (full[b], minus[b]) {
                (Some(f), Some(m)) => m - f,
                _ => 0.0,
            })
            .collect();
        for x in 0..p {
            for y in 0..p {
                v[x * p + y] += dev[x] * dev[y];
            }
        }
    }
    let scale = (n as f64 - 1.0) / n as f64;
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

/// Hessian diagonal and exclusion mask.
pub fn hessian(a: &AdjacencyMatrix, z: &Labeling, model: Model) -> (Vec<f64>, Vec<bool>) {
    let (m, p) = counts(a, z, None);
    let e = endpoints(a, z, None);
    (0..blocks(z.k()))
        .map(|b| match model {
            Model::Sbm => {
                if p[b] == 0.0 || m[b] == 0.0 || m[b] == p[b] {
                    (0.0, true)
                } else {
                    let t = m[b] / p[b];
                    (p[b] / (t * (1.0 - t)), false)
                }
            }
            Model::Dcbm => {
                if e[b] == 0.0 {
                    (0.0, true)
                } else {
                    (1.0 / e[b], false)
                }
            }
        })
        .unzip()
}

pub struct Row {
    pub loglik: f64,
    pub d_hat: f64,
    pub clbic: f64,
    pub bic: f64,
}

/// Every column of one selection-table row, recomputed from scratch.
pub fn row(a: &AdjacencyMatrix, z: &Labeling, model: Model) -> Row {
    let loglik = match model {
        Model::Sbm => {
            let (m, p) = counts(a, z, None);
            let theta: Vec<f64> = m.iter().zip(&p).map(|(&m, &p)| if p > 0.0 { m / p } else { 0.0 }).collect();
            sbm_loglik(a, z, &theta)
        }
        Model::Dcbm => dcbm_loglik_at_mle(a, z),
    };
    let (h, excluded) = hessian(a, z, model);
    let v = jackknife(a, z, model);
    let p = blocks(z.k());
    let d_hat: f64 = (0..p).filter(|&b| !excluded[b]).map(|b| v[b * p + b] * h[b]).sum();
    let n = a.n() as f64;
    let log_pairs = (n * (n - 1.0) / 2.0).ln();
    Row {
        loglik,
        d_hat,
        clbic: -2.0 * loglik + d_hat * log_pairs,
        bic: -2.0 * loglik + p as f64 * log_pairs,
    }
}

pub fn graph_from_bits(n: usize, bits: &[bool]) -> AdjacencyMatrix {
    let mut edges = Vec::new();
    let mut it = bits.iter();
    for i in 0..n {
        for j in i + 1..n {
            if *it.next().unwrap() {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, edges).unwrap()
}

/// Random graph on `n_lo..=n_hi` nodes with a random labeling into at most
/// `k_hi` communities.
pub fn graph_and_labeling(
    n_lo: usize,
    n_hi: usize,
    k_hi: usize,
) -> impl Strategy<Value = (AdjacencyMatrix, Labeling)> {
    (n_lo..=n_hi, 1..=k_hi, 0.05f64..0.95).prop_flat_map(|(n, k, density)| {
        (
            proptest::collection::vec(proptest::bool::weighted(density), n * (n - 1) / 2),
            proptest::collection::vec(0..k, n),
        )
            .prop_map(move |(bits, labels)| {
                (graph_from_bits(n, &bits), Labeling::new(k, labels).unwrap())
            })
    })
}
