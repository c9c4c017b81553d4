//! Monte Carlo laws of the correlated-edge generator. Each function returns
//! the statistics that missed their exact value by more than 3 standard
//! errors.

use clbic::netgen::{
    generate, orthant_prob, structure_matrix, threshold_from_theta, CorrelationSpec, GaussianThreshold,
    OmegaDist, SimSpec, Structure,
};
use clbic::rng::stream;
use clbic::Model;

pub const DRAWS: usize = 100_000;
pub const THETAS: [f64; 5] = [0.35, 0.05, 0.2, 0.5, 0.1];

pub fn structures() -> Vec<Structure> {
    let mut out = Vec::new();
    for rho in [0.0, 0.1, 0.5] {
        out.push(Structure::Equal { rho });
        out.push(Structure::Decaying { rho });
    }
    out
}

fn mus() -> Vec<f64> {
    THETAS.iter().map(|&t| threshold_from_theta(t).unwrap()).collect()
}

fn draws(s: Structure, seed: u64) -> Vec<Vec<f64>> {
    let g = GaussianThreshold::new(&structure_matrix(s, THETAS.len())).unwrap();
    let mus = mus();
    let mut rng = stream(seed, 0x7465_7374, 0);
    (0..DRAWS)
        .map(|_| {
            g.sample(&mus, &mut rng)
                .unwrap()
                .into_iter()
                .map(|b| b as u8 as f64)
                .collect()
        })
        .collect()
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn miss(got: (f64, f64), want: f64, what: String, out: &mut Vec<String>) {
    let (m, se) = got;
    if (m - want).abs() > 3.0 * se.max(1e-12) {
        out.push(format!("{what}: {m} vs {want} (se {se})"));
    }
}

pub fn marginal_mean_misses() -> Vec<String> {
    let mut out = Vec::new();
    for (t, s) in structures().into_iter().enumerate() {
        let x = draws(s, 10 + t as u64);
        for (j, &theta) in THETAS.iter().enumerate() {
            miss(mean_se(x.iter().map(|r| r[j])), theta, format!("{s:?} mean {j}"), &mut out);
        }
    }
    out
}

pub fn covariance_misses() -> Vec<String> {
    let mut out = Vec::new();
    let mus = mus();
    for (t, s) in structures().into_iter().enumerate() {
        let x = draws(s, 20 + t as u64);
        for j in 0..THETAS.len() {
            for l in j + 1..THETAS.len() {
                let want = orthant_prob(-mus[j], -mus[l], s.rho(j, l)).unwrap() - THETAS[j] * THETAS[l];
                // centred at the exact means so the estimator is unbiased
                let got = mean_se(x.iter().map(|r| (r[j] - THETAS[j]) * (r[l] - THETAS[l])));
                miss(got, want, format!("{s:?} cov ({j},{l})"), &mut out);
            }
        }
    }
    out
}

pub fn row_dependence_misses() -> Vec<String> {
    let mut out = Vec::new();
    for (t, s) in structures().into_iter().enumerate() {
        let x = draws(s, 30 + t as u64);
        for j in 0..THETAS.len() {
            let got = mean_se(x.windows(2).map(|w| (w[0][j] - THETAS[j]) * (w[1][j] - THETAS[j])));
            miss(got, 0.0, format!("{s:?} lag-1 ({j})"), &mut out);
        }
    }
    out
}

/// Pooled per-block edge densities of generated networks against the block
/// probabilities.
pub fn block_density_misses() -> Vec<String> {
    let mut out = Vec::new();
    let theta = vec![vec![0.35, 0.05], vec![0.05, 0.2]];
    for corr in [
        CorrelationSpec::global(Structure::Equal { rho: 0.3 }),
        CorrelationSpec::blockwise(Structure::Decaying { rho: 0.5 }, Structure::Equal { rho: 0.1 }),
    ] {
        let spec = SimSpec {
            model: Model::Sbm,
            sizes: vec![12, 18],
            theta: theta.clone(),
            gamma: 1.0,
            corr,
            omega: OmegaDist::ConstantOne,
            reps: 1,
            seed: 5,
        };
        let reps = 2000;
        let mut per_rep = vec![Vec::with_capacity(reps); 3];
        for rep in 0..reps as u64 {
            let net = generate(&spec, rep).unwrap();
            let (mut m, mut p) = ([0.0; 3], [0.0; 3]);
            for i in 0..30 {
                for j in i + 1..30 {
                    let b = match (net.labels.get(i), net.labels.get(j)) {
                        (0, 0) => 0,
                        (1, 1) => 2,
                        _ => 1,
                    };
                    p[b] += 1.0;
                    m[b] += net.adjacency.get(i, j) as f64;
                }
            }
            for b in 0..3 {
                per_rep[b].push(m[b] / p[b]);
            }
        }
        // replicate networks are independent, so their densities are i.i.d.
        for (b, want) in [0.35, 0.05, 0.2].into_iter().enumerate() {
            miss(mean_se(per_rep[b].iter().copied()), want, format!("{:?} block {b}", spec.corr), &mut out);
        }
    }
    out
}
