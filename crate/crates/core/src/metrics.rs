//! Agreement and assortativity measures for community labelings.

use crate::blockmodel::block_counts;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::labeling::Labeling;

fn same_length(z: &Labeling, zhat: &Labeling) -> Result<()> {
    if z.len() != zhat.len() {
        return Err(Error::Dimension(format!(
            "labelings have lengths {} and {}",
            z.len(),
            zhat.len()
        )));
    }
    Ok(())
}

/// Contingency table `t[a][b] = #{i : z_i = a, ẑ_i = b}`.
pub fn confusion(z: &Labeling, zhat: &Labeling) -> Result<Vec<Vec<u64>>> {
    same_length(z, zhat)?;
    let mut t = vec![vec![0u64; zhat.k()]; z.k()];
    for (&a, &b) in z.labels().iter().zip(zhat.labels()) {
        t[a][b] += 1;
    }
    Ok(t)
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Rand index: the fraction of unordered node pairs on which the two
/// labelings agree about co-membership. Defined as 1 for fewer than two nodes.
pub fn rand_gf(z: &Labeling, zhat: &Labeling) -> Result<f64> {
    let t = confusion(z, zhat)?;
    let n = z.len() as u64;
    let total = choose2(n);
    if total == 0 {
        return Ok(1.0);
    }
    let both: u64 = t.iter().flatten().map(|&c| choose2(c)).sum();
    let same_z: u64 = t.iter().map(|r| choose2(r.iter().sum())).sum();
    let same_hat: u64 = (0..zhat.k()).map(|b| choose2(t.iter().map(|r| r[b]).sum())).sum();
    // agreements = pairs together in both + pairs apart in both
    let apart_both = total + both - same_z - same_hat;
    Ok((both + apart_both) as f64 / total as f64)
}

/// Median with even-length samples averaging the two central values.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Median within-community edge count over the median between-community
/// edge count. `None` when there are no between blocks or their median is 0.
pub fn median_ratio_mr(a: &AdjacencyMatrix, zhat: &Labeling) -> Result<Option<f64>> {
    let counts = block_counts(a, zhat)?;
    let k = zhat.k();
    let within: Vec<f64> = (0..k).map(|c| counts.edge(c, c) as f64).collect();
    let between: Vec<f64> = (0..k)
        .flat_map(|x| (x + 1..k).map(move |y| (x, y)))
        .map(|(x, y)| counts.edge(x, y) as f64)
        .collect();
    Ok(match (median(&within), median(&between)) {
        (Some(w), Some(b)) if b > 0.0 => Some(w / b),
        _ => None,
    })
}

/// Above this many labels the exact permutation search gives way to the
/// Hungarian method.
pub const EXACT_SEARCH_MAX_K: usize = 8;

/// Smallest fraction of mismatched nodes over all matchings of estimated to
/// true labels. Label sets of different sizes are padded with empty clusters.
pub fn misclustering_rate(z: &Labeling, zhat: &Labeling) -> Result<f64> {
    let t = confusion(z, zhat)?;
    if z.is_empty() {
        return Ok(0.0);
    }
    let size = z.k().max(zhat.k());
    let matched = if size <= EXACT_SEARCH_MAX_K {
        max_matching_exact(&t, size)
    } else {
        max_matching_hungarian(&t, size)
    };
    Ok(1.0 - matched as f64 / z.len() as f64)
}

fn padded(t: &[Vec<u64>], size: usize) -> Vec<Vec<u64>> {
    (0..size)
        .map(|a| (0..size).map(|b| t.get(a).and_then(|r| r.get(b)).copied().unwrap_or(0)).collect())
        .collect()
}

/// Largest diagonal total over all permutations, by exhaustive search.
pub fn max_matching_exact(t: &[Vec<u64>], size: usize) -> u64 {
    fn go(t: &[Vec<u64>], row: usize, used: &mut [bool], acc: u64, best: &mut u64) {
        if row == t.len() {
            *best = (*best).max(acc);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                go(t, row + 1, used, acc + t[row][c], best);
                used[c] = false;
            }
        }
    }
    let t = padded(t, size);
    let mut best = 0;
    go(&t, 0, &mut vec![false; size], 0, &mut best);
    best
}

/// Largest diagonal total over all permutations, by the Hungarian method.
pub fn max_matching_hungarian(t: &[Vec<u64>], size: usize) -> u64 {
    let t = padded(t, size);
    let big = t.iter().flatten().copied().max().unwrap_or(0) as i64;
    // minimise big - t over assignments (1-based potentials formulation)
    let cost = |i: usize, j: usize| big - t[i - 1][j - 1] as i64;
    let n = size;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| t[p[j] - 1][j - 1]).sum()
}

/// `‖Ω̂ − Ω‖_F / ‖Ω‖_F` for equally shaped matrices stored flat.
pub fn frobenius_rel_err(omega_hat: &[f64], omega_true: &[f64]) -> Result<f64> {
    if omega_hat.len() != omega_true.len() {
        return Err(Error::Dimension(format!(
            "matrices hold {} and {} entries",
            omega_hat.len(),
            omega_true.len()
        )));
    }
    let norm = omega_true.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("reference matrix has zero norm".into()));
    }
    let diff = omega_hat
        .iter()
        .zip(omega_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}

/// Label agreement and assortativity of one estimated labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub gf: f64,
    pub mr: Option<f64>,
    pub misclustering: f64,
}

impl MetricsRecord {
    pub fn compute(a: &AdjacencyMatrix, z: &Labeling, zhat: &Labeling) -> Result<Self> {
        Ok(MetricsRecord {
            gf: rand_gf(z, zhat)?,
            mr: median_ratio_mr(a, zhat)?,
            misclustering: misclustering_rate(z, zhat)?,
        })
    }
}
