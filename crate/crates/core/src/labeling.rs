use crate::error::{Error, Result};

/// Community assignment of every node. Labels are stored zero-based
/// (`0..k`); file formats print them one-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    k: usize,
    labels: Vec<usize>,
}

impl Labeling {
    pub fn new(k: usize, labels: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("labeling needs k >= 1".into()));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::InvalidArgument(format!(
                "label {l} of node {i} is outside 0..{k}"
            )));
        }
        Ok(Labeling { k, labels })
    }

    /// Builds a labeling from one-based labels `1..=k`.
    pub fn from_one_based(k: usize, labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidArgument("one-based labels must be >= 1".into()));
        }
        Self::new(k, labels.iter().map(|&l| l - 1).collect())
    }

    /// All `n` nodes in community 0.
    pub fn single(n: usize) -> Self {
        Labeling {
            k: 1,
            labels: vec![0; n],
        }
    }

    /// Contiguous planted blocks: `sizes[0]` nodes in community 0, and so on.
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let labels = sizes
            .iter()
            .enumerate()
            .flat_map(|(a, &s)| std::iter::repeat_n(a, s))
            .collect();
        Labeling {
            k: sizes.len().max(1),
            labels,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn get(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Number of communities that received no node.
    pub fn empty_communities(&self) -> usize {
        self.sizes().iter().filter(|&&s| s == 0).count()
    }

    /// Restriction to the given node subset, in the order given.
    pub fn restrict(&self, nodes: &[usize]) -> Labeling {
        Labeling {
            k: self.k,
            labels: nodes.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Index of the unordered block pair `(a, b)` in the row-major upper
/// triangle `(0,0), (0,1), .., (0,k-1), (1,1), ..`.
#[inline]
pub fn pair_index(k: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * k - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Number of unordered block pairs for `k` communities.
#[inline]
pub fn pair_count(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Inverse of [`pair_index`].
pub fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |a| (a..k).map(move |b| (a, b)))
}
