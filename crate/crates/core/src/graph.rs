//! Dense undirected simple graphs.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric 0/1 adjacency matrix with empty diagonal.
///
/// Stored densely together with sorted neighbor lists; all networks handled
/// here have at most a few thousand nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    edges: usize,
}

impl AdjacencyMatrix {
    /// Graph on `n` nodes without edges.
    pub fn empty(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            bits: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
            edges: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate and reversed pairs collapse
    /// to a single edge; self-loops and out-of-range endpoints are errors.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            g.insert(i, j);
        }
        g.finish();
        Ok(g)
    }

    /// Builds a graph from a symmetric indicator function over `i < j`.
    pub fn from_upper(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if edge(i, j) {
                    g.insert(i, j);
                }
            }
        }
        g.finish();
        g
    }

    fn insert(&mut self, i: usize, j: usize) {
        if !self.bits[i * self.n + j] {
            self.bits[i * self.n + j] = true;
            self.bits[j * self.n + i] = true;
            self.neighbors[i].push(j);
            self.neighbors[j].push(i);
            self.edges += 1;
        }
    }

    fn finish(&mut self) {
        for nb in &mut self.neighbors {
            nb.sort_unstable();
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.has_edge(i, j) as u8
    }

    /// Sorted neighbors of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn degrees(&self) -> DegreeSequence {
        DegreeSequence(self.neighbors.iter().map(Vec::len).collect())
    }

    /// Nodes without any incident edge.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.neighbors[i].is_empty()).collect()
    }

    /// Dense real copy of the adjacency matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// Normalized Laplacian `D^{-1/2} A D^{-1/2}`.
    pub fn laplacian(&self) -> Result<LaplacianMatrix> {
        let deg = self.degrees();
        if let Some(i) = deg.0.iter().position(|&d| d == 0) {
            return Err(Error::IsolatedNode(i));
        }
        let scale: Vec<f64> = deg.0.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j) in self.edges() {
            let v = scale[i] * scale[j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        Ok(LaplacianMatrix(m))
    }

    /// Subgraph induced by `nodes`; node `t` of the result is `nodes[t]`.
    pub fn induced(&self, nodes: &[usize]) -> AdjacencyMatrix {
        let mut pos = vec![usize::MAX; self.n];
        for (t, &i) in nodes.iter().enumerate() {
            pos[i] = t;
        }
        let mut g = Self::empty(nodes.len());
        for (t, &i) in nodes.iter().enumerate() {
            for &j in &self.neighbors[i] {
                let u = pos[j];
                if u != usize::MAX && u > t {
                    g.insert(t, u);
                }
            }
        }
        g.finish();
        g
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &self.neighbors[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Largest connected component and the map from its node indices back to
    /// the original ones. Ties go to the component holding the smallest index.
    pub fn largest_connected_component(&self) -> (AdjacencyMatrix, Vec<usize>) {
        let comps = self.components();
        // components() is ordered by minimum member, so the first maximum wins ties
        let best = comps
            .into_iter()
            .fold(None::<Vec<usize>>, |best, c| match best {
                Some(b) if b.len() >= c.len() => Some(b),
                _ => Some(c),
            })
            .unwrap_or_default();
        (self.induced(&best), best)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components().len() == 1
    }
}

/// Validates a raw square matrix as an adjacency matrix. Asymmetry is an
/// error; nothing is symmetrized.
pub fn validate_adjacency(rows: &[Vec<f64>]) -> Result<AdjacencyMatrix> {
    let n = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                row: r,
                cols: row.len(),
            });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            if v != 0.0 && v != 1.0 {
                return Err(Error::NotBinary { i, j, value: v });
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        if row[i] != 0.0 {
            return Err(Error::SelfLoop(i));
        }
        for j in i + 1..n {
            if rows[i][j] != rows[j][i] {
                return Err(Error::Asymmetric { i, j });
            }
        }
    }
    Ok(AdjacencyMatrix::from_upper(n, |i, j| rows[i][j] == 1.0))
}

/// Node degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence(pub Vec<usize>);

impl DegreeSequence {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// `D^{-1/2} A D^{-1/2}` for a graph without isolated nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(pub(crate) DMatrix<f64>);

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}
