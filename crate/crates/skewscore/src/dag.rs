//! Directed acyclic graphs stored as dense binary adjacency matrices.
//!
//! `adj[i][j] = 1` means an edge `i -> j`. The matrix is small (tens of
//! nodes), so a dense `Vec<u8>` in row-major order is the whole story.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A DAG over `d` nodes with a dense 0/1 adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    d: usize,
    adj: Vec<u8>,
}

impl Dag {
    /// An empty graph on `d` nodes.
    pub fn empty(d: usize) -> Self {
        Dag { d, adj: vec![0; d * d] }
    }

    /// Builds from a row-major adjacency matrix. Rejects self-loops and cycles.
    pub fn from_adjacency(d: usize, adj: Vec<u8>) -> Result<Self> {
        if adj.len() != d * d {
            return Err(Error::Parameter(format!(
                "adjacency has {} entries, expected {}",
                adj.len(),
                d * d
            )));
        }
        for i in 0..d {
            if adj[i * d + i] != 0 {
                return Err(Error::Parameter(format!("self-loop at node {i}")));
            }
        }
        let dag = Dag { d, adj };
        if !dag.is_acyclic() {
            return Err(Error::Parameter("adjacency matrix contains a cycle".into()));
        }
        Ok(dag)
    }

    pub fn node_count(&self) -> usize {
        self.d
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adj[from * self.d + to] != 0
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        debug_assert_ne!(from, to);
        self.adj[from * self.d + to] = 1;
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|&b| b as usize).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.d {
            for j in 0..self.d {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Parents of `node`: all `k` with an edge `k -> node`.
    pub fn parents(&self, node: usize) -> Vec<usize> {
        (0..self.d).filter(|&k| self.has_edge(k, node)).collect()
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.d).filter(|&k| self.has_edge(node, k)).collect()
    }

    /// Kahn's algorithm. `None` when the graph has a cycle.
    pub fn topological_sort(&self) -> Option<Vec<usize>> {
        let mut indeg = vec![0usize; self.d];
        for (_, j) in self.edges() {
            indeg[j] += 1;
        }
        let mut queue: Vec<usize> = (0..self.d).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.d);
        while let Some(i) = queue.pop() {
            order.push(i);
            for j in self.children(i) {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push(j);
                }
            }
        }
        (order.len() == self.d).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_sort().is_some()
    }

    /// Row-major copy of the adjacency matrix.
    pub fn adjacency(&self) -> &[u8] {
        &self.adj
    }
}
