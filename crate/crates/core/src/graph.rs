use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// Vertex id, dense in `0..n`.
pub type Vertex = usize;

/// Index of an edge in [`WeightedGraph::edges`].
pub type EdgeId = usize;

/// Undirected edge with `u < v` and a positive integer weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub w: u64,
}

impl Edge {
    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }

    pub fn key(&self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }
}

/// Normalizes an unordered pair to `(min, max)`.
pub fn pair(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The game board: vertices `0..n` and positive-integer-weighted edges.
///
/// Adjacency lists are kept sorted by neighbor id so every scan over a
/// neighborhood runs in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(Vertex, EdgeId)>>,
    index: HashMap<(Vertex, Vertex), EdgeId>,
}

impl WeightedGraph {
    /// Builds a graph, reporting every violated invariant at once.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex, u64)>) -> Result<Self> {
        let mut problems = Vec::new();
        let mut list = Vec::new();
        let mut index = HashMap::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                problems.push(format!("edge {a}-{b} references a vertex outside 0..{n}"));
                continue;
            }
            if a == b {
                problems.push(format!("self-loop at vertex {a}"));
                continue;
            }
            if w == 0 {
                problems.push(format!("edge {a}-{b} has weight 0; weights must be >= 1"));
                continue;
            }
            let (u, v) = pair(a, b);
            if index.contains_key(&(u, v)) {
                problems.push(format!("duplicate edge {u}-{v}"));
                continue;
            }
            index.insert((u, v), list.len());
            list.push(Edge { u, v, w });
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let mut adj = vec![Vec::new(); n];
        for (id, e) in list.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(WeightedGraph { n, edges: list, adj, index })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Neighbors of `v` with the connecting edge, ascending by neighbor id.
    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        &self.adj[v]
    }

    pub fn edge_id(&self, a: Vertex, b: Vertex) -> Option<EdgeId> {
        self.index.get(&pair(a, b)).copied()
    }

    pub fn weight(&self, a: Vertex, b: Vertex) -> Option<u64> {
        self.edge_id(a, b).map(|id| self.edges[id].w)
    }

    pub fn weight_q(&self, id: EdgeId) -> Rational {
        int(self.edges[id].w as i64)
    }

    /// `W`, the largest edge weight (0 for an edgeless graph).
    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::Input(format!("unknown vertex {v} (graph has {} vertices)", self.n)))
        }
    }

    pub fn require_edge(&self, a: Vertex, b: Vertex) -> Result<EdgeId> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        self.edge_id(a, b).ok_or_else(|| Error::Input(format!("{a}-{b} is not an edge")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges_all_at_once() {
        let err = WeightedGraph::new(3, [(0, 0, 1), (0, 1, 0), (0, 5, 1), (0, 1, 2), (1, 0, 3)]).unwrap_err();
        match err {
            Error::Validation(v) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn neighbors_are_sorted() {
        let g = WeightedGraph::new(4, [(0, 3, 1), (0, 1, 1), (2, 0, 1)]).unwrap();
        let ids: Vec<_> = g.neighbors(0).iter().map(|&(v, _)| v).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert_eq!(g.weight(3, 0), Some(1));
        assert_eq!(g.max_weight(), 1);
    }

    #[test]
    fn single_vertex_graph_is_legal() {
        let g = WeightedGraph::new(1, []).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.max_weight(), 0);
    }
}
