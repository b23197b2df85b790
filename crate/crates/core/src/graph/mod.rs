//! Static undirected graphs, random generators and hop-distance primitives.
//!
//! [`Graph`] stores adjacency in compressed sparse row form with every
//! neighbor list sorted ascending. Graphs are immutable once built and can be
//! shared read-only between worker threads.

mod bfs;
mod generators;
mod io;

pub use bfs::{bfs_distances, DistanceMap, UNREACHABLE};
pub(crate) use bfs::BfsScratch;
pub use generators::{
    gen_config_regular, gen_erdos_renyi, gen_geometric, GeneratorSpec, GraphModel,
};
pub use io::{read_edge_list, read_id_list, write_edge_list, write_id_list};

use thiserror::Error;

/// Node identifier. Nodes of a graph with `n` nodes are `0..n`.
pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("source set is empty")]
    EmptySources,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected simple graph in CSR layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// duplicate edges (in either orientation) and out-of-range ids.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
        }
        let graph = Self::build(node_count, edges.iter().copied());
        for u in 0..node_count {
            if let Some(w) = graph.neighbors(u).windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(graph)
    }

    /// Builds a simple graph, silently erasing self-loops and parallel edges.
    /// Ids must be in range.
    pub(crate) fn from_edges_simplified<I>(node_count: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let kept: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
        let raw = Self::build(node_count, kept.iter().copied());
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut targets = Vec::with_capacity(raw.targets.len());
        offsets.push(0);
        for u in 0..node_count {
            let mut last = None;
            for &v in raw.neighbors(u) {
                if last != Some(v) {
                    targets.push(v);
                    last = Some(v);
                }
            }
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    // Counting-sort construction; neighbor lists end up sorted, duplicates kept.
    fn build<I>(node_count: usize, edges: I) -> Self
    where
        I: Iterator<Item = (NodeId, NodeId)> + Clone,
    {
        let mut degree = vec![0usize; node_count];
        for (u, v) in edges.clone() {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut targets = vec![0; offsets[node_count]];
        for (u, v) in edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        for u in 0..node_count {
            targets[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Graph { offsets, targets }
    }

    pub fn empty(node_count: usize) -> Self {
        Graph {
            offsets: vec![0; node_count + 1],
            targets: Vec::new(),
        }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(node_count: usize) -> Self {
        let edges: Vec<_> = (1..node_count).map(|v| (v - 1, v)).collect();
        Self::build(node_count, edges.into_iter())
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(node_count: usize) -> Self {
        assert!(node_count >= 3, "a simple cycle needs at least 3 nodes");
        let edges: Vec<_> = (0..node_count).map(|v| (v, (v + 1) % node_count)).collect();
        Self::build(node_count, edges.into_iter())
    }

    /// Star with center `0` and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Self::build(leaves + 1, edges.into_iter())
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        v < self.node_count()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains_node(u) && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn mean_degree(&self) -> f64 {
        if self.node_count() == 0 {
            0.0
        } else {
            self.targets.len() as f64 / self.node_count() as f64
        }
    }

    pub(crate) fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains_node(v) {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            })
        }
    }
}
