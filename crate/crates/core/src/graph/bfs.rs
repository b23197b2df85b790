use super::{Graph, GraphError, NodeId};

/// Distance sentinel for nodes not reached within the depth cap.
pub const UNREACHABLE: u32 = u32::MAX;

/// Hop distances to the nearest member of a source set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    pub sources: Vec<NodeId>,
    /// `None` means the search was not truncated.
    pub depth_cap: Option<u32>,
    distances: Vec<u32>,
}

impl DistanceMap {
    /// Distance of `v`, or `None` when `v` lies beyond the cap or in another component.
    pub fn get(&self, v: NodeId) -> Option<u32> {
        match self.distances[v] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.distances
    }

    pub fn reached(&self) -> impl Iterator<Item = (NodeId, u32)> + '_ {
        self.distances
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != UNREACHABLE)
            .map(|(v, &d)| (v, d))
    }
}

/// Multi-source BFS truncated at `depth_cap` hops (`None` for no cap).
pub fn bfs_distances(
    g: &Graph,
    sources: &[NodeId],
    depth_cap: Option<u32>,
) -> Result<DistanceMap, GraphError> {
    if sources.is_empty() {
        return Err(GraphError::EmptySources);
    }
    for &s in sources {
        g.check_node(s)?;
    }
    let mut scratch = BfsScratch::new(g.node_count());
    scratch.run(g, sources, depth_cap.unwrap_or(UNREACHABLE - 1));
    let mut sorted = sources.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(DistanceMap {
        sources: sorted,
        depth_cap,
        distances: scratch.dist,
    })
}

/// Reusable BFS state. Resetting costs time proportional to the previously
/// visited region, not to the graph size.
pub(crate) struct BfsScratch {
    dist: Vec<u32>,
    order: Vec<NodeId>,
}

impl BfsScratch {
    pub fn new(node_count: usize) -> Self {
        BfsScratch {
            dist: vec![UNREACHABLE; node_count],
            order: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.dist[v] = UNREACHABLE;
        }
        self.order.clear();
    }

    #[inline]
    pub fn dist(&self, v: NodeId) -> u32 {
        self.dist[v]
    }

    pub fn run(&mut self, g: &Graph, sources: &[NodeId], cap: u32) -> &[NodeId] {
        self.run_until(g, sources, cap, |_, _| false);
        &self.order
    }

    /// BFS that calls `on_visit(node, dist)` for every discovered node in
    /// nondecreasing distance order and stops as soon as it returns `true`.
    /// Returns whether the search was stopped early.
    pub fn run_until<F>(&mut self, g: &Graph, sources: &[NodeId], cap: u32, mut on_visit: F) -> bool
    where
        F: FnMut(NodeId, u32) -> bool,
    {
        self.reset();
        for &s in sources {
            if self.dist[s] == UNREACHABLE {
                self.dist[s] = 0;
                self.order.push(s);
                if on_visit(s, 0) {
                    return true;
                }
            }
        }
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let du = self.dist[u];
            if du >= cap {
                // nondecreasing order: everything after is at least as far
                break;
            }
            for &w in g.neighbors(u) {
                if self.dist[w] == UNREACHABLE {
                    self.dist[w] = du + 1;
                    self.order.push(w);
                    if on_visit(w, du + 1) {
                        return true;
                    }
                }
            }
        }
        false
    }
}
