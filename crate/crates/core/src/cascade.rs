//! Independent Cascade simulation on finite graphs.
//!
//! Round indexing: `history[0] = {source}`, and `history[r + 1]` holds the
//! nodes activated by the members of `history[r]`. The observed active set
//! after `rounds` steps is `history[rounds]`.
//!
//! Randomness contract: in every round the active nodes are processed in
//! ascending id order, and each one walks its neighbors in ascending id
//! order, consuming exactly one uniform draw for every neighbor that was
//! uninformed when the round started. The attempt succeeds when the draw is
//! below `p`. A node hit by several active neighbors in the same round is
//! informed once and becomes active in the next round.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum CascadeError {
    #[error("activation probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("source {node} out of range for graph with {node_count} nodes")]
    InvalidSource { node: NodeId, node_count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeParams {
    pub p: f64,
    pub rounds: u32,
}

impl CascadeParams {
    pub fn new(p: f64, rounds: u32) -> Result<Self, CascadeError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(CascadeError::InvalidProbability(p));
        }
        Ok(CascadeParams { p, rounds })
    }
}

/// State of one cascade after the observation round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeSnapshot {
    pub source: NodeId,
    pub rounds: u32,
    /// Frontier at the observation round, sorted.
    pub active: Vec<NodeId>,
    /// Every node activated in rounds `0..=rounds`, sorted.
    pub informed: Vec<NodeId>,
    /// Per-round frontiers, `rounds + 1` entries, each sorted.
    pub history: Vec<Vec<NodeId>>,
}

impl CascadeSnapshot {
    pub fn died_out(&self) -> bool {
        self.active.is_empty()
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.history.len() != self.rounds as usize + 1 {
            return Err("history length differs from rounds + 1".into());
        }
        if self.history[0] != [self.source] {
            return Err("first frontier is not the source".into());
        }
        if self.history[self.rounds as usize] != self.active {
            return Err("active set differs from the last frontier".into());
        }
        let mut union: Vec<NodeId> = self.history.iter().flatten().copied().collect();
        let total = union.len();
        union.sort_unstable();
        union.dedup();
        if union.len() != total {
            return Err("frontiers are not pairwise disjoint".into());
        }
        if union != self.informed {
            return Err("informed set is not the union of the frontiers".into());
        }
        let mut ended = false;
        for frontier in &self.history {
            if ended && !frontier.is_empty() {
                return Err("activity after the process died out".into());
            }
            ended |= frontier.is_empty();
        }
        Ok(())
    }
}

/// Runs `params.rounds` rounds from `source`, drawing attempts from `rng`.
pub fn simulate<R: Rng + ?Sized>(
    g: &Graph,
    source: NodeId,
    params: &CascadeParams,
    rng: &mut R,
) -> Result<CascadeSnapshot, CascadeError> {
    let p = params.p;
    CascadeParams::new(p, params.rounds)?;
    simulate_with(g, source, params.rounds, |_, _| rng.random::<f64>() < p)
}

/// Cascade with a caller-decided attempt outcome: `attempt(u, v)` is asked
/// once per active `u` and start-of-round uninformed neighbor `v`, in the
/// order documented at module level.
pub fn simulate_with<F>(
    g: &Graph,
    source: NodeId,
    rounds: u32,
    mut attempt: F,
) -> Result<CascadeSnapshot, CascadeError>
where
    F: FnMut(NodeId, NodeId) -> bool,
{
    if !g.contains_node(source) {
        return Err(CascadeError::InvalidSource {
            node: source,
            node_count: g.node_count(),
        });
    }
    const NEVER: u32 = u32::MAX;
    // activation round per node
    let mut activated_at = vec![NEVER; g.node_count()];
    activated_at[source] = 0;
    let mut history = Vec::with_capacity(rounds as usize + 1);
    history.push(vec![source]);
    let mut informed = vec![source];

    for round in 0..rounds {
        let frontier = history.last().unwrap();
        let mut next = Vec::new();
        for &u in frontier {
            for &v in g.neighbors(u) {
                let at = activated_at[v];
                if at != NEVER && at <= round {
                    continue;
                }
                if attempt(u, v) && at == NEVER {
                    activated_at[v] = round + 1;
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        informed.extend_from_slice(&next);
        history.push(next);
    }
    informed.sort_unstable();
    Ok(CascadeSnapshot {
        source,
        rounds,
        active: history[rounds as usize].clone(),
        informed,
        history,
    })
}
