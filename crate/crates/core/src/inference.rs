//! Source estimation on general graphs by minimum-radius ball intersection.
//!
//! `N_r = ⋂_{u ∈ X} {v : dist(v, u) ≤ r}` is nonempty exactly when some node
//! has eccentricity `max_{u ∈ X} dist(v, u)` at most `r`, so the smallest
//! nonempty intersection is the set of nodes of minimum eccentricity with
//! respect to `X`, and its radius is that minimum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::CascadeSnapshot;
use crate::graph::{BfsScratch, Graph, GraphError, NodeId, UNREACHABLE};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no node is within {cap} hops of every active node")]
    NoCandidateWithinCap { cap: u32 },
    #[error("active nodes lie in different connected components")]
    DisconnectedActiveSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Ok,
    EmptyActiveSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub status: CandidateStatus,
    /// Minimal radius; `None` for an empty active set.
    pub t_prime: Option<u32>,
    /// Sorted.
    pub candidates: Vec<NodeId>,
}

impl CandidateResult {
    /// Lowest-id candidate.
    pub fn representative(&self) -> Option<NodeId> {
        self.candidates.first().copied()
    }
}

/// Nodes minimizing the largest hop distance to `active`, searched within
/// `depth_cap` hops (`None` for no cap).
///
/// Lower bounds come from BFS runs out of active nodes, each chosen as the
/// active node farthest from the current best-looking candidate; candidates
/// are then confirmed one at a time, cheapest bound first, by a BFS that
/// stops once every active node is reached or the best radius is exceeded.
pub fn candidate_set(g: &Graph, active: &[NodeId], depth_cap: Option<u32>) -> Result<CandidateResult, InferenceError> {
    let mut scratch = BfsScratch::new(g.node_count());
    candidate_set_with(g, active, depth_cap, &mut scratch)
}

pub(crate) fn candidate_set_with(
    g: &Graph,
    active: &[NodeId],
    depth_cap: Option<u32>,
    scratch: &mut BfsScratch,
) -> Result<CandidateResult, InferenceError> {
    for &u in active {
        g.check_node(u)?;
    }
    let mut active = active.to_vec();
    active.sort_unstable();
    active.dedup();
    if active.is_empty() {
        return Ok(CandidateResult {
            status: CandidateStatus::EmptyActiveSet,
            t_prime: None,
            candidates: Vec::new(),
        });
    }
    let cap = depth_cap.unwrap_or(UNREACHABLE - 1);
    let n = g.node_count();
    let mut is_active = vec![false; n];
    for &u in &active {
        is_active[u] = true;
    }
    let mut used_source = vec![false; n];

    let mut lower = vec![0u32; n];
    let mut exact = vec![UNREACHABLE; n];
    let mut best = UNREACHABLE;

    let first = active[0];
    used_source[first] = true;
    let mut pool: Vec<NodeId> = scratch.run(g, &[first], cap).to_vec();
    for &v in &pool {
        lower[v] = scratch.dist(v);
    }
    if depth_cap.is_none() && active.iter().any(|&u| scratch.dist(u) == UNREACHABLE) {
        return Err(InferenceError::DisconnectedActiveSet);
    }

    loop {
        // UNREACHABLE as a lower bound marks an eliminated node
        pool.retain(|&v| lower[v] != UNREACHABLE && lower[v] <= best && (exact[v] == UNREACHABLE || exact[v] == best));
        let Some(&c) = pool
            .iter()
            .filter(|&&v| exact[v] == UNREACHABLE)
            .min_by_key(|&&v| (lower[v], v))
        else {
            break;
        };

        // exact eccentricity of c, or proof that it exceeds the limit
        let limit = cap.min(best);
        let mut remaining = active.len();
        let mut far = c;
        let mut ecc = 0;
        let complete = scratch.run_until(g, &[c], limit, |v, d| {
            if is_active[v] {
                remaining -= 1;
                far = v;
                ecc = d;
            }
            remaining == 0
        });
        if complete {
            exact[c] = ecc;
            best = best.min(ecc);
        } else {
            lower[c] = UNREACHABLE;
            // the active nodes c failed to reach within the limit
            far = active
                .iter()
                .copied()
                .find(|&u| scratch.dist(u) == UNREACHABLE)
                .expect("some active node is unreached");
        }
        if used_source[far] {
            continue;
        }
        used_source[far] = true;
        scratch.run(g, &[far], cap.min(best));
        for &v in &pool {
            let d = scratch.dist(v);
            lower[v] = if d == UNREACHABLE { UNREACHABLE } else { lower[v].max(d) };
        }
    }

    if best == UNREACHABLE {
        return Err(if depth_cap.is_none() {
            InferenceError::DisconnectedActiveSet
        } else {
            InferenceError::NoCandidateWithinCap { cap }
        });
    }
    pool.sort_unstable();
    Ok(CandidateResult {
        status: CandidateStatus::Ok,
        t_prime: Some(best),
        candidates: pool,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Success,
    Wrong,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub classification: Classification,
    /// Mean hop distance from the source to the candidates.
    pub avg_distance: Option<f64>,
    pub max_distance: Option<u32>,
    /// Distance of each candidate to the source, in candidate order.
    pub candidate_distances: Vec<u32>,
}

/// Scores a candidate set against the true source of the snapshot.
pub fn evaluate_run(g: &Graph, snapshot: &CascadeSnapshot, result: &CandidateResult) -> RunOutcome {
    let mut scratch = BfsScratch::new(g.node_count());
    evaluate_run_with(g, snapshot, result, &mut scratch)
}

pub(crate) fn evaluate_run_with(
    g: &Graph,
    snapshot: &CascadeSnapshot,
    result: &CandidateResult,
    scratch: &mut BfsScratch,
) -> RunOutcome {
    if snapshot.active.is_empty() || result.status == CandidateStatus::EmptyActiveSet {
        return RunOutcome {
            classification: Classification::Empty,
            avg_distance: None,
            max_distance: None,
            candidate_distances: Vec::new(),
        };
    }
    let omega = snapshot.source;
    let classification = if result.candidates.binary_search(&omega).is_ok() {
        Classification::Success
    } else {
        Classification::Wrong
    };
    let mut wanted = vec![false; g.node_count()];
    for &c in &result.candidates {
        wanted[c] = true;
    }
    let mut remaining = result.candidates.len();
    scratch.run_until(g, &[omega], UNREACHABLE - 1, |v, _| {
        if wanted[v] {
            remaining -= 1;
        }
        remaining == 0
    });
    let candidate_distances: Vec<u32> = result.candidates.iter().map(|&c| scratch.dist(c)).collect();
    let reached: Vec<u32> = candidate_distances.iter().copied().filter(|&d| d != UNREACHABLE).collect();
    let (avg_distance, max_distance) = if reached.is_empty() {
        (None, None)
    } else {
        let sum: u64 = reached.iter().map(|&d| d as u64).sum();
        (Some(sum as f64 / reached.len() as f64), reached.iter().copied().max())
    };
    RunOutcome {
        classification,
        avg_distance,
        max_distance,
        candidate_distances,
    }
}
