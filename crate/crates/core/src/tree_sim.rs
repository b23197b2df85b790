//! Cascades on infinite d-regular and Poisson Galton–Watson trees.
//!
//! Only activated nodes ever exist. On a d-regular tree the source has `d`
//! neighbors and every other node `d - 1` children, so activated nodes spawn
//! `Bin(d, p)` (source) or `Bin(d - 1, p)` active children. On a Po(λ) tree
//! the active children of any node are `Po(λp)` by thinning.
//!
//! The closest candidate is the rooted LCA of the frontier. Candidates also
//! live in subtrees that were never activated, but each such node `w` hangs
//! off a materialized node `u` and is strictly farther from every frontier
//! node than `u`, so the minimum-distance candidate is always materialized.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_NODE_BUDGET: usize = 100_000_000;

/// Generation sizes in the aggregated sampler saturate here.
pub const FRONTIER_SATURATION: u64 = 1 << 48;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("activation tree exceeded the node budget of {budget}")]
    NodeBudgetExceeded { budget: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeKind {
    DRegular { d: u32 },
    GwPoisson { lambda: f64 },
}

impl TreeKind {
    pub fn validate(&self) -> Result<(), TreeError> {
        match *self {
            TreeKind::DRegular { d } if d < 2 => {
                Err(TreeError::InvalidParameter(format!("degree {d} must be at least 2")))
            }
            TreeKind::GwPoisson { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(TreeError::InvalidParameter(format!("lambda {lambda} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TreeKind::DRegular { .. } => "d_regular",
            TreeKind::GwPoisson { .. } => "gw_poisson",
        }
    }

    /// `d` or `λ`.
    pub fn parameter(&self) -> f64 {
        match *self {
            TreeKind::DRegular { d } => d as f64,
            TreeKind::GwPoisson { lambda } => lambda,
        }
    }

    fn root_offspring<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> u64 {
        match *self {
            TreeKind::DRegular { d } => binomial(d as u64, p, rng),
            TreeKind::GwPoisson { lambda } => poisson(lambda * p, rng),
        }
    }

    /// Total active children of `parents` non-root active nodes.
    fn offspring<R: Rng + ?Sized>(&self, p: f64, parents: u64, rng: &mut R) -> u64 {
        match *self {
            TreeKind::DRegular { d } => binomial(parents.saturating_mul(d as u64 - 1), p, rng),
            TreeKind::GwPoisson { lambda } => poisson(lambda * p * parents as f64, rng),
        }
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p == 0.0 {
        return 0;
    }
    Binomial::new(n, p).expect("validated probability").sample(rng)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

fn check_args(kind: &TreeKind, p: f64, rounds: u32) -> Result<(), TreeError> {
    kind.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(TreeError::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    if rounds == 0 {
        return Err(TreeError::InvalidParameter("rounds must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeStatus {
    DiedOut,
    Survived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "heuristic")]
pub enum Heuristic {
    /// At most one frontier node.
    Failure,
    /// Depth of the closest candidate, which equals its distance to the source.
    Candidate { depth: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRunResult {
    pub status: TreeStatus,
    pub frontier_size: u64,
    pub heuristic: Heuristic,
    pub success: bool,
}

impl TreeRunResult {
    fn died_out() -> Self {
        TreeRunResult {
            status: TreeStatus::DiedOut,
            frontier_size: 0,
            heuristic: Heuristic::Failure,
            success: false,
        }
    }

    fn from_meeting(frontier_size: u64, depth: Option<u32>) -> Self {
        if frontier_size == 0 {
            return Self::died_out();
        }
        let heuristic = match depth {
            Some(depth) if frontier_size >= 2 => Heuristic::Candidate { depth },
            _ => Heuristic::Failure,
        };
        TreeRunResult {
            status: TreeStatus::Survived,
            frontier_size,
            heuristic,
            success: heuristic == Heuristic::Candidate { depth: 0 },
        }
    }

    pub fn candidate_depth(&self) -> Option<u32> {
        match self.heuristic {
            Heuristic::Candidate { depth } => Some(depth),
            Heuristic::Failure => None,
        }
    }
}

/// Materialized activation tree. Nodes are stored in BFS order, so every
/// depth level and every sibling group is a contiguous index range; node 0
/// is the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTree {
    pub kind: TreeKind,
    pub p: f64,
    pub rounds: u32,
    parent: Vec<usize>,
    depth: Vec<u32>,
    first_child: Vec<usize>,
    child_count: Vec<usize>,
    /// Start of each depth level; one extra entry closes the last level.
    level_start: Vec<usize>,
}

impl ActivationTree {
    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != 0).then(|| self.parent[v])
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        self.first_child[v]..self.first_child[v] + self.child_count[v]
    }

    /// Nodes activated in round `rounds`.
    pub fn frontier(&self) -> std::ops::Range<usize> {
        let t = self.rounds as usize;
        if t + 1 < self.level_start.len() {
            self.level_start[t]..self.level_start[t + 1]
        } else {
            0..0
        }
    }

    /// Rooted LCA of the frontier, or `None` for an empty frontier.
    pub fn meeting_point(&self) -> Option<usize> {
        let frontier = self.frontier();
        if frontier.is_empty() {
            return None;
        }
        let mut bearing = vec![false; self.node_count()];
        for v in frontier {
            let mut u = v;
            while !bearing[u] {
                bearing[u] = true;
                if u == 0 {
                    break;
                }
                u = self.parent[u];
            }
        }
        let mut current = 0;
        loop {
            let mut bearing_children = self.children(current).filter(|&c| bearing[c]);
            match (bearing_children.next(), bearing_children.next()) {
                (Some(only), None) => current = only,
                _ => return Some(current),
            }
        }
    }
}

/// Grows the activation tree for `rounds` rounds with the default node budget.
pub fn simulate_tree<R: Rng + ?Sized>(
    kind: &TreeKind,
    p: f64,
    rounds: u32,
    rng: &mut R,
) -> Result<ActivationTree, TreeError> {
    simulate_tree_with_budget(kind, p, rounds, DEFAULT_NODE_BUDGET, rng)
}

pub fn simulate_tree_with_budget<R: Rng + ?Sized>(
    kind: &TreeKind,
    p: f64,
    rounds: u32,
    node_budget: usize,
    rng: &mut R,
) -> Result<ActivationTree, TreeError> {
    check_args(kind, p, rounds)?;
    let mut tree = ActivationTree {
        kind: *kind,
        p,
        rounds,
        parent: vec![0],
        depth: vec![0],
        first_child: Vec::new(),
        child_count: Vec::new(),
        level_start: vec![0, 1],
    };
    for level in 0..rounds {
        let range = tree.level_start[level as usize]..tree.level_start[level as usize + 1];
        if range.is_empty() {
            break;
        }
        for v in range {
            let count = if v == 0 {
                kind.root_offspring(p, rng)
            } else {
                kind.offspring(p, 1, rng)
            } as usize;
            let first = tree.parent.len();
            if first + count > node_budget {
                return Err(TreeError::NodeBudgetExceeded { budget: node_budget });
            }
            tree.first_child.push(first);
            tree.child_count.push(count);
            tree.parent.extend(std::iter::repeat_n(v, count));
            tree.depth.extend(std::iter::repeat_n(level + 1, count));
        }
        tree.level_start.push(tree.parent.len());
    }
    // nodes that never spawned (frontier and anything after an early stop)
    let n = tree.parent.len();
    tree.first_child.resize(n, n);
    tree.child_count.resize(n, 0);
    Ok(tree)
}

/// Evaluates the closest-candidate heuristic on a materialized tree.
pub fn closest_candidate(tree: &ActivationTree) -> TreeRunResult {
    let size = tree.frontier().len() as u64;
    let depth = tree.meeting_point().map(|v| tree.depth(v));
    TreeRunResult::from_meeting(size, depth)
}

/// Frontier size of a subtree rooted at one active non-root node after `generations`.
fn subtree_frontier<R: Rng + ?Sized>(kind: &TreeKind, p: f64, generations: u32, rng: &mut R) -> u64 {
    let mut size = 1u64;
    for _ in 0..generations {
        if size == 0 {
            break;
        }
        size = kind.offspring(p, size, rng).min(FRONTIER_SATURATION);
    }
    size
}

/// Samples the outcome of one run without materializing the tree.
///
/// Each child subtree is summarized by its generation sizes. When exactly
/// one child of the current node has a surviving subtree, the meeting point
/// lies inside it: the walk moves to that child and redraws its subtree
/// conditioned on survival by rejection, which is exact because the choice
/// to descend depended on that subtree only through its survival. Frontier
/// sizes saturate at [`FRONTIER_SATURATION`].
pub fn sample_run<R: Rng + ?Sized>(kind: &TreeKind, p: f64, rounds: u32, rng: &mut R) -> Result<TreeRunResult, TreeError> {
    check_args(kind, p, rounds)?;
    let mut depth = 0u32;
    let mut children = kind.root_offspring(p, rng);
    loop {
        let generations = rounds - depth - 1;
        let mut survivors = 0u32;
        let mut frontier = 0u64;
        for _ in 0..children {
            let size = subtree_frontier(kind, p, generations, rng);
            if size > 0 {
                survivors += 1;
                frontier = (frontier + size).min(FRONTIER_SATURATION);
            }
        }
        match survivors {
            0 if depth == 0 => return Ok(TreeRunResult::died_out()),
            // conditioned on survival: redraw this node's children
            0 => children = kind.offspring(p, 1, rng),
            1 if generations == 0 => return Ok(TreeRunResult::from_meeting(1, None)),
            1 => {
                depth += 1;
                children = kind.offspring(p, 1, rng);
            }
            _ => return Ok(TreeRunResult::from_meeting(frontier, Some(depth))),
        }
    }
}
