//! Likelihood of an observed active set under each candidate source, and the
//! posterior under a uniform prior.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{simulate, CascadeError, CascadeParams};
use crate::graph::{Graph, GraphError, NodeId};

#[derive(Debug, Error)]
pub enum LikelihoodError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(
        "exact enumeration needs more than {limit} branches ({detail}); use the Monte-Carlo estimate instead"
    )]
    BudgetExceeded { limit: u64, detail: String },
    #[error("every likelihood is zero: the observation is infeasible")]
    Infeasible,
    #[error("at least one run is required")]
    NoRuns,
}

/// Limits on exact enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    /// Free activation targets allowed in a single round.
    pub max_round_targets: u32,
    /// Total frontier outcomes explored.
    pub max_branches: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_round_targets: 20,
            max_branches: 1 << 24,
        }
    }
}

/// Exact `Pr[X* = target | source = v]` with the default budget.
pub fn exact_likelihood(g: &Graph, target: &[NodeId], v: NodeId, p: f64, rounds: u32) -> Result<f64, LikelihoodError> {
    exact_likelihood_with(g, target, v, p, rounds, EnumerationBudget::default())
}

/// Exact likelihood by a round-synchronous recursion over frontier outcomes.
///
/// In a round, an uninformed node `w` with `k` active neighbors is activated
/// with probability `1 - (1 - p)^k`, independently of the other targets, so
/// summing over subsets of targets per round is the same as summing over
/// every outcome of the individual attempts. A target in `X` activated
/// before the last round can never be in the final frontier, so such
/// branches are dropped; the last round is scored against `X` directly.
/// Branch weights are carried as logarithms.
pub fn exact_likelihood_with(
    g: &Graph,
    target: &[NodeId],
    v: NodeId,
    p: f64,
    rounds: u32,
    budget: EnumerationBudget,
) -> Result<f64, LikelihoodError> {
    CascadeParams::new(p, rounds)?;
    g.check_node(v)?;
    let mut in_target = vec![false; g.node_count()];
    for &x in target {
        g.check_node(x)?;
        in_target[x] = true;
    }
    let mut sorted_target = target.to_vec();
    sorted_target.sort_unstable();
    sorted_target.dedup();
    let mut walk = Enumeration {
        g,
        target: sorted_target,
        in_target,
        informed: vec![false; g.node_count()],
        attempts: vec![0; g.node_count()],
        ln_p_fail: (1.0 - p).ln(),
        rounds,
        budget,
        branches: 0,
        total: 0.0,
    };
    walk.informed[v] = true;
    walk.step(&[v], 0, 0.0)?;
    Ok(walk.total.min(1.0))
}

struct Enumeration<'a> {
    g: &'a Graph,
    target: Vec<NodeId>,
    in_target: Vec<bool>,
    informed: Vec<bool>,
    attempts: Vec<u32>,
    ln_p_fail: f64,
    rounds: u32,
    budget: EnumerationBudget,
    branches: u64,
    total: f64,
}

impl Enumeration<'_> {
    /// `ln(1 - (1 - p)^k)` and `ln((1 - p)^k)`.
    fn ln_outcomes(&self, k: u32) -> (f64, f64) {
        let ln_fail = self.ln_p_fail * k as f64;
        (ln_one_minus_exp(ln_fail), ln_fail)
    }

    fn step(&mut self, frontier: &[NodeId], round: u32, ln_weight: f64) -> Result<(), LikelihoodError> {
        if round == self.rounds {
            if frontier == self.target.as_slice() {
                self.total += ln_weight.exp();
            }
            return Ok(());
        }
        if frontier.is_empty() {
            if self.target.is_empty() {
                self.total += ln_weight.exp();
            }
            return Ok(());
        }

        let mut targets = Vec::new();
        for &u in frontier {
            for &w in self.g.neighbors(u) {
                if !self.informed[w] {
                    if self.attempts[w] == 0 {
                        targets.push(w);
                    }
                    self.attempts[w] += 1;
                }
            }
        }
        targets.sort_unstable();
        let outcomes: Vec<(NodeId, f64, f64)> = targets
            .iter()
            .map(|&w| {
                let (hit, miss) = self.ln_outcomes(self.attempts[w]);
                self.attempts[w] = 0;
                (w, hit, miss)
            })
            .collect();

        if round + 1 == self.rounds {
            // the new frontier must be exactly the target
            let mut ln_w = ln_weight;
            let mut hits = 0;
            for &(w, hit, miss) in &outcomes {
                if self.in_target[w] {
                    hits += 1;
                    ln_w += hit;
                } else {
                    ln_w += miss;
                }
            }
            if hits == self.target.len() {
                self.branches += 1;
                self.total += ln_w.exp();
            }
            return Ok(());
        }

        let mut ln_w = ln_weight;
        let mut free = Vec::new();
        for &(w, hit, miss) in &outcomes {
            if self.in_target[w] {
                ln_w += miss;
            } else {
                free.push((w, hit, miss));
            }
        }
        if ln_w == f64::NEG_INFINITY {
            return Ok(());
        }
        let m = free.len() as u32;
        if m > self.budget.max_round_targets {
            return Err(LikelihoodError::BudgetExceeded {
                limit: self.budget.max_branches,
                detail: format!("{m} free targets in round {}", round + 1),
            });
        }
        self.branches += 1u64 << m;
        if self.branches > self.budget.max_branches {
            return Err(LikelihoodError::BudgetExceeded {
                limit: self.budget.max_branches,
                detail: format!("reached after round {}", round + 1),
            });
        }
        let mut next = Vec::with_capacity(free.len());
        for mask in 0u64..(1u64 << m) {
            let mut ln_branch = ln_w;
            next.clear();
            for (i, &(w, hit, miss)) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    ln_branch += hit;
                    next.push(w);
                } else {
                    ln_branch += miss;
                }
            }
            if ln_branch == f64::NEG_INFINITY {
                continue;
            }
            for &w in &next {
                self.informed[w] = true;
            }
            let frontier_next = next.clone();
            self.step(&frontier_next, round + 1, ln_branch)?;
            for &w in &frontier_next {
                self.informed[w] = false;
            }
        }
        Ok(())
    }
}

/// `ln(1 - e^x)` for `x <= 0`.
fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub runs: u64,
}

/// Fraction of simulated cascades from `v` whose final frontier equals `target`.
pub fn mc_likelihood<R: Rng + ?Sized>(
    g: &Graph,
    target: &[NodeId],
    v: NodeId,
    p: f64,
    rounds: u32,
    runs: u64,
    rng: &mut R,
) -> Result<McEstimate, LikelihoodError> {
    if runs == 0 {
        return Err(LikelihoodError::NoRuns);
    }
    let params = CascadeParams::new(p, rounds)?;
    let mut sorted_target = target.to_vec();
    sorted_target.sort_unstable();
    sorted_target.dedup();
    let mut hits = 0u64;
    for _ in 0..runs {
        if simulate(g, v, &params, rng)?.active == sorted_target {
            hits += 1;
        }
    }
    let estimate = hits as f64 / runs as f64;
    Ok(McEstimate {
        estimate,
        std_error: (estimate * (1.0 - estimate) / runs as f64).sqrt(),
        hits,
        runs,
    })
}

/// Likelihood of one observation under every possible source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTable {
    pub p: f64,
    pub rounds: u32,
    pub target: Vec<NodeId>,
    /// Indexed by node id.
    pub values: Vec<f64>,
}

impl LikelihoodTable {
    /// Exact likelihoods for every node of `g`.
    pub fn exact(
        g: &Graph,
        target: &[NodeId],
        p: f64,
        rounds: u32,
        budget: EnumerationBudget,
    ) -> Result<Self, LikelihoodError> {
        let values = (0..g.node_count())
            .map(|v| exact_likelihood_with(g, target, v, p, rounds, budget))
            .collect::<Result<Vec<_>, _>>()?;
        let mut target = target.to_vec();
        target.sort_unstable();
        target.dedup();
        Ok(LikelihoodTable { p, rounds, target, values })
    }

    pub fn argmax(&self) -> Vec<NodeId> {
        argmax(&self.values)
    }
}

/// Indices attaining the maximum, ties included; empty for an empty slice.
pub fn argmax(values: &[f64]) -> Vec<NodeId> {
    let Some(top) = values.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    values
        .iter()
        .enumerate()
        .filter(|&(_, &x)| x == top)
        .map(|(i, _)| i)
        .collect()
}

/// Posterior over sources under a uniform prior.
pub fn posterior(table: &LikelihoodTable) -> Result<Vec<f64>, LikelihoodError> {
    let mass: f64 = table.values.iter().sum();
    if !(mass > 0.0) {
        return Err(LikelihoodError::Infeasible);
    }
    Ok(table.values.iter().map(|&l| l / mass).collect())
}
