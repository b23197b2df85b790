//! Batch sweeps over spreading probabilities and observation rounds.
//!
//! Every run draws from streams keyed only by the master seed and the run
//! index: one for the graph, one for the source, one for the cascade. The
//! same streams are replayed for every `(t, p)` cell, so the cells of a run
//! share their network and source, and a sweep over a subset of the grid
//! reproduces the matching rows of the full sweep exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{simulate, CascadeParams};
use crate::graph::{BfsScratch, Graph, GraphError, GraphModel};
use crate::inference::{candidate_set_with, evaluate_run_with, Classification};
use crate::rng::{derive_seed, stream_rng, SimRng};
use crate::tree_sim::{
    closest_candidate, sample_run, simulate_tree_with_budget, Heuristic, TreeError, TreeKind, TreeRunResult,
    TreeStatus, DEFAULT_NODE_BUDGET,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

const GRAPH_LANE: u64 = 0;
const SOURCE_LANE: u64 = 1;
const CASCADE_LANE: u64 = 2;
const FIXED_GRAPH_STREAM: u64 = u64::MAX;

fn stream_id(run: u32, lane: u64) -> u64 {
    (run as u64) << 2 | lane
}

fn check_grid(p_grid: &[f64], runs: u32) -> Result<(), ExperimentError> {
    if runs == 0 {
        return Err(ExperimentError::Invalid("runs must be at least 1".into()));
    }
    if p_grid.is_empty() {
        return Err(ExperimentError::Invalid("empty p grid".into()));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(ExperimentError::Invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Sweep over a random network family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: GraphModel,
    pub p_grid: Vec<f64>,
    pub rounds: Vec<u32>,
    pub runs: u32,
    pub master_seed: u64,
    /// Reuse one network for every run instead of drawing a fresh one.
    #[serde(default)]
    pub fixed_graph: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        check_grid(&self.p_grid, self.runs)?;
        if self.rounds.is_empty() {
            return Err(ExperimentError::Invalid("no observation rounds given".into()));
        }
        if self.model.node_count() == 0 {
            return Err(ExperimentError::Invalid("network has no nodes".into()));
        }
        self.model.validate()?;
        Ok(())
    }
}

/// One cascade and its evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: u32,
    pub rounds: u32,
    pub p: f64,
    pub source: usize,
    pub active_size: usize,
    pub classification: Classification,
    pub t_prime: Option<u32>,
    pub candidates: usize,
    pub avg_distance: Option<f64>,
    pub max_distance: Option<u32>,
    /// Source-to-candidate distances.
    pub distances: Vec<u32>,
    /// Set when inference failed; such runs count as wrong.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub p: f64,
    pub successes: u32,
    pub wrong: u32,
    pub empty: u32,
    /// Mean over nonempty runs of each run's mean candidate distance.
    pub avg_distance: Option<f64>,
    pub max_distance: Option<u32>,
    /// Mean over all candidate-run pairs.
    pub pooled_avg_distance: Option<f64>,
    /// Runs observing a single active node (scored by the general rule).
    pub singletons: u32,
    pub errors: u32,
}

/// Source-to-candidate distances pooled over runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceHistogram {
    pub counts: BTreeMap<u32, u64>,
}

impl DistanceHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Candidates strictly farther than `d`.
    pub fn mass_beyond(&self, d: u32) -> u64 {
        self.counts.range(d + 1..).map(|(_, c)| c).sum()
    }

    pub fn max_distance(&self) -> Option<u32> {
        self.counts.keys().next_back().copied()
    }

    /// Whitespace-delimited `distance count` lines.
    pub fn to_text(&self, p: f64, rounds: u32) -> String {
        let mut out = format!("# p={} t={}\n# distance count\n", format_p(p), rounds);
        for (d, c) in &self.counts {
            writeln!(out, "{d} {c}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTable {
    pub rounds: u32,
    pub rows: Vec<SummaryRow>,
    pub histograms: Vec<DistanceHistogram>,
}

impl RoundTable {
    /// CSV with columns `p,successes,wrong,empty,avg_distance,max_distance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,successes,wrong,empty,avg_distance,max_distance\n");
        for row in &self.rows {
            let avg = row.avg_distance.map_or("-".to_string(), |a| format!("{a:.3}"));
            let max = row.max_distance.map_or("-".to_string(), |m| m.to_string());
            writeln!(out, "{},{},{},{},{avg},{max}", format_p(row.p), row.successes, row.wrong, row.empty).unwrap();
        }
        out
    }

    pub fn row(&self, p: f64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.p == p)
    }

    pub fn histogram(&self, p: f64) -> Option<&DistanceHistogram> {
        self.rows.iter().position(|r| r.p == p).map(|i| &self.histograms[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub tables: Vec<RoundTable>,
    /// Per-run records, ordered by run, then rounds, then p.
    pub runs: Vec<RunRecord>,
}

impl ExperimentResult {
    pub fn table(&self, rounds: u32) -> Option<&RoundTable> {
        self.tables.iter().find(|t| t.rounds == rounds)
    }
}

/// Two decimals when exact (grid values), full precision otherwise.
pub fn format_p(p: f64) -> String {
    let short = format!("{p:.2}");
    if short.parse::<f64>() == Ok(p) {
        short
    } else {
        p.to_string()
    }
}

/// Runs every `(t, p)` cell of `spec`.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let fixed = if spec.fixed_graph {
        Some(spec.model.generate(&mut stream_rng(spec.master_seed, FIXED_GRAPH_STREAM))?)
    } else {
        None
    };
    let per_run: Vec<Vec<RunRecord>> = (0..spec.runs)
        .into_par_iter()
        .map(|run| run_cells(spec, fixed.as_ref(), run))
        .collect::<Result<_, _>>()?;

    let tables = spec
        .rounds
        .iter()
        .map(|&t| {
            let mut rows = Vec::new();
            let mut histograms = Vec::new();
            for &p in &spec.p_grid {
                let cell: Vec<&RunRecord> = per_run
                    .iter()
                    .flatten()
                    .filter(|r| r.rounds == t && r.p == p)
                    .collect();
                rows.push(summarize(p, &cell));
                let mut counts = BTreeMap::new();
                for d in cell.iter().flat_map(|r| &r.distances) {
                    *counts.entry(*d).or_insert(0) += 1;
                }
                histograms.push(DistanceHistogram { counts });
            }
            RoundTable {
                rounds: t,
                rows,
                histograms,
            }
        })
        .collect();
    Ok(ExperimentResult {
        spec: spec.clone(),
        tables,
        runs: per_run.into_iter().flatten().collect(),
    })
}

/// Pooled distance histograms for the given probabilities at every round count.
pub fn distance_histogram(spec: &ExperimentSpec, p_values: &[f64]) -> Result<Vec<(u32, f64, DistanceHistogram)>, ExperimentError> {
    if let Some(p) = p_values.iter().find(|p| !spec.p_grid.contains(p)) {
        return Err(ExperimentError::Invalid(format!("p = {p} is not on the grid")));
    }
    let subset = ExperimentSpec {
        p_grid: p_values.to_vec(),
        ..spec.clone()
    };
    let result = run_sweep(&subset)?;
    Ok(result
        .tables
        .into_iter()
        .flat_map(|table| {
            let t = table.rounds;
            p_values.iter().copied().zip(table.histograms).map(move |(p, h)| (t, p, h))
        })
        .collect())
}

fn run_cells(spec: &ExperimentSpec, fixed: Option<&Graph>, run: u32) -> Result<Vec<RunRecord>, ExperimentError> {
    let seed = spec.master_seed;
    let owned;
    let g = match fixed {
        Some(g) => g,
        None => {
            owned = spec.model.generate(&mut stream_rng(seed, stream_id(run, GRAPH_LANE)))?;
            &owned
        }
    };
    let source = stream_rng(seed, stream_id(run, SOURCE_LANE)).random_range(0..g.node_count());
    let mut scratch = BfsScratch::new(g.node_count());
    let mut records = Vec::with_capacity(spec.rounds.len() * spec.p_grid.len());
    for &t in &spec.rounds {
        for &p in &spec.p_grid {
            let params = CascadeParams::new(p, t).expect("validated grid");
            let mut rng = stream_rng(seed, stream_id(run, CASCADE_LANE));
            let snapshot = simulate(g, source, &params, &mut rng).expect("source drawn from the graph");
            let mut record = RunRecord {
                run,
                rounds: t,
                p,
                source,
                active_size: snapshot.active.len(),
                classification: Classification::Wrong,
                t_prime: None,
                candidates: 0,
                avg_distance: None,
                max_distance: None,
                distances: Vec::new(),
                error: None,
            };
            match candidate_set_with(g, &snapshot.active, Some(t), &mut scratch) {
                Ok(result) => {
                    let outcome = evaluate_run_with(g, &snapshot, &result, &mut scratch);
                    record.classification = outcome.classification;
                    record.t_prime = result.t_prime;
                    record.candidates = result.candidates.len();
                    record.avg_distance = outcome.avg_distance;
                    record.max_distance = outcome.max_distance;
                    record.distances = outcome.candidate_distances;
                }
                Err(e) => record.error = Some(e.to_string()),
            }
            records.push(record);
        }
    }
    Ok(records)
}

fn summarize(p: f64, cell: &[&RunRecord]) -> SummaryRow {
    let count = |c: Classification| cell.iter().filter(|r| r.classification == c).count() as u32;
    let run_avgs: Vec<f64> = cell.iter().filter_map(|r| r.avg_distance).collect();
    let pooled: Vec<u32> = cell.iter().flat_map(|r| r.distances.iter().copied()).collect();
    SummaryRow {
        p,
        successes: count(Classification::Success),
        wrong: count(Classification::Wrong),
        empty: count(Classification::Empty),
        avg_distance: (!run_avgs.is_empty()).then(|| run_avgs.iter().sum::<f64>() / run_avgs.len() as f64),
        max_distance: cell.iter().filter_map(|r| r.max_distance).max(),
        pooled_avg_distance: (!pooled.is_empty())
            .then(|| pooled.iter().map(|&d| d as f64).sum::<f64>() / pooled.len() as f64),
        singletons: cell.iter().filter(|r| r.active_size == 1).count() as u32,
        errors: cell.iter().filter(|r| r.error.is_some()).count() as u32,
    }
}

/// How tree runs are simulated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TreeMode {
    /// Generation sizes only; no node budget needed.
    #[default]
    Aggregated,
    /// Every activated node is stored, up to the budget.
    Materialized { node_budget: usize },
}

impl TreeMode {
    pub fn materialized() -> Self {
        TreeMode::Materialized {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSweepSpec {
    pub kind: TreeKind,
    pub p_grid: Vec<f64>,
    pub rounds: u32,
    pub runs: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub mode: TreeMode,
}

/// One tree run; `result` is `None` when the node budget was exceeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRunRecord {
    pub p: f64,
    pub seed: u64,
    pub result: Option<TreeRunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSweepRow {
    pub p: f64,
    pub runs: u32,
    pub successes: u32,
    /// Survived with a single frontier node.
    pub failures: u32,
    pub died_out: u32,
    pub aborted: u32,
    /// `depth_counts[k]` runs had their closest candidate at depth `k`.
    pub depth_counts: Vec<u32>,
}

impl TreeSweepRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }

    pub fn extinction_rate(&self) -> f64 {
        self.died_out as f64 / self.runs as f64
    }

    /// Fraction of runs whose closest candidate is at depth `k` or more.
    pub fn depth_tail(&self, k: usize) -> f64 {
        self.depth_counts.iter().skip(k).sum::<u32>() as f64 / self.runs as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSweepResult {
    pub spec: TreeSweepSpec,
    pub rows: Vec<TreeSweepRow>,
    pub runs: Vec<TreeRunRecord>,
}

impl TreeSweepResult {
    /// Per-run CSV: `kind,d_or_lambda,p,t,seed,status,frontier_size,heuristic_depth,success`.
    pub fn runs_csv(&self) -> String {
        let spec = &self.spec;
        let mut out = String::from("kind,d_or_lambda,p,t,seed,status,frontier_size,heuristic_depth,success\n");
        for rec in &self.runs {
            let (status, size, depth, success) = match rec.result {
                None => ("aborted".to_string(), "-".to_string(), "-".to_string(), "false"),
                Some(r) => (
                    match r.status {
                        TreeStatus::DiedOut => "died_out",
                        TreeStatus::Survived => "survived",
                    }
                    .to_string(),
                    r.frontier_size.to_string(),
                    r.candidate_depth().map_or("-".to_string(), |d| d.to_string()),
                    if r.success { "true" } else { "false" },
                ),
            };
            writeln!(
                out,
                "{},{},{},{},{},{status},{size},{depth},{success}",
                spec.kind.name(),
                spec.kind.parameter(),
                format_p(rec.p),
                spec.rounds,
                rec.seed
            )
            .unwrap();
        }
        out
    }

    /// Summary CSV: `p,runs,successes,failures,died_out,aborted,success_rate`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("p,runs,successes,failures,died_out,aborted,success_rate\n");
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.4}",
                format_p(row.p),
                row.runs,
                row.successes,
                row.failures,
                row.died_out,
                row.aborted,
                row.success_rate()
            )
            .unwrap();
        }
        out
    }
}

/// Runs the closest-candidate estimator on tree cascades for every `p`.
/// Run `i` uses the same seed for every `p`.
pub fn tree_sweep(spec: &TreeSweepSpec) -> Result<TreeSweepResult, ExperimentError> {
    check_grid(&spec.p_grid, spec.runs)?;
    spec.kind.validate()?;
    if spec.rounds == 0 {
        return Err(ExperimentError::Invalid("rounds must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &p in &spec.p_grid {
        let records: Vec<TreeRunRecord> = (0..spec.runs)
            .into_par_iter()
            .map(|run| {
                let seed = derive_seed(spec.master_seed, run as u64);
                let mut rng = SimRng::seed_from_u64(seed);
                let result = match spec.mode {
                    TreeMode::Aggregated => Some(sample_run(&spec.kind, p, spec.rounds, &mut rng)?),
                    TreeMode::Materialized { node_budget } => {
                        match simulate_tree_with_budget(&spec.kind, p, spec.rounds, node_budget, &mut rng) {
                            Ok(tree) => Some(closest_candidate(&tree)),
                            Err(TreeError::NodeBudgetExceeded { .. }) => None,
                            Err(e) => return Err(e),
                        }
                    }
                };
                Ok(TreeRunRecord { p, seed, result })
            })
            .collect::<Result<_, TreeError>>()?;
        let mut row = TreeSweepRow {
            p,
            runs: spec.runs,
            successes: 0,
            failures: 0,
            died_out: 0,
            aborted: 0,
            depth_counts: Vec::new(),
        };
        for rec in &records {
            match rec.result {
                None => row.aborted += 1,
                Some(r) => {
                    row.successes += r.success as u32;
                    match (r.status, r.heuristic) {
                        (TreeStatus::DiedOut, _) => row.died_out += 1,
                        (TreeStatus::Survived, Heuristic::Failure) => row.failures += 1,
                        (TreeStatus::Survived, Heuristic::Candidate { depth }) => {
                            let depth = depth as usize;
                            if row.depth_counts.len() <= depth {
                                row.depth_counts.resize(depth + 1, 0);
                            }
                            row.depth_counts[depth] += 1;
                        }
                    }
                }
            }
        }
        rows.push(row);
        runs.extend(records);
    }
    Ok(TreeSweepResult {
        spec: spec.clone(),
        rows,
        runs,
    })
}

/// Artifacts that `replicate` can regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateTarget {
    Table1,
    Table2,
    Table3,
    Fig3,
    Fig4,
}

impl ReplicateTarget {
    pub const ALL: [ReplicateTarget; 5] = [
        ReplicateTarget::Table1,
        ReplicateTarget::Table2,
        ReplicateTarget::Table3,
        ReplicateTarget::Fig3,
        ReplicateTarget::Fig4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ReplicateTarget::Table1 => "table1",
            ReplicateTarget::Table2 => "table2",
            ReplicateTarget::Table3 => "table3",
            ReplicateTarget::Fig3 => "fig3",
            ReplicateTarget::Fig4 => "fig4",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    /// The probabilities whose distance histograms are written.
    pub fn histogram_ps(&self) -> &'static [f64] {
        match self {
            ReplicateTarget::Fig3 => &[0.45, 0.50, 0.55],
            _ => &[],
        }
    }

    /// Sweep definition: 100 runs on networks of 10^5 nodes.
    pub fn spec(&self, master_seed: u64) -> ExperimentSpec {
        const N: usize = 100_000;
        let er = GraphModel::ErdosRenyi { n: N, avg_degree: 4.0 };
        let rgg = GraphModel::Geometric {
            n: N,
            expected_degree: 16.0,
        };
        let (model, rounds, p_grid) = match self {
            ReplicateTarget::Table1 => (er, vec![8], standard_p_grid()),
            ReplicateTarget::Table2 => (GraphModel::ConfigRegular { n: N, d: 4 }, vec![8], standard_p_grid()),
            ReplicateTarget::Table3 => (rgg, vec![8], standard_p_grid()),
            ReplicateTarget::Fig3 => (er, vec![8], self.histogram_ps().to_vec()),
            ReplicateTarget::Fig4 => (rgg, vec![8, 16, 32], standard_p_grid()),
        };
        ExperimentSpec {
            model,
            p_grid,
            rounds,
            runs: 100,
            master_seed,
            fixed_graph: false,
        }
    }
}

/// `0.00, 0.05, ..., 1.00`.
pub fn standard_p_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_are_exact() {
        let grid = standard_p_grid();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[9], 0.45);
        assert_eq!(grid[11], 0.55);
        assert_eq!(format_p(grid[10]), "0.50");
        assert_eq!(format_p(0.125), "0.125");
    }

    #[test]
    fn rejects_invalid_specs() {
        let mut spec = ExperimentSpec {
            model: GraphModel::ErdosRenyi { n: 50, avg_degree: 3.0 },
            p_grid: vec![0.5],
            rounds: vec![3],
            runs: 0,
            master_seed: 1,
            fixed_graph: false,
        };
        assert!(run_sweep(&spec).is_err());
        spec.runs = 2;
        spec.p_grid = vec![1.5];
        assert!(run_sweep(&spec).is_err());
        spec.p_grid = vec![0.5];
        spec.rounds.clear();
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn csv_dashes_for_all_empty_rows() {
        let table = RoundTable {
            rounds: 8,
            rows: vec![SummaryRow {
                p: 0.0,
                successes: 0,
                wrong: 0,
                empty: 100,
                avg_distance: None,
                max_distance: None,
                pooled_avg_distance: None,
                singletons: 0,
                errors: 0,
            }],
            histograms: vec![DistanceHistogram::default()],
        };
        assert_eq!(
            table.to_csv(),
            "p,successes,wrong,empty,avg_distance,max_distance\n0.00,0,0,100,-,-\n"
        );
    }

    #[test]
    fn histogram_text() {
        let h = DistanceHistogram {
            counts: BTreeMap::from([(0, 5), (2, 1)]),
        };
        assert_eq!(h.to_text(0.5, 8), "# p=0.50 t=8\n# distance count\n0 5\n2 1\n");
        assert_eq!(h.mass_beyond(0), 1);
        assert_eq!(h.max_distance(), Some(2));
    }
}
