//! Random graph models: Erdős–Rényi, erased configuration model with constant
//! degree, and random geometric graphs on the unit torus.
//!
//! Every generator has a seeded entry point and an `*_with_rng` form that
//! draws from a caller-supplied stream, so experiment runs can derive one
//! graph per run from their own stream.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId};
use crate::rng::SimRng;

/// Network family without a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    ErdosRenyi { n: usize, avg_degree: f64 },
    ConfigRegular { n: usize, d: usize },
    Geometric { n: usize, expected_degree: f64 },
}

impl GraphModel {
    pub fn validate(&self) -> Result<(), GraphError> {
        match *self {
            GraphModel::ErdosRenyi { n, avg_degree } => er_edge_probability(n, avg_degree).map(|_| ()),
            GraphModel::ConfigRegular { n, d } => check_regular(n, d),
            GraphModel::Geometric { n, expected_degree } => {
                geometric_radius(n, expected_degree).map(|_| ())
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GraphModel::ErdosRenyi { n, .. }
            | GraphModel::ConfigRegular { n, .. }
            | GraphModel::Geometric { n, .. } => n,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph, GraphError> {
        match *self {
            GraphModel::ErdosRenyi { n, avg_degree } => erdos_renyi_with_rng(n, avg_degree, rng),
            GraphModel::ConfigRegular { n, d } => config_regular_with_rng(n, d, rng),
            GraphModel::Geometric { n, expected_degree } => {
                geometric_with_rng(n, expected_degree, rng)
            }
        }
    }
}

/// A network family together with the seed that fixes its instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub model: GraphModel,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Graph, GraphError> {
        self.model.generate(&mut SimRng::seed_from_u64(self.seed))
    }
}

pub fn gen_erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Graph, GraphError> {
    erdos_renyi_with_rng(n, avg_degree, &mut SimRng::seed_from_u64(seed))
}

pub fn gen_config_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    config_regular_with_rng(n, d, &mut SimRng::seed_from_u64(seed))
}

pub fn gen_geometric(n: usize, expected_degree: f64, seed: u64) -> Result<Graph, GraphError> {
    geometric_with_rng(n, expected_degree, &mut SimRng::seed_from_u64(seed))
}

fn invalid(msg: impl Into<String>) -> GraphError {
    GraphError::InvalidParameter(msg.into())
}

/// Pair probability `avg_degree / (n - 1)`, which makes the expected degree exact.
fn er_edge_probability(n: usize, avg_degree: f64) -> Result<f64, GraphError> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !avg_degree.is_finite() || avg_degree < 0.0 || avg_degree > (n - 1) as f64 {
        return Err(invalid(format!(
            "average degree {avg_degree} must lie in [0, n-1] for n = {n}"
        )));
    }
    Ok(if n == 1 { 0.0 } else { avg_degree / (n - 1) as f64 })
}

/// G(n, p) by geometric skipping over the lower triangle (Batagelj & Brandes),
/// O(n + m) expected time.
pub(crate) fn erdos_renyi_with_rng<R: Rng + ?Sized>(
    n: usize,
    avg_degree: f64,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    let p = er_edge_probability(n, avg_degree)?;
    if p <= 0.0 {
        return Ok(Graph::empty(n));
    }
    let mut edges: Vec<(NodeId, NodeId)> =
        Vec::with_capacity((p * (n as f64) * (n as f64 - 1.0) / 2.0 * 1.1) as usize + 16);
    if p >= 1.0 {
        for v in 1..n {
            edges.extend((0..v).map(|w| (w, v)));
        }
        return Ok(Graph::from_edges_simplified(n, edges));
    }
    let log_q = (1.0 - p).ln();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    Ok(Graph::from_edges_simplified(n, edges))
}

fn check_regular(n: usize, d: usize) -> Result<(), GraphError> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if d >= n && !(d == 0 && n == 1) {
        return Err(invalid(format!("degree {d} must be smaller than n = {n}")));
    }
    if (n * d) % 2 != 0 {
        return Err(invalid(format!("n * d = {} must be even", n * d)));
    }
    Ok(())
}

/// Configuration model: uniform perfect matching of `n * d` half-edges, then
/// self-loops and parallel edges are erased.
pub(crate) fn config_regular_with_rng<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    check_regular(n, d)?;
    let mut stubs: Vec<NodeId> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    stubs.shuffle(rng);
    let pairs = stubs.chunks_exact(2).map(|c| (c[0], c[1]));
    Ok(Graph::from_edges_simplified(n, pairs))
}

/// Connection radius with `pi r^2 (n - 1) = expected_degree`.
fn geometric_radius(n: usize, expected_degree: f64) -> Result<f64, GraphError> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !expected_degree.is_finite() || expected_degree < 0.0 {
        return Err(invalid("expected degree must be a finite non-negative number"));
    }
    if n == 1 {
        return if expected_degree == 0.0 {
            Ok(0.0)
        } else {
            Err(invalid("a single node cannot have positive expected degree"))
        };
    }
    if expected_degree >= n as f64 {
        return Err(invalid(format!(
            "expected degree {expected_degree} must be smaller than n = {n}"
        )));
    }
    let r = (expected_degree / (PI * (n - 1) as f64)).sqrt();
    if r > 0.5 {
        return Err(invalid(format!(
            "expected degree {expected_degree} needs radius {r:.3} > 1/2 on the unit torus"
        )));
    }
    Ok(r)
}

#[inline]
fn torus_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Random geometric graph on the 2-dimensional unit torus, bucketed into a
/// grid whose cells are at least `r` wide.
pub(crate) fn geometric_with_rng<R: Rng + ?Sized>(
    n: usize,
    expected_degree: f64,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    let r = geometric_radius(n, expected_degree)?;
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    if r == 0.0 {
        return Ok(Graph::empty(n));
    }
    let side = ((1.0 / r).floor() as usize).clamp(1, (n as f64).sqrt().ceil() as usize + 1);
    let cell_of = |x: f64| ((x * side as f64) as usize).min(side - 1);

    let mut cell_start = vec![0usize; side * side + 1];
    let cells: Vec<usize> = points
        .iter()
        .map(|&(x, y)| cell_of(x) * side + cell_of(y))
        .collect();
    for &c in &cells {
        cell_start[c + 1] += 1;
    }
    for c in 0..side * side {
        cell_start[c + 1] += cell_start[c];
    }
    let mut fill = cell_start.clone();
    let mut members = vec![0usize; n];
    for (v, &c) in cells.iter().enumerate() {
        members[fill[c]] = v;
        fill[c] += 1;
    }

    let r2 = r * r;
    let mut edges = Vec::with_capacity((expected_degree * n as f64 * 0.55) as usize + 16);
    let mut neighborhood = Vec::with_capacity(9);
    for (u, &(ux, uy)) in points.iter().enumerate() {
        let (cx, cy) = (cells[u] / side, cells[u] % side);
        neighborhood.clear();
        for dx in [side - 1, 0, 1] {
            for dy in [side - 1, 0, 1] {
                neighborhood.push(((cx + dx) % side) * side + (cy + dy) % side);
            }
        }
        // small grids wrap onto themselves
        neighborhood.sort_unstable();
        neighborhood.dedup();
        for &c in &neighborhood {
            for &v in &members[cell_start[c]..cell_start[c + 1]] {
                if v <= u {
                    continue;
                }
                let (vx, vy) = points[v];
                let (dx, dy) = (torus_delta(ux, vx), torus_delta(uy, vy));
                if dx * dx + dy * dy <= r2 {
                    edges.push((u, v));
                }
            }
        }
    }
    Ok(Graph::from_edges_simplified(n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_symmetric_simple(g: &Graph) {
        for u in 0..g.node_count() {
            let nbrs = g.neighbors(u);
            assert!(nbrs.windows(2).all(|w| w[0] < w[1]), "sorted, no multi-edges");
            for &v in nbrs {
                assert_ne!(u, v);
                assert!(g.has_edge(v, u), "asymmetric edge {u}-{v}");
            }
        }
    }

    #[test]
    fn er_single_node_has_no_edges() {
        let g = gen_erdos_renyi(1, 0.0, 7).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn er_rejects_bad_degree() {
        assert!(gen_erdos_renyi(10, 9.5, 1).is_err());
        assert!(gen_erdos_renyi(10, -1.0, 1).is_err());
        assert!(gen_erdos_renyi(0, 0.0, 1).is_err());
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        // m ~ Bin(n(n-1)/2, 4/(n-1)): mean 2000, var = 2000 (1 - 4/999)
        let g = gen_erdos_renyi(1000, 4.0, 3).unwrap();
        let pairs: f64 = 1000.0 * 999.0 / 2.0;
        let q = 4.0 / 999.0;
        let sigma = (pairs * q * (1.0 - q)).sqrt();
        assert!((g.edge_count() as f64 - 2000.0).abs() <= 3.0 * sigma);
        assert_symmetric_simple(&g);
    }

    #[test]
    fn er_complete_when_degree_is_n_minus_one() {
        let g = gen_erdos_renyi(6, 5.0, 2).unwrap();
        assert_eq!(g.edge_count(), 15);
    }

    #[test]
    fn config_model_small_cases() {
        let g = gen_config_regular(2, 1, 5).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        for seed in 0..50 {
            let g = gen_config_regular(4, 2, seed).unwrap();
            assert_symmetric_simple(&g);
            assert!((0..4).all(|v| g.degree(v) <= 2));
            // max degree two means a disjoint union of paths and cycles:
            // every component has at most as many edges as nodes
            assert!(g.edge_count() <= 4);
        }
        assert!(gen_config_regular(3, 1, 1).is_err());
        assert!(gen_config_regular(4, 4, 1).is_err());
    }

    #[test]
    fn geometric_small_cases() {
        let g = gen_geometric(1, 0.0, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(gen_geometric(10, 9.0, 1).is_err(), "radius above 1/2");
        let g = gen_geometric(500, 6.0, 1).unwrap();
        assert_symmetric_simple(&g);
    }

    #[test]
    fn geometric_grid_agrees_with_all_pairs() {
        for seed in 0..5 {
            let n = 400;
            let deg = 5.0;
            let g = gen_geometric(n, deg, seed).unwrap();
            let mut rng = SimRng::seed_from_u64(seed);
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
            let r = (deg / (PI * (n - 1) as f64)).sqrt();
            let mut expected = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let dx = torus_delta(pts[u].0, pts[v].0);
                    let dy = torus_delta(pts[u].1, pts[v].1);
                    if dx * dx + dy * dy <= r * r {
                        expected.push((u, v));
                    }
                }
            }
            assert_eq!(g.edges().collect::<Vec<_>>(), expected);
        }
    }

    #[test]
    fn geometric_mean_degree_within_three_sigma() {
        // each node's degree is Bin(n-1, pi r^2) = Bin(n-1, 16/(n-1)); the mean
        // over n nodes counts every edge twice, so the variance of the mean is
        // 2 * 16 (1 - q) / n
        let n = 2000;
        let g = gen_geometric(n, 16.0, 4).unwrap();
        let q = 16.0 / (n - 1) as f64;
        let sigma = (2.0 * 16.0 * (1.0 - q) / n as f64).sqrt();
        assert!((g.mean_degree() - 16.0).abs() <= 3.0 * sigma, "{}", g.mean_degree());
    }

    #[test]
    fn determinism_per_seed() {
        for model in [
            GraphModel::ErdosRenyi { n: 300, avg_degree: 4.0 },
            GraphModel::ConfigRegular { n: 300, d: 4 },
            GraphModel::Geometric { n: 300, expected_degree: 8.0 },
        ] {
            let a = GeneratorSpec { model, seed: 11 }.generate().unwrap();
            let b = GeneratorSpec { model, seed: 11 }.generate().unwrap();
            let c = GeneratorSpec { model, seed: 12 }.generate().unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }
}
