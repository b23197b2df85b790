#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rumor_source::cascade::{simulate, simulate_with, CascadeParams};
use rumor_source::tree_sim::ActivationTree;
use rumor_source::{stream_rng, Graph, NodeId};

/// Plain single-source BFS; `u32::MAX` for unreachable nodes.
pub fn naive_bfs(g: &Graph, s: NodeId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.node_count()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Multi-source Dijkstra with unit weights.
pub fn dijkstra(g: &Graph, sources: &[NodeId]) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.node_count()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0;
        heap.push(Reverse((0u32, s)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &v in g.neighbors(u) {
            if d + 1 < dist[v] {
                dist[v] = d + 1;
                heap.push(Reverse((d + 1, v)));
            }
        }
    }
    dist
}

/// Connected random graph: a random spanning tree plus `extra` random chords.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = stream_rng(seed, 0);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Graph::from_edges(n, &edges).unwrap()
}

/// Random labelled tree on `n` nodes (random attachment).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    random_connected(n, 0, seed)
}

/// 3-sigma half-width of a binomial frequency estimate.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Fraction of branching processes started from one individual that die out
/// within `generations`, offspring drawn by `offspring(parents, rng)`.
/// A population above `ceiling` counts as surviving; its extinction chance
/// is below `q^ceiling`.
pub fn branching_extinction<F>(runs: u64, generations: u32, ceiling: u64, seed: u64, mut offspring: F) -> f64
where
    F: FnMut(u64, &mut rumor_source::SimRng) -> u64,
{
    let mut rng = stream_rng(seed, 0);
    let mut died = 0u64;
    for _ in 0..runs {
        let mut size = 1u64;
        for _ in 0..generations {
            size = offspring(size, &mut rng);
            if size == 0 || size > ceiling {
                break;
            }
        }
        if size == 0 {
            died += 1;
        }
    }
    died as f64 / runs as f64
}

/// Minimum over all nodes of the largest distance to `active`, and its argmin set.
pub fn brute_force_center(g: &Graph, active: &[NodeId]) -> (u32, Vec<NodeId>) {
    let rows: Vec<Vec<u32>> = active.iter().map(|&u| naive_bfs(g, u)).collect();
    let ecc: Vec<u32> = (0..g.node_count())
        .map(|v| rows.iter().map(|r| r[v]).max().unwrap())
        .collect();
    let best = *ecc.iter().min().unwrap();
    (best, (0..g.node_count()).filter(|&v| ecc[v] == best).collect())
}

pub fn ball_intersection_is_empty(g: &Graph, active: &[NodeId], radius: u32) -> bool {
    let rows: Vec<Vec<u32>> = active.iter().map(|&u| naive_bfs(g, u)).collect();
    (0..g.node_count()).all(|v| rows.iter().any(|r| r[v] > radius))
}

/// Nodes of the connected component containing `v`.
pub fn component_of(g: &Graph, v: NodeId) -> Vec<NodeId> {
    let d = naive_bfs(g, v);
    (0..g.node_count()).filter(|&u| d[u] != u32::MAX).collect()
}

/// Likelihood by walking every sequence of attempt outcomes the cascade can ask for.
pub fn enumerate_attempts(g: &Graph, target: &[NodeId], v: NodeId, p: f64, rounds: u32) -> f64 {
    let mut target = target.to_vec();
    target.sort_unstable();
    let mut total = 0.0;
    let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let mut asked = 0;
        let mut overflow = false;
        let snap = simulate_with(g, v, rounds, |_, _| {
            let outcome = if asked < prefix.len() {
                prefix[asked]
            } else {
                overflow = true;
                false
            };
            asked += 1;
            outcome
        })
        .unwrap();
        if overflow {
            for bit in [false, true] {
                let mut longer = prefix.clone();
                longer.push(bit);
                stack.push(longer);
            }
        } else if snap.active == target {
            total += prefix.iter().map(|&hit| if hit { p } else { 1.0 - p }).product::<f64>();
        }
    }
    total
}

/// Small instances: (graph, target, p, rounds).
pub fn likelihood_suite() -> Vec<(Graph, Vec<NodeId>, f64, u32)> {
    let mut cases = Vec::new();
    for n in 3..=8 {
        for g in [Graph::path(n), Graph::cycle(n), Graph::star(n - 1)] {
            for (i, &p) in [0.3, 0.5, 0.8].iter().enumerate() {
                let t = 1 + (i as u32 + n as u32) % 2;
                // a target drawn as the frontier of an actual cascade keeps the suite feasible
                let mut rng = stream_rng(n as u64, i as u64);
                let src = (n * 7 + i) % n;
                let snap = simulate(&g, src, &CascadeParams::new(p, t).unwrap(), &mut rng).unwrap();
                cases.push((g.clone(), snap.active, p, t));
            }
        }
    }
    cases
}

pub fn tree_distance(tree: &ActivationTree, mut a: usize, mut b: usize) -> u32 {
    let mut hops = 0;
    while a != b {
        if tree.depth(a) >= tree.depth(b) {
            a = tree.parent(a).unwrap();
        } else {
            b = tree.parent(b).unwrap();
        }
        hops += 1;
    }
    hops
}

/// Node equidistant to the whole frontier with the smallest common distance,
/// searched over every materialized node and one never-activated child of
/// each, or `None` when there is no unique such node.
pub fn brute_force_meeting_point(tree: &ActivationTree) -> Option<usize> {
    let frontier: Vec<usize> = tree.frontier().collect();
    let mut best: Option<(u32, usize)> = None;
    let mut ties = 0;
    for u in 0..tree.node_count() {
        let d: Vec<u32> = frontier.iter().map(|&f| tree_distance(tree, u, f)).collect();
        if d.iter().any(|&x| x != d[0]) {
            continue;
        }
        // u itself, then its virtual child one hop further from every frontier node
        for (common, node) in [(d[0], Some(u)), (d[0] + 1, None)] {
            match best {
                Some((b, _)) if common > b => {}
                Some((b, _)) if common == b => ties += 1,
                _ => {
                    best = Some((common, node.unwrap_or(usize::MAX)));
                    ties = 0;
                }
            }
        }
    }
    match best {
        Some((_, node)) if ties == 0 && node != usize::MAX => Some(node),
        _ => None,
    }
}

pub fn check_tree_structure(tree: &ActivationTree) {
    for v in 1..tree.node_count() {
        let parent = tree.parent(v).unwrap();
        assert_eq!(tree.depth(v), tree.depth(parent) + 1);
        assert!(tree.children(parent).contains(&v));
    }
    for v in tree.frontier() {
        assert_eq!(tree.depth(v), tree.rounds);
    }
    let deepest = (0..tree.node_count()).map(|v| tree.depth(v)).max().unwrap();
    assert!(deepest <= tree.rounds);
    let at_t = (0..tree.node_count()).filter(|&v| tree.depth(v) == tree.rounds).count();
    assert_eq!(at_t, tree.frontier().len());
}
