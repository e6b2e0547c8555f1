//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod fixtures;

use std::collections::BTreeMap;

use orbcache::caching::{Candidate, PlacementProblem};
use orbcache::constellation::NodeId;
use orbcache::demand::ContentId;
use orbcache::routing::DelayGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive search over all subsets; returns the best feasible utility.
pub fn brute_force_utility(p: &PlacementProblem) -> f64 {
    let n = p.candidates.len();
    assert!(n <= 20);
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let picked: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if !p.feasible(&picked) {
            continue;
        }
        // facility-location utility, recomputed here independently
        let mut per_client: BTreeMap<usize, f64> = BTreeMap::new();
        let mut cost = 0.0;
        for &i in &picked {
            let c = &p.candidates[i];
            cost += c.cost;
            for &(k, g) in &c.gains {
                let e = per_client.entry(k).or_insert(0.0);
                if g > *e {
                    *e = g;
                }
            }
        }
        let u = per_client.values().sum::<f64>() - cost;
        if u > best {
            best = u;
        }
    }
    best
}

/// Random knapsack instance with at most `max_candidates` (node, content) pairs.
pub fn random_placement_problem(seed: u64, max_candidates: usize) -> PlacementProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rng.random_range(1..=4u32);
    let contents = rng.random_range(2..=5u32);
    let mut pairs: Vec<(u32, u32)> = (0..nodes).flat_map(|v| (0..contents).map(move |f| (v, f))).collect();
    // shuffle deterministically, keep a prefix
    for i in (1..pairs.len()).rev() {
        let j = rng.random_range(0..=i);
        pairs.swap(i, j);
    }
    let keep = rng.random_range(1..=max_candidates.min(pairs.len()));
    pairs.truncate(keep);
    pairs.sort();
    let clients = rng.random_range(1..=6usize);
    let sizes: Vec<f64> = (0..contents).map(|_| rng.random_range(0.2..2.0)).collect();
    let candidates = pairs
        .into_iter()
        .map(|(v, f)| {
            let k = rng.random_range(1..=clients.min(3));
            let mut gains: Vec<(usize, f64)> = (0..k).map(|_| (rng.random_range(0..clients), rng.random_range(0.0..10.0))).collect();
            gains.sort_by_key(|g| g.0);
            gains.dedup_by_key(|g| g.0);
            Candidate {
                node: NodeId(v),
                content: ContentId(f),
                size_mb: sizes[f as usize],
                cost: 0.0,
                gains,
            }
        })
        .collect();
    let capacity = (0..nodes).map(|v| (NodeId(v), rng.random_range(0.5..4.0))).collect();
    PlacementProblem::new(candidates, capacity)
}

/// Random connected graph on `n` nodes with delays in `[lo, hi]`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DelayGraph {
    let mut g = DelayGraph::new(n);
    for v in 1..n {
        let u = rng.random_range(0..v);
        g.add_edge(NodeId(u as u32), NodeId(v as u32), rng.random_range(lo..=hi));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.3) && !g.edges().iter().any(|&(x, y, _)| (x.index(), y.index()) == (a, b)) {
                g.add_edge(NodeId(a as u32), NodeId(b as u32), rng.random_range(lo..=hi));
            }
        }
    }
    g
}

/// Minimum latency from `s` to `t` over every simple path (depth-first enumeration).
pub fn brute_force_shortest(g: &DelayGraph, s: NodeId, t: NodeId) -> Option<f64> {
    fn walk(g: &DelayGraph, v: NodeId, t: NodeId, seen: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
        if v == t {
            if best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for (a, b, w) in g.edges() {
            let next = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[next.index()] {
                seen[next.index()] = true;
                walk(g, next, t, seen, acc + w, best);
                seen[next.index()] = false;
            }
        }
    }
    let mut seen = vec![false; g.edges().len() + 64];
    seen[s.index()] = true;
    let mut best = None;
    walk(g, s, t, &mut seen, 0.0, &mut best);
    best
}

pub struct DriftOutcome {
    pub sigma: f64,
    pub stale_hops: usize,
    pub optimal_hops: usize,
    pub optimal_next: f64,
    pub epsilon: f64,
}

/// Routes on a random graph, drifts every delay by at most `epsilon`
/// (uniformly, independently per edge) and measures the stale path's stretch.
pub fn drift_experiment(seed: u64, epsilon: f64) -> DriftOutcome {
    use orbcache::routing::{empirical_stretch, ospc, Stretch};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=8);
    let g = random_connected_graph(&mut rng, n, 2.0 * epsilon + 1.0, 10.0 * epsilon + 5.0);
    let (s, t) = (NodeId(0), NodeId(n as u32 - 1));
    let stale = ospc(&g, 0, s, t).unwrap().unwrap();
    let next = g.map_delays(|_, _, d| d + rng.random_range(-epsilon..=epsilon));
    match empirical_stretch(&next, &stale.nodes).unwrap() {
        Stretch::Ratio { sigma, optimal, optimal_hops, .. } => DriftOutcome {
            sigma,
            stale_hops: stale.hop_count(),
            optimal_hops,
            optimal_next: optimal,
            epsilon,
        },
        Stretch::Infeasible => unreachable!("drift keeps every edge"),
    }
}
