//! Minimum-latency routing on a single snapshot, plus the stale-path stretch
//! measurements used to reason about routing across slot boundaries.
//!
//! Ties between equal-latency paths are broken by the lexicographically
//! smallest node-id sequence. The rule is exact for strictly positive edge
//! delays; with zero-delay edges it is best effort.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::constellation::NodeId;
use crate::error::{Error, Result};

/// Undirected graph with non-negative per-edge delays (ms).
pub trait WeightedGraph {
    fn node_count(&self) -> usize;

    fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_;

    /// Smallest delay among edges joining `a` and `b`.
    fn edge_delay(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.neighbors(a)
            .filter(|(u, _)| *u == b)
            .map(|(_, w)| w)
            .min_by(f64::total_cmp)
    }
}

/// Plain adjacency-list graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DelayGraph {
    adj: Vec<Vec<(NodeId, f64)>>,
}

impl DelayGraph {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId, delay: f64) {
        self.adj[a.index()].push((b, delay));
        self.adj[b.index()].push((a, delay));
    }

    /// Undirected edge list, each edge once with `a < b`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out = Vec::new();
        for (a, list) in self.adj.iter().enumerate() {
            for &(b, w) in list {
                if (a as u32) < b.0 {
                    out.push((NodeId(a as u32), b, w));
                }
            }
        }
        out
    }

    /// Copy of the graph with every edge delay replaced by `f(a, b, delay)`.
    pub fn map_delays(&self, mut f: impl FnMut(NodeId, NodeId, f64) -> f64) -> DelayGraph {
        let mut g = DelayGraph::new(self.adj.len());
        for (a, b, w) in self.edges() {
            g.add_edge(a, b, f(a, b, w));
        }
        g
    }
}

impl WeightedGraph for DelayGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.adj[v.index()].iter().copied()
    }
}

/// Minimum-latency path within one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub slot: usize,
    pub nodes: Vec<NodeId>,
    pub total_latency: f64,
}

impl PathResult {
    pub fn hop_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

const NONE: u32 = u32::MAX;

/// Shortest-path tree from one or more weighted sources.
#[derive(Debug, Clone)]
pub struct PathTree {
    dist: Vec<f64>,
    prev: Vec<u32>,
}

impl PathTree {
    pub fn latency(&self, v: NodeId) -> Option<f64> {
        let d = self.dist[v.index()];
        d.is_finite().then_some(d)
    }

    pub fn reachable(&self, v: NodeId) -> bool {
        self.dist[v.index()].is_finite()
    }

    /// Predecessor of `v`, `None` for roots and unreachable nodes.
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.prev[v.index()];
        (p != NONE).then_some(NodeId(p))
    }

    /// Node sequence from the root to `v`.
    pub fn path_to(&self, v: NodeId) -> Option<Vec<NodeId>> {
        if !self.reachable(v) {
            return None;
        }
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Some(out)
    }

    /// Root whose subtree contains `v`.
    pub fn root_of(&self, v: NodeId) -> Option<NodeId> {
        if !self.reachable(v) {
            return None;
        }
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            cur = p;
        }
        Some(cur)
    }

    fn lex_cmp(&self, a: u32, b: u32) -> Ordering {
        let walk = |mut v: u32| {
            let mut seq = Vec::new();
            while v != NONE {
                seq.push(v);
                v = self.prev[v as usize];
            }
            seq.reverse();
            seq
        };
        walk(a).cmp(&walk(b))
    }
}

fn check_node<G: WeightedGraph>(g: &G, v: NodeId) -> Result<()> {
    if v.index() >= g.node_count() {
        return Err(Error::contract(format!("node {v} is not in the graph")));
    }
    Ok(())
}

fn dijkstra<G: WeightedGraph>(g: &G, sources: &[(NodeId, f64)], target: Option<NodeId>) -> Result<PathTree> {
    let n = g.node_count();
    let mut tree = PathTree {
        dist: vec![f64::INFINITY; n],
        prev: vec![NONE; n],
    };
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut sorted: Vec<(NodeId, f64)> = sources.to_vec();
    sorted.sort_by_key(|(v, _)| *v);
    for &(v, d0) in &sorted {
        check_node(g, v)?;
        if !(d0 >= 0.0) {
            return Err(Error::contract(format!("negative start offset at node {v}")));
        }
        if d0 < tree.dist[v.index()] {
            tree.dist[v.index()] = d0;
            heap.push(Reverse((Key(d0), v.0)));
        }
    }
    if let Some(t) = target {
        check_node(g, t)?;
    }
    while let Some(Reverse((Key(d), x))) = heap.pop() {
        let xi = x as usize;
        if done[xi] || d > tree.dist[xi] {
            continue;
        }
        done[xi] = true;
        if target == Some(NodeId(x)) {
            break;
        }
        for (v, w) in g.neighbors(NodeId(x)) {
            if !(w >= 0.0) {
                return Err(Error::contract(format!("edge {x}-{v} has negative or NaN delay {w}")));
            }
            let vi = v.index();
            if done[vi] {
                continue;
            }
            let alt = d + w;
            let better = alt < tree.dist[vi]
                || (alt == tree.dist[vi] && tree.prev[vi] != NONE && tree.lex_cmp(x, tree.prev[vi]) == Ordering::Less);
            if better {
                tree.dist[vi] = alt;
                tree.prev[vi] = x;
                heap.push(Reverse((Key(alt), v.0)));
            }
        }
    }
    Ok(tree)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Full shortest-path tree from `start`.
pub fn shortest_path_tree<G: WeightedGraph>(g: &G, start: NodeId) -> Result<PathTree> {
    dijkstra(g, &[(start, 0.0)], None)
}

/// Shortest-path forest grown from several sources at once, each starting
/// at the given latency offset.
pub fn multi_source_tree<G: WeightedGraph>(g: &G, sources: &[(NodeId, f64)]) -> Result<PathTree> {
    dijkstra(g, sources, None)
}

/// Exact minimum-latency path from `start` to `end`; `Ok(None)` when `end`
/// is unreachable.
pub fn ospc<G: WeightedGraph>(g: &G, slot: usize, start: NodeId, end: NodeId) -> Result<Option<PathResult>> {
    check_node(g, start)?;
    check_node(g, end)?;
    let tree = dijkstra(g, &[(start, 0.0)], Some(end))?;
    Ok(tree.path_to(end).map(|nodes| PathResult {
        slot,
        total_latency: tree.dist[end.index()],
        nodes,
    }))
}

/// Latency of an explicit node sequence, `None` if an edge is missing.
pub fn path_latency<G: WeightedGraph>(g: &G, path: &[NodeId]) -> Option<f64> {
    let mut total = 0.0;
    for w in path.windows(2) {
        total += g.edge_delay(w[0], w[1])?;
    }
    Some(total)
}

/// Upper bound `1 + h * epsilon / opt_next` on the stretch of a stale path.
pub fn stretch_bound(hops: usize, epsilon: f64, opt_next: f64) -> Result<f64> {
    if !(opt_next > 0.0) {
        return Err(Error::contract("optimal next-slot latency must be > 0"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::contract("drift bound must be >= 0"));
    }
    if hops == 0 {
        return Err(Error::contract("hop count must be >= 1"));
    }
    Ok(1.0 + hops as f64 * epsilon / opt_next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stretch {
    /// `L^{t+1}(stale) / L^{t+1}(optimal)`, together with the optimum.
    Ratio { sigma: f64, stale: f64, optimal: f64, optimal_hops: usize },
    /// An edge of the stale path is gone in the next snapshot.
    Infeasible,
}

/// Stretch of `stale_path`, computed in the previous snapshot, when reused in `next`.
pub fn empirical_stretch<G: WeightedGraph>(next: &G, stale_path: &[NodeId]) -> Result<Stretch> {
    let (&start, &end) = match (stale_path.first(), stale_path.last()) {
        (Some(s), Some(e)) => (s, e),
        _ => return Err(Error::contract("empty stale path")),
    };
    let Some(stale) = path_latency(next, stale_path) else {
        return Ok(Stretch::Infeasible);
    };
    let best = ospc(next, 0, start, end)?.expect("stale path proves reachability");
    let sigma = if best.total_latency == 0.0 {
        1.0
    } else {
        stale / best.total_latency
    };
    Ok(Stretch::Ratio {
        sigma,
        stale,
        optimal: best.total_latency,
        optimal_hops: best.hop_count(),
    })
}
