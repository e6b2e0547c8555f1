//! How users in each region reach the network in one slot, and what it
//! costs in latency and transfer energy to serve them from a given node.
//!
//! Users of a region sit at its centre. They attach to the nearest visible
//! constellation satellite; when none is visible, or the scheme is
//! ground-only, they reach the nearest ground node over terrestrial access.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::caching::audit::{Assignment, Tier};
use crate::caching::{CostParams, PlacementState};
use crate::constellation::{NodeId, NodeKind, NodeRecord, RegionGrid, RegionId};
use crate::demand::ContentId;
use crate::error::{Error, Result};
use crate::geo::{elevation_deg, LIGHT_KM_PER_MS};
use crate::linkmodel::LatencyParams;
use crate::routing::{multi_source_tree, shortest_path_tree, PathTree};
use crate::topology::{LinkKind, SnapshotGraph};

/// Terrestrial last-hop model for users without satellite access.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerrestrialAccess {
    /// Route length over great-circle distance.
    pub route_inflation: f64,
    /// Signal speed in fiber as a fraction of c.
    pub fiber_factor: f64,
    pub last_mile_ms: f64,
}

impl Default for TerrestrialAccess {
    fn default() -> Self {
        Self {
            route_inflation: 1.6,
            fiber_factor: 0.67,
            last_mile_ms: 5.0,
        }
    }
}

impl TerrestrialAccess {
    pub fn validate(&self) -> Result<()> {
        if !(self.route_inflation >= 1.0) {
            return Err(Error::config("access.route_inflation", "must be >= 1"));
        }
        if !(self.fiber_factor > 0.0 && self.fiber_factor <= 1.0) {
            return Err(Error::config("access.fiber_factor", "must lie in (0, 1]"));
        }
        if !(self.last_mile_ms >= 0.0) {
            return Err(Error::config("access.last_mile_ms", "must be >= 0"));
        }
        Ok(())
    }

    pub fn latency_ms(&self, great_circle_km: f64) -> f64 {
        great_circle_km * self.route_inflation / (self.fiber_factor * LIGHT_KM_PER_MS) + self.last_mile_ms
    }
}

/// Bits per second available on each link class in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughputs {
    pub isl_bps: f64,
    pub gsl_bps: f64,
    pub igl_bps: f64,
}

impl Throughputs {
    pub fn of(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::Isl => self.isl_bps,
            LinkKind::Gsl => self.gsl_bps,
            LinkKind::Igl => self.igl_bps,
        }
    }

    fn bottleneck(&self, mask: u8) -> f64 {
        [LinkKind::Isl, LinkKind::Gsl, LinkKind::Igl]
            .into_iter()
            .filter(|k| mask & bit(*k) != 0)
            .map(|k| self.of(k))
            .fold(f64::INFINITY, f64::min)
    }
}

fn bit(kind: LinkKind) -> u8 {
    match kind {
        LinkKind::Isl => 1,
        LinkKind::Gsl => 2,
        LinkKind::Igl => 4,
    }
}

/// Where a region's users enter the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Access {
    pub node: NodeId,
    pub latency_ms: f64,
    /// Link class of the user hop (GSL for satellite access, IGL for terrestrial).
    pub kind: LinkKind,
}

/// Shortest-path tree from an access node with per-node link-class masks
/// and accumulated per-MB transfer coefficients.
#[derive(Debug, Clone)]
struct AccessTree {
    tree: PathTree,
    mask: Vec<u8>,
    coef: Vec<f64>,
}

impl AccessTree {
    fn new(graph: &SnapshotGraph, tree: PathTree, cost: &CostParams) -> Self {
        let n = graph.positions.len();
        let mut order: Vec<(f64, u32)> = (0..n as u32)
            .filter_map(|v| tree.latency(NodeId(v)).map(|d| (d, v)))
            .collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut mask = vec![0u8; n];
        let mut coef = vec![0.0; n];
        for &(_, v) in &order {
            let v = NodeId(v);
            if let Some(p) = tree.parent(v) {
                let link = graph.link(p, v).expect("tree edge is a link");
                mask[v.index()] = mask[p.index()] | bit(link.kind);
                coef[v.index()] = coef[p.index()] + cost.transfer(link.kind);
            }
        }
        Self { tree, mask, coef }
    }
}

/// Which part of the network a scheme may use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewOptions {
    /// Restrict to ground nodes and inter-ground links.
    pub ground_only: bool,
    /// Kind of node holding the full library.
    pub origin_kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceParams {
    pub latency: LatencyParams,
    pub terrestrial: TerrestrialAccess,
    pub min_elevation_deg: f64,
}

/// One slot as seen by one scheme.
#[derive(Debug, Clone)]
pub struct SlotView {
    pub slot: usize,
    pub graph: SnapshotGraph,
    pub access: Vec<Access>,
    pub origins: Vec<NodeId>,
    pub throughputs: Throughputs,
    pub latency: LatencyParams,
    region_tree: Vec<usize>,
    trees: Vec<AccessTree>,
    origin_tree: AccessTree,
    fallback: Vec<(NodeId, f64)>,
}

impl SlotView {
    pub fn build(
        snapshot: &SnapshotGraph,
        nodes: &[NodeRecord],
        grid: &RegionGrid,
        options: ViewOptions,
        params: &ServiceParams,
        throughputs: Throughputs,
        cost: &CostParams,
    ) -> Result<Self> {
        let graph = if options.ground_only {
            let igl = snapshot.links().iter().filter(|l| l.kind == LinkKind::Igl).copied().collect();
            SnapshotGraph::new(snapshot.slot, snapshot.positions.clone(), igl)
        } else {
            snapshot.clone()
        };
        let ground: Vec<&NodeRecord> = nodes.iter().filter(|n| n.kind.is_ground()).collect();
        let gdcs: Vec<&NodeRecord> = nodes.iter().filter(|n| n.kind == NodeKind::GroundDataCenter).collect();
        let sats: Vec<&NodeRecord> = nodes.iter().filter(|n| n.kind == NodeKind::Satellite).collect();
        let nearest_ground = |pool: &[&NodeRecord], at: crate::geo::GeoPoint| {
            pool.iter()
                .map(|n| (at.great_circle_km(n.site().expect("ground")), n.id))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
        };

        let mut access = Vec::with_capacity(grid.len());
        let mut fallback = Vec::with_capacity(grid.len());
        for a in grid.regions() {
            let center = grid.center(a);
            let user = center.to_ecef(0.0);
            let by_sat = if options.ground_only {
                None
            } else {
                sats.iter()
                    .map(|s| (s.id, graph.positions[s.id.index()]))
                    .filter(|(_, p)| elevation_deg(user, *p) >= params.min_elevation_deg)
                    .map(|(id, p)| (user.distance(p), id))
                    .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            };
            let acc = match by_sat {
                Some((d, s)) => Access {
                    node: s,
                    latency_ms: params.latency.propagation_ms(d),
                    kind: LinkKind::Gsl,
                },
                None => {
                    let (d, g) = nearest_ground(&ground, center)
                        .ok_or_else(|| Error::config("ground", "no ground node for terrestrial access"))?;
                    Access {
                        node: g,
                        latency_ms: params.terrestrial.latency_ms(d),
                        kind: LinkKind::Igl,
                    }
                }
            };
            access.push(acc);
            fallback.push(match nearest_ground(&gdcs, center) {
                Some((d, g)) => (g, params.terrestrial.latency_ms(d)),
                None => (acc.node, f64::INFINITY),
            });
        }

        let mut index: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut trees = Vec::new();
        let mut region_tree = Vec::with_capacity(access.len());
        for acc in &access {
            let k = match index.get(&acc.node) {
                Some(&k) => k,
                None => {
                    let tree = shortest_path_tree(&graph, acc.node)?;
                    trees.push(AccessTree::new(&graph, tree, cost));
                    index.insert(acc.node, trees.len() - 1);
                    trees.len() - 1
                }
            };
            region_tree.push(k);
        }

        let origins: Vec<NodeId> = nodes.iter().filter(|n| n.kind == options.origin_kind).map(|n| n.id).collect();
        let sources: Vec<(NodeId, f64)> = origins.iter().map(|&o| (o, 0.0)).collect();
        let origin_tree = AccessTree::new(&graph, multi_source_tree(&graph, &sources)?, cost);
        Ok(Self {
            slot: snapshot.slot,
            graph,
            access,
            origins,
            throughputs,
            latency: params.latency,
            region_tree,
            trees,
            origin_tree,
            fallback,
        })
    }

    fn tree(&self, a: RegionId) -> &AccessTree {
        &self.trees[self.region_tree[a.index()]]
    }

    /// Delivery latency (ms) of a `size_mb` item from `v` to region `a`'s users.
    pub fn latency(&self, a: RegionId, v: NodeId, size_mb: f64) -> Option<f64> {
        let t = self.tree(a);
        let dist = t.tree.latency(v)?;
        let acc = self.access[a.index()];
        let bps = self.throughputs.bottleneck(t.mask[v.index()] | bit(acc.kind));
        Some(self.latency.transmission_ms(size_mb, bps) + acc.latency_ms + dist)
    }

    /// Summed per-MB transfer coefficient on the path from `v` to the access node.
    pub fn delivery_coef(&self, a: RegionId, v: NodeId) -> Option<f64> {
        let t = self.tree(a);
        t.tree.reachable(v).then(|| t.coef[v.index()])
    }

    /// Node sequence from the access node to `v`.
    pub fn delivery_path(&self, a: RegionId, v: NodeId) -> Option<Vec<NodeId>> {
        self.tree(a).tree.path_to(v)
    }

    /// Minimum-latency origin for region `a` (ties to the lower id).
    pub fn nearest_origin(&self, a: RegionId) -> Option<NodeId> {
        let t = self.tree(a);
        self.origins
            .iter()
            .filter_map(|&o| t.tree.latency(o).map(|d| (d, o)))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, o)| o)
    }

    /// Path from the closest origin to `v`, used to fill a cache.
    pub fn fill_path(&self, v: NodeId) -> Option<Vec<NodeId>> {
        self.origin_tree.tree.path_to(v)
    }

    pub fn fill_coef(&self, v: NodeId) -> Option<f64> {
        self.origin_tree
            .tree
            .reachable(v)
            .then(|| self.origin_tree.coef[v.index()])
    }

    /// Serves one demand cell: the anchor is the lowest-latency node among
    /// the origins and the tier-2/3 holders within `delta_ms`.
    #[allow(clippy::too_many_arguments)]
    pub fn serve(
        &self,
        a: RegionId,
        f: ContentId,
        size_mb: f64,
        requests: u32,
        holders: &[NodeId],
        kinds: &[NodeKind],
        delta_ms: f64,
    ) -> Assignment {
        let mut best: Option<(f64, NodeId, Tier)> = None;
        let mut consider = |l: f64, v: NodeId, tier: Tier| {
            if best.is_none_or(|(bl, bv, _)| l < bl || (l == bl && v < bv)) {
                best = Some((l, v, tier));
            }
        };
        for &o in &self.origins {
            if let Some(l) = self.latency(a, o, size_mb) {
                consider(l, o, Tier::Origin);
            }
        }
        for &v in holders {
            if let Some(l) = self.latency(a, v, size_mb) {
                if l <= delta_ms {
                    let tier = if kinds[v.index()] == NodeKind::GroundStation {
                        Tier::GroundStation
                    } else {
                        Tier::Satellite
                    };
                    consider(l, v, tier);
                }
            }
        }
        let (latency_ms, anchor, tier, fallback) = match best {
            Some((l, v, tier)) => (l, v, tier, false),
            None => {
                let (g, l) = self.fallback[a.index()];
                (l, g, Tier::Origin, true)
            }
        };
        Assignment {
            slot: self.slot,
            region: a,
            content: f,
            anchor,
            tier,
            latency_ms,
            requests,
            fallback,
        }
    }
}

/// Tier-2/3 holders per content at slot `t`.
pub fn holders_by_content(placement: &PlacementState, t: usize, contents: usize) -> Vec<Vec<NodeId>> {
    let mut out = vec![Vec::new(); contents];
    for (v, f) in placement.cached(t) {
        out[f.index()].push(v);
    }
    out
}
