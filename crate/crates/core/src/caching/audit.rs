//! Checks a finished placement and its request assignments against the
//! single-anchor, link-feasibility, latency, capacity and redundancy rules.

use std::collections::BTreeMap;
use std::fmt;

use crate::caching::{ConstraintConfig, PlacementState};
use crate::constellation::{NodeId, RegionId};
use crate::demand::{ContentId, Library, RequestTensor};
use crate::topology::SnapshotGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Origin,
    Satellite,
    GroundStation,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Origin => "origin",
            Tier::Satellite => "satellite",
            Tier::GroundStation => "ground_station",
        }
    }
}

/// The node serving one (slot, region, content) demand cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub slot: usize,
    pub region: RegionId,
    pub content: ContentId,
    pub anchor: NodeId,
    pub tier: Tier,
    pub latency_ms: f64,
    pub requests: u32,
    /// No origin was reachable in the network; served terrestrially.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    SingleAnchor,
    LinkFeasibility,
    LatencyCeiling,
    Capacity,
    Redundancy,
}

impl Constraint {
    pub fn as_str(self) -> &'static str {
        match self {
            Constraint::SingleAnchor => "single-anchor",
            Constraint::LinkFeasibility => "link-feasibility",
            Constraint::LatencyCeiling => "latency-ceiling",
            Constraint::Capacity => "capacity",
            Constraint::Redundancy => "redundancy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub slot: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot {}: {}: {}", self.slot, self.constraint.as_str(), self.detail)
    }
}

/// Empty result iff every rule holds at every slot. `graphs[t]` is the
/// network the slot was served on and `capacity_mb` is indexed by node id.
#[allow(clippy::too_many_arguments)]
pub fn audit_constraints(
    placement: &PlacementState,
    assignments: &[Assignment],
    graphs: &[&SnapshotGraph],
    tensor: &RequestTensor,
    library: &Library,
    capacity_mb: &[f64],
    config: &ConstraintConfig,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |constraint, slot, detail: String| out.push(Violation { constraint, slot, detail });
    let (slots, regions, contents) = tensor.dims();

    let mut served: BTreeMap<(usize, RegionId, ContentId), usize> = BTreeMap::new();
    for a in assignments {
        *served.entry((a.slot, a.region, a.content)).or_default() += 1;
        if !a.fallback && placement.probability(a.slot, a.anchor, a.content) < 1.0 {
            push(
                Constraint::SingleAnchor,
                a.slot,
                format!("region {} content {} anchored at node {} which does not hold it", a.region.0, a.content, a.anchor),
            );
        }
        if a.tier != Tier::Origin && a.latency_ms > config.delta_upper_latency_ms {
            push(
                Constraint::LatencyCeiling,
                a.slot,
                format!(
                    "region {} content {} served by cache node {} in {:.3} ms > {} ms",
                    a.region.0, a.content, a.anchor, a.latency_ms, config.delta_upper_latency_ms
                ),
            );
        }
    }
    for t in 0..slots {
        for r in 0..regions {
            let region = RegionId(r as u32);
            for f in 0..contents {
                let f = ContentId(f as u32);
                let n = served.get(&(t, region, f)).copied().unwrap_or(0);
                let wanted = tensor.get(t, region, f) > 0;
                if (wanted && n != 1) || (!wanted && n > 1) {
                    push(
                        Constraint::SingleAnchor,
                        t,
                        format!("region {} content {} has {n} anchors", region.0, f),
                    );
                }
            }
        }
    }

    let library_mb = library.total_size_mb();
    for t in 0..placement.slots() {
        for tr in placement.transfers(t) {
            if graphs.get(t).and_then(|g| g.link(tr.x, tr.y)).is_none() {
                push(
                    Constraint::LinkFeasibility,
                    t,
                    format!("content {} moved over {}-{} without an active link", tr.content, tr.x, tr.y),
                );
            }
        }
        let mut load: BTreeMap<NodeId, f64> = placement.origins.iter().map(|&o| (o, library_mb)).collect();
        let mut cached_total = 0.0;
        for (v, f) in placement.cached(t) {
            if placement.is_origin(v) {
                continue;
            }
            *load.entry(v).or_default() += library.size(f);
            cached_total += library.size(f);
        }
        for (v, used) in load {
            let cap = capacity_mb.get(v.index()).copied().unwrap_or(0.0);
            if used > cap + 1e-9 {
                push(Constraint::Capacity, t, format!("node {v} stores {used:.3} MB > capacity {cap} MB"));
            }
        }
        let cap = config.phi * library_mb;
        if cached_total > cap + 1e-9 {
            push(
                Constraint::Redundancy,
                t,
                format!("cached volume {cached_total:.3} MB > {} x library ({cap:.3} MB)", config.phi),
            );
        }
    }
    out
}
