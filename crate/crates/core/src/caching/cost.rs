//! Storage and transmission energy per slot and over the horizon.

use crate::caching::{CostParams, PlacementState, Transfer};
use crate::constellation::NodeKind;
use crate::demand::Library;
use crate::error::{Error, Result};
use crate::topology::SnapshotGraph;

/// Storage cost at slot `t`. Origins pay for the full library; tier-2/3
/// nodes pay for what they hold. `kinds` is indexed by node id.
pub fn storage_cost(placement: &PlacementState, t: usize, kinds: &[NodeKind], library: &Library, params: &CostParams) -> f64 {
    let full = library.total_size_mb();
    let origins: f64 = placement
        .origins
        .iter()
        .map(|o| params.storage(kinds[o.index()]) * full)
        .sum();
    let cached: f64 = placement
        .cached(t)
        .map(|(v, f)| params.storage(kinds[v.index()]) * library.size(f))
        .sum();
    origins + cached
}

/// Transmission cost of `transfers` over the links of `graph`. A transfer on
/// a pair without an active link is an error.
pub fn transmission_cost(transfers: &[Transfer], graph: &SnapshotGraph, library: &Library, params: &CostParams) -> Result<f64> {
    let mut total = 0.0;
    for tr in transfers {
        let link = graph.link(tr.x, tr.y).ok_or(Error::InactiveLink {
            slot: graph.slot,
            from: tr.x.0,
            to: tr.y.0,
        })?;
        total += params.transfer(link.kind) * library.size(tr.content) * tr.count;
    }
    Ok(total)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostLedger {
    pub storage: Vec<f64>,
    pub transmission: Vec<f64>,
}

impl CostLedger {
    pub fn push(&mut self, storage: f64, transmission: f64) {
        self.storage.push(storage);
        self.transmission.push(transmission);
    }

    pub fn total(&self) -> f64 {
        total_cost(self)
    }
}

/// Horizon total: slot-summed storage plus slot-summed transmission.
pub fn total_cost(ledger: &CostLedger) -> f64 {
    ledger.storage.iter().sum::<f64>() + ledger.transmission.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::NodeId;
    use crate::demand::{ContentId, ContentItem};
    use crate::geo::Vec3;
    use crate::topology::{Link, LinkKind};

    fn library(sizes: &[f64]) -> Library {
        Library::new(
            sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| ContentItem {
                    id: ContentId(i as u32),
                    size_mb: s,
                    category: "c".into(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_ground_dc_one_item() {
        let p = PlacementState::new(1, vec![NodeId(0)]);
        let c = storage_cost(&p, 0, &[NodeKind::GroundDataCenter], &library(&[1.0]), &CostParams::default());
        assert!((c - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_placement_costs_nothing() {
        let p = PlacementState::new(1, vec![]);
        assert_eq!(storage_cost(&p, 0, &[NodeKind::Satellite], &library(&[1.0]), &CostParams::default()), 0.0);
    }

    fn edge(a: u32, b: u32, kind: LinkKind) -> Link {
        Link {
            a: NodeId(a),
            b: NodeId(b),
            kind,
            distance_km: 1.0,
            latency_ms: 1.0,
        }
    }

    fn graph(links: Vec<Link>) -> SnapshotGraph {
        SnapshotGraph::new(0, vec![Vec3::default(); 6], links)
    }

    fn tr(x: u32, y: u32, f: u32) -> Transfer {
        Transfer {
            x: NodeId(x),
            y: NodeId(y),
            content: ContentId(f),
            count: 1.0,
        }
    }

    #[test]
    fn single_isl_transfer() {
        let g = graph(vec![edge(0, 1, LinkKind::Isl)]);
        let c = transmission_cost(&[tr(1, 0, 0)], &g, &library(&[2.0]), &CostParams::default()).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert_eq!(transmission_cost(&[], &g, &library(&[2.0]), &CostParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn inactive_link_is_rejected() {
        let g = graph(vec![edge(0, 1, LinkKind::Isl)]);
        let err = transmission_cost(&[tr(0, 2, 0)], &g, &library(&[1.0]), &CostParams::default()).unwrap_err();
        assert!(matches!(err, Error::InactiveLink { from: 0, to: 2, .. }));
    }

    #[test]
    fn ledger_total() {
        let mut l = CostLedger::default();
        l.push(1.0, 2.0);
        l.push(0.5, 0.25);
        assert_eq!(l.total(), 3.75);
    }
}
