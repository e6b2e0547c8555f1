//! Three-tier placement. Tier-1 origins hold everything; each slot, caches
//! on satellites along the access-to-origin path (plus their one-hop
//! neighbours) and on ground stations are chosen greedily by the transfer
//! cost they save, net of their storage and fill cost.

use std::collections::BTreeMap;

use crate::caching::greedy::{greedy_place, Candidate, PlacementProblem};
use crate::caching::score::{gs_cache_score, sat_cache_score, ScoreNormalizer, ScoreRecord};
use crate::caching::{ConstraintConfig, CostParams, PlacementState, Transfer};
use crate::constellation::{assign_region, subsatellite_point, NodeId, NodeKind, RegionGrid, RegionId};
use crate::demand::{ContentId, Library, RequestTensor};
use crate::error::{Error, Result};
use crate::service::SlotView;
use crate::topology::LinkKind;

#[derive(Debug, Clone)]
pub struct Mlc3Output {
    pub placement: PlacementState,
    /// Normalized cache scores of every evaluated candidate.
    pub scores: Vec<ScoreRecord>,
}

/// Inputs shared by every slot of a placement run.
pub struct Mlc3Inputs<'a> {
    pub views: &'a [SlotView],
    /// Node kind by node id.
    pub kinds: &'a [NodeKind],
    /// Storage capacity by node id (MB).
    pub capacity_mb: &'a [f64],
    pub grid: &'a RegionGrid,
    pub library: &'a Library,
    pub tensor: &'a RequestTensor,
    /// Global popularity per slot and content.
    pub popularity: &'a [Vec<f64>],
    pub constraints: &'a ConstraintConfig,
    pub cost: &'a CostParams,
}

pub fn mlc3(inp: &Mlc3Inputs<'_>) -> Result<Mlc3Output> {
    let slots = inp.views.len();
    if inp.tensor.slots() < slots || inp.popularity.len() < slots {
        return Err(Error::contract("request tensor shorter than the snapshot sequence"));
    }
    let origins = inp.views.first().map(|v| v.origins.clone()).unwrap_or_default();
    let mut placement = PlacementState::new(slots, origins);
    let mut scores = ScoreNormalizer::default();
    for (t, view) in inp.views.iter().enumerate() {
        let chosen = place_slot(inp, t, view, &placement, &mut scores)?;
        for (v, f) in chosen {
            let refill = t == 0 || !placement.is_cached(t - 1, v, f);
            placement.cache(t, v, f);
            if refill {
                let path = view.fill_path(v).expect("candidates are reachable from an origin");
                for w in path.windows(2) {
                    placement.add_transfer(t, Transfer { x: w[0], y: w[1], content: f, count: 1.0 });
                }
            }
        }
    }
    Ok(Mlc3Output {
        placement,
        scores: scores.finish(),
    })
}

/// Tier-2 candidates for region `a`: satellites on the path from its access
/// satellite to the nearest origin, and their satellite neighbours.
fn path_candidates(view: &SlotView, kinds: &[NodeKind], a: RegionId) -> Vec<NodeId> {
    let acc = view.access[a.index()];
    if acc.kind != LinkKind::Gsl {
        return Vec::new();
    }
    let Some(path) = view.nearest_origin(a).and_then(|o| view.delivery_path(a, o)) else {
        return vec![acc.node];
    };
    let mut out: Vec<NodeId> = Vec::new();
    for &s in path.iter().filter(|s| kinds[s.index()] == NodeKind::Satellite) {
        out.push(s);
        out.extend(
            view.graph
                .incident(s)
                .map(|l| l.other(s))
                .filter(|n| kinds[n.index()] == NodeKind::Satellite),
        );
    }
    out.sort();
    out.dedup();
    out
}

fn place_slot(
    inp: &Mlc3Inputs<'_>,
    t: usize,
    view: &SlotView,
    placement: &PlacementState,
    scores: &mut ScoreNormalizer,
) -> Result<Vec<(NodeId, ContentId)>> {
    let delta = inp.constraints.delta_upper_latency_ms;
    let ground_stations: Vec<NodeId> = (0..inp.kinds.len() as u32)
        .map(NodeId)
        .filter(|v| inp.kinds[v.index()] == NodeKind::GroundStation)
        .collect();
    let mut index: BTreeMap<(NodeId, ContentId), usize> = BTreeMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut client = 0usize;
    for a in inp.grid.regions() {
        if inp.tensor.region_total(t, a) == 0 {
            continue;
        }
        let mut nodes = path_candidates(view, inp.kinds, a);
        nodes.extend(ground_stations.iter().copied());
        for f in inp.library.ids() {
            let u = inp.tensor.get(t, a, f);
            if u == 0 {
                continue;
            }
            let k = client;
            client += 1;
            let size = inp.library.size(f);
            let origin = view
                .origins
                .iter()
                .filter_map(|&o| view.latency(a, o, size).map(|l| (l, o)))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let Some((l0, o)) = origin else { continue };
            let c0 = view.delivery_coef(a, o).expect("reachable origin");
            for &v in &nodes {
                let (Some(l), Some(c)) = (view.latency(a, v, size), view.delivery_coef(a, v)) else {
                    continue;
                };
                let gain = f64::from(u) * size * (c0 - c);
                if l > delta || l >= l0 || gain <= 0.0 {
                    continue;
                }
                let Some(fill) = view.fill_coef(v) else { continue };
                let i = *index.entry((v, f)).or_insert_with(|| {
                    let kept = t > 0 && placement.is_cached(t - 1, v, f);
                    candidates.push(Candidate {
                        node: v,
                        content: f,
                        size_mb: size,
                        cost: inp.cost.storage(inp.kinds[v.index()]) * size + if kept { 0.0 } else { fill * size },
                        gains: Vec::new(),
                    });
                    candidates.len() - 1
                });
                candidates[i].gains.push((k, gain));
            }
        }
    }
    record_scores(inp, t, view, &candidates, scores)?;
    let capacity_mb = candidates
        .iter()
        .map(|c| (c.node, inp.capacity_mb[c.node.index()]))
        .collect();
    let mut problem = PlacementProblem::new(candidates, capacity_mb);
    problem.budget_mb = inp.constraints.phi * inp.library.total_size_mb();
    let sel = greedy_place(&problem, 0)?;
    let mut out: Vec<(NodeId, ContentId)> = sel
        .picked
        .iter()
        .map(|&i| (problem.candidates[i].node, problem.candidates[i].content))
        .collect();
    out.sort();
    Ok(out)
}

fn record_scores(inp: &Mlc3Inputs<'_>, t: usize, view: &SlotView, candidates: &[Candidate], scores: &mut ScoreNormalizer) -> Result<()> {
    let mut sums: BTreeMap<(bool, RegionId, ContentId), f64> = BTreeMap::new();
    let mut ordered: Vec<&Candidate> = candidates.iter().collect();
    ordered.sort_by_key(|c| (c.node, c.content));
    for c in ordered {
        let kind = inp.kinds[c.node.index()];
        let ground = kind == NodeKind::GroundStation;
        let here = subsatellite_point(view.graph.positions[c.node.index()])?;
        let a = assign_region(here, inp.grid)?;
        let size = c.size_mb;
        let sum = *sums.entry((ground, a, c.content)).or_insert_with(|| {
            (0..inp.kinds.len() as u32)
                .map(NodeId)
                .filter(|v| {
                    let k = inp.kinds[v.index()];
                    if ground {
                        k == NodeKind::GroundStation
                    } else {
                        k.is_space()
                    }
                })
                .filter_map(|v| view.latency(a, v, size))
                .sum()
        });
        let l_here = view.latency(a, c.node, size).unwrap_or(f64::INFINITY);
        let cap = inp.capacity_mb[c.node.index()];
        let raw = if ground {
            let w = (inp.constraints.p, inp.constraints.q);
            gs_cache_score(inp.tensor, a, c.content, t, w, sum, l_here, size, cap)
        } else {
            sat_cache_score(&inp.popularity[t], c.content, sum, l_here, size, cap)
        };
        scores.push(t, c.node, c.content, raw);
    }
    Ok(())
}
