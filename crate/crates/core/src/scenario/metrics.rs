//! Runs one scheme over a built world and summarizes what users saw.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;

use crate::caching::audit::Tier;
use crate::caching::{
    audit_constraints, mlc3, storage_cost, transmission_cost, Assignment, CostLedger, Mlc3Inputs, PlacementState,
    ScoreRecord, Transfer, Violation,
};
use crate::error::Result;
use crate::scenario::scheme::Scheme;
use crate::scenario::world::World;
use crate::service::{holders_by_content, SlotView};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub requests: u64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub mean: f64,
    pub storage: f64,
    pub transmission: f64,
    pub total_cost: f64,
    /// Share of requests served by each tier.
    pub hit_origin: f64,
    pub hit_satellite: f64,
    pub hit_ground_station: f64,
    /// Requests served terrestrially because no origin was reachable.
    pub fallback_requests: u64,
}

#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub placement: PlacementState,
    pub assignments: Vec<Assignment>,
    pub ledger: CostLedger,
    /// Tier-2/3 part of the storage cost per slot.
    pub cache_storage: Vec<f64>,
    /// Horizon cost (storage plus transmission) per content category.
    pub category_costs: BTreeMap<String, f64>,
    pub scores: Vec<ScoreRecord>,
    pub violations: Vec<Violation>,
    pub report: MetricsReport,
}

/// Request-weighted nearest-rank percentile of `(latency, weight)` samples
/// sorted by latency.
pub fn weighted_percentile(sorted: &[(f64, u32)], p: f64) -> f64 {
    let total: u64 = sorted.iter().map(|s| u64::from(s.1)).sum();
    if total == 0 {
        return f64::NAN;
    }
    let rank = ((p / 100.0) * total as f64).ceil().max(1.0) as u64;
    let mut seen = 0u64;
    for &(l, w) in sorted {
        seen += u64::from(w);
        if seen >= rank {
            return l;
        }
    }
    sorted.last().map_or(f64::NAN, |s| s.0)
}

pub fn build_views(world: &World, scheme: Scheme) -> Result<Vec<SlotView>> {
    world
        .snapshots
        .par_iter()
        .zip(&world.throughputs)
        .map(|(snap, &tp)| {
            SlotView::build(
                snap,
                &world.nodes,
                &world.grid,
                scheme.view_options(),
                &world.service,
                tp,
                &world.scenario.cost,
            )
        })
        .collect()
}

pub fn run_scheme(world: &World, scheme: Scheme) -> Result<SchemeRun> {
    let s = &world.scenario;
    let views = build_views(world, scheme)?;
    let origins = views.first().map(|v| v.origins.clone()).unwrap_or_default();
    let (placement, scores) = if scheme.caches() {
        let out = mlc3(&Mlc3Inputs {
            views: &views,
            kinds: &world.kinds,
            capacity_mb: &world.capacity_mb,
            grid: &world.grid,
            library: &world.library,
            tensor: &world.tensor,
            popularity: &world.popularity,
            constraints: &s.constraints,
            cost: &s.cost,
        })?;
        (out.placement, out.scores)
    } else {
        (PlacementState::new(views.len(), origins), Vec::new())
    };

    let delta = s.constraints.delta_upper_latency_ms;
    let per_slot: Vec<(Vec<Assignment>, Vec<Transfer>)> = views
        .par_iter()
        .enumerate()
        .map(|(t, view)| {
            let holders = holders_by_content(&placement, t, world.library.len());
            let mut served = Vec::new();
            let mut moves = Vec::new();
            for a in world.grid.regions() {
                for f in world.library.ids() {
                    let u = world.tensor.get(t, a, f);
                    if u == 0 {
                        continue;
                    }
                    let size = world.library.size(f);
                    let asg = view.serve(a, f, size, u, &holders[f.index()], &world.kinds, delta);
                    if !asg.fallback {
                        let path = view.delivery_path(a, asg.anchor).expect("anchor is reachable");
                        for w in path.windows(2) {
                            moves.push(Transfer { x: w[1], y: w[0], content: f, count: f64::from(u) });
                        }
                    }
                    served.push(asg);
                }
            }
            (served, moves)
        })
        .collect();

    let mut ledger = CostLedger::default();
    let mut cache_storage = Vec::with_capacity(views.len());
    let mut category_costs: BTreeMap<String, f64> = BTreeMap::new();
    let mut assignments = Vec::new();
    let cost = &s.cost;
    for (t, (view, (served, moves))) in views.iter().zip(per_slot).enumerate() {
        let storage = storage_cost(&placement, t, &world.kinds, &world.library, cost);
        let fills = placement.transfers(t);
        let transmission = transmission_cost(fills, &view.graph, &world.library, cost)?
            + transmission_cost(&moves, &view.graph, &world.library, cost)?;
        ledger.push(storage, transmission);

        let mut cached = 0.0;
        for (v, f) in placement.cached(t) {
            let c = cost.storage(world.kinds[v.index()]) * world.library.size(f);
            cached += c;
            *category_costs.entry(world.library.get(f).category.clone()).or_default() += c;
        }
        cache_storage.push(cached);
        for item in world.library.items() {
            let origin: f64 = placement
                .origins
                .iter()
                .map(|o| cost.storage(world.kinds[o.index()]) * item.size_mb)
                .sum();
            *category_costs.entry(item.category.clone()).or_default() += origin;
        }
        for tr in fills.iter().chain(&moves) {
            let c = transmission_cost(std::slice::from_ref(tr), &view.graph, &world.library, cost)?;
            *category_costs
                .entry(world.library.get(tr.content).category.clone())
                .or_default() += c;
        }
        assignments.extend(served);
    }

    let graphs: Vec<_> = views.iter().map(|v| &v.graph).collect();
    let violations = audit_constraints(
        &placement,
        &assignments,
        &graphs,
        &world.tensor,
        &world.library,
        &world.capacity_mb,
        &s.constraints,
    );
    let report = summarize(scheme, &assignments, &ledger);
    if report.fallback_requests > 0 {
        warn!(
            "{scheme}: {} requests found no reachable origin and were served terrestrially from the nearest ground data center",
            report.fallback_requests
        );
    }
    Ok(SchemeRun {
        scheme,
        placement,
        assignments,
        ledger,
        cache_storage,
        category_costs,
        scores,
        violations,
        report,
    })
}

pub fn summarize(scheme: Scheme, assignments: &[Assignment], ledger: &CostLedger) -> MetricsReport {
    let mut samples: Vec<(f64, u32)> = assignments.iter().map(|a| (a.latency_ms, a.requests)).collect();
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    let requests: u64 = assignments.iter().map(|a| u64::from(a.requests)).sum();
    let share = |pred: &dyn Fn(&Assignment) -> bool| {
        let n: u64 = assignments
            .iter()
            .filter(|a| pred(a))
            .map(|a| u64::from(a.requests))
            .sum();
        if requests == 0 {
            0.0
        } else {
            n as f64 / requests as f64
        }
    };
    let weighted: f64 = assignments.iter().map(|a| a.latency_ms * f64::from(a.requests)).sum();
    let storage: f64 = ledger.storage.iter().sum();
    let transmission: f64 = ledger.transmission.iter().sum();
    MetricsReport {
        scheme,
        requests,
        p50: weighted_percentile(&samples, 50.0),
        p90: weighted_percentile(&samples, 90.0),
        p99: weighted_percentile(&samples, 99.0),
        mean: if requests == 0 { f64::NAN } else { weighted / requests as f64 },
        storage,
        transmission,
        total_cost: storage + transmission,
        hit_origin: share(&|a| a.tier == Tier::Origin),
        hit_satellite: share(&|a| a.tier == Tier::Satellite),
        hit_ground_station: share(&|a| a.tier == Tier::GroundStation),
        fallback_requests: assignments
            .iter()
            .filter(|a| a.fallback)
            .map(|a| u64::from(a.requests))
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_is_weighted() {
        let s = [(1.0, 1), (2.0, 8), (10.0, 1)];
        assert_eq!(weighted_percentile(&s, 50.0), 2.0);
        assert_eq!(weighted_percentile(&s, 90.0), 2.0);
        assert_eq!(weighted_percentile(&s, 99.0), 10.0);
        assert_eq!(weighted_percentile(&s, 0.0), 1.0);
        assert!(weighted_percentile(&[], 50.0).is_nan());
    }
}
