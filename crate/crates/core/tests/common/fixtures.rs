//! Hand-evaluated formula fixtures: `(name, computed, expected)`.

use orbcache::caching::{gs_cache_score, sat_cache_score, storage_cost, total_cost, transmission_cost};
use orbcache::caching::{CostLedger, CostParams, PlacementState, Transfer};
use orbcache::constellation::{NodeId, NodeKind, RegionId};
use orbcache::demand::{popularity, ContentId, ContentItem, Library, PopularityParams, RequestTensor};
use orbcache::geo::Vec3;
use orbcache::linkmodel::{content_latency, LatencyParams, LinkPerfSample};
use orbcache::topology::{Link, LinkKind, SnapshotGraph};

pub struct Fixture {
    pub name: &'static str,
    pub got: f64,
    pub want: f64,
}

impl Fixture {
    pub fn holds(&self) -> bool {
        let scale = self.want.abs().max(f64::MIN_POSITIVE);
        (self.got - self.want).abs() <= 1e-9 * scale || self.got == self.want
    }
}

fn fx(name: &'static str, got: f64, want: f64) -> Fixture {
    Fixture { name, got, want }
}

fn library(sizes: &[f64]) -> Library {
    let items = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| ContentItem {
            id: ContentId(i as u32),
            size_mb: s,
            category: format!("c{i}"),
        })
        .collect();
    Library::new(items).unwrap()
}

pub fn all() -> Vec<Fixture> {
    let mut out = Vec::new();

    // link performance: TBS * R * log2(M) * log2(1 + TP*SNR)
    let unit = LinkPerfSample { tbs_bits: 1.0, modulation_order: 2, coding_rate: 1.0, snr_linear: 1.0, tx_power_norm: 1.0 };
    out.push(fx("link performance, unit case", unit.performance(), 1.0));
    let lp = LinkPerfSample { tbs_bits: 1000.0, modulation_order: 16, coding_rate: 0.5, snr_linear: 15.0, tx_power_norm: 1.0 };
    out.push(fx("link performance, 1000*0.5*4*4", lp.performance(), 8000.0));

    // delivery latency: 8 Mb over 8 Mb/s plus 1000 km at c
    let p = LatencyParams::default();
    let l = content_latency(1.0, 1000.0, &p, 8.0e6).unwrap();
    out.push(fx("delivery latency, 1 s + 1000 km", l, 1000.0 + 1000.0 / 299.792_458));
    let l = content_latency(0.0, 299_792.458, &p, 1.0).unwrap();
    out.push(fx("delivery latency, light second", l, 1000.0));

    // popularity recursion
    let pp = PopularityParams { alpha: 0.0, theta_decay: 0.5 };
    out.push(fx("popularity, single decayed term", popularity(7.0, &[4.0], &pp), 2.0));
    let pp = PopularityParams { alpha: 0.5, theta_decay: 0.9 };
    let p1 = 0.5 * 10.0;
    let p2 = 0.5 * 0.0 + 0.5 * (p1 * 0.9);
    let p3 = 0.5 * 0.0 + 0.5 * (p1 * 0.81 + p2 * 0.9);
    out.push(fx("popularity, unrolled slot 2", popularity(0.0, &[p1], &pp), p2));
    out.push(fx("popularity, unrolled slot 3", popularity(0.0, &[p1, p2], &pp), p3));

    // ground-station score: 3 stations at 10/20/30 ms, 2 contents, windows (1, 2)
    let mut tensor = RequestTensor::zeros(3, 1, 2);
    for (t, (u0, u1)) in [(3, 1), (2, 2), (4, 0)].into_iter().enumerate() {
        tensor.set(t, RegionId(0), ContentId(0), u0);
        tensor.set(t, RegionId(0), ContentId(1), u1);
    }
    let score = |here: f64, f: u32| gs_cache_score(&tensor, RegionId(0), ContentId(f), 2, (1, 2), 60.0, here, 2.0, 8.0);
    // share 6/12, latency ratio 60/here, size ratio 2/8
    out.push(fx("station score, content 0 at 20 ms", score(20.0, 0), 0.5 * 3.0 * 0.25));
    out.push(fx("station score, content 0 at 10 ms", score(10.0, 0), 0.5 * 6.0 * 0.25));
    out.push(fx("station score, content 1 at 30 ms", score(30.0, 1), (2.0 / 12.0) * 2.0 * 0.25));

    // satellite score: popularity (6, 3, 1), satellites at 5 and 15 ms
    let pop = [6.0, 3.0, 1.0];
    out.push(fx("satellite score, content 0 at 5 ms", sat_cache_score(&pop, ContentId(0), 20.0, 5.0, 1.0, 4.0), 0.6 * 4.0 * 0.25));
    out.push(fx("satellite score, content 2 at 15 ms", sat_cache_score(&pop, ContentId(2), 20.0, 15.0, 1.0, 4.0), 0.1 * (4.0 / 3.0) * 0.25));

    // storage: GS, GDC, S, SDC; data centers hold the 3 MB library
    let cp = CostParams::default();
    let kinds = [NodeKind::GroundStation, NodeKind::GroundDataCenter, NodeKind::Satellite, NodeKind::SpaceDataCenter];
    let lib = library(&[1.0, 2.0]);
    let mut pl = PlacementState::new(1, vec![NodeId(1), NodeId(3)]);
    pl.cache(0, NodeId(0), ContentId(1));
    pl.cache(0, NodeId(2), ContentId(0));
    let want = 3.0 * 0.1 + 3.0 * 0.6 + 2.0 * 0.3 + 1.0 * 1.0;
    out.push(fx("storage, mixed four nodes", storage_cost(&pl, 0, &kinds, &lib, &cp), want));
    let gdc = PlacementState::new(1, vec![NodeId(0)]);
    out.push(fx("storage, one data center", storage_cost(&gdc, 0, &[NodeKind::GroundDataCenter], &library(&[1.0]), &cp), 0.1));

    // transmission: one transfer per link class, 1 MB each; one 2 MB ISL hop
    let link = |a: u32, b: u32, kind| Link { a: NodeId(a), b: NodeId(b), kind, distance_km: 1.0, latency_ms: 1.0 };
    let g = SnapshotGraph::new(
        0,
        vec![Vec3::default(); 4],
        vec![link(0, 1, LinkKind::Isl), link(1, 2, LinkKind::Gsl), link(2, 3, LinkKind::Igl)],
    );
    let tr = |x: u32, y: u32, f: u32| Transfer { x: NodeId(x), y: NodeId(y), content: ContentId(f), count: 1.0 };
    let one = library(&[1.0, 2.0]);
    let got = transmission_cost(&[tr(0, 1, 0), tr(2, 1, 0), tr(3, 2, 0)], &g, &one, &cp).unwrap();
    out.push(fx("transmission, one per link class", got, 0.5 + 1.0 + 0.1));
    out.push(fx("transmission, 2 MB over ISL", transmission_cost(&[tr(0, 1, 1)], &g, &one, &cp).unwrap(), 1.0));

    // horizon total
    let ledger = CostLedger { storage: vec![1.0, 2.0, 3.0], transmission: vec![0.5, 0.25, 0.125] };
    out.push(fx("total cost, three slots", total_cost(&ledger), 6.875));
    out
}
