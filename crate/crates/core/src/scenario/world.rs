//! Builds every seeded input of a run: nodes, snapshots, link series,
//! regions, library and demand.

use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constellation::{generate_shell, NodeId, NodeKind, NodeRecord, RegionGrid, SlotClock};
use crate::demand::{global_popularity, read_request_file, synthesize_requests, Library, RequestTensor};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::linkmodel::{read_link_trace, LinkPerfRanges, LinkPerfSeries};
use crate::scenario::config::Scenario;
use crate::service::{ServiceParams, Throughputs};
use crate::topology::{ingest_igl_traces, synthesize_igl, SnapshotGraph, Topology};

/// Independent seed for one consumer of randomness.
fn sub_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

#[derive(Debug, Clone)]
pub struct World {
    pub scenario: Scenario,
    pub nodes: Vec<NodeRecord>,
    pub kinds: Vec<NodeKind>,
    pub capacity_mb: Vec<f64>,
    pub grid: RegionGrid,
    pub snapshots: Vec<SnapshotGraph>,
    pub throughputs: Vec<Throughputs>,
    pub library: Library,
    pub tensor: RequestTensor,
    pub popularity: Vec<Vec<f64>>,
    pub service: ServiceParams,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn synthesize_sites(s: &Scenario, first_id: u32) -> Vec<NodeRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(s.seed, 1));
    let [lo, hi] = s.ground.lat_range;
    let (slo, shi) = (lo.to_radians().sin(), hi.to_radians().sin());
    let mut out = Vec::new();
    let plan = [
        (NodeKind::GroundStation, s.ground.stations),
        (NodeKind::GroundDataCenter, s.ground.data_centers),
    ];
    for (kind, count) in plan {
        for i in 0..count {
            // area-uniform within the latitude band
            let lat = if slo == shi { lo } else { rng.random_range(slo..=shi).asin().to_degrees() };
            let lon = rng.random_range(-180.0..180.0);
            let id = NodeId(first_id + out.len() as u32);
            out.push(NodeRecord::ground(id, kind, format!("{}{i}", kind.label_prefix()), GeoPoint::new(lat, lon)));
        }
    }
    out
}

/// Reads `label,kind,lat,lon` rows; `kind` is `GS` or `GDC`.
fn read_sites(path: &Path, first_id: u32) -> Result<Vec<NodeRecord>> {
    let name = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(open(path)?);
    let mut stations = Vec::new();
    let mut centers = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && rec.get(1) == Some("kind") {
            continue;
        }
        let bad = |reason: String| Error::Ingest {
            file: name.clone(),
            row: line,
            reason,
        };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(format!("field {} is not a number", k + 1)));
        let (lat, lon) = (num(2)?, num(3)?);
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(bad(format!("coordinates ({lat}, {lon}) out of range")));
        }
        let site = (rec[0].to_string(), GeoPoint::new(lat, lon));
        match &rec[1] {
            "GS" => stations.push(site),
            "GDC" => centers.push(site),
            k => return Err(bad(format!("unknown site kind {k:?}"))),
        }
    }
    let mut out = Vec::new();
    for (kind, list) in [(NodeKind::GroundStation, stations), (NodeKind::GroundDataCenter, centers)] {
        for (label, at) in list {
            out.push(NodeRecord::ground(NodeId(first_id + out.len() as u32), kind, label, at));
        }
    }
    Ok(out)
}

fn link_series(ranges: &LinkPerfRanges, trace: Option<&Path>, s: &Scenario, stream: u64) -> Result<LinkPerfSeries> {
    match trace {
        Some(p) => read_link_trace(open(p)?, &p.display().to_string(), s.links.tti_ms),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(s.seed, stream));
            ranges.synthesize(s.slots, s.links.tti_ms, &mut rng)
        }
    }
}

/// Per-region demand intensity: cosine of the centre latitude times a seeded
/// factor in [0.2, 1].
pub fn region_weights(grid: &RegionGrid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 2));
    grid.regions()
        .map(|a| grid.center(a).lat_deg.to_radians().cos() * rng.random_range(0.2..=1.0))
        .collect()
}

impl World {
    pub fn build(scenario: &Scenario) -> Result<Self> {
        let s = scenario;
        s.validate()?;
        let mut nodes = generate_shell(&s.constellation.spec(NodeKind::Satellite), 0.0, 0)?;
        nodes.extend(generate_shell(
            &s.space_data_centers.spec(NodeKind::SpaceDataCenter),
            0.0,
            nodes.len() as u32,
        )?);
        let first_ground = nodes.len() as u32;
        nodes.extend(match &s.ground.sites_file {
            Some(p) => read_sites(p, first_ground)?,
            None => synthesize_sites(s, first_ground),
        });
        let capacity_mb: Vec<f64> = nodes.iter().map(|n| s.capacity.of(n.kind)).collect();
        for (n, &c) in nodes.iter_mut().zip(&capacity_mb) {
            n.capacity_mb = c;
        }
        let kinds: Vec<NodeKind> = nodes.iter().map(|n| n.kind).collect();

        let ground: Vec<&NodeRecord> = nodes.iter().filter(|n| n.kind.is_ground()).collect();
        if ground.is_empty() {
            return Err(Error::config("ground", "need at least one ground node"));
        }
        let igl = match &s.ground.igl_trace {
            Some(p) => ingest_igl_traces(open(p)?, &p.display().to_string(), &nodes)?,
            None => synthesize_igl(&ground, s.ground.igl_neighbors, sub_seed(s.seed, 3)),
        };
        let clock = SlotClock {
            slot_seconds: s.slot_seconds,
        };
        let topology = Topology::new(nodes.clone(), clock, s.topology.params(), s.latency.params(), igl)?;
        let snapshots: Vec<SnapshotGraph> = (0..s.slots).into_par_iter().map(|t| topology.snapshot(t)).collect();

        let isl = link_series(&s.links.isl, s.links.isl_trace.as_deref(), s, 4)?;
        let gsl = link_series(&s.links.gsl, s.links.gsl_trace.as_deref(), s, 5)?;
        let igl = link_series(&s.links.igl, s.links.igl_trace.as_deref(), s, 6)?;
        let throughputs = (0..s.slots)
            .map(|t| Throughputs {
                isl_bps: isl.throughput_bps(t),
                gsl_bps: gsl.throughput_bps(t),
                igl_bps: igl.throughput_bps(t),
            })
            .collect();

        let grid = RegionGrid::new(s.regions.lat_bands, s.regions.lon_bands)?;
        let d = &s.demand;
        let library = Library::synthesize(d.contents, d.categories, d.min_size_mb, d.max_size_mb, sub_seed(s.seed, 7))?;
        let tensor = match &d.request_file {
            Some(p) => read_request_file(open(p)?, &p.display().to_string(), (s.slots, grid.len(), library.len()))?,
            None => synthesize_requests(
                &grid,
                &library,
                d.zipf_s,
                &region_weights(&grid, s.seed),
                s.slots,
                d.requests_per_slot,
                sub_seed(s.seed, 8),
            )?,
        };
        let popularity = global_popularity(&tensor, &d.popularity());
        Ok(Self {
            scenario: s.clone(),
            nodes,
            kinds,
            capacity_mb,
            grid,
            snapshots,
            throughputs,
            library,
            tensor,
            popularity,
            service: ServiceParams {
                latency: s.latency.params(),
                terrestrial: s.access,
                min_elevation_deg: s.topology.min_elevation_deg,
            },
        })
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }
}
