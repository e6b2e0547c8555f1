//! Per-slot connectivity: +Grid inter-satellite wiring, nearest-visible
//! ground-to-space links and inter-ground links from measured or
//! synthesized round-trip times.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constellation::{NodeId, NodeKind, NodeRecord, SlotClock};
use crate::error::{Error, Result};
use crate::geo::{elevation_deg, line_of_sight, Vec3, LIGHT_KM_PER_MS};
use crate::linkmodel::LatencyParams;
use crate::routing::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkKind {
    Isl,
    Gsl,
    Igl,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Isl => "ISL",
            LinkKind::Gsl => "GSL",
            LinkKind::Igl => "IGL",
        }
    }
}

/// An undirected link active in one slot. Endpoints are stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
    pub distance_km: f64,
    pub latency_ms: f64,
}

impl Link {
    fn new(x: NodeId, y: NodeId, kind: LinkKind, distance_km: f64, latency_ms: f64) -> Self {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Self {
            a,
            b,
            kind,
            distance_km,
            latency_ms,
        }
    }

    pub fn other(&self, v: NodeId) -> NodeId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

fn plane_layout(sats: &[NodeRecord]) -> Result<BTreeMap<u32, Vec<(u32, NodeId)>>> {
    let mut planes: BTreeMap<u32, Vec<(u32, NodeId)>> = BTreeMap::new();
    for s in sats {
        let o = s
            .orbit()
            .ok_or_else(|| Error::config("shell", format!("{} is not a space node", s.label)))?;
        planes.entry(o.plane).or_default().push((o.index_in_plane, s.id));
    }
    let per_plane = planes.values().next().map_or(0, Vec::len);
    for (i, (&p, list)) in planes.iter_mut().enumerate() {
        list.sort();
        let dense = list.iter().enumerate().all(|(k, &(idx, _))| idx as usize == k);
        if p as usize != i || list.len() != per_plane || !dense {
            return Err(Error::config("shell", format!("plane {p} is incomplete")));
        }
    }
    Ok(planes)
}

/// +Grid wiring of one shell: each satellite links to its two in-plane
/// neighbours and to the same-index satellite in the two adjacent planes.
/// Returns each undirected pair once, sorted.
pub fn build_isl_plus_grid(sats: &[NodeRecord]) -> Result<Vec<(NodeId, NodeId)>> {
    let planes = plane_layout(sats)?;
    let order: Vec<&Vec<(u32, NodeId)>> = planes.values().collect();
    let mut pairs = BTreeSet::new();
    let mut add = |x: NodeId, y: NodeId| {
        if x != y {
            pairs.insert(if x < y { (x, y) } else { (y, x) });
        }
    };
    let np = order.len();
    for (p, plane) in order.iter().enumerate() {
        let n = plane.len();
        for k in 0..n {
            add(plane[k].1, plane[(k + 1) % n].1);
            if np > 1 {
                add(plane[k].1, order[(p + 1) % np][k].1);
            }
        }
    }
    Ok(pairs.into_iter().collect())
}

/// One GSL per ground node to the closest satellite above `min_elevation_deg`.
/// `sats` pairs node ids with Earth-fixed positions; ties go to the lower id.
pub fn build_gsl(ground: &[(NodeId, Vec3)], sats: &[(NodeId, Vec3)], min_elevation_deg: f64, latency: &LatencyParams) -> Vec<Link> {
    let mut out = Vec::new();
    for &(g, gp) in ground {
        let best = sats
            .iter()
            .filter(|(_, sp)| elevation_deg(gp, *sp) >= min_elevation_deg)
            .map(|&(s, sp)| (gp.distance(sp), s))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        if let Some((d, s)) = best {
            out.push(Link::new(g, s, LinkKind::Gsl, d, latency.propagation_ms(d)));
        }
    }
    out
}

/// Reads `source_site_id, dest_site_id, rtt_ms` rows. Site ids are node
/// labels; latency is half the round trip. Repeated pairs keep the last row.
pub fn ingest_igl_traces<R: Read>(reader: R, name: &str, nodes: &[NodeRecord]) -> Result<Vec<Link>> {
    let by_label: BTreeMap<&str, &NodeRecord> = nodes
        .iter()
        .filter(|n| n.kind.is_ground())
        .map(|n| (n.label.as_str(), n))
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut pairs: BTreeMap<(NodeId, NodeId), (Link, u64)> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && rec.get(2).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let bad = |reason: String| Error::Ingest {
            file: name.to_string(),
            row: line,
            reason,
        };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        let site = |k: usize| {
            by_label
                .get(&rec[k])
                .copied()
                .ok_or_else(|| bad(format!("unknown ground site {:?}", &rec[k])))
        };
        let (x, y) = (site(0)?, site(1)?);
        if x.id == y.id {
            return Err(bad(format!("self pair {:?}", &rec[0])));
        }
        let rtt: f64 = rec[2]
            .parse()
            .map_err(|_| bad(format!("rtt_ms is not a number: {:?}", &rec[2])))?;
        if !(rtt > 0.0) || !rtt.is_finite() {
            return Err(bad(format!("rtt_ms must be > 0, got {rtt}")));
        }
        let d = x.site().expect("ground").great_circle_km(y.site().expect("ground"));
        let link = Link::new(x.id, y.id, LinkKind::Igl, d, rtt / 2.0);
        if let Some((_, prev)) = pairs.insert((link.a, link.b), (link, line)) {
            warn!("{name}: row {line} repeats pair {}-{} from row {prev}; keeping the last", &rec[0], &rec[1]);
        }
    }
    Ok(pairs.into_values().map(|(l, _)| l).collect())
}

/// Synthetic terrestrial mesh: every ground node links to its `k` nearest
/// ground nodes, then components are joined through their closest pairs.
/// Round trip is `2 * (distance * inflation / (0.67 c) + overhead)` with
/// inflation in [1.2, 2.5] and overhead in [1, 4] ms.
pub fn synthesize_igl(ground: &[&NodeRecord], k: usize, seed: u64) -> Vec<Link> {
    let n = ground.len();
    let sites: Vec<_> = ground.iter().map(|g| g.site().expect("ground node")).collect();
    let dist = |i: usize, j: usize| sites[i].great_circle_km(sites[j]);
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        let mut near: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
        near.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in near.iter().take(k) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    // join components greedily to the one holding node 0
    let mut comp = components(n, &pairs);
    while n > 0 && comp.iter().any(|&c| c != comp[0]) {
        let root = comp[0];
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| comp[i] == root) {
            for j in (0..n).filter(|&j| comp[j] != root) {
                let d = dist(i, j);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        pairs.insert((best.1.min(best.2), best.1.max(best.2)));
        comp = components(n, &pairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs
        .into_iter()
        .map(|(i, j)| {
            let d = dist(i, j);
            let inflation = rng.random_range(1.2..=2.5);
            let overhead = rng.random_range(1.0..=4.0);
            let rtt = 2.0 * (d * inflation / (0.67 * LIGHT_KM_PER_MS) + overhead);
            Link::new(ground[i].id, ground[j].id, LinkKind::Igl, d, rtt / 2.0)
        })
        .collect()
}

fn components(n: usize, pairs: &BTreeSet<(usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in pairs {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Which link classes a topology builds, and the geometry used for them.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyParams {
    pub min_elevation_deg: f64,
    /// Constellation satellites each space data center links to.
    pub sdc_uplinks: usize,
    /// Minimum altitude of a space-to-space line of sight (km).
    pub los_clearance_km: f64,
    pub isl: bool,
    pub gsl: bool,
    pub igl: bool,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            min_elevation_deg: 25.0,
            sdc_uplinks: 2,
            los_clearance_km: 80.0,
            isl: true,
            gsl: true,
            igl: true,
        }
    }
}

/// Static wiring plus node table; produces per-slot snapshots.
#[derive(Debug, Clone)]
pub struct Topology {
    pub nodes: Vec<NodeRecord>,
    pub clock: SlotClock,
    pub params: TopologyParams,
    pub latency: LatencyParams,
    isl_pairs: Vec<(NodeId, NodeId)>,
    igl: Vec<Link>,
}

impl Topology {
    /// Node ids must equal their index in `nodes`.
    pub fn new(nodes: Vec<NodeRecord>, clock: SlotClock, params: TopologyParams, latency: LatencyParams, igl: Vec<Link>) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id.index() != i {
                return Err(Error::contract("node ids must be dense and ordered"));
            }
        }
        let mut isl_pairs = Vec::new();
        for kind in [NodeKind::Satellite, NodeKind::SpaceDataCenter] {
            let shell: Vec<NodeRecord> = nodes.iter().filter(|n| n.kind == kind).cloned().collect();
            if !shell.is_empty() {
                isl_pairs.extend(build_isl_plus_grid(&shell)?);
            }
        }
        for l in &igl {
            if !(nodes[l.a.index()].kind.is_ground() && nodes[l.b.index()].kind.is_ground()) {
                return Err(Error::contract("IGL endpoints must both be ground nodes"));
            }
        }
        Ok(Self {
            nodes,
            clock,
            params,
            latency,
            isl_pairs,
            igl,
        })
    }

    pub fn igl_links(&self) -> &[Link] {
        &self.igl
    }

    pub fn snapshot(&self, t: usize) -> SnapshotGraph {
        let secs = self.clock.seconds(t);
        let positions: Vec<Vec3> = self.nodes.iter().map(|n| n.ecef_at(secs)).collect();
        let of_kind = |k: NodeKind| -> Vec<(NodeId, Vec3)> {
            self.nodes
                .iter()
                .filter(|n| n.kind == k)
                .map(|n| (n.id, positions[n.id.index()]))
                .collect()
        };
        let sats = of_kind(NodeKind::Satellite);
        let mut links = Vec::new();
        if self.params.isl {
            for &(a, b) in &self.isl_pairs {
                let d = positions[a.index()].distance(positions[b.index()]);
                links.push(Link::new(a, b, LinkKind::Isl, d, self.latency.propagation_ms(d)));
            }
            for (sdc, sp) in of_kind(NodeKind::SpaceDataCenter) {
                let mut near: Vec<(f64, NodeId)> = sats
                    .iter()
                    .filter(|(_, p)| line_of_sight(sp, *p, self.params.los_clearance_km))
                    .map(|&(s, p)| (sp.distance(p), s))
                    .collect();
                near.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                for &(d, s) in near.iter().take(self.params.sdc_uplinks) {
                    links.push(Link::new(sdc, s, LinkKind::Isl, d, self.latency.propagation_ms(d)));
                }
            }
        }
        if self.params.gsl {
            let ground: Vec<(NodeId, Vec3)> = self
                .nodes
                .iter()
                .filter(|n| n.kind.is_ground())
                .map(|n| (n.id, positions[n.id.index()]))
                .collect();
            links.extend(build_gsl(&ground, &sats, self.params.min_elevation_deg, &self.latency));
        }
        if self.params.igl {
            links.extend(self.igl.iter().copied());
        }
        SnapshotGraph::new(t, positions, links)
    }
}

/// Active edge set of one slot. Undirected; every listed link is active.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGraph {
    pub slot: usize,
    /// Earth-fixed node positions at this slot.
    pub positions: Vec<Vec3>,
    links: Vec<Link>,
    adj: Vec<Vec<(NodeId, u32)>>,
}

impl SnapshotGraph {
    pub fn new(slot: usize, positions: Vec<Vec3>, links: Vec<Link>) -> Self {
        let mut adj = vec![Vec::new(); positions.len()];
        for (i, l) in links.iter().enumerate() {
            adj[l.a.index()].push((l.b, i as u32));
            adj[l.b.index()].push((l.a, i as u32));
        }
        Self {
            slot,
            positions,
            links,
            adj,
        }
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, x: NodeId, y: NodeId) -> Option<&Link> {
        self.adj
            .get(x.index())?
            .iter()
            .filter(|(v, _)| *v == y)
            .map(|&(_, i)| &self.links[i as usize])
            .min_by(|p, q| p.latency_ms.total_cmp(&q.latency_ms))
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v.index()].len()
    }

    pub fn incident(&self, v: NodeId) -> impl Iterator<Item = &Link> + '_ {
        self.adj[v.index()].iter().map(|&(_, i)| &self.links[i as usize])
    }
}

impl WeightedGraph for SnapshotGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.adj[v.index()]
            .iter()
            .map(|&(u, i)| (u, self.links[i as usize].latency_ms))
    }

    fn edge_delay(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.link(a, b).map(|l| l.latency_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{generate_shell, ShellSpec};
    use crate::geo::GeoPoint;

    fn shell(planes: u32, per: u32) -> Vec<NodeRecord> {
        let spec = ShellSpec {
            altitude_km: 540.0,
            inclination_deg: 53.2,
            num_planes: planes,
            sats_per_plane: per,
            phase_offset_deg: 0.0,
            kind: NodeKind::Satellite,
        };
        generate_shell(&spec, 0.0, 0).unwrap()
    }

    fn degrees(n: usize, pairs: &[(NodeId, NodeId)]) -> Vec<usize> {
        let mut deg = vec![0; n];
        for &(a, b) in pairs {
            deg[a.index()] += 1;
            deg[b.index()] += 1;
        }
        deg
    }

    #[test]
    fn full_shell_is_four_regular() {
        let pairs = build_isl_plus_grid(&shell(72, 22)).unwrap();
        assert_eq!(pairs.len(), 3168);
        assert!(degrees(1584, &pairs).iter().all(|&d| d == 4));
    }

    #[test]
    fn single_plane_is_a_ring() {
        let pairs = build_isl_plus_grid(&shell(1, 8)).unwrap();
        assert_eq!(pairs.len(), 8);
        assert!(degrees(8, &pairs).iter().all(|&d| d == 2));
    }

    #[test]
    fn incomplete_shell_rejected() {
        let mut s = shell(3, 4);
        s.remove(5);
        assert!(matches!(build_isl_plus_grid(&s), Err(Error::Config { .. })));
    }

    fn ground_at(lat: f64, lon: f64) -> (NodeId, Vec3) {
        (NodeId(100), GeoPoint::new(lat, lon).to_ecef(0.0))
    }

    #[test]
    fn gsl_prefers_nearest_visible() {
        let g = ground_at(0.0, 0.0);
        let zenith = (NodeId(1), GeoPoint::new(0.0, 0.0).to_ecef(900.0));
        let farther = (NodeId(0), GeoPoint::new(0.0, 0.0).to_ecef(1200.0));
        let links = build_gsl(&[g], &[farther, zenith], 25.0, &LatencyParams::default());
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].other(NodeId(100)), NodeId(1));
        assert!((links[0].distance_km - 900.0).abs() < 1e-6);
    }

    #[test]
    fn gsl_none_below_mask() {
        let g = ground_at(0.0, 0.0);
        let low = (NodeId(0), GeoPoint::new(0.0, 40.0).to_ecef(540.0));
        assert!(build_gsl(&[g], &[low], 25.0, &LatencyParams::default()).is_empty());
    }

    fn sites() -> Vec<NodeRecord> {
        vec![
            NodeRecord::ground(NodeId(0), NodeKind::GroundStation, "GS0", GeoPoint::new(0.0, 0.0)),
            NodeRecord::ground(NodeId(1), NodeKind::GroundStation, "GS1", GeoPoint::new(10.0, 0.0)),
            NodeRecord::ground(NodeId(2), NodeKind::GroundDataCenter, "GDC0", GeoPoint::new(20.0, 5.0)),
        ]
    }

    #[test]
    fn igl_rtt_is_halved() {
        let links = ingest_igl_traces("GS0,GS1,100\n".as_bytes(), "t.csv", &sites()).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].latency_ms, 50.0);
        assert_eq!(links[0].kind, LinkKind::Igl);
    }

    #[test]
    fn igl_empty_and_duplicates() {
        assert!(ingest_igl_traces("".as_bytes(), "t.csv", &sites()).unwrap().is_empty());
        let data = "# measured\nsource,dest,rtt_ms\nGS0,GS1,100\nGS1,GS0,60\n";
        let links = ingest_igl_traces(data.as_bytes(), "t.csv", &sites()).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].latency_ms, 30.0);
    }

    #[test]
    fn igl_bad_row_is_named() {
        let err = ingest_igl_traces("GS0,GS1,10\nGS0,GDC0,abc\n".as_bytes(), "t.csv", &sites()).unwrap_err();
        match err {
            Error::Ingest { row, .. } => assert_eq!(row, 2),
            e => panic!("unexpected {e}"),
        }
        assert!(ingest_igl_traces("GS0,XX,10\n".as_bytes(), "t.csv", &sites()).is_err());
    }

    #[test]
    fn synthetic_igl_is_connected() {
        let nodes: Vec<NodeRecord> = (0..12)
            .map(|i| {
                let lon = if i < 6 { i as f64 } else { 120.0 + i as f64 };
                NodeRecord::ground(NodeId(i), NodeKind::GroundStation, format!("GS{i}"), GeoPoint::new(0.0, lon))
            })
            .collect();
        let refs: Vec<&NodeRecord> = nodes.iter().collect();
        let links = synthesize_igl(&refs, 2, 3);
        let pairs: BTreeSet<(usize, usize)> = links.iter().map(|l| (l.a.index(), l.b.index())).collect();
        assert!(components(12, &pairs).iter().all(|&c| c == 0));
        assert!(links.iter().all(|l| l.latency_ms > 0.0));
        assert_eq!(links, synthesize_igl(&refs, 2, 3));
    }

    fn small_topology(params: TopologyParams) -> Topology {
        let mut nodes = shell(4, 6);
        let sdc = ShellSpec {
            altitude_km: 700.0,
            inclination_deg: 97.5,
            num_planes: 1,
            sats_per_plane: 4,
            phase_offset_deg: 0.0,
            kind: NodeKind::SpaceDataCenter,
        };
        nodes.extend(generate_shell(&sdc, 0.0, nodes.len() as u32).unwrap());
        let n = nodes.len() as u32;
        nodes.push(NodeRecord::ground(NodeId(n), NodeKind::GroundStation, "GS0", GeoPoint::new(30.0, 10.0)));
        nodes.push(NodeRecord::ground(NodeId(n + 1), NodeKind::GroundDataCenter, "GDC0", GeoPoint::new(35.0, 15.0)));
        let refs: Vec<&NodeRecord> = nodes.iter().filter(|n| n.kind.is_ground()).collect();
        let igl = synthesize_igl(&refs, 1, 1);
        Topology::new(nodes, SlotClock::default(), params, LatencyParams::default(), igl).unwrap()
    }

    #[test]
    fn snapshot_is_deterministic_and_consistent() {
        let topo = small_topology(TopologyParams::default());
        for t in [0, 7, 33] {
            let g = topo.snapshot(t);
            assert_eq!(g, topo.snapshot(t));
            for l in g.links() {
                assert!(l.latency_ms > 0.0);
                let (ka, kb) = (topo.nodes[l.a.index()].kind, topo.nodes[l.b.index()].kind);
                match l.kind {
                    LinkKind::Isl => assert!(ka.is_space() && kb.is_space()),
                    LinkKind::Gsl => assert!(ka.is_ground() != kb.is_ground()),
                    LinkKind::Igl => assert!(ka.is_ground() && kb.is_ground()),
                }
            }
            for n in topo.nodes.iter().filter(|n| n.kind.is_ground()) {
                assert!(g.incident(n.id).filter(|l| l.kind == LinkKind::Gsl).count() <= 1);
            }
        }
    }

    #[test]
    fn disabling_link_classes_never_adds_edges() {
        let full = small_topology(TopologyParams::default()).snapshot(3);
        let only_isl = small_topology(TopologyParams {
            gsl: false,
            igl: false,
            ..Default::default()
        })
        .snapshot(3);
        assert!(only_isl.links().iter().all(|l| l.kind == LinkKind::Isl));
        assert!(only_isl.links().iter().all(|l| full.links().contains(l)));
        assert!(only_isl.links().len() < full.links().len());
    }
}
