//! Walker shells, ground sites and the service-region grid.
//!
//! Space nodes follow circular two-body orbits; the Earth rotates uniformly
//! underneath them, with Greenwich on the +X axis at t = 0. Ground nodes are
//! fixed in the Earth frame.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, Vec3, EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S, MU_EARTH};

/// Dense node index into the world node table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    /// Constellation satellite (tier-2 cache).
    Satellite,
    /// Space data center in sun-synchronous orbit (tier-1 origin).
    SpaceDataCenter,
    /// Ground station (tier-3 cache).
    GroundStation,
    /// Ground data center (tier-1 origin).
    GroundDataCenter,
}

impl NodeKind {
    pub fn is_space(self) -> bool {
        matches!(self, NodeKind::Satellite | NodeKind::SpaceDataCenter)
    }

    pub fn is_ground(self) -> bool {
        !self.is_space()
    }

    pub fn is_data_center(self) -> bool {
        matches!(self, NodeKind::SpaceDataCenter | NodeKind::GroundDataCenter)
    }

    pub fn label_prefix(self) -> &'static str {
        match self {
            NodeKind::Satellite => "S",
            NodeKind::SpaceDataCenter => "SDC",
            NodeKind::GroundStation => "GS",
            NodeKind::GroundDataCenter => "GDC",
        }
    }
}

/// One Walker shell: `num_planes` evenly spaced planes, `sats_per_plane`
/// evenly phased satellites each. Plane `p` is shifted in anomaly by
/// `p * phase_offset_deg`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSpec {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub num_planes: u32,
    pub sats_per_plane: u32,
    pub phase_offset_deg: f64,
    pub kind: NodeKind,
}

impl ShellSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_km > 0.0) {
            return Err(Error::config("altitude_km", "must be > 0"));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::config("inclination_deg", "must lie in [0, 180]"));
        }
        if self.num_planes == 0 {
            return Err(Error::config("planes", "must be >= 1"));
        }
        if self.sats_per_plane == 0 {
            return Err(Error::config("sats_per_plane", "must be >= 1"));
        }
        if !self.phase_offset_deg.is_finite() {
            return Err(Error::config("phase_offset_deg", "must be finite"));
        }
        if !self.kind.is_space() {
            return Err(Error::config("kind", "shells hold space nodes only"));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.num_planes as usize * self.sats_per_plane as usize
    }
}

/// Circular orbit in the Earth-centred inertial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularOrbit {
    pub radius_km: f64,
    pub inclination_rad: f64,
    pub raan_rad: f64,
    /// Argument of latitude at t = 0.
    pub anomaly0_rad: f64,
    pub plane: u32,
    pub index_in_plane: u32,
}

impl CircularOrbit {
    pub fn altitude_km(&self) -> f64 {
        self.radius_km - EARTH_RADIUS_KM
    }

    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.radius_km.powi(3)).sqrt()
    }

    pub fn period_s(&self) -> f64 {
        TAU / self.mean_motion()
    }

    /// Inertial position `seconds` after the reference epoch.
    pub fn eci_at(&self, seconds: f64) -> Vec3 {
        let u = self.anomaly0_rad + self.mean_motion() * seconds;
        let (su, cu) = u.sin_cos();
        let (si, ci) = self.inclination_rad.sin_cos();
        let (so, co) = self.raan_rad.sin_cos();
        Vec3::new(
            self.radius_km * (co * cu - so * su * ci),
            self.radius_km * (so * cu + co * su * ci),
            self.radius_km * (su * si),
        )
    }

    /// Unit normal of the orbital plane.
    pub fn normal(&self) -> Vec3 {
        let (si, ci) = self.inclination_rad.sin_cos();
        let (so, co) = self.raan_rad.sin_cos();
        Vec3::new(so * si, -co * si, ci)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Orbit(CircularOrbit),
    Ground(GeoPoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub location: Location,
    /// Storage capacity per slot (MB).
    pub capacity_mb: f64,
}

impl NodeRecord {
    pub fn ground(id: NodeId, kind: NodeKind, label: impl Into<String>, at: GeoPoint) -> Self {
        debug_assert!(kind.is_ground());
        Self {
            id,
            kind,
            label: label.into(),
            location: Location::Ground(at),
            capacity_mb: 0.0,
        }
    }

    pub fn orbit(&self) -> Option<&CircularOrbit> {
        match &self.location {
            Location::Orbit(o) => Some(o),
            Location::Ground(_) => None,
        }
    }

    pub fn site(&self) -> Option<GeoPoint> {
        match self.location {
            Location::Ground(g) => Some(g),
            Location::Orbit(_) => None,
        }
    }

    /// Earth-fixed position `seconds` after the epoch.
    pub fn ecef_at(&self, seconds: f64) -> Vec3 {
        match &self.location {
            Location::Orbit(o) => eci_to_ecef(o.eci_at(seconds), seconds),
            Location::Ground(g) => g.to_ecef(0.0),
        }
    }
}

/// Maps slot indices to seconds after the epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotClock {
    pub slot_seconds: f64,
}

impl Default for SlotClock {
    fn default() -> Self {
        Self { slot_seconds: 60.0 }
    }
}

impl SlotClock {
    pub fn seconds(&self, slot: usize) -> f64 {
        slot as f64 * self.slot_seconds
    }
}

/// Rotates an inertial vector into the Earth-fixed frame at `seconds`.
pub fn eci_to_ecef(eci: Vec3, seconds: f64) -> Vec3 {
    eci.rotate_z(-EARTH_ROTATION_RAD_S * seconds)
}

/// Instantiates a Walker shell. Node ids start at `first_id`; `epoch_s`
/// advances every satellite along its orbit before the reference epoch.
pub fn generate_shell(spec: &ShellSpec, epoch_s: f64, first_id: u32) -> Result<Vec<NodeRecord>> {
    spec.validate()?;
    let radius_km = EARTH_RADIUS_KM + spec.altitude_km;
    let inclination_rad = spec.inclination_deg.to_radians();
    let mean_motion = (MU_EARTH / radius_km.powi(3)).sqrt();
    let mut nodes = Vec::with_capacity(spec.size());
    for plane in 0..spec.num_planes {
        let raan_rad = TAU * plane as f64 / spec.num_planes as f64;
        for k in 0..spec.sats_per_plane {
            let anomaly = TAU * k as f64 / spec.sats_per_plane as f64
                + (plane as f64 * spec.phase_offset_deg).to_radians()
                + mean_motion * epoch_s;
            let id = NodeId(first_id + nodes.len() as u32);
            nodes.push(NodeRecord {
                id,
                kind: spec.kind,
                label: format!("{}{}-{}", spec.kind.label_prefix(), plane, k),
                location: Location::Orbit(CircularOrbit {
                    radius_km,
                    inclination_rad,
                    raan_rad,
                    anomaly0_rad: anomaly.rem_euclid(TAU),
                    plane,
                    index_in_plane: k,
                }),
                capacity_mb: 0.0,
            });
        }
    }
    Ok(nodes)
}

/// Inertial position of a space node at slot `t`.
pub fn propagate(node: &NodeRecord, t: usize, clock: SlotClock) -> Result<Vec3> {
    match &node.location {
        Location::Orbit(o) => Ok(o.eci_at(clock.seconds(t))),
        Location::Ground(_) => Err(Error::contract(format!(
            "propagate called on ground node {}",
            node.label
        ))),
    }
}

/// Latitude/longitude (deg) of the nadir point of an Earth-fixed position.
pub fn subsatellite_point(position: Vec3) -> Result<GeoPoint> {
    let r = position.norm();
    if !(r > 0.0) {
        return Err(Error::contract("sub-satellite point of a zero vector"));
    }
    let lat = (position.z / r).clamp(-1.0, 1.0).asin().to_degrees();
    let lon = position.y.atan2(position.x).to_degrees();
    Ok(GeoPoint::new(lat, lon))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId(pub u32);

impl RegionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Equal-angle latitude x longitude tiling. Region ids run latitude-major
/// from the (-90, -180) corner. Bands are half-open `[lo, hi)`; the last
/// band in each direction also takes its upper edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionGrid {
    pub lat_bands: u32,
    pub lon_bands: u32,
}

impl RegionGrid {
    pub fn new(lat_bands: u32, lon_bands: u32) -> Result<Self> {
        if lat_bands == 0 {
            return Err(Error::config("lat_bands", "must be >= 1"));
        }
        if lon_bands == 0 {
            return Err(Error::config("lon_bands", "must be >= 1"));
        }
        Ok(Self {
            lat_bands,
            lon_bands,
        })
    }

    pub fn len(&self) -> usize {
        self.lat_bands as usize * self.lon_bands as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lat_step(&self) -> f64 {
        180.0 / self.lat_bands as f64
    }

    pub fn lon_step(&self) -> f64 {
        360.0 / self.lon_bands as f64
    }

    /// (latitude band, longitude band) of a region.
    pub fn bands(&self, region: RegionId) -> (u32, u32) {
        (region.0 / self.lon_bands, region.0 % self.lon_bands)
    }

    pub fn center(&self, region: RegionId) -> GeoPoint {
        let (i, j) = self.bands(region);
        GeoPoint::new(
            -90.0 + (i as f64 + 0.5) * self.lat_step(),
            -180.0 + (j as f64 + 0.5) * self.lon_step(),
        )
    }

    pub fn regions(&self) -> impl Iterator<Item = RegionId> {
        (0..self.len() as u32).map(RegionId)
    }
}

pub fn assign_region(point: GeoPoint, grid: &RegionGrid) -> Result<RegionId> {
    let GeoPoint { lat_deg, lon_deg } = point;
    if !(-90.0..=90.0).contains(&lat_deg) {
        return Err(Error::contract(format!("latitude {lat_deg} outside [-90, 90]")));
    }
    if !(-180.0..180.0).contains(&lon_deg) {
        return Err(Error::contract(format!("longitude {lon_deg} outside [-180, 180)")));
    }
    let i = (((lat_deg + 90.0) / grid.lat_step()).floor() as u32).min(grid.lat_bands - 1);
    let j = (((lon_deg + 180.0) / grid.lon_step()).floor() as u32).min(grid.lon_bands - 1);
    Ok(RegionId(i * grid.lon_bands + j))
}

/// Region of a node at `seconds` (space nodes via their sub-satellite point).
pub fn node_region(node: &NodeRecord, seconds: f64, grid: &RegionGrid) -> Result<RegionId> {
    let point = match node.location {
        Location::Ground(g) => g,
        Location::Orbit(_) => subsatellite_point(node.ecef_at(seconds))?,
    };
    assign_region(point, grid)
}
