//! Scenario file in TOML. Keys left out take the desk-scale defaults; the
//! two shell sections are all-or-nothing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::caching::{ConstraintConfig, CostParams};
use crate::constellation::{NodeKind, ShellSpec};
use crate::demand::PopularityParams;
use crate::error::{Error, Result};
use crate::linkmodel::{LatencyParams, LinkPerfRanges};
use crate::service::TerrestrialAccess;
use crate::topology::TopologyParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub slots: usize,
    pub slot_seconds: f64,
    pub constellation: ShellConfig,
    pub space_data_centers: ShellConfig,
    pub ground: GroundConfig,
    pub regions: RegionConfig,
    pub demand: DemandConfig,
    pub links: LinksConfig,
    pub latency: LatencyConfig,
    pub topology: TopologyConfig,
    pub access: TerrestrialAccess,
    pub capacity: CapacityConfig,
    pub constraints: ConstraintConfig,
    pub cost: CostParams,
    pub sweep: SweepConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 7,
            slots: 90,
            slot_seconds: 60.0,
            constellation: ShellConfig {
                altitude_km: 540.0,
                inclination_deg: 53.2,
                planes: 24,
                sats_per_plane: 22,
                phase_offset_deg: 1.0,
            },
            space_data_centers: ShellConfig {
                altitude_km: 700.0,
                inclination_deg: 97.5,
                planes: 1,
                sats_per_plane: 2,
                phase_offset_deg: 0.0,
            },
            ground: GroundConfig::default(),
            regions: RegionConfig::default(),
            demand: DemandConfig::default(),
            links: LinksConfig::default(),
            latency: LatencyConfig::default(),
            topology: TopologyConfig::default(),
            access: TerrestrialAccess::default(),
            capacity: CapacityConfig::default(),
            constraints: ConstraintConfig::default(),
            cost: CostParams::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// A shell section must give every key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub planes: u32,
    pub sats_per_plane: u32,
    /// Anomaly shift between adjacent planes (deg).
    pub phase_offset_deg: f64,
}

impl ShellConfig {
    pub fn spec(&self, kind: NodeKind) -> ShellSpec {
        ShellSpec {
            altitude_km: self.altitude_km,
            inclination_deg: self.inclination_deg,
            num_planes: self.planes,
            sats_per_plane: self.sats_per_plane,
            phase_offset_deg: self.phase_offset_deg,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundConfig {
    pub stations: usize,
    pub data_centers: usize,
    /// Optional `label,kind,lat,lon` file replacing the synthesized sites.
    pub sites_file: Option<PathBuf>,
    /// Optional `source_site_id,dest_site_id,rtt_ms` file replacing synthesized IGLs.
    pub igl_trace: Option<PathBuf>,
    /// Nearest neighbours each ground node links to when IGLs are synthesized.
    pub igl_neighbors: usize,
    /// Latitude band (deg) synthesized sites are drawn from.
    pub lat_range: [f64; 2],
}

impl Default for GroundConfig {
    fn default() -> Self {
        Self {
            stations: 12,
            data_centers: 20,
            sites_file: None,
            igl_trace: None,
            igl_neighbors: 3,
            lat_range: [-55.0, 65.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub lat_bands: u32,
    pub lon_bands: u32,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            lat_bands: 6,
            lon_bands: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    pub contents: usize,
    pub categories: usize,
    pub min_size_mb: f64,
    pub max_size_mb: f64,
    pub zipf_s: f64,
    pub requests_per_slot: u64,
    pub alpha: f64,
    pub theta_decay: f64,
    /// Optional `slot,region_id,content_id,count` file replacing synthesized demand.
    pub request_file: Option<PathBuf>,
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            contents: 50,
            categories: 10,
            min_size_mb: 0.2,
            max_size_mb: 1.0,
            zipf_s: 0.8,
            requests_per_slot: 3600,
            alpha: 0.6,
            theta_decay: 0.5,
            request_file: None,
        }
    }
}

impl DemandConfig {
    pub fn popularity(&self) -> PopularityParams {
        PopularityParams {
            alpha: self.alpha,
            theta_decay: self.theta_decay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinksConfig {
    /// Transmission interval the link performance is counted over (ms).
    pub tti_ms: f64,
    pub isl: LinkPerfRanges,
    pub gsl: LinkPerfRanges,
    pub igl: LinkPerfRanges,
    pub isl_trace: Option<PathBuf>,
    pub gsl_trace: Option<PathBuf>,
    pub igl_trace: Option<PathBuf>,
}

fn scaled_ranges(factor: f64) -> LinkPerfRanges {
    let base = LinkPerfRanges::default();
    LinkPerfRanges {
        tbs_bits: [base.tbs_bits[0] * factor, base.tbs_bits[1] * factor],
        ..base
    }
}

impl Default for LinksConfig {
    fn default() -> Self {
        Self {
            tti_ms: 1.0,
            isl: scaled_ranges(5.0),
            gsl: LinkPerfRanges::default(),
            igl: scaled_ranges(10.0),
            isl_trace: None,
            gsl_trace: None,
            igl_trace: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    pub omega: f64,
    pub psi: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self { omega: 1.0, psi: 1.0 }
    }
}

impl LatencyConfig {
    pub fn params(&self) -> LatencyParams {
        LatencyParams {
            omega: self.omega,
            psi: self.psi,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub min_elevation_deg: f64,
    pub sdc_uplinks: usize,
    pub los_clearance_km: f64,
    pub isl: bool,
    pub gsl: bool,
    pub igl: bool,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        let p = TopologyParams::default();
        Self {
            min_elevation_deg: p.min_elevation_deg,
            sdc_uplinks: p.sdc_uplinks,
            los_clearance_km: p.los_clearance_km,
            isl: p.isl,
            gsl: p.gsl,
            igl: p.igl,
        }
    }
}

impl TopologyConfig {
    pub fn params(&self) -> TopologyParams {
        TopologyParams {
            min_elevation_deg: self.min_elevation_deg,
            sdc_uplinks: self.sdc_uplinks,
            los_clearance_km: self.los_clearance_km,
            isl: self.isl,
            gsl: self.gsl,
            igl: self.igl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub satellite_mb: f64,
    pub ground_station_mb: f64,
    pub data_center_mb: f64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            satellite_mb: 6.0,
            ground_station_mb: 12.0,
            data_center_mb: 1.0e6,
        }
    }
}

impl CapacityConfig {
    pub fn of(&self, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::Satellite => self.satellite_mb,
            NodeKind::GroundStation => self.ground_station_mb,
            NodeKind::SpaceDataCenter | NodeKind::GroundDataCenter => self.data_center_mb,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Category counts to sweep; one content per category.
    pub categories: Vec<usize>,
    /// Slots simulated per sweep point.
    pub slots: usize,
    /// Category count splitting the "small" and "large" regimes.
    pub split: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            categories: vec![1, 5, 10, 20, 30, 40, 50, 60],
            slots: 30,
            split: 30,
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Reads and validates a scenario file. Relative data-file paths are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in s.data_files_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in s.data_files_mut() {
            if !p.exists() {
                return Err(Error::io(p.clone(), std::io::Error::from(std::io::ErrorKind::NotFound)));
            }
        }
        Ok(s)
    }

    fn data_files_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [
            self.ground.sites_file.as_mut(),
            self.ground.igl_trace.as_mut(),
            self.demand.request_file.as_mut(),
            self.links.isl_trace.as_mut(),
            self.links.gsl_trace.as_mut(),
            self.links.igl_trace.as_mut(),
        ]
        .into_iter()
        .flatten()
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(Error::config("slots", "must be >= 1"));
        }
        if !(self.slot_seconds > 0.0) {
            return Err(Error::config("slot_seconds", "must be > 0"));
        }
        self.constellation
            .spec(NodeKind::Satellite)
            .validate()
            .map_err(|e| prefix("constellation", e))?;
        self.space_data_centers
            .spec(NodeKind::SpaceDataCenter)
            .validate()
            .map_err(|e| prefix("space_data_centers", e))?;
        if self.ground.sites_file.is_none() && self.ground.stations + self.ground.data_centers == 0 {
            return Err(Error::config("ground", "need at least one ground node"));
        }
        let [lo, hi] = self.ground.lat_range;
        if !(-90.0..=90.0).contains(&lo) || !(-90.0..=90.0).contains(&hi) || lo > hi {
            return Err(Error::config("ground.lat_range", "need -90 <= min <= max <= 90"));
        }
        if self.regions.lat_bands == 0 {
            return Err(Error::config("regions.lat_bands", "must be >= 1"));
        }
        if self.regions.lon_bands == 0 {
            return Err(Error::config("regions.lon_bands", "must be >= 1"));
        }
        let d = &self.demand;
        if d.contents == 0 {
            return Err(Error::config("demand.contents", "must be >= 1"));
        }
        if !(d.min_size_mb > 0.0 && d.min_size_mb <= d.max_size_mb) {
            return Err(Error::config("demand.min_size_mb", "need 0 < min_size_mb <= max_size_mb"));
        }
        if !(d.zipf_s > 0.0) {
            return Err(Error::config("demand.zipf_s", "must be > 0"));
        }
        d.popularity().validate()?;
        if !(self.links.tti_ms > 0.0) {
            return Err(Error::config("links.tti_ms", "must be > 0"));
        }
        self.links.isl.validate("links.isl")?;
        self.links.gsl.validate("links.gsl")?;
        self.links.igl.validate("links.igl")?;
        self.latency.params().validate().map_err(|e| prefix("latency", e))?;
        if !(0.0..=90.0).contains(&self.topology.min_elevation_deg) {
            return Err(Error::config("topology.min_elevation_deg", "must lie in [0, 90]"));
        }
        if !(self.topology.los_clearance_km >= 0.0) {
            return Err(Error::config("topology.los_clearance_km", "must be >= 0"));
        }
        self.access.validate()?;
        for (name, v) in [
            ("capacity.satellite_mb", self.capacity.satellite_mb),
            ("capacity.ground_station_mb", self.capacity.ground_station_mb),
            ("capacity.data_center_mb", self.capacity.data_center_mb),
        ] {
            if !(v >= 0.0) {
                return Err(Error::config(name, "must be >= 0"));
            }
        }
        self.constraints.validate()?;
        self.cost.validate()?;
        if self.sweep.categories.is_empty() || self.sweep.categories.contains(&0) {
            return Err(Error::config("sweep.categories", "need at least one count, all >= 1"));
        }
        if self.sweep.categories.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("sweep.categories", "counts must be strictly ascending"));
        }
        if self.sweep.slots == 0 {
            return Err(Error::config("sweep.slots", "must be >= 1"));
        }
        Ok(())
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::Config { field, reason } => Error::config(format!("{section}.{field}"), reason),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_desk_default() {
        assert_eq!(Scenario::from_toml_str("").unwrap(), Scenario::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Scenario::from_toml_str("[demand]\nzipf = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("zipf"), "{err}");
    }

    #[test]
    fn negative_phi_is_rejected() {
        let err = Scenario::from_toml_str("[constraints]\nphi = -1\n").unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "constraints.phi"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn shell_errors_carry_section() {
        let text = "[constellation]\naltitude_km = -5\ninclination_deg = 53\nplanes = 4\nsats_per_plane = 4\nphase_offset_deg = 0\n";
        let err = Scenario::from_toml_str(text).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "constellation.altitude_km"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn partial_shell_is_rejected() {
        let err = Scenario::from_toml_str("[space_data_centers]\nplanes = 4\n").unwrap_err();
        assert!(err.to_string().contains("altitude_km"), "{err}");
    }
}
