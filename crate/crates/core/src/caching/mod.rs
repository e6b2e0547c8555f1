//! Cache scoring, the storage/transmission cost model, constraint auditing
//! and three-tier placement.

pub mod audit;
pub mod cost;
pub mod greedy;
pub mod mlc3;
pub mod score;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::constellation::{NodeId, NodeKind};
use crate::demand::ContentId;
use crate::error::{Error, Result};

pub use audit::{audit_constraints, Assignment, Constraint, Violation};
pub use cost::{storage_cost, total_cost, transmission_cost, CostLedger};
pub use greedy::{greedy_place, Candidate, PlacementProblem, Selection};
pub use mlc3::{mlc3, Mlc3Inputs, Mlc3Output};
pub use score::{gs_cache_score, sat_cache_score, ScoreNormalizer, ScoreRecord};

/// Per-MB power coefficients for storage (by node kind) and transfer (by link kind).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Ground station storage.
    pub beta1: f64,
    /// Ground data center storage.
    pub beta2: f64,
    /// Satellite storage.
    pub lambda1: f64,
    /// Space data center storage.
    pub lambda2: f64,
    /// Inter-satellite transfer.
    pub theta_isl: f64,
    /// Ground-space transfer.
    pub eta: f64,
    /// Inter-ground transfer.
    pub xi: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            beta1: 0.3,
            beta2: 0.1,
            lambda1: 1.0,
            lambda2: 0.6,
            theta_isl: 0.5,
            eta: 1.0,
            xi: 0.1,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("theta_isl", self.theta_isl),
            ("eta", self.eta),
            ("xi", self.xi),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("cost.{name}"), "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn storage(&self, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::GroundStation => self.beta1,
            NodeKind::GroundDataCenter => self.beta2,
            NodeKind::Satellite => self.lambda1,
            NodeKind::SpaceDataCenter => self.lambda2,
        }
    }

    pub fn transfer(&self, kind: crate::topology::LinkKind) -> f64 {
        use crate::topology::LinkKind;
        match kind {
            LinkKind::Isl => self.theta_isl,
            LinkKind::Gsl => self.eta,
            LinkKind::Igl => self.xi,
        }
    }
}

/// Latency ceiling, redundancy cap and score windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    /// Per-request latency ceiling for cache hits (ms).
    pub delta_upper_latency_ms: f64,
    /// Cached volume cap as a multiple of the library size.
    pub phi: f64,
    /// Short request window (slots) in the ground-station score numerator.
    pub p: usize,
    /// Long request window (slots) in the ground-station score denominator.
    pub q: usize,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            delta_upper_latency_ms: 50.0,
            phi: 4.0,
            p: 5,
            q: 20,
        }
    }
}

impl ConstraintConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_upper_latency_ms > 0.0) {
            return Err(Error::config("constraints.delta_upper_latency_ms", "must be > 0"));
        }
        if !(self.phi > 0.0) || !self.phi.is_finite() {
            return Err(Error::config("constraints.phi", "must be > 0"));
        }
        if self.p > self.q {
            return Err(Error::config("constraints.p", "must be <= q"));
        }
        Ok(())
    }
}

/// Movement of `count` copies of one content item across the link `x`-`y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub x: NodeId,
    pub y: NodeId,
    pub content: ContentId,
    pub count: f64,
}

/// Cache contents and transfers per slot. Tier-1 origins hold the whole
/// library in every slot; `cached` lists the tier-2/3 entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlacementState {
    pub origins: Vec<NodeId>,
    cached: Vec<BTreeSet<(NodeId, ContentId)>>,
    transfers: Vec<Vec<Transfer>>,
}

impl PlacementState {
    pub fn new(slots: usize, mut origins: Vec<NodeId>) -> Self {
        origins.sort();
        origins.dedup();
        Self {
            origins,
            cached: vec![BTreeSet::new(); slots],
            transfers: vec![Vec::new(); slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.cached.len()
    }

    pub fn is_origin(&self, v: NodeId) -> bool {
        self.origins.binary_search(&v).is_ok()
    }

    pub fn cache(&mut self, t: usize, v: NodeId, f: ContentId) {
        self.cached[t].insert((v, f));
    }

    pub fn is_cached(&self, t: usize, v: NodeId, f: ContentId) -> bool {
        self.cached[t].contains(&(v, f))
    }

    /// P^t_{v,f}: 1 for origins and tier-2/3 entries, 0 otherwise.
    pub fn probability(&self, t: usize, v: NodeId, f: ContentId) -> f64 {
        if self.is_origin(v) || self.is_cached(t, v, f) {
            1.0
        } else {
            0.0
        }
    }

    /// Tier-2/3 entries at slot `t`, ordered by (node, content).
    pub fn cached(&self, t: usize) -> impl Iterator<Item = (NodeId, ContentId)> + '_ {
        self.cached[t].iter().copied()
    }

    pub fn add_transfer(&mut self, t: usize, tr: Transfer) {
        self.transfers[t].push(tr);
    }

    pub fn transfers(&self, t: usize) -> &[Transfer] {
        &self.transfers[t]
    }

    /// Links with distribution indicator 1 at slot `t`, as `(min, max)` pairs.
    pub fn active_pairs(&self, t: usize) -> BTreeSet<(NodeId, NodeId)> {
        self.transfers[t]
            .iter()
            .map(|tr| if tr.x < tr.y { (tr.x, tr.y) } else { (tr.y, tr.x) })
            .collect()
    }
}
