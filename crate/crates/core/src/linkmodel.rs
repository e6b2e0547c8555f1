//! Per-slot link performance and content delivery latency.
//!
//! Link performance is `TBS * R * log2(M) * log2(1 + TP * SNR)` bits per
//! transmission interval. Content sizes are megabytes (10^6 bytes, 8*10^6
//! bits); throughputs handed to [`content_latency`] are bits per second.

use std::io::Read;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::LIGHT_KM_PER_MS;

pub const BITS_PER_MB: f64 = 8.0e6;

/// Physical-layer parameters for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPerfSample {
    pub tbs_bits: f64,
    pub modulation_order: u32,
    pub coding_rate: f64,
    pub snr_linear: f64,
    pub tx_power_norm: f64,
}

impl LinkPerfSample {
    pub fn validate(&self) -> Result<()> {
        if !(self.tbs_bits > 0.0) {
            return Err(Error::contract("transport block size must be > 0"));
        }
        if self.modulation_order < 2 || !self.modulation_order.is_power_of_two() {
            return Err(Error::contract("modulation order must be a power of two >= 2"));
        }
        if !(self.coding_rate > 0.0 && self.coding_rate <= 1.0) {
            return Err(Error::contract("coding rate must lie in (0, 1]"));
        }
        if !(self.snr_linear > 0.0) {
            return Err(Error::contract("SNR must be > 0"));
        }
        if !(self.tx_power_norm > 0.0) {
            return Err(Error::contract("transmit power must be > 0"));
        }
        Ok(())
    }

    /// Shannon factor f(SNR, TP).
    pub fn shannon(&self) -> f64 {
        (1.0 + self.tx_power_norm * self.snr_linear).log2()
    }

    /// Link performance in bits per transmission interval.
    pub fn performance(&self) -> f64 {
        self.tbs_bits * self.coding_rate * f64::from(self.modulation_order).log2() * self.shannon()
    }
}

/// Per-slot link parameters for one link class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPerfSeries {
    samples: Vec<LinkPerfSample>,
    /// Transmission interval length in milliseconds.
    pub tti_ms: f64,
}

impl LinkPerfSeries {
    pub fn new(samples: Vec<LinkPerfSample>, tti_ms: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::contract("link performance series is empty"));
        }
        if !(tti_ms > 0.0) {
            return Err(Error::config("tti_ms", "must be > 0"));
        }
        for s in &samples {
            s.validate()?;
        }
        Ok(Self { samples, tti_ms })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample for slot `t`; series shorter than the horizon repeat cyclically.
    pub fn sample(&self, t: usize) -> &LinkPerfSample {
        &self.samples[t % self.samples.len()]
    }

    pub fn samples(&self) -> &[LinkPerfSample] {
        &self.samples
    }

    /// Throughput at slot `t` in bits per second.
    pub fn throughput_bps(&self, t: usize) -> f64 {
        self.sample(t).performance() * 1000.0 / self.tti_ms
    }
}

/// Link performance LP^t of a series at slot `t`.
pub fn link_performance(series: &LinkPerfSeries, t: usize) -> Result<f64> {
    let s = series.sample(t);
    s.validate()?;
    Ok(s.performance())
}

/// Uniform ranges used to synthesize a series when no trace is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkPerfRanges {
    pub tbs_bits: [f64; 2],
    pub modulation_orders: Vec<u32>,
    pub coding_rate: [f64; 2],
    pub snr_linear: [f64; 2],
    pub tx_power_norm: [f64; 2],
}

impl Default for LinkPerfRanges {
    fn default() -> Self {
        Self {
            tbs_bits: [40_000.0, 80_000.0],
            modulation_orders: vec![4, 16, 64],
            coding_rate: [0.5, 0.9],
            snr_linear: [10.0, 100.0],
            tx_power_norm: [0.5, 1.0],
        }
    }
}

impl LinkPerfRanges {
    pub fn validate(&self, field: &str) -> Result<()> {
        let ordered = |r: [f64; 2]| r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite();
        if !ordered(self.tbs_bits) {
            return Err(Error::config(format!("{field}.tbs_bits"), "need 0 < min <= max"));
        }
        if self.modulation_orders.is_empty()
            || self.modulation_orders.iter().any(|&m| m < 2 || !m.is_power_of_two())
        {
            return Err(Error::config(
                format!("{field}.modulation_orders"),
                "need powers of two >= 2",
            ));
        }
        if !ordered(self.coding_rate) || self.coding_rate[1] > 1.0 {
            return Err(Error::config(format!("{field}.coding_rate"), "need 0 < min <= max <= 1"));
        }
        if !ordered(self.snr_linear) {
            return Err(Error::config(format!("{field}.snr_linear"), "need 0 < min <= max"));
        }
        if !ordered(self.tx_power_norm) {
            return Err(Error::config(format!("{field}.tx_power_norm"), "need 0 < min <= max"));
        }
        Ok(())
    }

    /// Smallest and largest link performance reachable within the ranges.
    pub fn performance_bounds(&self) -> (f64, f64) {
        let m_min = *self.modulation_orders.iter().min().expect("validated") as f64;
        let m_max = *self.modulation_orders.iter().max().expect("validated") as f64;
        let lo = self.tbs_bits[0]
            * self.coding_rate[0]
            * m_min.log2()
            * (1.0 + self.tx_power_norm[0] * self.snr_linear[0]).log2();
        let hi = self.tbs_bits[1]
            * self.coding_rate[1]
            * m_max.log2()
            * (1.0 + self.tx_power_norm[1] * self.snr_linear[1]).log2();
        (lo, hi)
    }

    pub fn synthesize(&self, slots: usize, tti_ms: f64, rng: &mut ChaCha8Rng) -> Result<LinkPerfSeries> {
        self.validate("links")?;
        let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| {
            if r[0] == r[1] {
                r[0]
            } else {
                rng.random_range(r[0]..=r[1])
            }
        };
        let samples = (0..slots.max(1))
            .map(|_| LinkPerfSample {
                tbs_bits: draw(rng, self.tbs_bits),
                modulation_order: self.modulation_orders[rng.random_range(0..self.modulation_orders.len())],
                coding_rate: draw(rng, self.coding_rate),
                snr_linear: draw(rng, self.snr_linear),
                tx_power_norm: draw(rng, self.tx_power_norm),
            })
            .collect();
        LinkPerfSeries::new(samples, tti_ms)
    }
}

/// Reads a per-slot link parameter trace:
/// `slot, tbs_bits, modulation_order, coding_rate, snr_linear, tx_power_norm`.
/// Lines starting with `#` are comments; a leading header row is skipped.
pub fn read_link_trace<R: Read>(reader: R, name: &str, tti_ms: f64) -> Result<LinkPerfSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(usize, LinkPerfSample)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && rec.get(0) == Some("slot") {
            continue;
        }
        let bad = |reason: String| Error::Ingest {
            file: name.to_string(),
            row: line,
            reason,
        };
        if rec.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| bad(format!("field {} is not a number: {:?}", k + 1, &rec[k])))
        };
        let slot = rec[0]
            .parse::<usize>()
            .map_err(|_| bad(format!("bad slot {:?}", &rec[0])))?;
        let modulation_order = rec[2]
            .parse::<u32>()
            .map_err(|_| bad(format!("bad modulation order {:?}", &rec[2])))?;
        let sample = LinkPerfSample {
            tbs_bits: num(1)?,
            modulation_order,
            coding_rate: num(3)?,
            snr_linear: num(4)?,
            tx_power_norm: num(5)?,
        };
        sample.validate().map_err(|e| bad(e.to_string()))?;
        rows.push((slot, sample));
    }
    rows.sort_by_key(|(slot, _)| *slot);
    for (expected, (slot, _)) in rows.iter().enumerate() {
        if *slot != expected {
            return Err(Error::Ingest {
                file: name.to_string(),
                row: 0,
                reason: format!("slots must be contiguous from 0; missing slot {expected}"),
            });
        }
    }
    LinkPerfSeries::new(rows.into_iter().map(|(_, s)| s).collect(), tti_ms)
}

/// Weights in the delivery latency model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyParams {
    /// Link-performance weighting, in (0, 1].
    pub omega: f64,
    /// Propagation weighting, in (0, 1].
    pub psi: f64,
    /// Speed of light (km/ms).
    pub c_km_per_ms: f64,
}

impl Default for LatencyParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            psi: 1.0,
            c_km_per_ms: LIGHT_KM_PER_MS,
        }
    }
}

impl LatencyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::config("omega", "must lie in (0, 1]"));
        }
        if !(self.psi > 0.0 && self.psi <= 1.0) {
            return Err(Error::config("psi", "must lie in (0, 1]"));
        }
        if !(self.c_km_per_ms > 0.0) {
            return Err(Error::config("c_km_per_ms", "must be > 0"));
        }
        Ok(())
    }

    /// One-way propagation delay (ms) over `distance_km`.
    pub fn propagation_ms(&self, distance_km: f64) -> f64 {
        distance_km / (self.psi * self.c_km_per_ms)
    }

    /// Transmission delay (ms) of `size_mb` over a `throughput_bps` link.
    pub fn transmission_ms(&self, size_mb: f64, throughput_bps: f64) -> f64 {
        size_mb * BITS_PER_MB / (self.omega * throughput_bps) * 1000.0
    }
}

/// Delivery latency (ms) of a `size_mb` item over `path_distance_km` whose
/// bottleneck throughput is `lp_bps`.
pub fn content_latency(size_mb: f64, path_distance_km: f64, params: &LatencyParams, lp_bps: f64) -> Result<f64> {
    params.validate().map_err(|e| Error::contract(e.to_string()))?;
    if !(lp_bps > 0.0) {
        return Err(Error::contract("link performance must be > 0"));
    }
    if !(path_distance_km >= 0.0) {
        return Err(Error::contract("path distance must be >= 0"));
    }
    if !(size_mb >= 0.0) {
        return Err(Error::contract("content size must be >= 0"));
    }
    Ok(params.transmission_ms(size_mb, lp_bps) + params.propagation_ms(path_distance_km))
}

/// Delivery latency (ms) along a multi-hop path whose per-hop propagation
/// delays are already summed into `propagation_ms`.
pub fn path_content_latency(size_mb: f64, propagation_ms: f64, bottleneck_bps: f64, params: &LatencyParams) -> f64 {
    params.transmission_ms(size_mb, bottleneck_bps) + propagation_ms
}
