//! Cost against the number of content categories, one content per category.

use rayon::prelude::*;

use crate::error::Result;
use crate::scenario::config::Scenario;
use crate::scenario::metrics::run_scheme;
use crate::scenario::scheme::Scheme;
use crate::scenario::world::World;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub categories: usize,
    pub total_cost: f64,
    /// `total_cost` scaled so the scheme's largest value is 10.
    pub rescaled: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn series(&self, scheme: Scheme) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    /// Least-squares slope of raw total cost against category count, over
    /// points with at least `from` categories.
    pub fn slope_from(&self, scheme: Scheme, from: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .series(scheme)
            .filter(|r| r.categories >= from)
            .map(|r| (r.categories as f64, r.total_cost))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// Widest gap between the rescaled costs of `schemes` at one category
    /// count below `below`.
    pub fn max_spread_below(&self, schemes: &[Scheme], below: usize) -> f64 {
        let mut counts: Vec<usize> = self.rows.iter().map(|r| r.categories).filter(|&k| k < below).collect();
        counts.dedup();
        counts
            .into_iter()
            .map(|k| {
                let vals: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.categories == k && schemes.contains(&r.scheme))
                    .map(|r| r.rescaled)
                    .collect();
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Scenario for one sweep point: `k` contents in `k` categories, demand
/// scaled so each content keeps the base per-content request rate.
pub fn sweep_point(base: &Scenario, k: usize) -> Scenario {
    let mut s = base.clone();
    s.slots = base.sweep.slots;
    s.demand.contents = k;
    s.demand.categories = k;
    s.demand.request_file = None;
    s.demand.requests_per_slot = (base.demand.requests_per_slot * k as u64 / base.demand.contents as u64).max(1);
    s
}

pub fn sweep_content_categories(base: &Scenario, schemes: &[Scheme]) -> Result<SweepTable> {
    let points: Vec<Vec<(Scheme, usize, f64)>> = base
        .sweep
        .categories
        .par_iter()
        .map(|&k| {
            let world = World::build(&sweep_point(base, k))?;
            schemes
                .iter()
                .map(|&sc| Ok((sc, k, run_scheme(&world, sc)?.report.total_cost)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &sc in schemes {
        let series: Vec<(usize, f64)> = points.iter().flatten().filter(|p| p.0 == sc).map(|p| (p.1, p.2)).collect();
        let max = series.iter().map(|p| p.1).fold(0.0, f64::max);
        for (k, c) in series {
            rows.push(SweepRow {
                scheme: sc,
                categories: k,
                total_cost: c,
                rescaled: if max > 0.0 { c / max * 10.0 } else { 0.0 },
            });
        }
    }
    Ok(SweepTable { rows })
}
