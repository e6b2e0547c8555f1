//! Cache desirability scores for ground stations and satellites.
//!
//! Both scores multiply a demand share, a latency-reduction ratio and a
//! size-to-capacity ratio, then divide by the largest score seen. Users of a
//! region sit at the region centre, so the per-user latency sums reduce to
//! one latency per node.

use log::warn;

use crate::constellation::{NodeId, RegionId};
use crate::demand::{ContentId, RequestTensor};

fn window_sum(tensor: &RequestTensor, a: RegionId, t: usize, len: usize, f: Option<ContentId>) -> f64 {
    let from = t.saturating_sub(len);
    (from..=t.min(tensor.slots().saturating_sub(1)))
        .map(|i| match f {
            Some(f) => f64::from(tensor.get(i, a, f)),
            None => tensor.region_total(i, a) as f64,
        })
        .sum()
}

fn ratio_terms(latency_sum: f64, latency_here: f64, size_mb: f64, capacity_mb: f64) -> f64 {
    if !(capacity_mb > 0.0) {
        warn!("score requested for a node without storage; scoring 0");
        return 0.0;
    }
    if !(latency_here > 0.0) || !latency_here.is_finite() {
        return 0.0;
    }
    latency_sum / latency_here * size_mb / capacity_mb
}

/// Unnormalized ground-station score. The numerator counts requests for `f`
/// in region `a` over slots `t-p..=t`; the denominator counts all requests
/// there over `t-q..=t`. `latency_sum` adds up the latency to every ground
/// station, `latency_here` is the latency to the scored station.
#[allow(clippy::too_many_arguments)]
pub fn gs_cache_score(
    tensor: &RequestTensor,
    a: RegionId,
    f: ContentId,
    t: usize,
    windows: (usize, usize),
    latency_sum: f64,
    latency_here: f64,
    size_mb: f64,
    capacity_mb: f64,
) -> f64 {
    let all = window_sum(tensor, a, t, windows.1, None);
    if all == 0.0 {
        return 0.0;
    }
    let share = window_sum(tensor, a, t, windows.0, Some(f)) / all;
    share * ratio_terms(latency_sum, latency_here, size_mb, capacity_mb)
}

/// Unnormalized satellite score. `popularity` is the global popularity row
/// for slot `t`; the latency sum runs over satellites and space data centers.
pub fn sat_cache_score(popularity: &[f64], f: ContentId, latency_sum: f64, latency_here: f64, size_mb: f64, capacity_mb: f64) -> f64 {
    let total: f64 = popularity.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    popularity[f.index()] / total * ratio_terms(latency_sum, latency_here, size_mb, capacity_mb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRecord {
    pub slot: usize,
    pub node: NodeId,
    pub content: ContentId,
    pub raw: f64,
    /// Normalized by the maximum seen up to this record.
    pub running: f64,
    /// Normalized by the maximum over the whole run.
    pub normalized: f64,
}

/// Max-normalization, both running and end-of-run.
#[derive(Debug, Clone, Default)]
pub struct ScoreNormalizer {
    max: f64,
    records: Vec<ScoreRecord>,
}

impl ScoreNormalizer {
    pub fn push(&mut self, slot: usize, node: NodeId, content: ContentId, raw: f64) -> f64 {
        self.max = self.max.max(raw);
        let running = if self.max > 0.0 { raw / self.max } else { 0.0 };
        self.records.push(ScoreRecord {
            slot,
            node,
            content,
            raw,
            running,
            normalized: running,
        });
        running
    }

    pub fn finish(mut self) -> Vec<ScoreRecord> {
        for r in &mut self.records {
            r.normalized = if self.max > 0.0 { r.raw / self.max } else { 0.0 };
        }
        self.records
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_requests_score_zero() {
        let tensor = RequestTensor::zeros(3, 1, 2);
        assert_eq!(gs_cache_score(&tensor, RegionId(0), ContentId(0), 2, (1, 2), 30.0, 10.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn single_content_has_full_share() {
        let s = sat_cache_score(&[3.0], ContentId(0), 20.0, 10.0, 1.0, 4.0);
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_popularity_splits_share() {
        let pop = [2.0; 4];
        let s = sat_cache_score(&pop, ContentId(1), 10.0, 10.0, 1.0, 1.0);
        assert!((s - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_capacity_scores_zero() {
        assert_eq!(sat_cache_score(&[1.0], ContentId(0), 1.0, 1.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn normalizer_maximum_scores_one() {
        let mut n = ScoreNormalizer::default();
        assert_eq!(n.push(0, NodeId(0), ContentId(0), 2.0), 1.0);
        assert_eq!(n.push(0, NodeId(1), ContentId(0), 1.0), 0.5);
        assert_eq!(n.push(1, NodeId(0), ContentId(1), 4.0), 1.0);
        let recs = n.finish();
        assert_eq!(recs.iter().map(|r| r.normalized).collect::<Vec<_>>(), vec![0.5, 0.25, 1.0]);
        assert!(recs.iter().all(|r| (0.0..=1.0).contains(&r.normalized)));
    }
}
