//! Content library, request tensor and time-decayed popularity.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::constellation::{RegionGrid, RegionId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentId(pub u32);

impl ContentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentItem {
    pub id: ContentId,
    pub size_mb: f64,
    pub category: String,
}

/// Library ordered by global popularity rank (index 0 is rank 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Library {
    items: Vec<ContentItem>,
}

impl Library {
    pub fn new(items: Vec<ContentItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::config("demand.contents", "content library is empty"));
        }
        for (i, item) in items.iter().enumerate() {
            if item.id.index() != i {
                return Err(Error::contract("content ids must be dense and ordered"));
            }
            if !(item.size_mb > 0.0) {
                return Err(Error::config("demand.size_mb", format!("content {} has size <= 0", item.id)));
            }
        }
        Ok(Self { items })
    }

    /// `count` items with sizes uniform in `[min_mb, max_mb]`, assigned
    /// round-robin to `categories` labels.
    pub fn synthesize(count: usize, categories: usize, min_mb: f64, max_mb: f64, seed: u64) -> Result<Self> {
        if !(min_mb > 0.0 && min_mb <= max_mb) {
            return Err(Error::config("demand.min_size_mb", "need 0 < min_size_mb <= max_size_mb"));
        }
        let categories = categories.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..count)
            .map(|i| ContentItem {
                id: ContentId(i as u32),
                size_mb: if min_mb == max_mb { min_mb } else { rng.random_range(min_mb..=max_mb) },
                category: format!("cat{:03}", i % categories),
            })
            .collect();
        Self::new(items)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[ContentItem] {
        &self.items
    }

    pub fn get(&self, id: ContentId) -> &ContentItem {
        &self.items[id.index()]
    }

    pub fn size(&self, id: ContentId) -> f64 {
        self.items[id.index()].size_mb
    }

    pub fn total_size_mb(&self) -> f64 {
        self.items.iter().map(|c| c.size_mb).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = ContentId> + '_ {
        self.items.iter().map(|c| c.id)
    }
}

/// Dense request counts `u[t][a][f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestTensor {
    slots: usize,
    regions: usize,
    contents: usize,
    counts: Vec<u32>,
}

impl RequestTensor {
    pub fn zeros(slots: usize, regions: usize, contents: usize) -> Self {
        Self {
            slots,
            regions,
            contents,
            counts: vec![0; slots * regions * contents],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.slots, self.regions, self.contents)
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    fn offset(&self, t: usize, a: RegionId, f: ContentId) -> usize {
        assert!(t < self.slots && a.index() < self.regions && f.index() < self.contents);
        (t * self.regions + a.index()) * self.contents + f.index()
    }

    pub fn get(&self, t: usize, a: RegionId, f: ContentId) -> u32 {
        self.counts[self.offset(t, a, f)]
    }

    pub fn set(&mut self, t: usize, a: RegionId, f: ContentId, count: u32) {
        let i = self.offset(t, a, f);
        self.counts[i] = count;
    }

    /// Counts of region `a` at slot `t`, indexed by content.
    pub fn row(&self, t: usize, a: RegionId) -> &[u32] {
        let start = (t * self.regions + a.index()) * self.contents;
        &self.counts[start..start + self.contents]
    }

    pub fn region_total(&self, t: usize, a: RegionId) -> u64 {
        self.row(t, a).iter().map(|&c| u64::from(c)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Total requests per content over the whole horizon.
    pub fn content_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.contents];
        for chunk in self.counts.chunks(self.contents) {
            for (acc, &c) in totals.iter_mut().zip(chunk) {
                *acc += u64::from(c);
            }
        }
        totals
    }
}

/// Splits `total` across `weights` by largest remainder; ties go to lower index.
fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut shares: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = shares.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (quotas[i] - quotas[i].floor(), quotas[j] - quotas[j].floor());
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        shares[i] += 1;
    }
    shares
}

/// Zipf(`zipf_s`) demand: every slot carries `requests_per_slot` requests,
/// split across regions in proportion to `region_weights`; each request
/// draws a content rank from Zipf over the library.
pub fn synthesize_requests(
    regions: &RegionGrid,
    library: &Library,
    zipf_s: f64,
    region_weights: &[f64],
    horizon: usize,
    requests_per_slot: u64,
    seed: u64,
) -> Result<RequestTensor> {
    if library.is_empty() {
        return Err(Error::config("demand.contents", "content library is empty"));
    }
    if !(zipf_s > 0.0) || !zipf_s.is_finite() {
        return Err(Error::config("demand.zipf_s", "must be > 0"));
    }
    if region_weights.len() != regions.len() {
        return Err(Error::config(
            "demand.region_weights",
            format!("expected {} weights, got {}", regions.len(), region_weights.len()),
        ));
    }
    if region_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::config("demand.region_weights", "weights must be finite and >= 0"));
    }
    if !(region_weights.iter().sum::<f64>() > 0.0) {
        return Err(Error::config("demand.region_weights", "at least one weight must be > 0"));
    }
    let zipf = Zipf::new(library.len() as f64, zipf_s)
        .map_err(|e| Error::config("demand.zipf_s", e.to_string()))?;
    let shares = apportion(requests_per_slot, region_weights);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tensor = RequestTensor::zeros(horizon, regions.len(), library.len());
    for t in 0..horizon {
        for (a, &share) in shares.iter().enumerate() {
            let base = (t * regions.len() + a) * library.len();
            for _ in 0..share {
                let rank = zipf.sample(&mut rng) as usize;
                tensor.counts[base + rank.clamp(1, library.len()) - 1] += 1;
            }
        }
    }
    Ok(tensor)
}

/// Reads `slot, region_id, content_id, count` rows into a tensor of the given
/// dimensions. Duplicate cells keep the last row.
pub fn read_request_file<R: Read>(reader: R, name: &str, dims: (usize, usize, usize)) -> Result<RequestTensor> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut tensor = RequestTensor::zeros(dims.0, dims.1, dims.2);
    let mut seen = BTreeMap::new();
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
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let mut vals = [0u64; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = rec[k]
                .parse::<u64>()
                .map_err(|_| bad(format!("field {} is not a non-negative integer: {:?}", k + 1, &rec[k])))?;
        }
        let [t, a, f, count] = vals;
        if t as usize >= dims.0 || a as usize >= dims.1 || f as usize >= dims.2 {
            return Err(bad(format!("index ({t}, {a}, {f}) outside tensor {dims:?}")));
        }
        let count = u32::try_from(count).map_err(|_| bad("count overflows u32".into()))?;
        if let Some(prev) = seen.insert((t, a, f), line) {
            warn!("{name}: row {line} repeats cell ({t}, {a}, {f}) first seen on row {prev}; keeping the last");
        }
        tensor.set(t as usize, RegionId(a as u32), ContentId(f as u32), count);
    }
    Ok(tensor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityParams {
    /// Weight of the current slot's requests, in [0, 1].
    pub alpha: f64,
    /// Per-slot decay of historical popularity, in (0, 1).
    pub theta_decay: f64,
}

impl Default for PopularityParams {
    fn default() -> Self {
        Self {
            alpha: 0.6,
            theta_decay: 0.5,
        }
    }
}

impl PopularityParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("demand.alpha", "must lie in [0, 1]"));
        }
        if !(self.theta_decay > 0.0 && self.theta_decay < 1.0) {
            return Err(Error::config("demand.theta_decay", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Popularity at slot `t = history.len() + 1` given the current request
/// count and the popularity values of slots `1..t-1`.
pub fn popularity(requests: f64, history: &[f64], params: &PopularityParams) -> f64 {
    let t = history.len() + 1;
    let decayed: f64 = history
        .iter()
        .enumerate()
        .map(|(j, p)| p * params.theta_decay.powi((t - (j + 1)) as i32))
        .sum();
    params.alpha * requests + (1.0 - params.alpha) * decayed
}

/// Incremental form of [`popularity`] for one (content, region) stream.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PopularityTracker {
    decayed: f64,
}

impl PopularityTracker {
    pub fn step(&mut self, requests: f64, params: &PopularityParams) -> f64 {
        let p = params.alpha * requests + (1.0 - params.alpha) * self.decayed;
        self.decayed = params.theta_decay * (self.decayed + p);
        p
    }
}

/// Global popularity per slot: the per-(content, region) popularity summed over regions.
pub fn global_popularity(tensor: &RequestTensor, params: &PopularityParams) -> Vec<Vec<f64>> {
    let (slots, regions, contents) = tensor.dims();
    let mut trackers = vec![PopularityTracker::default(); regions * contents];
    let mut out = Vec::with_capacity(slots);
    for t in 0..slots {
        let mut row = vec![0.0; contents];
        for a in 0..regions {
            let counts = tensor.row(t, RegionId(a as u32));
            for (f, &u) in counts.iter().enumerate() {
                row[f] += trackers[a * contents + f].step(f64::from(u), params);
            }
        }
        out.push(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lib(n: usize) -> Library {
        Library::synthesize(n, 4, 0.5, 1.5, 1).unwrap()
    }

    #[test]
    fn alpha_one_tracks_requests() {
        let p = PopularityParams { alpha: 1.0, theta_decay: 0.3 };
        assert_eq!(popularity(7.0, &[3.0, 9.0], &p), 7.0);
    }

    #[test]
    fn alpha_zero_single_decayed_term() {
        let p = PopularityParams { alpha: 0.0, theta_decay: 0.5 };
        assert_eq!(popularity(100.0, &[4.0], &p), 2.0);
    }

    #[test]
    fn unrolled_recursion() {
        let p = PopularityParams { alpha: 0.5, theta_decay: 0.9 };
        let p1 = popularity(10.0, &[], &p);
        let p2 = popularity(0.0, &[p1], &p);
        let p3 = popularity(0.0, &[p1, p2], &p);
        assert_eq!(p1, 5.0);
        let want = 0.5 * 0.0 + 0.5 * (p1 * 0.81 + p2 * 0.9);
        assert!((p3 - want).abs() <= 1e-9 * want);
        assert!((p3 - 3.0375).abs() < 1e-12);
    }

    #[test]
    fn tracker_matches_closed_form() {
        let p = PopularityParams { alpha: 0.3, theta_decay: 0.7 };
        let requests = [4.0, 0.0, 11.0, 2.0, 0.0, 0.0, 5.0];
        let mut tracker = PopularityTracker::default();
        let mut history = Vec::new();
        for &u in &requests {
            let closed = popularity(u, &history, &p);
            let inc = tracker.step(u, &p);
            assert!((closed - inc).abs() <= 1e-12 * closed.abs().max(1.0));
            history.push(closed);
        }
    }

    #[test]
    fn single_region_weight_concentrates_demand() {
        let grid = RegionGrid::new(2, 2).unwrap();
        let t = synthesize_requests(&grid, &lib(10), 0.8, &[0.0, 0.0, 3.0, 0.0], 4, 500, 9).unwrap();
        assert_eq!(t.total(), 2000);
        for slot in 0..4 {
            assert_eq!(t.region_total(slot, RegionId(2)), 500);
        }
    }

    #[test]
    fn apportion_conserves_total() {
        let shares = apportion(101, &[1.0, 1.0, 1.0]);
        assert_eq!(shares.iter().sum::<u64>(), 101);
        assert_eq!(shares, vec![34, 34, 33]);
    }

    #[test]
    fn large_exponent_hits_rank_one() {
        let grid = RegionGrid::new(1, 1).unwrap();
        let t = synthesize_requests(&grid, &lib(20), 12.0, &[1.0], 1, 10_000, 5).unwrap();
        assert!(t.get(0, RegionId(0), ContentId(0)) > 9_990);
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = RegionGrid::new(1, 2).unwrap();
        assert!(synthesize_requests(&grid, &lib(3), 0.0, &[1.0, 1.0], 1, 10, 1).is_err());
        assert!(synthesize_requests(&grid, &lib(3), 0.8, &[0.0, 0.0], 1, 10, 1).is_err());
        assert!(synthesize_requests(&grid, &lib(3), 0.8, &[1.0], 1, 10, 1).is_err());
        assert!(Library::new(vec![]).is_err());
    }

    #[test]
    fn zipf_slope_regression() {
        let grid = RegionGrid::new(1, 1).unwrap();
        let s = 0.8;
        let t = synthesize_requests(&grid, &lib(100), s, &[1.0], 1, 100_000, 17).unwrap();
        let freq = t.content_totals();
        let pts: Vec<(f64, f64)> = freq
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(r, &c)| (((r + 1) as f64).ln(), (c as f64).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((slope + s).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn request_file_last_row_wins() {
        let text = "slot,region_id,content_id,count\n0,1,2,5\n# note\n0,1,2,7\n1,0,0,3\n";
        let t = read_request_file(text.as_bytes(), "req.csv", (2, 2, 3)).unwrap();
        assert_eq!(t.get(0, RegionId(1), ContentId(2)), 7);
        assert_eq!(t.total(), 10);
        let bad = "0,5,0,1\n";
        assert!(matches!(
            read_request_file(bad.as_bytes(), "req.csv", (1, 2, 1)),
            Err(Error::Ingest { row: 1, .. })
        ));
    }
}
