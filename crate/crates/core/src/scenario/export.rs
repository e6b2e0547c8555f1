//! CSV output of scheme runs and sweeps.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::metrics::SchemeRun;
use crate::scenario::sweep::SweepTable;

fn writer(dir: &Path, name: &str, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    Ok(w)
}

fn finish(mut w: csv::Writer<fs::File>, dir: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(dir, e))
}

/// Writes the per-run CSV files into `dir`, creating it if needed.
pub fn export_metrics(runs: &[SchemeRun], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut w = writer(
        dir,
        "latency_samples.csv",
        &["region", "slot", "content", "scheme", "latency_ms", "requests", "anchor", "tier", "fallback"],
    )?;
    for run in runs {
        for a in &run.assignments {
            w.write_record([
                a.region.0.to_string(),
                a.slot.to_string(),
                a.content.0.to_string(),
                run.scheme.name().to_string(),
                a.latency_ms.to_string(),
                a.requests.to_string(),
                a.anchor.0.to_string(),
                a.tier.as_str().to_string(),
                a.fallback.to_string(),
            ])?;
        }
    }
    finish(w, dir)?;

    let mut w = writer(dir, "cost_ledger.csv", &["scheme", "slot", "storage", "transmission", "cache_storage"])?;
    for run in runs {
        for t in 0..run.ledger.storage.len() {
            w.write_record([
                run.scheme.name().to_string(),
                t.to_string(),
                run.ledger.storage[t].to_string(),
                run.ledger.transmission[t].to_string(),
                run.cache_storage[t].to_string(),
            ])?;
        }
    }
    finish(w, dir)?;

    let mut w = writer(
        dir,
        "summary.csv",
        &[
            "scheme",
            "requests",
            "p50",
            "p90",
            "p99",
            "mean",
            "storage",
            "transmission",
            "total_cost",
            "hit_origin",
            "hit_satellite",
            "hit_ground_station",
            "fallback_requests",
            "violations",
        ],
    )?;
    for run in runs {
        let r = &run.report;
        w.write_record([
            r.scheme.name().to_string(),
            r.requests.to_string(),
            r.p50.to_string(),
            r.p90.to_string(),
            r.p99.to_string(),
            r.mean.to_string(),
            r.storage.to_string(),
            r.transmission.to_string(),
            r.total_cost.to_string(),
            r.hit_origin.to_string(),
            r.hit_satellite.to_string(),
            r.hit_ground_station.to_string(),
            r.fallback_requests.to_string(),
            run.violations.len().to_string(),
        ])?;
    }
    finish(w, dir)?;

    let mut w = writer(dir, "category_costs.csv", &["scheme", "category", "cost"])?;
    for run in runs {
        for (cat, c) in &run.category_costs {
            w.write_record([run.scheme.name(), cat, &c.to_string()])?;
        }
    }
    finish(w, dir)?;

    let mut w = writer(dir, "placements.csv", &["scheme", "slot", "node", "content", "probability"])?;
    for run in runs {
        for t in 0..run.placement.slots() {
            for (v, f) in run.placement.cached(t) {
                let p = run.placement.probability(t, v, f);
                w.write_record([run.scheme.name().to_string(), t.to_string(), v.0.to_string(), f.0.to_string(), p.to_string()])?;
            }
        }
    }
    finish(w, dir)?;

    let mut w = writer(dir, "deltas.csv", &["scheme", "slot", "x", "y", "delta"])?;
    for run in runs {
        for t in 0..run.placement.slots() {
            for (x, y) in run.placement.active_pairs(t) {
                w.write_record([run.scheme.name().to_string(), t.to_string(), x.0.to_string(), y.0.to_string(), "1".into()])?;
            }
        }
    }
    finish(w, dir)?;

    let mut w = writer(dir, "scores.csv", &["scheme", "slot", "node", "content", "raw", "normalized"])?;
    for run in runs {
        for s in &run.scores {
            w.write_record([
                run.scheme.name().to_string(),
                s.slot.to_string(),
                s.node.0.to_string(),
                s.content.0.to_string(),
                s.raw.to_string(),
                s.normalized.to_string(),
            ])?;
        }
    }
    finish(w, dir)
}

/// Writes `sweep.csv` with raw and rescaled totals per scheme and category count.
pub fn export_sweep(table: &SweepTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = writer(dir, "sweep.csv", &["scheme", "categories", "total_cost", "rescaled"])?;
    for row in &table.rows {
        w.write_record([
            row.scheme.name().to_string(),
            row.categories.to_string(),
            row.total_cost.to_string(),
            row.rescaled.to_string(),
        ])?;
    }
    finish(w, dir)
}

/// Writes `violations.csv` for the audit subcommand.
pub fn export_violations(runs: &[SchemeRun], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = writer(dir, "violations.csv", &["scheme", "slot", "constraint", "detail"])?;
    for run in runs {
        for v in &run.violations {
            w.write_record([
                run.scheme.name().to_string(),
                v.slot.to_string(),
                v.constraint.as_str().to_string(),
                v.detail.clone(),
            ])?;
        }
    }
    finish(w, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        export_metrics(&[], dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("scheme,requests,p50"));
        let text = fs::read_to_string(dir.path().join("latency_samples.csv")).unwrap();
        assert_eq!(text, "region,slot,content,scheme,latency_ms,requests,anchor,tier,fallback\n");
    }
}
