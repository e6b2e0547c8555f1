use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use orbcache::scenario::{
    export_metrics, export_sweep, export_violations, load_scenario, run_scheme, sweep_content_categories, Scenario,
    Scheme, SchemeRun, World,
};
use orbcache::Result;

#[derive(Parser)]
#[command(version, about = "LEO mega-constellation hierarchical caching simulator")]
struct Cli {
    /// Scenario file (TOML). Defaults describe the desk-scale scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the number of simulated slots.
    #[arg(long, global = true)]
    slots: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scheme.
    Run {
        #[arg(long, default_value = "MegaCacheX-OSS")]
        scheme: Scheme,
    },
    /// Run all five schemes.
    Compare,
    /// Total cost against the number of content categories.
    Sweep,
    /// Constraint report for the caching schemes.
    Audit,
}

fn scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = match &cli.config {
        Some(p) => load_scenario(p)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(slots) = cli.slots {
        s.slots = slots;
        s.sweep.slots = slots;
    }
    s.validate()?;
    Ok(s)
}

fn run_all(world: &World, schemes: &[Scheme]) -> Result<Vec<SchemeRun>> {
    schemes.par_iter().map(|&k| run_scheme(world, k)).collect()
}

fn print_summary(runs: &[SchemeRun]) {
    println!(
        "{:<16} {:>9} {:>9} {:>9} {:>9} {:>12} {:>7} {:>7} {:>7}",
        "scheme", "p50_ms", "p90_ms", "p99_ms", "mean_ms", "total_cost", "origin", "sat", "gs"
    );
    for r in runs.iter().map(|r| &r.report) {
        println!(
            "{:<16} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>12.1} {:>7.3} {:>7.3} {:>7.3}",
            r.scheme.name(),
            r.p50,
            r.p90,
            r.p99,
            r.mean,
            r.total_cost,
            r.hit_origin,
            r.hit_satellite,
            r.hit_ground_station
        );
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let s = scenario(cli)?;
    let out: &Path = &cli.out;
    match &cli.cmd {
        Cmd::Run { scheme } => {
            let world = World::build(&s)?;
            let runs = run_all(&world, &[*scheme])?;
            export_metrics(&runs, out)?;
            print_summary(&runs);
        }
        Cmd::Compare => {
            let world = World::build(&s)?;
            info!("built {} nodes over {} slots", world.nodes.len(), world.snapshots.len());
            let runs = run_all(&world, &Scheme::ALL)?;
            export_metrics(&runs, out)?;
            print_summary(&runs);
        }
        Cmd::Sweep => {
            let table = sweep_content_categories(&s, &Scheme::ALL)?;
            export_sweep(&table, out)?;
            println!("{:<16} {:>10} {:>14} {:>9}", "scheme", "categories", "total_cost", "rescaled");
            for r in &table.rows {
                println!("{:<16} {:>10} {:>14.1} {:>9.3}", r.scheme.name(), r.categories, r.total_cost, r.rescaled);
            }
        }
        Cmd::Audit => {
            let world = World::build(&s)?;
            let runs = run_all(&world, &[Scheme::MegaCacheXOsg, Scheme::MegaCacheXOss])?;
            export_violations(&runs, out)?;
            let mut clean = true;
            for run in &runs {
                println!("{}: {} violations", run.scheme.name(), run.violations.len());
                for v in &run.violations {
                    println!("  {v}");
                }
                clean &= run.violations.is_empty();
            }
            return Ok(clean);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
