//! The full neighbor-count sweep: fraction of runs that reach the optimum
//! and the alpha histogram for each k. Pass a config path to override the
//! defaults; outputs go to `out/phase_transition`.
//!
//!     cargo run --release --example phase_transition -- crates/core/configs/marginal_lossy.json

use std::path::Path;

use servalloc::experiment::write_outputs;
use servalloc::{run_sweep, summarize, ExperimentConfig};

fn main() -> servalloc::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let result = run_sweep(&config)?;
    let degenerate = result.placements.iter().filter(|p| p.degenerate).count();
    println!(
        "{} placements ({degenerate} degenerate), {} runs each",
        config.placements, config.runs_per_placement
    );
    for (row, stats) in summarize(&result).iter().zip(&result.per_k) {
        let bar = "#".repeat((row.frac_optimal.unwrap_or(0.0) * 40.0).round() as usize);
        println!(
            "k={:<2} optimal {:>5.1}%  median alpha {:.3}  {bar}",
            row.k,
            100.0 * row.frac_optimal.unwrap_or(0.0),
            row.median.unwrap_or(f64::NAN),
        );
        let tail: Vec<String> = stats
            .histogram
            .iter()
            .filter(|b| b.count > 0)
            .map(|b| format!("{:.2}:{}", b.lower_edge(), b.count))
            .collect();
        println!("      {}", tail.join(" "));
    }
    let out = Path::new("out/phase_transition");
    write_outputs(&result, out)?;
    println!("csv files in {}", out.display());
    Ok(())
}
