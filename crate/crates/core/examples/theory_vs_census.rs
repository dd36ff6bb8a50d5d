//! Puts the closed-form landscape predictions next to exhaustive censuses of
//! random placements of growing size.
//!
//!     cargo run --release --example theory_vs_census

use servalloc::experiment::random_scenario;
use servalloc::{census, ExperimentConfig, TheoryReport};

fn main() -> servalloc::Result<()> {
    println!("{:>3} {:>3} {:>8} {:>10} {:>10} {:>10} {:>8}", "|S|", "b", "|A|", "lambda", "observed", "E[d]", "max d");
    for sensors in 2..=7 {
        let config = ExperimentConfig {
            num_sensors: sensors,
            num_targets: sensors,
            ..ExperimentConfig::default()
        };
        let mut observed = 0.0;
        let mut max_d = 0;
        let placements = 10;
        for p in 0..placements {
            let c = census(&random_scenario(&config, p))?;
            observed += c.empirical_lambda / placements as f64;
            max_d = max_d.max(c.max_bfs_distance.unwrap_or(0));
        }
        let report = TheoryReport::new(sensors as u64, 3);
        println!(
            "{:>3} {:>3} {:>8} {:>10.2e} {:>10.2e} {:>10} {:>8}",
            sensors,
            report.branching_factor,
            report.total_allocations,
            report.lambda,
            observed,
            report.expected_distance_bound.map(|d| format!("{d:.3}")).unwrap_or("-".into()),
            max_d
        );
    }
    Ok(())
}
