//! Runs the bidding protocol on one placement for every neighbor count, with
//! fixed and marginal bids, and prints the GU trace of each run.
//!
//!     cargo run --example bidding_protocol

use servalloc::experiment::random_scenario;
use servalloc::{enumerate_optimum, run_protocol, BidPolicy, ExperimentConfig, RoundConfig};

fn main() -> servalloc::Result<()> {
    let config = ExperimentConfig::default();
    let scenario = random_scenario(&config, 3);
    let start = scenario.default_start();
    let optimum = enumerate_optimum(&scenario)?.optimum_gu;
    println!("optimum GU {optimum}");

    let lossy = RoundConfig { miss_probability: 0.2, ..RoundConfig::default() };
    for k in 1..=scenario.num_sensors() {
        for (label, policy, rounds) in [
            ("fixed", BidPolicy::fixed(k), RoundConfig::default()),
            ("marginal", BidPolicy::marginal(k), RoundConfig::default()),
            ("fixed, 20% loss", BidPolicy::fixed(k), lossy),
        ] {
            let trace = run_protocol(&scenario, &start, &policy, &rounds, 42)?.with_optimum(optimum);
            let gus: Vec<String> = trace.records.iter().map(|r| r.gu.to_string()).collect();
            println!(
                "k={k} {label:<16} alpha={:.3} settle={} GU [{}]",
                trace.last().alpha.unwrap_or(f64::NAN),
                trace.settle_round(),
                gus.join(" ")
            );
        }
    }
    Ok(())
}
