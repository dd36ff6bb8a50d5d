//! Enumerates every allocation of a scenario file and reports the optimum,
//! the local optima and how far any allocation is from one.
//!
//!     cargo run --release --example landscape_census -- crates/core/configs/seven.json

use servalloc::oracle::Landscape;
use servalloc::oracle::DEFAULT_ENUMERATION_BUDGET;
use servalloc::Scenario;

fn main() -> servalloc::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/seven.json").to_string());
    let scenario = Scenario::load(&path)?;
    let landscape = Landscape::build(&scenario, DEFAULT_ENUMERATION_BUDGET)?;
    let census = landscape.census();

    println!("{path}: {} allocations", census.total_allocations);
    println!("optimum GU {} reached by {} allocations", census.optimum_gu, census.optimum_allocations.len());
    println!("{} local optima (lambda = {:.5})", census.local_optima_count, census.empirical_lambda);

    let mut by_distance = std::collections::BTreeMap::new();
    for d in &landscape.distance {
        *by_distance.entry(*d).or_insert(0u64) += 1;
    }
    for (d, n) in by_distance {
        match d {
            Some(d) => println!("  {n:>6} allocations at distance {d}"),
            None => println!("  {n:>6} allocations with no local optimum reachable"),
        }
    }
    Ok(())
}
