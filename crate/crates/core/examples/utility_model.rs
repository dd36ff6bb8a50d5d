//! Builds a small scenario by hand and prints who sees what and the global
//! utility of a few allocations.
//!
//!     cargo run --example utility_model

use servalloc::model::target_utility;
use servalloc::{Allocation, Evaluator, Point2D, Scenario, SensorState};

fn main() -> servalloc::Result<()> {
    let scenario = Scenario::with_defaults(
        vec![Point2D::new(0.0, 0.0), Point2D::new(2.0, 0.0)],
        vec![Point2D::new(1.0, 1.0), Point2D::new(1.0, -1.0), Point2D::new(-1.0, 0.5)],
    );
    let eval = Evaluator::new(&scenario);

    for s in 0..scenario.num_sensors() {
        for t in 0..scenario.num_targets() {
            let sectors: Vec<String> = scenario
                .states()
                .filter(|&st| eval.sees(s, st, t))
                .map(|st| st.to_string())
                .collect();
            println!("sensor {s} sees target {t} from sectors [{}]", sectors.join(", "));
        }
    }

    println!();
    for n in 0..4 {
        println!("U(target seen by {n}) = {}", target_utility(&scenario.utility, n));
    }

    println!();
    let sector = SensorState::Sector;
    for a in [
        Allocation::new(vec![sector(0), sector(0)]),
        Allocation::new(vec![sector(0), sector(1)]),
        Allocation::new(vec![sector(1), sector(2)]),
        Allocation::new(vec![sector(2), sector(1)]),
    ] {
        println!("{a}: coverage {:?}, GU {}", eval.coverage_counts(&a), eval.global_utility(&a));
    }
    Ok(())
}
