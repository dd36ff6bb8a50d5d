//! Global and individual hill-climbing on one random placement, compared
//! against the exhaustive optimum. The second half replays the case where a
//! target acting alone makes everyone worse off.
//!
//!     cargo run --example hill_climbing

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use servalloc::experiment::random_scenario;
use servalloc::search::{individual_hill_climb_step, run_individual_hill_climbing};
use servalloc::{
    enumerate_optimum, global_hill_climb, Allocation, Evaluator, ExperimentConfig, Point2D, RoundConfig, Scenario,
    SensorState,
};

fn main() -> servalloc::Result<()> {
    let config = ExperimentConfig::default();
    let scenario = random_scenario(&config, 3);
    let optimum = enumerate_optimum(&scenario)?.optimum_gu;
    println!("placement 3, optimum GU {optimum}");

    let states: Vec<SensorState> = scenario.states().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let start = Allocation::new((0..scenario.num_sensors()).map(|_| *states.choose(&mut rng).unwrap()).collect());
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = global_hill_climb(&scenario, &start, &mut rng)?;
        println!(
            "global, seed {seed}: {} steps, GU {} -> {} at {}",
            out.steps,
            out.gu_trace[0],
            out.gu_trace[out.steps],
            out.final_allocation
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let trace = run_individual_hill_climbing(&scenario, &start, &RoundConfig::default(), &mut rng)?;
    println!(
        "individual: {} rounds, GU {} -> {}, {:.0}% of rounds lowered GU",
        trace.rounds_executed,
        trace.records[0].gu,
        trace.last().gu,
        100.0 * trace.gu_decrease_fraction()
    );

    // One sensor, one target to its upper right, two to its upper left.
    let lone = Scenario::with_defaults(
        vec![Point2D::new(0.0, 0.0)],
        vec![Point2D::new(1.0, 1.0), Point2D::new(-1.5, 0.5), Point2D::new(-1.0, 1.2)],
    );
    let eval = Evaluator::new(&lone);
    let before = Allocation::new(vec![SensorState::Sector(1)]);
    let after = individual_hill_climb_step(&lone, &before, 0, &mut rng)?;
    println!(
        "\ntarget 0 pulls the sensor {before} -> {after}: its own utility {} -> {}, GU {} -> {}",
        eval.target_utility(&before, 0),
        eval.target_utility(&after, 0),
        eval.global_utility(&before),
        eval.global_utility(&after)
    );
    Ok(())
}
