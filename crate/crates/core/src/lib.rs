//! Distributed service allocation on the sensor/target domain.
//!
//! Sensors at fixed positions each point at one of several sectors (or
//! switch off); targets want to be seen. The crate provides the utility
//! model, individual and global hill-climbing, the nearest-`k` bidding
//! protocol, an exhaustive oracle for small instances, closed-form
//! landscape predictions, and a seeded sweep harness that measures how
//! often the protocol reaches the optimum as `k` grows.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bidding;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod model;
pub mod oracle;
pub mod search;
pub mod seed;
pub mod theory;

pub use bidding::{run_protocol, BidMessage, BidMode, BidPolicy, RoundConfig, RunTrace};
pub use error::{Error, Result};
pub use experiment::{run_sweep, summarize, ExperimentConfig, SweepResult};
pub use geometry::{GeometryParams, Point2D};
pub use model::{global_utility, Allocation, Evaluator, Scenario, SensorState, Utility, UtilityParams};
pub use oracle::{census, enumerate_optimum, LandscapeCensus};
pub use search::{global_hill_climb, individual_hill_climb_step, SearchOutcome};
pub use theory::TheoryReport;
