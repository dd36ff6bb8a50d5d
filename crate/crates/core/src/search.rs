//! Neighborhoods over allocations and the two hill-climbing algorithms.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::bidding::{RoundConfig, RoundRecord, RunTrace};
use crate::error::Result;
use crate::model::{
    strictly_greater, target_utility, Allocation, Evaluator, Scenario, SensorState, Utility,
};

/// Change of exactly one sensor's state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborMove {
    pub sensor_index: usize,
    pub new_state: SensorState,
}

impl NeighborMove {
    pub fn apply(&self, allocation: &Allocation) -> Allocation {
        allocation.with_state(self.sensor_index, self.new_state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub final_allocation: Allocation,
    /// Starts with the initial GU, then one entry per accepted move.
    pub gu_trace: Vec<Utility>,
    pub steps: usize,
    pub converged: bool,
    /// The accepted moves, in order.
    pub moves: Vec<NeighborMove>,
}

/// Every single-sensor move, ordered by sensor then state.
pub fn neighbor_moves(scenario: &Scenario, allocation: &Allocation) -> Vec<NeighborMove> {
    let mut moves = Vec::with_capacity(allocation.len() * scenario.num_states().saturating_sub(1));
    for (sensor_index, &current) in allocation.states().iter().enumerate() {
        moves.extend(
            scenario
                .states()
                .filter(|&s| s != current)
                .map(|new_state| NeighborMove { sensor_index, new_state }),
        );
    }
    moves
}

pub fn neighbors(scenario: &Scenario, allocation: &Allocation) -> Vec<Allocation> {
    neighbor_moves(scenario, allocation)
        .iter()
        .map(|m| m.apply(allocation))
        .collect()
}

/// Strict local optimum: GU(a) > GU(a') for every neighbor a'.
pub fn is_local_optimum(scenario: &Scenario, allocation: &Allocation) -> Result<bool> {
    allocation.validate(scenario)?;
    let eval = Evaluator::new(scenario);
    Ok(is_local_optimum_with(&eval, allocation))
}

pub(crate) fn is_local_optimum_with(eval: &Evaluator<'_>, allocation: &Allocation) -> bool {
    neighbor_moves(eval.scenario(), allocation)
        .iter()
        .all(|m| strictly_greater(0.0, eval.delta(allocation, m.sensor_index, m.new_state)))
}

/// One move of individual hill-climbing on behalf of `consumer`.
///
/// A sensor is drawn uniformly from `rng`. If some state of that sensor
/// raises the consumer's utility, the sensor is set to the best such state
/// (lowest state on ties). Otherwise the allocation comes back unchanged.
pub fn individual_hill_climb_step<R: Rng + ?Sized>(
    scenario: &Scenario,
    allocation: &Allocation,
    consumer: usize,
    rng: &mut R,
) -> Result<Allocation> {
    scenario.check_target(consumer)?;
    allocation.validate(scenario)?;
    let eval = Evaluator::new(scenario);
    Ok(individual_step_with(&eval, allocation, consumer, rng))
}

fn individual_step_with<R: Rng + ?Sized>(
    eval: &Evaluator<'_>,
    allocation: &Allocation,
    consumer: usize,
    rng: &mut R,
) -> Allocation {
    let scenario = eval.scenario();
    if scenario.num_sensors() == 0 {
        return allocation.clone();
    }
    let sensor = rng.random_range(0..scenario.num_sensors());
    let current = allocation.state(sensor);
    let others = eval.coverage(allocation, consumer) - usize::from(eval.sees(sensor, current, consumer));
    let utility_in = |state: SensorState| {
        target_utility(&scenario.utility, others + usize::from(eval.sees(sensor, state, consumer)))
    };
    let now = utility_in(current);
    let mut best: Option<(SensorState, Utility)> = None;
    for state in scenario.states() {
        let u = utility_in(state);
        if best.is_none_or(|(_, b)| strictly_greater(u, b)) {
            best = Some((state, u));
        }
    }
    match best {
        Some((state, u)) if strictly_greater(u, now) => allocation.with_state(sensor, state),
        _ => allocation.clone(),
    }
}

/// First-improvement hill-climbing on the global utility.
///
/// Each pass shuffles the full move list and takes the first move that
/// strictly raises GU. Stops when no such move exists.
pub fn global_hill_climb<R: Rng + ?Sized>(
    scenario: &Scenario,
    start: &Allocation,
    rng: &mut R,
) -> Result<SearchOutcome> {
    start.validate(scenario)?;
    let eval = Evaluator::new(scenario);
    let mut current = start.clone();
    let mut gu = eval.global_utility(&current);
    let mut gu_trace = vec![gu];
    let mut accepted = Vec::new();
    loop {
        let mut moves = neighbor_moves(scenario, &current);
        moves.shuffle(rng);
        let improving = moves
            .into_iter()
            .find(|m| strictly_greater(eval.delta(&current, m.sensor_index, m.new_state), 0.0));
        let Some(m) = improving else { break };
        current = m.apply(&current);
        gu = eval.global_utility(&current);
        gu_trace.push(gu);
        accepted.push(m);
    }
    Ok(SearchOutcome {
        final_allocation: current,
        steps: gu_trace.len() - 1,
        gu_trace,
        converged: true,
        moves: accepted,
    })
}

/// Repeated individual hill-climbing. In every round each target, in index
/// order, takes one [`individual_hill_climb_step`]. Stops on quiescence or
/// after `config.max_rounds`.
pub fn run_individual_hill_climbing<R: Rng + ?Sized>(
    scenario: &Scenario,
    start: &Allocation,
    config: &RoundConfig,
    rng: &mut R,
) -> Result<RunTrace> {
    config.validate()?;
    start.validate(scenario)?;
    let eval = Evaluator::new(scenario);
    let mut current = start.clone();
    let mut trace = RunTrace::starting_at(current.clone(), eval.global_utility(&current));
    let mut idle = 0;
    for round in 1..=config.max_rounds {
        let before = current.clone();
        for consumer in 0..scenario.num_targets() {
            current = individual_step_with(&eval, &current, consumer, rng);
        }
        idle = if current == before { idle + 1 } else { 0 };
        trace.records.push(RoundRecord {
            round,
            gu: eval.global_utility(&current),
            allocation: current.clone(),
            alpha: None,
        });
        trace.rounds_executed = round;
        if idle >= config.quiescence_rounds {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// A global hill-climbing outcome viewed as a trace, one record per move.
pub fn outcome_to_trace(start: &Allocation, outcome: &SearchOutcome) -> RunTrace {
    let mut current = start.clone();
    let mut trace = RunTrace::starting_at(current.clone(), outcome.gu_trace[0]);
    for (i, (m, &gu)) in outcome.moves.iter().zip(&outcome.gu_trace[1..]).enumerate() {
        current = m.apply(&current);
        trace.records.push(RoundRecord {
            round: i + 1,
            allocation: current.clone(),
            gu,
            alpha: None,
        });
    }
    trace.rounds_executed = outcome.steps;
    trace.converged = outcome.converged;
    trace
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::Point2D;
    use crate::model::global_utility;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn lone(off_allowed: bool) -> Scenario {
        Scenario {
            off_allowed,
            ..Scenario::with_defaults(vec![Point2D::new(0.0, 0.0)], vec![Point2D::new(1.0, 1.0)])
        }
    }

    #[test]
    fn neighbor_counts() {
        let s = lone(true);
        assert_eq!(neighbors(&s, &Allocation::new(vec![SensorState::Off])).len(), 3);

        let seven = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 7], vec![]);
        assert_eq!(neighbors(&seven, &seven.default_start()).len(), 14);

        let none = Scenario::with_defaults(vec![], vec![]);
        assert!(neighbors(&none, &Allocation::new(vec![])).is_empty());
    }

    #[test]
    fn neighbors_differ_in_one_place() {
        let s = Scenario {
            off_allowed: true,
            ..Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 3], vec![])
        };
        let a = Allocation::new(vec![SensorState::Sector(1), SensorState::Off, SensorState::Sector(0)]);
        for n in neighbors(&s, &a) {
            assert_eq!(n.hamming(&a), 1);
        }
    }

    #[test]
    fn local_optimum_examples() {
        let s = lone(true);
        let facing = Allocation::new(vec![SensorState::Sector(0)]);
        assert!(is_local_optimum(&s, &facing).unwrap());
        assert!(!is_local_optimum(&s, &Allocation::new(vec![SensorState::Off])).unwrap());

        // Lone targets in sectors 0 and 1: the two best allocations tie.
        let tie = Scenario::with_defaults(
            vec![Point2D::new(0.0, 0.0)],
            vec![Point2D::new(1.0, 1.0), Point2D::new(-1.0, 0.5)],
        );
        let a = Allocation::new(vec![SensorState::Sector(0)]);
        let b = Allocation::new(vec![SensorState::Sector(1)]);
        assert_eq!(global_utility(&tie, &a).unwrap(), global_utility(&tie, &b).unwrap());
        assert!(!is_local_optimum(&tie, &a).unwrap());

        let none = Scenario::with_defaults(vec![], vec![]);
        assert!(is_local_optimum(&none, &Allocation::new(vec![])).unwrap());
    }

    #[test]
    fn individual_step_without_reachable_sensor_does_nothing() {
        let s = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0)], vec![Point2D::new(8.0, 8.0)]);
        let a = s.default_start();
        assert_eq!(individual_hill_climb_step(&s, &a, 0, &mut rng()).unwrap(), a);
    }

    #[test]
    fn individual_step_turns_sensor_to_target() {
        // bearing 200 deg lies in sector 1
        let s = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0)], vec![Point2D::new(-2.0, -0.7279)]);
        let a = s.default_start();
        let next = individual_hill_climb_step(&s, &a, 0, &mut rng()).unwrap();
        assert_eq!(next.states(), &[SensorState::Sector(1)]);
        assert_eq!(individual_hill_climb_step(&s, &next, 0, &mut rng()).unwrap(), next);
    }

    #[test]
    fn individual_step_validates_consumer() {
        let s = lone(false);
        assert!(individual_hill_climb_step(&s, &s.default_start(), 1, &mut rng()).is_err());
    }

    #[test]
    fn global_climb_from_local_optimum_stays() {
        let s = lone(true);
        let facing = Allocation::new(vec![SensorState::Sector(0)]);
        let out = global_hill_climb(&s, &facing, &mut rng()).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.final_allocation, facing);
        assert_eq!(out.gu_trace, vec![9.0]);
        assert!(out.converged);
    }

    #[test]
    fn global_climb_without_targets_switches_everything_off() {
        let s = Scenario {
            off_allowed: true,
            ..Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 3], vec![])
        };
        for start in [
            Allocation::uniform(3, SensorState::Sector(2)),
            Allocation::new(vec![SensorState::Off, SensorState::Sector(1), SensorState::Sector(0)]),
        ] {
            let out = global_hill_climb(&s, &start, &mut rng()).unwrap();
            assert_eq!(out.final_allocation, Allocation::uniform(3, SensorState::Off));
            assert_eq!(*out.gu_trace.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn global_climb_faces_the_target() {
        let s = lone(true);
        let out = global_hill_climb(&s, &s.default_start(), &mut rng()).unwrap();
        assert_eq!(out.final_allocation.states(), &[SensorState::Sector(0)]);
        assert_eq!(out.gu_trace, vec![0.0, 9.0]);
        assert_eq!(out.moves.len(), 1);
        let trace = outcome_to_trace(&s.default_start(), &out);
        assert_eq!(trace.last().allocation, out.final_allocation);
        assert_eq!(trace.rounds_executed, 1);
    }

    #[test]
    fn individual_run_quiesces() {
        let s = lone(false);
        let config = RoundConfig::default();
        let trace = run_individual_hill_climbing(&s, &s.default_start(), &config, &mut rng()).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.last().gu, 9.0);
    }
}
