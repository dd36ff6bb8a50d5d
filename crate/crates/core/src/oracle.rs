//! Exhaustive ground truth for small scenarios.
//!
//! Allocations are enumerated in lexicographic order of their state
//! vectors (sensor 0 most significant, states in canonical order), so every
//! allocation has a stable index in `0..m^n`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{strictly_greater, utility_eq, Allocation, Evaluator, Scenario, SensorState, Utility};

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Below this many allocations enumeration stays on the calling thread.
const PARALLEL_THRESHOLD: u64 = 1 << 15;

/// Mixed-radix indexing of the allocation space of a scenario.
#[derive(Clone, Debug)]
pub struct StateSpace {
    states: Vec<SensorState>,
    num_sensors: usize,
    total: u64,
}

impl StateSpace {
    pub fn new(scenario: &Scenario, budget: u64) -> Result<Self> {
        let states: Vec<SensorState> = scenario.states().collect();
        let m = states.len() as u128;
        let required = u32::try_from(scenario.num_sensors())
            .ok()
            .and_then(|n| m.checked_pow(n))
            .unwrap_or(u128::MAX);
        if required > u128::from(budget) {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Ok(Self {
            states,
            num_sensors: scenario.num_sensors(),
            total: required as u64,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    fn digit_of(&self, state: SensorState) -> usize {
        self.states
            .iter()
            .position(|&s| s == state)
            .expect("allocation validated against the scenario")
    }

    pub fn encode(&self, allocation: &Allocation) -> u64 {
        let m = self.states.len() as u64;
        allocation
            .states()
            .iter()
            .fold(0, |idx, &s| idx * m + self.digit_of(s) as u64)
    }

    pub fn decode(&self, mut index: u64) -> Allocation {
        let m = self.states.len() as u64;
        let mut states = vec![SensorState::Off; self.num_sensors];
        for slot in states.iter_mut().rev() {
            *slot = self.states[(index % m) as usize];
            index /= m;
        }
        Allocation::new(states)
    }

    /// Index offset of one unit in sensor `i`'s digit.
    fn stride(&self, sensor: usize) -> u64 {
        (self.states.len() as u64).pow((self.num_sensors - 1 - sensor) as u32)
    }

    /// Indices of all allocations differing from `index` in exactly one sensor.
    pub fn neighbor_indices(&self, index: u64) -> impl Iterator<Item = u64> + '_ {
        let m = self.states.len() as u64;
        (0..self.num_sensors).flat_map(move |sensor| {
            let stride = self.stride(sensor);
            let digit = (index / stride) % m;
            let base = index - digit * stride;
            (0..m).filter(move |&d| d != digit).map(move |d| base + d * stride)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimumReport {
    pub optimum_gu: Utility,
    /// Every maximizer, in enumeration order.
    pub optimum_allocations: Vec<Allocation>,
    /// How many allocations were evaluated.
    pub visited: u64,
}

pub fn enumerate_optimum(scenario: &Scenario) -> Result<OptimumReport> {
    enumerate_optimum_with_budget(scenario, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_optimum_with_budget(scenario: &Scenario, budget: u64) -> Result<OptimumReport> {
    let space = StateSpace::new(scenario, budget)?;
    let eval = Evaluator::new(scenario);

    #[derive(Clone)]
    struct Best {
        gu: Utility,
        at: Vec<u64>,
        visited: u64,
    }
    let identity = || Best { gu: Utility::NEG_INFINITY, at: Vec::new(), visited: 0 };
    let merge = |mut a: Best, b: Best| {
        a.visited += b.visited;
        if a.at.is_empty() || strictly_greater(b.gu, a.gu) {
            Best { visited: a.visited, ..b }
        } else {
            if !b.at.is_empty() && utility_eq(a.gu, b.gu) {
                a.at.extend(b.at);
            }
            a
        }
    };
    let visit = |idx: u64| Best {
        gu: eval.global_utility(&space.decode(idx)),
        at: vec![idx],
        visited: 1,
    };

    let best = if space.total() >= PARALLEL_THRESHOLD {
        (0..space.total()).into_par_iter().map(visit).reduce(identity, merge)
    } else {
        (0..space.total()).map(visit).fold(identity(), merge)
    };
    Ok(OptimumReport {
        optimum_gu: best.gu,
        optimum_allocations: best.at.into_iter().map(|i| space.decode(i)).collect(),
        visited: best.visited,
    })
}

/// The whole landscape: GU, local-optimum membership and distance to the
/// nearest local optimum for every allocation.
#[derive(Clone, Debug)]
pub struct Landscape {
    pub space: StateSpace,
    pub gu: Vec<Utility>,
    pub local_optimum: Vec<bool>,
    /// BFS distance to the nearest local optimum, `None` if there is none.
    pub distance: Vec<Option<u32>>,
}

impl Landscape {
    pub fn build(scenario: &Scenario, budget: u64) -> Result<Self> {
        let space = StateSpace::new(scenario, budget)?;
        let eval = Evaluator::new(scenario);
        let total = space.total();
        let gu: Vec<Utility> = if total >= PARALLEL_THRESHOLD {
            (0..total)
                .into_par_iter()
                .map(|i| eval.global_utility(&space.decode(i)))
                .collect()
        } else {
            (0..total).map(|i| eval.global_utility(&space.decode(i))).collect()
        };
        let local_optimum: Vec<bool> = (0..total)
            .map(|i| {
                space
                    .neighbor_indices(i)
                    .all(|j| strictly_greater(gu[i as usize], gu[j as usize]))
            })
            .collect();

        // Multi-source BFS; the neighbor relation is symmetric.
        let mut distance = vec![None; total as usize];
        let mut queue = VecDeque::new();
        for (i, _) in local_optimum.iter().enumerate().filter(|(_, &lo)| lo) {
            distance[i] = Some(0);
            queue.push_back(i as u64);
        }
        while let Some(i) = queue.pop_front() {
            let d = distance[i as usize].unwrap_or(0) + 1;
            for j in space.neighbor_indices(i) {
                if distance[j as usize].is_none() {
                    distance[j as usize] = Some(d);
                    queue.push_back(j);
                }
            }
        }
        Ok(Self { space, gu, local_optimum, distance })
    }

    pub fn census(&self) -> LandscapeCensus {
        let optimum_gu = self.gu.iter().copied().fold(Utility::NEG_INFINITY, Utility::max);
        let optimum_allocations = self
            .gu
            .iter()
            .enumerate()
            .filter(|(_, &g)| utility_eq(g, optimum_gu))
            .map(|(i, _)| self.space.decode(i as u64))
            .collect();
        let local_optima_count = self.local_optimum.iter().filter(|&&b| b).count() as u64;
        let total = self.space.total();
        let max_bfs_distance = if local_optima_count == 0 {
            None
        } else {
            self.distance.iter().flatten().copied().max()
        };
        LandscapeCensus {
            total_allocations: total,
            optimum_gu,
            optimum_allocations,
            local_optima_count,
            empirical_lambda: if total == 0 { 0.0 } else { local_optima_count as f64 / total as f64 },
            max_bfs_distance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandscapeCensus {
    pub total_allocations: u64,
    pub optimum_gu: Utility,
    pub optimum_allocations: Vec<Allocation>,
    pub local_optima_count: u64,
    /// Share of allocations that are strict local optima.
    pub empirical_lambda: f64,
    /// Largest distance from any allocation to its nearest local optimum.
    pub max_bfs_distance: Option<u32>,
}

impl LandscapeCensus {
    /// The compact JSON form: total, optimum_gu, optima_count,
    /// lambda_empirical, max_bfs_distance.
    pub fn summary(&self) -> CensusSummary {
        CensusSummary {
            total: self.total_allocations,
            optimum_gu: self.optimum_gu,
            optima_count: self.local_optima_count,
            lambda_empirical: self.empirical_lambda,
            max_bfs_distance: self.max_bfs_distance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSummary {
    pub total: u64,
    pub optimum_gu: Utility,
    pub optima_count: u64,
    pub lambda_empirical: f64,
    pub max_bfs_distance: Option<u32>,
}

pub fn census(scenario: &Scenario) -> Result<LandscapeCensus> {
    census_with_budget(scenario, DEFAULT_ENUMERATION_BUDGET)
}

pub fn census_with_budget(scenario: &Scenario, budget: u64) -> Result<LandscapeCensus> {
    Ok(Landscape::build(scenario, budget)?.census())
}

/// BFS distance from `from` to the nearest strict local optimum; `None`
/// when the landscape has no strict local optimum.
pub fn shortest_distance_to_local_optimum(scenario: &Scenario, from: &Allocation) -> Result<Option<u32>> {
    from.validate(scenario)?;
    let space = StateSpace::new(scenario, DEFAULT_ENUMERATION_BUDGET)?;
    let eval = Evaluator::new(scenario);
    let is_local = |idx: u64| {
        let a = space.decode(idx);
        let g = eval.global_utility(&a);
        space
            .neighbor_indices(idx)
            .all(|j| strictly_greater(g, eval.global_utility(&space.decode(j))))
    };
    let start = space.encode(from);
    let mut seen = vec![false; space.total() as usize];
    let mut queue = VecDeque::from([(start, 0u32)]);
    seen[start as usize] = true;
    while let Some((idx, d)) = queue.pop_front() {
        if is_local(idx) {
            return Ok(Some(d));
        }
        for j in space.neighbor_indices(idx) {
            if !seen[j as usize] {
                seen[j as usize] = true;
                queue.push_back((j, d + 1));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;

    fn lone(off_allowed: bool) -> Scenario {
        Scenario {
            off_allowed,
            ..Scenario::with_defaults(vec![Point2D::new(0.0, 0.0)], vec![Point2D::new(1.0, 1.0)])
        }
    }

    #[test]
    fn index_round_trip() {
        let s = Scenario {
            off_allowed: true,
            ..Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 3], vec![])
        };
        let space = StateSpace::new(&s, 1000).unwrap();
        assert_eq!(space.total(), 64);
        for i in 0..64 {
            assert_eq!(space.encode(&space.decode(i)), i);
        }
        assert_eq!(space.decode(0), Allocation::uniform(3, SensorState::Sector(0)));
        assert_eq!(space.decode(63), Allocation::uniform(3, SensorState::Off));
        assert_eq!(space.neighbor_indices(0).count(), 9);
    }

    #[test]
    fn budget_is_enforced() {
        let s = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 7], vec![]);
        assert!(matches!(
            enumerate_optimum_with_budget(&s, 2186),
            Err(Error::BudgetExceeded { required: 2187, budget: 2186 })
        ));
        assert_eq!(enumerate_optimum_with_budget(&s, 2187).unwrap().visited, 2187);
        let huge = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 200], vec![]);
        assert!(census(&huge).is_err());
    }

    #[test]
    fn optimum_examples() {
        let dark = Scenario {
            off_allowed: true,
            ..Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 2], vec![])
        };
        let r = enumerate_optimum(&dark).unwrap();
        assert_eq!(r.optimum_gu, 0.0);
        assert_eq!(r.optimum_allocations, vec![Allocation::uniform(2, SensorState::Off)]);

        for off in [false, true] {
            let r = enumerate_optimum(&lone(off)).unwrap();
            assert_eq!(r.optimum_gu, 9.0);
            assert_eq!(r.optimum_allocations, vec![Allocation::new(vec![SensorState::Sector(0)])]);
            assert_eq!(r.visited, 3 + u64::from(off));
        }
    }

    #[test]
    fn census_examples() {
        let flat = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 2], vec![]);
        let c = census(&flat).unwrap();
        assert_eq!(c.local_optima_count, 0);
        assert_eq!(c.max_bfs_distance, None);
        assert_eq!(c.optimum_allocations.len(), 9);

        let c = census(&lone(true)).unwrap();
        assert_eq!(c.total_allocations, 4);
        assert_eq!(c.local_optima_count, 1);
        assert_eq!(c.empirical_lambda, 0.25);
        assert_eq!(c.max_bfs_distance, Some(1));
        let json = serde_json::to_value(c.summary()).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys.len(), 5);
        for k in ["total", "optimum_gu", "optima_count", "lambda_empirical", "max_bfs_distance"] {
            assert!(keys.contains(&k), "{k}");
        }
    }

    #[test]
    fn distance_examples() {
        let s = lone(true);
        let facing = Allocation::new(vec![SensorState::Sector(0)]);
        assert_eq!(shortest_distance_to_local_optimum(&s, &facing).unwrap(), Some(0));
        let away = Allocation::new(vec![SensorState::Sector(2)]);
        assert_eq!(shortest_distance_to_local_optimum(&s, &away).unwrap(), Some(1));
        let flat = Scenario::with_defaults(vec![Point2D::new(0.0, 0.0); 2], vec![]);
        assert_eq!(shortest_distance_to_local_optimum(&flat, &flat.default_start()).unwrap(), None);
    }

    #[test]
    fn parallel_path_matches_sequential() {
        // 4^8 = 65536 allocations goes through rayon
        let sensors: Vec<Point2D> = (0..8).map(|i| Point2D::new(i as f64 * 0.7, (i % 3) as f64)).collect();
        let targets = vec![Point2D::new(1.0, 1.0), Point2D::new(3.0, 0.5), Point2D::new(4.5, 2.5)];
        let s = Scenario { off_allowed: true, ..Scenario::with_defaults(sensors, targets) };
        let fast = enumerate_optimum(&s).unwrap();
        assert_eq!(fast.visited, 65536);
        let space = StateSpace::new(&s, u64::MAX).unwrap();
        let eval = Evaluator::new(&s);
        let gus: Vec<f64> = (0..space.total()).map(|i| eval.global_utility(&space.decode(i))).collect();
        let best = gus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let at: Vec<Allocation> = (0..space.total())
            .filter(|&i| gus[i as usize] == best)
            .map(|i| space.decode(i))
            .collect();
        assert_eq!(fast.optimum_gu, best);
        assert_eq!(fast.optimum_allocations, at);
    }
}
