//! Test-only reference code. Nothing here calls into the crate's geometry
//! or utility code; it recomputes everything from coordinates.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use servalloc::{Allocation, GeometryParams, Point2D, Scenario, SensorState, UtilityParams};

/// Does a sensor at `s` pointing at `state` see `t`? Plain trigonometry.
pub fn naive_sees(g: &GeometryParams, s: (f64, f64), state: SensorState, t: (f64, f64)) -> bool {
    let SensorState::Sector(sector) = state else { return false };
    let (dx, dy) = (t.0 - s.0, t.1 - s.1);
    let dist = (dx * dx + dy * dy).sqrt();
    if dist > g.view_range {
        return false;
    }
    if dist == 0.0 {
        return true;
    }
    let mut bearing = dy.atan2(dx) * 180.0 / std::f64::consts::PI;
    if bearing < 0.0 {
        bearing += 360.0;
    }
    let mut rel = bearing - g.sector_origin - sector as f64 * g.view_angle;
    while rel < 0.0 {
        rel += 360.0;
    }
    while rel >= 360.0 {
        rel -= 360.0;
    }
    rel < g.view_angle
}

/// GU by a double loop over targets and sensors.
pub fn naive_gu(scenario: &Scenario, states: &[SensorState]) -> f64 {
    let u = &scenario.utility;
    let mut total = 0.0;
    for t in &scenario.targets {
        let mut n = 0;
        for (s, &state) in scenario.sensors.iter().zip(states) {
            if naive_sees(&scenario.geometry, (s.x, s.y), state, (t.x, t.y)) {
                n += 1;
            }
        }
        total += match n {
            0 => 0.0,
            1 => u.k2,
            n => u.k2 + n as f64 - 2.0,
        };
    }
    for &state in states {
        if state != SensorState::Off {
            total -= u.k1;
        }
    }
    total
}

pub fn legal_states(scenario: &Scenario) -> Vec<SensorState> {
    let mut v: Vec<SensorState> = (0..scenario.geometry.num_sectors).map(SensorState::Sector).collect();
    if scenario.off_allowed {
        v.push(SensorState::Off);
    }
    v
}

/// Every allocation, by counting in base m.
pub fn all_allocations(scenario: &Scenario) -> Vec<Vec<SensorState>> {
    let states = legal_states(scenario);
    let n = scenario.sensors.len();
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        out.push(digits.iter().map(|&d| states[d]).collect());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < states.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// (max GU, number of allocations visited)
pub fn naive_optimum(scenario: &Scenario) -> (f64, usize) {
    let all = all_allocations(scenario);
    let best = all.iter().map(|a| naive_gu(scenario, a)).fold(f64::NEG_INFINITY, f64::max);
    (best, all.len())
}

/// Strict local optimum by explicit neighbor generation.
pub fn naive_is_local_optimum(scenario: &Scenario, states: &[SensorState]) -> bool {
    let here = naive_gu(scenario, states);
    let legal = legal_states(scenario);
    for i in 0..states.len() {
        for &s in &legal {
            if s == states[i] {
                continue;
            }
            let mut other = states.to_vec();
            other[i] = s;
            if naive_gu(scenario, &other) >= here {
                return false;
            }
        }
    }
    true
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, side: f64) -> Vec<Point2D> {
    (0..n)
        .map(|_| Point2D::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect()
}

pub fn random_scenario<R: Rng>(rng: &mut R, sensors: usize, targets: usize, side: f64, off_allowed: bool) -> Scenario {
    Scenario {
        sensors: random_points(rng, sensors, side),
        targets: random_points(rng, targets, side),
        geometry: GeometryParams::default(),
        utility: UtilityParams::default(),
        off_allowed,
    }
}

pub fn random_allocation<R: Rng>(rng: &mut R, scenario: &Scenario) -> Allocation {
    let legal = legal_states(scenario);
    Allocation::new(
        (0..scenario.sensors.len())
            .map(|_| legal[rng.random_range(0..legal.len())])
            .collect(),
    )
}
