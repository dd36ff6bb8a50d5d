//! The world model: scenarios, allocations and the utility functions.
//!
//! A sensor pays `k1` for every step it is switched on. A target's utility
//! depends only on how many sensors currently see it: nothing when unseen,
//! `k2` when seen once, and `k2 + n - 2` when seen by `n` sensors. The
//! global utility is the plain sum of every agent's utility.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{GeometryParams, Point2D};

pub type Utility = f64;

/// Tolerance for every utility comparison. Utilities are sums of small
/// multiples of `k1` and `k2`, so with integral parameters they are exact.
pub const UTILITY_EPSILON: Utility = 1e-9;

/// `a > b` beyond [`UTILITY_EPSILON`].
#[inline]
pub fn strictly_greater(a: Utility, b: Utility) -> bool {
    a > b + UTILITY_EPSILON
}

#[inline]
pub fn utility_eq(a: Utility, b: Utility) -> bool {
    (a - b).abs() <= UTILITY_EPSILON
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SensorState {
    Sector(u32),
    Off,
}

impl SensorState {
    pub fn is_off(self) -> bool {
        matches!(self, SensorState::Off)
    }

    pub fn sector(self) -> Option<u32> {
        match self {
            SensorState::Sector(s) => Some(s),
            SensorState::Off => None,
        }
    }
}

impl fmt::Display for SensorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensorState::Sector(s) => write!(f, "{s}"),
            SensorState::Off => f.write_str("off"),
        }
    }
}

impl FromStr for SensorState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("off") {
            return Ok(SensorState::Off);
        }
        s.parse()
            .map(SensorState::Sector)
            .map_err(|_| Error::IllegalState { state: s.to_string() })
    }
}

// Serialized as the bare sector number, or the string "off".
impl Serialize for SensorState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SensorState::Sector(s) => serializer.serialize_u32(*s),
            SensorState::Off => serializer.serialize_str("off"),
        }
    }
}

impl<'de> Deserialize<'de> for SensorState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Sector(u32),
            Named(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Sector(s) => Ok(SensorState::Sector(s)),
            Repr::Named(name) => name.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityParams {
    pub k1: Utility,
    pub k2: Utility,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self { k1: 1.0, k2: 10.0 }
    }
}

impl UtilityParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k1", self.k1), ("k2", self.k2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Utility of a single sensor in `state`.
pub fn sensor_utility(params: &UtilityParams, state: SensorState) -> Utility {
    if state.is_off() {
        0.0
    } else {
        -params.k1
    }
}

/// Utility of a target seen by `seen_by` sensors.
pub fn target_utility(params: &UtilityParams, seen_by: usize) -> Utility {
    match seen_by {
        0 => 0.0,
        1 => params.k2,
        n => params.k2 + n as Utility - 2.0,
    }
}

/// An immutable world: sensor and target positions plus parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub sensors: Vec<Point2D>,
    pub targets: Vec<Point2D>,
    #[serde(default)]
    pub geometry: GeometryParams,
    #[serde(default)]
    pub utility: UtilityParams,
    #[serde(default)]
    pub off_allowed: bool,
}

impl Scenario {
    pub fn new(
        sensors: Vec<Point2D>,
        targets: Vec<Point2D>,
        geometry: GeometryParams,
        utility: UtilityParams,
        off_allowed: bool,
    ) -> Result<Self> {
        let scenario = Self {
            sensors,
            targets,
            geometry,
            utility,
            off_allowed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Default geometry and utility, `off_allowed = false`.
    pub fn with_defaults(sensors: Vec<Point2D>, targets: Vec<Point2D>) -> Self {
        Self {
            sensors,
            targets,
            geometry: GeometryParams::default(),
            utility: UtilityParams::default(),
            off_allowed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.utility.validate()?;
        let finite = |p: &Point2D| p.x.is_finite() && p.y.is_finite();
        if !self.sensors.iter().chain(&self.targets).all(finite) {
            return Err(Error::InvalidParameter("positions must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(json)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn num_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    /// Number of legal states per sensor.
    pub fn num_states(&self) -> usize {
        self.geometry.num_sectors as usize + usize::from(self.off_allowed)
    }

    /// Legal states in canonical order: sectors ascending, then off.
    pub fn states(&self) -> impl Iterator<Item = SensorState> + '_ {
        (0..self.geometry.num_sectors)
            .map(SensorState::Sector)
            .chain(self.off_allowed.then_some(SensorState::Off))
    }

    pub fn is_legal(&self, state: SensorState) -> bool {
        match state {
            SensorState::Sector(s) => s < self.geometry.num_sectors,
            SensorState::Off => self.off_allowed,
        }
    }

    /// All sensors at sector 0 when off is not allowed, all off otherwise.
    pub fn default_start(&self) -> Allocation {
        let state = if self.off_allowed {
            SensorState::Off
        } else {
            SensorState::Sector(0)
        };
        Allocation::uniform(self.num_sensors(), state)
    }

    pub(crate) fn check_sensor(&self, index: usize) -> Result<()> {
        if index < self.sensors.len() {
            Ok(())
        } else {
            Err(Error::index("sensor", index, self.sensors.len()))
        }
    }

    pub(crate) fn check_target(&self, index: usize) -> Result<()> {
        if index < self.targets.len() {
            Ok(())
        } else {
            Err(Error::index("target", index, self.targets.len()))
        }
    }

    /// Whether sensor `sensor` in `state` sees target `target`.
    pub fn sees(&self, sensor: usize, state: SensorState, target: usize) -> Result<bool> {
        self.check_sensor(sensor)?;
        self.check_target(target)?;
        let SensorState::Sector(sector) = state else {
            return Ok(false);
        };
        if sector >= self.geometry.num_sectors {
            return Err(Error::IllegalState { state: state.to_string() });
        }
        let mask = self
            .geometry
            .visible_sectors(&self.sensors[sensor], &self.targets[target]);
        Ok(mask & (1 << sector) != 0)
    }
}

/// One state per sensor, index-aligned with [`Scenario::sensors`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<SensorState>);

impl Allocation {
    pub fn new(states: Vec<SensorState>) -> Self {
        Self(states)
    }

    pub fn uniform(len: usize, state: SensorState) -> Self {
        Self(vec![state; len])
    }

    pub fn states(&self) -> &[SensorState] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn state(&self, sensor: usize) -> SensorState {
        self.0[sensor]
    }

    pub fn set(&mut self, sensor: usize, state: SensorState) {
        self.0[sensor] = state;
    }

    pub fn with_state(&self, sensor: usize, state: SensorState) -> Self {
        let mut next = self.clone();
        next.0[sensor] = state;
        next
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        if self.0.len() != scenario.num_sensors() {
            return Err(Error::LengthMismatch {
                expected: scenario.num_sensors(),
                got: self.0.len(),
            });
        }
        match self.0.iter().find(|s| !scenario.is_legal(**s)) {
            Some(bad) => Err(Error::IllegalState { state: bad.to_string() }),
            None => Ok(()),
        }
    }

    /// Number of sensor positions where the two allocations differ.
    pub fn hamming(&self, other: &Allocation) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

/// f_c(a): how many sensors see `target` under `allocation`.
pub fn coverage_count(scenario: &Scenario, allocation: &Allocation, target: usize) -> Result<usize> {
    scenario.check_target(target)?;
    allocation.validate(scenario)?;
    let mut count = 0;
    for (sensor, &state) in allocation.states().iter().enumerate() {
        if scenario.sees(sensor, state, target)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Sum of all target and sensor utilities.
pub fn global_utility(scenario: &Scenario, allocation: &Allocation) -> Result<Utility> {
    allocation.validate(scenario)?;
    let mut total = 0.0;
    for target in 0..scenario.num_targets() {
        total += target_utility(&scenario.utility, coverage_count(scenario, allocation, target)?);
    }
    for &state in allocation.states() {
        total += sensor_utility(&scenario.utility, state);
    }
    Ok(total)
}

/// Precomputed visibility table for repeated utility evaluation.
///
/// Allocations passed to the evaluator are assumed to be valid for its
/// scenario; validate untrusted input first.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    scenario: &'a Scenario,
    // masks[sensor * num_targets + target]
    masks: Vec<u64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let g = &scenario.geometry;
        let masks = scenario
            .sensors
            .iter()
            .flat_map(|s| scenario.targets.iter().map(move |t| g.visible_sectors(s, t)))
            .collect();
        Self { scenario, masks }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    #[inline]
    pub fn sees(&self, sensor: usize, state: SensorState, target: usize) -> bool {
        match state {
            SensorState::Sector(s) => {
                self.masks[sensor * self.scenario.num_targets() + target] & (1 << s) != 0
            }
            SensorState::Off => false,
        }
    }

    /// Sectors of `sensor` that see `target`, as a bitmask.
    #[inline]
    pub fn visible_mask(&self, sensor: usize, target: usize) -> u64 {
        self.masks[sensor * self.scenario.num_targets() + target]
    }

    pub fn coverage(&self, allocation: &Allocation, target: usize) -> usize {
        allocation
            .states()
            .iter()
            .enumerate()
            .filter(|&(sensor, &state)| self.sees(sensor, state, target))
            .count()
    }

    pub fn coverage_counts(&self, allocation: &Allocation) -> Vec<usize> {
        let mut counts = vec![0; self.scenario.num_targets()];
        for (sensor, &state) in allocation.states().iter().enumerate() {
            for (target, count) in counts.iter_mut().enumerate() {
                if self.sees(sensor, state, target) {
                    *count += 1;
                }
            }
        }
        counts
    }

    /// U_c(a) for one target.
    pub fn target_utility(&self, allocation: &Allocation, target: usize) -> Utility {
        target_utility(&self.scenario.utility, self.coverage(allocation, target))
    }

    pub fn global_utility(&self, allocation: &Allocation) -> Utility {
        let params = &self.scenario.utility;
        let targets: Utility = self
            .coverage_counts(allocation)
            .into_iter()
            .map(|n| target_utility(params, n))
            .sum();
        let sensors: Utility = allocation
            .states()
            .iter()
            .map(|&s| sensor_utility(params, s))
            .sum();
        targets + sensors
    }

    /// GU(a') - GU(a) where a' sets `sensor` to `new_state`.
    pub fn delta(&self, allocation: &Allocation, sensor: usize, new_state: SensorState) -> Utility {
        let old_state = allocation.state(sensor);
        if old_state == new_state {
            return 0.0;
        }
        let params = &self.scenario.utility;
        let mut delta = sensor_utility(params, new_state) - sensor_utility(params, old_state);
        for target in 0..self.scenario.num_targets() {
            let was = self.sees(sensor, old_state, target);
            let will = self.sees(sensor, new_state, target);
            if was == will {
                continue;
            }
            let n = self.coverage(allocation, target);
            let m = if will { n + 1 } else { n - 1 };
            delta += target_utility(params, m) - target_utility(params, n);
        }
        delta
    }
}
