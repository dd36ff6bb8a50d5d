//! The bidding protocol.
//!
//! Every round, each target sends a bid to its `k` nearest sensors asking
//! them to turn to the sector that faces it. Each sensor then adds up the
//! bids per sector and turns to the sector with the highest aggregate
//! demand. All sensors decide simultaneously from the bids of that round.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    strictly_greater, target_utility, Allocation, Evaluator, Scenario, SensorState, Utility,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BidMessage {
    pub target_index: usize,
    pub sensor_index: usize,
    /// Always a sector, never off.
    pub sector: SensorState,
    pub amount: Utility,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum BidMode {
    /// Every bid carries the same amount.
    Fixed { amount: Utility },
    /// Bid the target's utility gain, judged from its neighbors' states only.
    Marginal,
}

impl Default for BidMode {
    fn default() -> Self {
        BidMode::Fixed { amount: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BidPolicy {
    pub mode: BidMode,
    /// How many nearest sensors each target bids to.
    pub neighbor_count: usize,
}

impl BidPolicy {
    pub fn fixed(neighbor_count: usize) -> Self {
        Self {
            mode: BidMode::default(),
            neighbor_count,
        }
    }

    pub fn marginal(neighbor_count: usize) -> Self {
        Self {
            mode: BidMode::Marginal,
            neighbor_count,
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        check_neighbor_count(scenario, self.neighbor_count)?;
        if let BidMode::Fixed { amount } = self.mode {
            if !(amount.is_finite() && amount >= 0.0) {
                return Err(Error::InvalidParameter(format!("bid amount must be >= 0, got {amount}")));
            }
        }
        Ok(())
    }
}

fn check_neighbor_count(scenario: &Scenario, k: usize) -> Result<()> {
    if k == 0 || k > scenario.num_sensors() {
        return Err(Error::InvalidParameter(format!(
            "neighbor count must be in 1..={}, got {k}",
            scenario.num_sensors()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundConfig {
    pub max_rounds: usize,
    /// Stop after this many consecutive rounds without a state change.
    pub quiescence_rounds: usize,
    /// Chance that a bid is lost before its sensor decides.
    pub miss_probability: f64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        Self {
            max_rounds: 50,
            quiescence_rounds: 3,
            miss_probability: 0.0,
        }
    }
}

impl RoundConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 || self.quiescence_rounds == 0 {
            return Err(Error::InvalidParameter("round counts must be positive".into()));
        }
        if self.quiescence_rounds > self.max_rounds {
            return Err(Error::InvalidParameter(format!(
                "quiescence_rounds {} exceeds max_rounds {}",
                self.quiescence_rounds, self.max_rounds
            )));
        }
        if !(0.0..=1.0).contains(&self.miss_probability) {
            return Err(Error::InvalidParameter(format!(
                "miss_probability must be in [0, 1], got {}",
                self.miss_probability
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub allocation: Allocation,
    pub gu: Utility,
    pub alpha: Option<f64>,
}

/// Per-round history of one run. Record 0 is the start allocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace {
    pub records: Vec<RoundRecord>,
    pub converged: bool,
    pub rounds_executed: usize,
}

impl RunTrace {
    pub fn starting_at(allocation: Allocation, gu: Utility) -> Self {
        Self {
            records: vec![RoundRecord {
                round: 0,
                allocation,
                gu,
                alpha: None,
            }],
            converged: false,
            rounds_executed: 0,
        }
    }

    pub fn last(&self) -> &RoundRecord {
        self.records.last().expect("trace always holds the start record")
    }

    /// Fills in every record's alpha against `optimum_gu`.
    pub fn with_optimum(mut self, optimum_gu: Utility) -> Self {
        for r in &mut self.records {
            r.alpha = crate::experiment::alpha(r.gu, optimum_gu);
        }
        self
    }

    /// Round of the last state change; 0 if the start allocation was kept.
    pub fn settle_round(&self) -> usize {
        self.records
            .windows(2)
            .rev()
            .find(|w| w[0].allocation != w[1].allocation)
            .map_or(0, |w| w[1].round)
    }

    /// Share of executed rounds in which GU went down.
    pub fn gu_decrease_fraction(&self) -> f64 {
        if self.rounds_executed == 0 {
            return 0.0;
        }
        let drops = self
            .records
            .windows(2)
            .filter(|w| strictly_greater(w[0].gu, w[1].gu))
            .count();
        drops as f64 / self.rounds_executed as f64
    }
}

/// What a target knows: the states of its selected sensors, `None` elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationView(Vec<Option<SensorState>>);

impl AllocationView {
    pub fn of(allocation: &Allocation, known: &[usize]) -> Self {
        let mut view = vec![None; allocation.len()];
        for &s in known {
            view[s] = Some(allocation.state(s));
        }
        Self(view)
    }

    pub fn full(allocation: &Allocation) -> Self {
        Self(allocation.states().iter().copied().map(Some).collect())
    }

    pub fn state(&self, sensor: usize) -> Option<SensorState> {
        self.0.get(sensor).copied().flatten()
    }
}

/// The `k` sensors nearest to `target`, ordered by (distance, index).
pub fn select_neighbors(scenario: &Scenario, target: usize, k: usize) -> Result<Vec<usize>> {
    scenario.check_target(target)?;
    check_neighbor_count(scenario, k)?;
    let t = &scenario.targets[target];
    let mut order: Vec<(f64, usize)> = scenario
        .sensors
        .iter()
        .enumerate()
        .map(|(i, s)| (s.distance(t), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(order.into_iter().take(k).map(|(_, i)| i).collect())
}

/// The sector of `sensor` that faces `target`, or `None` when out of range.
pub fn desired_sector(scenario: &Scenario, sensor: usize, target: usize) -> Result<Option<SensorState>> {
    scenario.check_sensor(sensor)?;
    scenario.check_target(target)?;
    let mask = scenario
        .geometry
        .visible_sectors(&scenario.sensors[sensor], &scenario.targets[target]);
    Ok(lowest_sector(mask))
}

fn lowest_sector(mask: u64) -> Option<SensorState> {
    (mask != 0).then(|| SensorState::Sector(mask.trailing_zeros()))
}

/// The bid `target` sends to `sensor`, if the sensor can face it at all.
pub fn compute_bid(
    scenario: &Scenario,
    view: &AllocationView,
    policy: &BidPolicy,
    target: usize,
    sensor: usize,
) -> Result<Option<BidMessage>> {
    let Some(sector) = desired_sector(scenario, sensor, target)? else {
        return Ok(None);
    };
    if view.state(sensor).is_none() {
        return Err(Error::InvalidParameter(format!(
            "sensor {sensor} is not among the sensors known to target {target}"
        )));
    }
    let eval = Evaluator::new(scenario);
    Ok(Some(bid_with(&eval, view, &policy.mode, target, sensor, sector)))
}

fn bid_with(
    eval: &Evaluator<'_>,
    view: &AllocationView,
    mode: &BidMode,
    target: usize,
    sensor: usize,
    sector: SensorState,
) -> BidMessage {
    let amount = match *mode {
        BidMode::Fixed { amount } => amount,
        BidMode::Marginal => {
            let params = &eval.scenario().utility;
            let seen_by = |pick: &dyn Fn(usize) -> Option<SensorState>| {
                (0..eval.scenario().num_sensors())
                    .filter(|&s| pick(s).is_some_and(|state| eval.sees(s, state, target)))
                    .count()
            };
            let now = seen_by(&|s| view.state(s));
            let then = seen_by(&|s| if s == sensor { Some(sector) } else { view.state(s) });
            (target_utility(params, then) - target_utility(params, now)).max(0.0)
        }
    };
    BidMessage {
        target_index: target,
        sensor_index: sensor,
        sector,
        amount,
    }
}

/// Turn to the sector with the greatest total bid.
///
/// Ties go to the lowest sector. A sensor keeps its state when it received
/// no bids or when no sector has positive demand.
pub fn sensor_decide(current: SensorState, received: &[BidMessage]) -> SensorState {
    let mut totals: Vec<(u32, Utility)> = Vec::new();
    for bid in received {
        let Some(sector) = bid.sector.sector() else { continue };
        match totals.iter_mut().find(|(s, _)| *s == sector) {
            Some((_, total)) => *total += bid.amount,
            None => totals.push((sector, bid.amount)),
        }
    }
    totals.sort_by_key(|&(s, _)| s);
    let mut best: Option<(u32, Utility)> = None;
    for (sector, total) in totals {
        if best.is_none_or(|(_, b)| strictly_greater(total, b)) {
            best = Some((sector, total));
        }
    }
    match best {
        Some((sector, total)) if strictly_greater(total, 0.0) => SensorState::Sector(sector),
        _ => current,
    }
}

/// Runs the protocol from `start` until quiescence or `config.max_rounds`.
///
/// Alphas are left empty; see [`RunTrace::with_optimum`].
pub fn run_protocol(
    scenario: &Scenario,
    start: &Allocation,
    policy: &BidPolicy,
    config: &RoundConfig,
    seed: u64,
) -> Result<RunTrace> {
    start.validate(scenario)?;
    config.validate()?;
    let eval = Evaluator::new(scenario);
    let mut current = start.clone();
    let mut trace = RunTrace::starting_at(current.clone(), eval.global_utility(&current));

    // With no sensors there is nobody to bid to.
    let known: Vec<Vec<usize>> = if scenario.num_sensors() == 0 {
        vec![Vec::new(); scenario.num_targets()]
    } else {
        policy.validate(scenario)?;
        (0..scenario.num_targets())
            .map(|t| select_neighbors(scenario, t, policy.neighbor_count))
            .collect::<Result<_>>()?
    };
    // (sensor, sector facing the target) for every known sensor in range
    let recipients: Vec<Vec<(usize, SensorState)>> = known
        .iter()
        .enumerate()
        .map(|(t, near)| {
            near.iter()
                .filter_map(|&s| lowest_sector(eval.visible_mask(s, t)).map(|sec| (s, sec)))
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idle = 0;
    for round in 1..=config.max_rounds {
        let mut inbox: Vec<Vec<BidMessage>> = vec![Vec::new(); scenario.num_sensors()];
        for (target, targets_bids) in recipients.iter().enumerate() {
            let view = AllocationView::of(&current, &known[target]);
            for &(sensor, sector) in targets_bids {
                let bid = bid_with(&eval, &view, &policy.mode, target, sensor, sector);
                if config.miss_probability > 0.0 && rng.random_bool(config.miss_probability) {
                    continue;
                }
                inbox[sensor].push(bid);
            }
        }
        let next = Allocation::new(
            current
                .states()
                .iter()
                .zip(&inbox)
                .map(|(&state, bids)| sensor_decide(state, bids))
                .collect(),
        );
        idle = if next == current { idle + 1 } else { 0 };
        current = next;
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
