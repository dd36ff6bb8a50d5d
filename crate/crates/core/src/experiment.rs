//! Communication sweeps: seeded random placements, the bidding protocol at
//! each neighbor count, and alpha-ratio aggregation against the oracle.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bidding::{run_protocol, BidMode, BidPolicy, RoundConfig, RunTrace};
use crate::error::{Error, Result};
use crate::geometry::{GeometryParams, Point2D};
use crate::model::{utility_eq, Scenario, Utility, UtilityParams, UTILITY_EPSILON};
use crate::oracle::{enumerate_optimum_with_budget, DEFAULT_ENUMERATION_BUDGET};
use crate::seed::{derive_seed, StreamRole};

/// Width of one alpha histogram bin.
pub const ALPHA_BIN_WIDTH: f64 = 0.05;
const BINS_PER_UNIT: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub num_sensors: usize,
    pub num_targets: usize,
    pub field_width: f64,
    pub field_height: f64,
    pub placements: usize,
    pub runs_per_placement: usize,
    pub neighbor_counts: Vec<usize>,
    pub master_seed: u64,
    pub bid_mode: BidMode,
    pub rounds: RoundConfig,
    pub geometry: GeometryParams,
    pub utility: UtilityParams,
    pub off_allowed: bool,
    pub oracle_budget: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_sensors: 7,
            num_targets: 7,
            field_width: 10.0,
            field_height: 10.0,
            placements: 100,
            runs_per_placement: 10,
            neighbor_counts: (1..=7).collect(),
            master_seed: 1,
            bid_mode: BidMode::default(),
            rounds: RoundConfig::default(),
            geometry: GeometryParams::default(),
            utility: UtilityParams::default(),
            off_allowed: false,
            oracle_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        if self.placements == 0 || self.runs_per_placement == 0 {
            return invalid("placements and runs_per_placement must be positive".into());
        }
        if !(self.field_width.is_finite() && self.field_width >= 0.0)
            || !(self.field_height.is_finite() && self.field_height >= 0.0)
        {
            return invalid("field dimensions must be finite and non-negative".into());
        }
        if self.neighbor_counts.is_empty() {
            return invalid("neighbor_counts is empty".into());
        }
        if let Some(&k) = self
            .neighbor_counts
            .iter()
            .find(|&&k| k == 0 || k > self.num_sensors)
        {
            return invalid(format!("neighbor count {k} outside 1..={}", self.num_sensors));
        }
        if let BidMode::Fixed { amount } = self.bid_mode {
            if !(amount.is_finite() && amount >= 0.0) {
                return invalid(format!("bid amount must be >= 0, got {amount}"));
            }
        }
        self.rounds.validate()?;
        self.geometry.validate()?;
        self.utility.validate()
    }
}

/// Placement `placement_index` of the experiment: positions i.i.d. uniform
/// over the field, sensors first, drawn from the placement's own stream.
pub fn random_scenario(config: &ExperimentConfig, placement_index: usize) -> Scenario {
    let seed = derive_seed(config.master_seed, StreamRole::Placement, 0, placement_index as u64, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || {
        Point2D::new(
            rng.random::<f64>() * config.field_width,
            rng.random::<f64>() * config.field_height,
        )
    };
    let sensors = (0..config.num_sensors).map(|_| point()).collect();
    let targets = (0..config.num_targets).map(|_| point()).collect();
    Scenario {
        sensors,
        targets,
        geometry: config.geometry,
        utility: config.utility,
        off_allowed: config.off_allowed,
    }
}

/// Current over optimal utility; undefined unless the optimum is positive.
pub fn alpha(gu: Utility, optimum_gu: Utility) -> Option<f64> {
    (optimum_gu > UTILITY_EPSILON).then(|| gu / optimum_gu)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlacementInfo {
    pub placement_id: usize,
    pub optimum_gu: Utility,
    pub num_maximizers: usize,
    /// Optimum is not positive, so alpha is undefined.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub k: usize,
    pub placement_id: usize,
    pub run_id: usize,
    pub final_gu: Utility,
    pub final_alpha: Option<f64>,
    /// Final GU equals the oracle optimum (non-degenerate placements only).
    pub optimal: bool,
    pub rounds_executed: usize,
    /// Last round in which some sensor changed state.
    pub rounds_to_quiescence: usize,
    pub converged: bool,
    pub trace: RunTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    /// `floor(alpha / ALPHA_BIN_WIDTH)`; the bin covers
    /// `[index * width, (index + 1) * width)`.
    pub index: i64,
    pub count: usize,
}

impl HistogramBin {
    pub fn lower_edge(&self) -> f64 {
        self.index as f64 / BINS_PER_UNIT
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborCountStats {
    pub k: usize,
    /// Cells with a defined alpha.
    pub included: usize,
    /// Cells on degenerate placements.
    pub excluded: usize,
    pub optimal: usize,
    pub frac_optimal: Option<f64>,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub placements: Vec<PlacementInfo>,
    /// Ordered by (k in config order, placement, run).
    pub cells: Vec<SweepCell>,
    pub per_k: Vec<NeighborCountStats>,
}

impl SweepResult {
    pub fn stats_for(&self, k: usize) -> Option<&NeighborCountStats> {
        self.per_k.iter().find(|s| s.k == k)
    }

    pub fn cells_for(&self, k: usize) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(move |c| c.k == k)
    }
}

pub fn alpha_bin(alpha: f64) -> i64 {
    (alpha * BINS_PER_UNIT + 1e-9).floor() as i64
}

/// Runs the bidding protocol for every (k, placement, run) cell.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;

    let placements: Vec<(Scenario, PlacementInfo)> = (0..config.placements)
        .into_par_iter()
        .map(|p| {
            let scenario = random_scenario(config, p);
            let report = enumerate_optimum_with_budget(&scenario, config.oracle_budget)?;
            let info = PlacementInfo {
                placement_id: p,
                optimum_gu: report.optimum_gu,
                num_maximizers: report.optimum_allocations.len(),
                degenerate: alpha(report.optimum_gu, report.optimum_gu).is_none(),
            };
            Ok((scenario, info))
        })
        .collect::<Result<_>>()?;

    let keys: Vec<(usize, usize, usize)> = config
        .neighbor_counts
        .iter()
        .flat_map(|&k| {
            (0..config.placements)
                .flat_map(move |p| (0..config.runs_per_placement).map(move |r| (k, p, r)))
        })
        .collect();

    let cells: Vec<SweepCell> = keys
        .into_par_iter()
        .map(|(k, p, r)| {
            let (scenario, info) = &placements[p];
            let policy = BidPolicy {
                mode: config.bid_mode,
                neighbor_count: k,
            };
            let seed = derive_seed(config.master_seed, StreamRole::Run, k as u64, p as u64, r as u64);
            let trace = run_protocol(scenario, &scenario.default_start(), &policy, &config.rounds, seed)?
                .with_optimum(info.optimum_gu);
            let last = trace.last();
            Ok(SweepCell {
                k,
                placement_id: p,
                run_id: r,
                final_gu: last.gu,
                final_alpha: last.alpha,
                optimal: !info.degenerate && utility_eq(last.gu, info.optimum_gu),
                rounds_executed: trace.rounds_executed,
                rounds_to_quiescence: trace.settle_round(),
                converged: trace.converged,
                trace,
            })
        })
        .collect::<Result<_>>()?;

    let per_k = config
        .neighbor_counts
        .iter()
        .map(|&k| aggregate(k, cells.iter().filter(|c| c.k == k)))
        .collect();

    Ok(SweepResult {
        config: config.clone(),
        placements: placements.into_iter().map(|(_, info)| info).collect(),
        cells,
        per_k,
    })
}

fn aggregate<'a>(k: usize, cells: impl Iterator<Item = &'a SweepCell>) -> NeighborCountStats {
    let mut included = 0;
    let mut excluded = 0;
    let mut optimal = 0;
    let mut bins: std::collections::BTreeMap<i64, usize> = Default::default();
    for cell in cells {
        match cell.final_alpha {
            Some(a) => {
                included += 1;
                optimal += usize::from(cell.optimal);
                *bins.entry(alpha_bin(a)).or_default() += 1;
            }
            None => excluded += 1,
        }
    }
    // Dense over [0, 1] so every k has the same rows; wider if alpha strays.
    let low = bins.keys().next().copied().unwrap_or(0).min(0);
    let high = bins.keys().next_back().copied().unwrap_or(0).max(alpha_bin(1.0));
    let histogram = (low..=high)
        .map(|index| HistogramBin {
            index,
            count: bins.get(&index).copied().unwrap_or(0),
        })
        .collect();
    NeighborCountStats {
        k,
        included,
        excluded,
        optimal,
        frac_optimal: (included > 0).then(|| optimal as f64 / included as f64),
        histogram,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub k: usize,
    pub mean_alpha: Option<f64>,
    pub frac_optimal: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub mean_rounds: Option<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = values.len();
    (n > 0).then(|| values.sum::<f64>() / n as f64)
}

/// Per-k final-alpha distribution over the cells with a defined alpha.
pub fn summarize(result: &SweepResult) -> Vec<SummaryRow> {
    result
        .per_k
        .iter()
        .map(|stats| {
            let cells: Vec<&SweepCell> = result
                .cells_for(stats.k)
                .filter(|c| c.final_alpha.is_some())
                .collect();
            let mut alphas: Vec<f64> = cells.iter().filter_map(|c| c.final_alpha).collect();
            alphas.sort_by(f64::total_cmp);
            SummaryRow {
                k: stats.k,
                mean_alpha: mean(alphas.iter().copied()),
                frac_optimal: stats.frac_optimal,
                q1: quantile(&alphas, 0.25),
                median: quantile(&alphas, 0.5),
                q3: quantile(&alphas, 0.75),
                mean_rounds: mean(cells.iter().map(|c| c.rounds_to_quiescence as f64)),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_traces_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for cell in &result.cells {
        write_trace_rows(&mut w, &cell.trace, cell.placement_id, cell.run_id, cell.k)?;
    }
    w.flush()?;
    Ok(())
}

/// One run's trace in the `traces.csv` layout.
pub fn write_run_trace_csv<W: Write>(trace: &RunTrace, placement_id: usize, run_id: usize, k: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    write_trace_rows(&mut w, trace, placement_id, run_id, k)?;
    w.flush()?;
    Ok(())
}

const TRACE_HEADER: [&str; 6] = ["placement_id", "run_id", "k", "round", "gu", "alpha"];

fn write_trace_rows<W: Write>(
    w: &mut csv::Writer<W>,
    trace: &RunTrace,
    placement_id: usize,
    run_id: usize,
    k: usize,
) -> Result<()> {
    for r in &trace.records {
        w.write_record([
            placement_id.to_string(),
            run_id.to_string(),
            k.to_string(),
            r.round.to_string(),
            r.gu.to_string(),
            opt(r.alpha),
        ])?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "mean_alpha", "frac_optimal", "q1", "median", "q3", "mean_rounds"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            opt(r.mean_alpha),
            opt(r.frac_optimal),
            opt(r.q1),
            opt(r.median),
            opt(r.q3),
            opt(r.mean_rounds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "alpha_bin", "count"])?;
    for stats in &result.per_k {
        for bin in &stats.histogram {
            w.write_record([
                stats.k.to_string(),
                format!("{:.2}", bin.lower_edge()),
                bin.count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Alpha per round averaged over the runs of each placement. Runs that
/// stopped early hold their final value.
pub fn write_placement_alpha_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "placement_id", "round", "mean_alpha"])?;
    for &k in &result.config.neighbor_counts {
        for info in result.placements.iter().filter(|p| !p.degenerate) {
            let runs: Vec<&RunTrace> = result
                .cells_for(k)
                .filter(|c| c.placement_id == info.placement_id)
                .map(|c| &c.trace)
                .collect();
            let horizon = runs.iter().map(|t| t.records.len()).max().unwrap_or(0);
            for round in 0..horizon {
                let sum: f64 = runs
                    .iter()
                    .filter_map(|t| t.records[round.min(t.records.len() - 1)].alpha)
                    .sum();
                w.write_record([
                    k.to_string(),
                    info.placement_id.to_string(),
                    round.to_string(),
                    (sum / runs.len() as f64).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `traces.csv`, `summary.csv`, `histogram.csv` and
/// `placement_alpha.csv` into `dir`.
pub fn write_outputs(result: &SweepResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_traces_csv(result, File::create(dir.join("traces.csv"))?)?;
    write_summary_csv(&summarize(result), File::create(dir.join("summary.csv"))?)?;
    write_histogram_csv(result, File::create(dir.join("histogram.csv"))?)?;
    write_placement_alpha_csv(result, File::create(dir.join("placement_alpha.csv"))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(70.0, 70.0), Some(1.0));
        assert_eq!(alpha(0.0, 70.0), Some(0.0));
        assert_eq!(alpha(5.0, 0.0), None);
        assert_eq!(alpha(5.0, -3.0), None);
    }

    #[test]
    fn bins() {
        assert_eq!(alpha_bin(1.0), 20);
        assert_eq!(alpha_bin(0.15), 3);
        assert_eq!(alpha_bin(0.0), 0);
        assert_eq!(alpha_bin(0.049), 0);
        assert_eq!(alpha_bin(-0.01), -1);
    }

    #[test]
    fn quantiles() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.25), Some(1.0));
        assert_eq!(quantile(&v, 0.5), Some(2.0));
        assert_eq!(quantile(&[0.0, 1.0], 0.5), Some(0.5));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn placements_are_deterministic() {
        let config = ExperimentConfig::default();
        let a = random_scenario(&config, 3);
        assert_eq!(a, random_scenario(&config, 3));
        assert_ne!(a, random_scenario(&config, 4));
        assert_eq!(a.num_sensors(), 7);
        assert_eq!(a.num_targets(), 7);
        assert!(a.sensors.iter().chain(&a.targets).all(|p| (0.0..=10.0).contains(&p.x) && (0.0..=10.0).contains(&p.y)));
        assert_ne!(
            derive_seed(config.master_seed, StreamRole::Placement, 0, 3, 0),
            derive_seed(config.master_seed, StreamRole::Placement, 0, 4, 0)
        );
    }

    #[test]
    fn config_validation() {
        let bad = [
            ExperimentConfig { placements: 0, ..Default::default() },
            ExperimentConfig { neighbor_counts: vec![8], ..Default::default() },
            ExperimentConfig { neighbor_counts: vec![0], ..Default::default() },
            ExperimentConfig { neighbor_counts: vec![], ..Default::default() },
            ExperimentConfig { field_width: f64::NAN, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sensors": 3}"#).is_err());
    }
}
