//! Closed-form landscape predictions under the independent-neighbors
//! approximation: each neighbor is worse with probability 1/2.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Number of neighbors of any allocation: `(num_states - 1) * num_sensors`.
pub fn branching_factor(num_sensors: u64, num_states: u64) -> u64 {
    num_states.saturating_sub(1) * num_sensors
}

/// Probability that an allocation beats all `b` neighbors: `2^-b`.
pub fn lambda_prediction(b: u64) -> f64 {
    // exact: a power of two down to 2^-1074
    0.5f64.powi(b.min(i32::MAX as u64) as i32)
}

/// `2^-b` as an exact fraction, for `b <= 63`.
pub fn lambda_exact(b: u32) -> Option<Ratio<u64>> {
    1u64.checked_shl(b).map(|den| Ratio::new(1, den))
}

/// Expected count of local optima, `lambda * |A|`.
pub fn expected_local_optima(lambda: f64, total_allocations: f64) -> f64 {
    lambda * total_allocations
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalIsGlobal {
    /// `min(1, 1 / (lambda * |A|))`.
    pub probability: f64,
    /// The unclamped `1 / (lambda * |A|)`.
    pub raw: f64,
    pub clamped: bool,
}

pub fn pr_local_is_global(lambda: f64, total_allocations: f64) -> LocalIsGlobal {
    let raw = 1.0 / (lambda * total_allocations);
    let clamped = raw.is_nan() || raw > 1.0;
    LocalIsGlobal {
        probability: if clamped { 1.0 } else { raw },
        raw,
        clamped,
    }
}

/// Depth `d` at which `lambda * |A| * b^d` first exceeds `|A|`: `b * log_b 2`.
pub fn expected_distance_bound(b: u64) -> Result<f64> {
    if b < 2 {
        return Err(Error::Domain(format!(
            "distance bound needs a branching factor of at least 2, got {b}"
        )));
    }
    let b = b as f64;
    Ok(b * std::f64::consts::LN_2 / b.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryReport {
    pub num_sensors: u64,
    pub num_states: u64,
    pub branching_factor: u64,
    pub lambda: f64,
    pub total_allocations: f64,
    pub expected_local_optima: f64,
    pub pr_local_is_global: LocalIsGlobal,
    /// `1 / 2^b`, the other closed form given for the same probability.
    pub pr_local_is_global_alt: f64,
    /// `None` when the branching factor is below 2.
    pub expected_distance_bound: Option<f64>,
}

impl TheoryReport {
    /// Report with `|A| = num_states ^ num_sensors`.
    pub fn new(num_sensors: u64, num_states: u64) -> Self {
        let total = (num_states as f64).powf(num_sensors as f64);
        Self::with_total(num_sensors, num_states, total)
    }

    /// Report for an explicit `|A|`, e.g. `b ^ |S|`.
    pub fn with_total(num_sensors: u64, num_states: u64, total_allocations: f64) -> Self {
        let b = branching_factor(num_sensors, num_states);
        let lambda = lambda_prediction(b);
        Self {
            num_sensors,
            num_states,
            branching_factor: b,
            lambda,
            total_allocations,
            expected_local_optima: expected_local_optima(lambda, total_allocations),
            pr_local_is_global: pr_local_is_global(lambda, total_allocations),
            pr_local_is_global_alt: lambda,
            expected_distance_bound: expected_distance_bound(b).ok(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branching() {
        assert_eq!(branching_factor(7, 4), 21);
        assert_eq!(branching_factor(7, 3), 14);
        assert_eq!(branching_factor(0, 4), 0);
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_prediction(3), 0.125);
        assert_eq!(lambda_prediction(0), 1.0);
        assert!((lambda_prediction(21) - 4.768e-7).abs() < 1e-10);
        assert_eq!(lambda_exact(3), Some(Ratio::new(1, 8)));
        assert_eq!(lambda_exact(64), None);
    }

    #[test]
    fn optima_and_probability() {
        assert_eq!(expected_local_optima(0.125, 64.0), 8.0);
        assert_eq!(expected_local_optima(1.0, 17.0), 17.0);
        let tiny = expected_local_optima(lambda_prediction(21), 2187.0);
        assert!((tiny - 1.0428e-3).abs() < 1e-6, "{tiny}");

        let p = pr_local_is_global(0.125, 64.0);
        assert_eq!(p.probability, 0.125);
        assert!(!p.clamped);
        let one = pr_local_is_global(0.25, 4.0);
        assert_eq!(one.probability, 1.0);
        assert!(!one.clamped);
        let c = pr_local_is_global(lambda_prediction(21), 2187.0);
        assert_eq!(c.probability, 1.0);
        assert!(c.clamped);
        assert!(c.raw > 900.0);
    }

    #[test]
    fn distance_bound() {
        assert_eq!(expected_distance_bound(2).unwrap(), 2.0);
        let d = expected_distance_bound(21).unwrap();
        assert!((d - 4.781).abs() < 1e-3, "{d}");
        assert!(matches!(expected_distance_bound(1), Err(Error::Domain(_))));
        assert!(expected_distance_bound(0).is_err());
    }

    #[test]
    fn report_for_seven_sensors() {
        let r = TheoryReport::new(7, 4);
        assert_eq!(r.branching_factor, 21);
        assert_eq!(r.total_allocations, 16384.0);
        assert!(r.pr_local_is_global.clamped);
        assert!(r.expected_distance_bound.is_some());
        assert_eq!(TheoryReport::new(1, 1).expected_distance_bound, None);
    }
}
