//! Planar geometry for sensors and their viewing sectors.
//!
//! Bearings are measured counter-clockwise from the positive x-axis, in
//! degrees, normalized to `[0, 360)`. Sector `s` covers the half-open arc
//! `[origin + s * width, origin + (s + 1) * width)` modulo 360.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sector masks are stored in a `u64`.
pub const MAX_SECTORS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Bearing from `self` to `other`, or `None` when the points coincide.
    pub fn bearing_to(&self, other: &Point2D) -> Option<f64> {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        if dx == 0.0 && dy == 0.0 {
            return None;
        }
        Some(normalize_degrees(dy.atan2(dx).to_degrees()))
    }
}

/// Maps any finite angle onto `[0, 360)`.
pub fn normalize_degrees(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryParams {
    #[serde(rename = "view_angle_deg")]
    pub view_angle: f64,
    pub view_range: f64,
    pub num_sectors: u32,
    #[serde(rename = "sector_origin_deg")]
    pub sector_origin: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            view_angle: 120.0,
            view_range: 3.0,
            num_sectors: 3,
            sector_origin: 0.0,
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.view_angle.is_finite() && self.view_angle > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "view_angle must be positive, got {}",
                self.view_angle
            )));
        }
        if !(self.view_range.is_finite() && self.view_range > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "view_range must be positive, got {}",
                self.view_range
            )));
        }
        if self.num_sectors == 0 || self.num_sectors > MAX_SECTORS {
            return Err(Error::InvalidParameter(format!(
                "num_sectors must be in 1..={MAX_SECTORS}, got {}",
                self.num_sectors
            )));
        }
        if !self.sector_origin.is_finite() {
            return Err(Error::InvalidParameter("sector_origin must be finite".into()));
        }
        Ok(())
    }

    /// Whether `bearing` falls inside the arc of `sector`.
    pub fn arc_contains(&self, sector: u32, bearing: f64) -> bool {
        if self.view_angle >= 360.0 {
            return true;
        }
        let low = self.sector_origin + f64::from(sector) * self.view_angle;
        normalize_degrees(bearing - low) < self.view_angle
    }

    /// Bitmask of the sectors from which a sensor at `sensor` sees `target`.
    pub fn visible_sectors(&self, sensor: &Point2D, target: &Point2D) -> u64 {
        if sensor.distance(target) > self.view_range {
            return 0;
        }
        let all = if self.num_sectors == 64 {
            u64::MAX
        } else {
            (1u64 << self.num_sectors) - 1
        };
        match sensor.bearing_to(target) {
            None => all,
            Some(bearing) => (0..self.num_sectors)
                .filter(|&s| self.arc_contains(s, bearing))
                .fold(0, |mask, s| mask | (1 << s)),
        }
    }
}
