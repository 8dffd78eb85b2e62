//! Synthetic vehicle drives for fixtures and tests.
//!
//! The car follows a random walk in heading and moves along it. The roof
//! sensor sees a slowly varying irradiance with short dark stretches; each
//! side sensor reads `s₁(1 + f_side(heading, lat, lon))` with small noise.
//! Every `invalid_every`-th row gets an out-of-range heading.

use randnet_core::rng::RngStream;
use randnet_core::vipv::{SensorRecord, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct DriveConfig {
    pub seed: u64,
    pub rows: usize,
    pub start_time: f64,
    /// Standard deviation of the multiplicative sensor noise.
    pub noise: f64,
    /// `0` disables invalid rows.
    pub invalid_every: usize,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            seed: 0,
            rows: 1000,
            start_time: 1_600_000_000.0,
            noise: 0.01,
            invalid_every: 0,
        }
    }
}

const ORIGIN: (f64, f64) = (48.78, 9.18);

/// Relative deviation `f` of a side sensor from the roof sensor.
pub fn side_effect(side: Side, heading: f64, lat: f64, lon: f64) -> f64 {
    let a = heading.to_radians();
    // a building shadow near a fixed point
    let d2 = ((lat - ORIGIN.0 - 0.002) / 0.001).powi(2) + ((lon - ORIGIN.1 - 0.002) / 0.001).powi(2);
    let shadow = -0.3 * (-d2).exp();
    let orientation = match side {
        Side::Left => 0.3 * a.sin() + 0.05 * (2.0 * a).cos(),
        Side::Right => -0.3 * a.sin() + 0.05 * (2.0 * a).cos(),
        Side::Back => 0.25 * a.cos(),
    };
    orientation - 0.2 + shadow
}

pub fn drive_log(cfg: &DriveConfig) -> Vec<SensorRecord> {
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut heading = 360.0 * rng.uniform();
    let (mut lat, mut lon) = ORIGIN;
    let mut level = 600.0;
    let mut dark = 0usize;
    let mut out = Vec::with_capacity(cfg.rows);
    for i in 0..cfg.rows {
        heading = (heading + 15.0 * rng.standard_normal()).rem_euclid(360.0);
        let a = heading.to_radians();
        lat += 5e-5 * a.cos();
        lon += 7e-5 * a.sin();
        level = (level + 10.0 * rng.standard_normal()).clamp(200.0, 1000.0);
        if dark == 0 && rng.uniform() < 0.005 {
            dark = 5;
        }
        let up = if dark > 0 {
            dark -= 1;
            0.5 * rng.uniform()
        } else {
            level
        };
        let mut side = |s: Side| {
            let v = up * (1.0 + side_effect(s, heading, lat, lon)) * (1.0 + cfg.noise * rng.standard_normal());
            v.max(0.0)
        };
        let (left, right, back) = (side(Side::Left), side(Side::Right), side(Side::Back));
        let mut r = SensorRecord {
            timestamp: cfg.start_time + i as f64,
            irr_up: up,
            irr_left: left,
            irr_right: right,
            irr_back: back,
            heading,
            lat,
            lon,
            wind_speed: 3.0 * rng.uniform(),
            wind_dir: 360.0 * rng.uniform(),
            air_temp: 18.0 + 4.0 * rng.uniform(),
        };
        if cfg.invalid_every > 0 && (i + 1) % cfg.invalid_every == 0 {
            r.heading += 360.0;
        }
        out.push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use randnet_core::vipv::clean_log;

    #[test]
    fn logs_are_reproducible_and_valid() {
        let cfg = DriveConfig {
            rows: 300,
            ..DriveConfig::default()
        };
        let a = drive_log(&cfg);
        assert_eq!(a, drive_log(&cfg));
        let (kept, dropped) = clean_log(a);
        assert_eq!((kept.len(), dropped), (300, 0));
    }

    #[test]
    fn invalid_rows_are_injected() {
        let log = drive_log(&DriveConfig {
            rows: 100,
            invalid_every: 25,
            ..DriveConfig::default()
        });
        assert_eq!(clean_log(log).1, 4);
    }
}
