//! Regenerates the files in `fixtures/`.
//!
//! ```text
//! cargo run -p randnet --example make_fixtures -- crates/randnet/fixtures
//! ```

use std::path::PathBuf;

use randnet::dataset::write_dataset;
use randnet::sensor_log::write_sensor_log;
use randnet::synthetic::{drive_log, DriveConfig};
use randnet_core::simulation::{SimConfig, SyntheticTask};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;

    let task = SyntheticTask::new(&SimConfig {
        n: 500,
        n_val: 200,
        q: 3,
        seed: 2024,
        ..SimConfig::default()
    })?;
    write_dataset(&dir.join("train.csv"), &task.training.data)?;
    write_dataset(&dir.join("val.csv"), &task.validation.data)?;

    let train = drive_log(&DriveConfig {
        seed: 1,
        rows: 3000,
        invalid_every: 500,
        ..DriveConfig::default()
    });
    let test = drive_log(&DriveConfig {
        seed: 2,
        rows: 2500,
        start_time: 1_600_100_000.0,
        ..DriveConfig::default()
    });
    write_sensor_log(&dir.join("drive_train.csv"), &train)?;
    write_sensor_log(&dir.join("drive_test.csv"), &test)?;
    Ok(())
}
