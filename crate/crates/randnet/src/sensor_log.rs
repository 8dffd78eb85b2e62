//! Vehicle sensor logs as CSV with a fixed header.

use std::path::Path;

use randnet_core::vipv::{clean_log, SensorRecord};

use crate::dataset::csv_io;
use crate::error::{CliError, Result};

pub const HEADER: [&str; 11] = [
    "timestamp",
    "irr_up",
    "irr_left",
    "irr_right",
    "irr_back",
    "heading",
    "lat",
    "lon",
    "wind_speed",
    "wind_dir",
    "air_temp",
];

/// Records of a log in file order, with the count of rows dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLog {
    pub records: Vec<SensorRecord>,
    pub dropped: usize,
}

fn parse(rec: &csv::StringRecord) -> Option<SensorRecord> {
    if rec.len() != HEADER.len() {
        return None;
    }
    let mut v = [0.0; 11];
    for (slot, field) in v.iter_mut().zip(rec.iter()) {
        *slot = field.trim().parse().ok()?;
    }
    Some(SensorRecord {
        timestamp: v[0],
        irr_up: v[1],
        irr_left: v[2],
        irr_right: v[3],
        irr_back: v[4],
        heading: v[5],
        lat: v[6],
        lon: v[7],
        wind_speed: v[8],
        wind_dir: v[9],
        air_temp: v[10],
    })
}

/// Rows that do not parse, fail validation or break timestamp order are
/// dropped and counted.
pub fn load_sensor_log(path: &Path) -> Result<SensorLog> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header = rdr.headers().map_err(|e| csv_io(path, e))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::format(
            path,
            format!("expected header `{}`", HEADER.join(",")),
        ));
    }
    let mut unparsed = 0;
    let mut parsed = Vec::new();
    for rec in rdr.records() {
        match rec.ok().as_ref().and_then(parse) {
            Some(r) => parsed.push(r),
            None => unparsed += 1,
        }
    }
    let (records, invalid) = clean_log(parsed);
    Ok(SensorLog {
        records,
        dropped: unparsed + invalid,
    })
}

pub fn write_sensor_log(path: &Path, records: &[SensorRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(HEADER).map_err(|e| csv_io(path, e))?;
    for r in records {
        let fields = [
            r.timestamp,
            r.irr_up,
            r.irr_left,
            r.irr_right,
            r.irr_back,
            r.heading,
            r.lat,
            r.lon,
            r.wind_speed,
            r.wind_dir,
            r.air_temp,
        ];
        w.write_record(fields.iter().map(|v| v.to_string()))
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
