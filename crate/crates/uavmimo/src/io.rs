//! Config files and CSV outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use uavmimo_core::link::SinrRecord;
use uavmimo_core::tracking::GainSample;
use uavmimo_core::ScenarioConfig;

use crate::error::{io_err, Error, Result};

/// Parses a JSON config (absent keys take their defaults) and validates it.
pub fn parse_config(text: &str, origin: &Path) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|source| {
        let path = origin.to_path_buf();
        if source.is_data() {
            Error::Schema { path, source }
        } else {
            Error::Parse { path, source }
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text, path)
}

pub fn save_config(config: &ScenarioConfig, path: &Path) -> Result<()> {
    write_json(config, path)
}

pub(crate) fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// One row of `sinr_cdf.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrRow {
    pub drop: usize,
    pub user_id: usize,
    pub kind: String,
    pub scheme: String,
    pub sinr_db: f64,
}

impl From<&SinrRecord> for SinrRow {
    fn from(r: &SinrRecord) -> Self {
        Self {
            drop: r.drop,
            user_id: r.user_id,
            kind: r.kind.as_str().into(),
            scheme: r.scheme.as_str().into(),
            sinr_db: r.sinr_db,
        }
    }
}

/// One row of `tracking.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub time_s: f64,
    pub scheme: String,
    pub normalized_gain: f64,
    pub true_az_deg: f64,
    pub true_el_deg: f64,
    pub est_az_deg: f64,
    pub est_el_deg: f64,
    pub trajectory_id: usize,
}

impl TrackingRow {
    pub fn new(g: &GainSample, trajectory_id: usize) -> Self {
        Self {
            time_s: g.time_s,
            scheme: g.scheme.as_str().into(),
            normalized_gain: g.normalized_gain,
            true_az_deg: g.true_az_deg,
            true_el_deg: g.true_el_deg,
            est_az_deg: g.est_az_deg,
            est_el_deg: g.est_el_deg,
            trajectory_id,
        }
    }
}

/// Writes rows with a header, LF line ends and shortest round-trip floats.
pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
