//! Machine-readable outputs of the commands.

use std::path::Path;

use randnet_core::criteria::MspeDecomposition;
use randnet_core::simulation::{summarize_distribution, DistributionSummary};
use randnet_core::twostage::TwoStageResult;
use randnet_core::vipv::VipvReport;
use serde::Serialize;

use crate::dataset::csv_io;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub min: f64,
    pub q25: f64,
    pub mean: f64,
    pub q95: f64,
    pub max: f64,
}

impl From<DistributionSummary> for Summary {
    fn from(s: DistributionSummary) -> Self {
        Summary {
            min: s.min,
            q25: s.q25,
            mean: s.mean,
            q95: s.q95,
            max: s.max,
        }
    }
}

/// Cross-validation report; `j_star` counts draws from 1.
#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub draws: usize,
    pub seed: u64,
    pub j_star: usize,
    pub best_mspe: f64,
    pub mean_mspe: f64,
    pub summary: Summary,
    pub z: Vec<f64>,
}

impl CvReport {
    pub fn new(z: Vec<f64>, best: usize, mean_mspe: f64, seed: u64) -> Result<Self> {
        let summary = summarize_distribution(0, &z)?.into();
        Ok(CvReport {
            draws: z.len(),
            seed,
            j_star: best + 1,
            best_mspe: z[best],
            mean_mspe,
            summary,
            z,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalReport {
    pub d: f64,
    pub alpha: f64,
    pub seed: u64,
    pub sigma_pilot: f64,
    #[serde(rename = "J0")]
    pub j0: usize,
    #[serde(rename = "sigma_J0")]
    pub sigma_j0: f64,
    #[serde(rename = "J_opt")]
    pub j_opt: usize,
    pub mean: f64,
    pub interval: [f64; 2],
    pub z: Vec<f64>,
}

impl IntervalReport {
    pub fn new(r: TwoStageResult, d: f64, alpha: f64, seed: u64) -> Self {
        IntervalReport {
            d,
            alpha,
            seed,
            sigma_pilot: r.sigma_pilot,
            j0: r.j0,
            sigma_j0: r.sigma_j0,
            j_opt: r.j_opt,
            mean: r.mean,
            interval: [r.interval.0, r.interval.1],
            z: r.z,
        }
    }
}

pub const SIMULATION_HEADER: [&str; 6] = ["h", "min", "q25", "mean", "q95", "max"];

pub fn write_simulation(path: &Path, rows: &[DistributionSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(SIMULATION_HEADER).map_err(|e| csv_io(path, e))?;
    for s in rows {
        w.write_record([
            s.h.to_string(),
            s.min.to_string(),
            s.q25.to_string(),
            s.mean.to_string(),
            s.q95.to_string(),
            s.max.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub mspe: f64,
    #[serde(rename = "mspe_0.1")]
    pub lower_tail: f64,
    #[serde(rename = "mspe_0.1_0.9")]
    pub central: f64,
    #[serde(rename = "mspe_0.9")]
    pub upper_tail: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl From<MspeDecomposition> for Decomposition {
    fn from(d: MspeDecomposition) -> Self {
        Decomposition {
            mspe: d.total,
            lower_tail: d.lower_tail,
            central: d.central,
            upper_tail: d.upper_tail,
            q_lo: d.q_lo,
            q_hi: d.q_hi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodEntry {
    pub method: &'static str,
    pub validation: Decomposition,
    pub training_mspe: f64,
    pub predictions: Vec<f64>,
    pub cumulative_predicted: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VipvOutput {
    pub side: &'static str,
    pub seed: u64,
    pub dropped_train_rows: usize,
    pub dropped_test_rows: usize,
    pub n_train: usize,
    pub n_trimmed: usize,
    pub n_validation: usize,
    pub n_low_light: usize,
    pub j_star: usize,
    pub elm_mean_mspe: f64,
    pub methods: Vec<MethodEntry>,
    pub timestamps: Vec<f64>,
    pub observed: Vec<f64>,
    pub cumulative_observed: Vec<f64>,
}

impl VipvOutput {
    pub fn new(r: VipvReport, seed: u64, dropped_train_rows: usize, dropped_test_rows: usize) -> Self {
        VipvOutput {
            side: r.side.name(),
            seed,
            dropped_train_rows,
            dropped_test_rows,
            n_train: r.n_train,
            n_trimmed: r.n_trimmed,
            n_validation: r.n_validation,
            n_low_light: r.n_low_light,
            j_star: r.best_draw + 1,
            elm_mean_mspe: r.elm_mean_mspe,
            methods: r
                .methods
                .into_iter()
                .map(|m| MethodEntry {
                    method: m.method.name(),
                    validation: m.decomposition.into(),
                    training_mspe: m.training_mspe,
                    predictions: m.predictions,
                    cumulative_predicted: m.cumulative_predicted,
                })
                .collect(),
            timestamps: r.timestamps,
            observed: r.observed,
            cumulative_observed: r.cumulative_observed,
        }
    }
}

pub const TABLE_HEADER: [&str; 5] = ["method", "mspe", "mspe_0.1", "mspe_0.1_0.9", "mspe_0.9"];

/// One row per method: total, lower tail, central part and upper tail.
pub fn write_vipv_table(path: &Path, out: &VipvOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(TABLE_HEADER).map_err(|e| csv_io(path, e))?;
    for m in &out.methods {
        let d = &m.validation;
        w.write_record([
            m.method.to_string(),
            d.mspe.to_string(),
            d.lower_tail.to_string(),
            d.central.to_string(),
            d.upper_tail.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
