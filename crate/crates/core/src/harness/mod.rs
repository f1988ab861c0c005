//! Evaluation layer: datasets, empirical error, sweeps and CSV reports.

mod dataset;
mod metrics;
mod sweep;
mod synthetic;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::featuremaps::Method;

pub use dataset::{load_csv, sample_pair_indices, sample_pairs, write_csv_rows, Dataset, Normalization};
pub use metrics::{error_curve, max_error_curve, max_error_empirical, rms_error, Displacements, ErrorStats};
pub use sweep::{
    build_anova_map, build_map, heldout_pairs, sweep, AnyKernel, AnyMap, BuildParams, SweepConfig, CANDIDATE_FACTOR,
    DEFAULT_DEGREE, DEFAULT_DENSE_L, DEFAULT_LEVEL, DEFAULT_N_EVAL, DEFAULT_PAIRS, DEFAULT_SUBSAMPLE_L, SYNTHETIC_ROWS,
};
pub use synthetic::{gaussian_mixture, speech_like_mixture};

/// Column names of the report CSV, in order.
pub const REPORT_HEADER: &str = "method,d,D,gamma,M,max_err,rms_err,n_eval,seed,build_ms,embed_ms";

/// One (method, D, seed, M) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub method: Method,
    pub d: usize,
    /// Quadrature points in the map (the embedding has twice as many columns).
    #[serde(rename = "D")]
    pub count: usize,
    pub gamma: f64,
    #[serde(rename = "M")]
    pub diameter: f64,
    pub max_err: f64,
    pub rms_err: f64,
    pub n_eval: usize,
    pub seed: u64,
    pub build_ms: u64,
    pub embed_ms: u64,
}

impl ErrorReport {
    /// Copy with both timing columns zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self { build_ms: 0, embed_ms: 0, ..self.clone() }
    }
}

pub fn write_reports<W: Write>(out: W, reports: &[ErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if reports.is_empty() {
        w.write_record(REPORT_HEADER.split(','))?;
    }
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn reports_to_string(reports: &[ErrorReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_reports(&mut buf, reports)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn save_reports(path: impl AsRef<Path>, reports: &[ErrorReport]) -> Result<()> {
    write_reports(std::fs::File::create(path)?, reports)
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<ErrorReport>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
