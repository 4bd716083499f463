//! Experiment runner: parameter sweeps with CSV output, the optimal-radius
//! search and the denoising-factor report.

mod config;
mod eta_report;
mod radius;
mod sweep;

pub use config::{EtaPolicy, McSettings, NetworkConfig, RunConfig, SweepParameter, SweepSpec, VariantSelection};
pub use eta_report::{eta_report, EtaCurvePoint, EtaReport, SnrPoint, VariantOptimum};
pub use radius::{optimal_radius, RadiusOptimum, RadiusPoint, RadiusReport, RadiusSearch};
pub use sweep::{
    compute_sweep, run_sweep, write_results_csv, RunMetadata, SweepOutcome, SweepResult, CSV_HEADER,
    METADATA_FORMAT_VERSION,
};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
