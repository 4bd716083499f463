use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{EtaPolicy, RunConfig, SweepParameter};
use super::{create_dir, write_file};
use crate::analytical::{mse_analytic, optimize_eta, MseVariant};
use crate::error::{Result, ResultExt};
use crate::montecarlo::MonteCarlo;

/// Header row of `results.csv`.
pub const CSV_HEADER: [&str; 8] = [
    "param_value",
    "eta_used",
    "mse_analytic_printed",
    "mse_analytic_rederived",
    "mse_mc_mean",
    "mse_mc_stderr",
    "k_mean",
    "flags",
];

pub const METADATA_FORMAT_VERSION: u32 = 1;

/// Largest |z| between Monte Carlo and the rederived MSE before a row is flagged.
const DISCREPANCY_Z: f64 = 3.0;

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param_value: f64,
    pub eta_used: f64,
    pub mse_analytic_printed: Option<f64>,
    pub mse_analytic_rederived: Option<f64>,
    pub mse_mc_mean: f64,
    pub mse_mc_stderr: f64,
    pub k_mean: f64,
    pub flags: Vec<String>,
}

impl SweepResult {
    pub fn analytic(&self, variant: MseVariant) -> Option<f64> {
        match variant {
            MseVariant::AsPrinted => self.mse_analytic_printed,
            MseVariant::Rederived => self.mse_analytic_rederived,
        }
    }

    /// Monte Carlo z-score of the analytic value of `variant`.
    pub fn z_score(&self, variant: MseVariant) -> Option<f64> {
        self.analytic(variant)
            .map(|a| (a - self.mse_mc_mean) / self.mse_mc_stderr)
    }

    fn record(&self) -> [String; 8] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.param_value.to_string(),
            self.eta_used.to_string(),
            opt(self.mse_analytic_printed),
            opt(self.mse_analytic_rederived),
            self.mse_mc_mean.to_string(),
            self.mse_mc_stderr.to_string(),
            self.k_mean.to_string(),
            self.flags.join(";"),
        ]
    }
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub format_version: u32,
    pub software_version: String,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub rows: usize,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepResult>,
    pub results_csv: PathBuf,
    pub metadata_json: PathBuf,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn evaluate_point(cfg: &RunConfig, value: f64) -> Result<SweepResult> {
    let base = cfg.network.resolve()?;
    let np = cfg.sweep.parameter.apply(&base, value);
    np.validate()?;
    let mut flags = Vec::new();

    let eta = match (cfg.sweep.parameter, cfg.eta_policy) {
        (SweepParameter::Eta, _) => value,
        (_, EtaPolicy::Fixed(eta)) => eta,
        (_, EtaPolicy::Optimize) => {
            let opt = optimize_eta(&np, cfg.variant.driving_variant())?;
            if opt.at_boundary() {
                flags.push("boundary_min".to_string());
            }
            if opt.inflations > 0 {
                flags.push(format!("eta_bound_inflated_x{}", opt.inflations));
            }
            opt.eta
        }
    };

    let analytic = |v: MseVariant| -> Result<Option<f64>> {
        if cfg.variant.includes(v) {
            Ok(Some(mse_analytic(&np, eta, v)?.total))
        } else {
            Ok(None)
        }
    };
    let printed = analytic(MseVariant::AsPrinted)?;
    let rederived = analytic(MseVariant::Rederived)?;

    let mc = MonteCarlo::new(cfg.mc.iters, cfg.mc.seed, cfg.mc.mode).estimate_mse(&np, eta)?;
    flags.push(format!("mode={}", mc.mode));
    if mc.n_used < mc.n_total {
        flags.push(format!("empty_skipped={}", mc.n_total - mc.n_used));
    }

    let mut row = SweepResult {
        param_value: value,
        eta_used: eta,
        mse_analytic_printed: printed,
        mse_analytic_rederived: rederived,
        mse_mc_mean: mc.mean,
        mse_mc_stderr: mc.std_error,
        k_mean: np.mean_device_count(),
        flags,
    };
    if let Some(z) = row.z_score(MseVariant::Rederived) {
        if !(z.abs() <= DISCREPANCY_Z) {
            row.flags.push("discrepancy".to_string());
        }
    }
    Ok(row)
}

/// Evaluate every sweep point without touching the filesystem.
pub fn compute_sweep(cfg: &RunConfig) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    cfg.sweep
        .points()
        .into_iter()
        .enumerate()
        .map(|(i, value)| {
            evaluate_point(cfg, value).context(|| format!("sweep row {i} ({:?} = {value})", cfg.sweep.parameter))
        })
        .collect()
}

/// Serialize rows in the fixed `results.csv` schema.
pub fn write_results_csv(rows: &[SweepResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.into_inner()
        .map_err(|e| crate::error::Error::Config(format!("csv buffer: {e}")))
}

/// Run the sweep and write `results.csv` and `run.json` to the output dir.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    create_dir(&cfg.output_dir)?;
    let started = unix_ms();
    let rows = compute_sweep(cfg)?;

    let results_csv = cfg.output_dir.join("results.csv");
    write_file(&results_csv, &write_results_csv(&rows)?)?;

    let meta = RunMetadata {
        format_version: METADATA_FORMAT_VERSION,
        software_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        seed: cfg.mc.seed,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        rows: rows.len(),
        config: cfg.clone(),
    };
    let metadata_json = cfg.output_dir.join("run.json");
    write_file(&metadata_json, serde_json::to_string_pretty(&meta)?.as_bytes())?;
    Ok(SweepOutcome {
        rows,
        results_csv,
        metadata_json,
    })
}
