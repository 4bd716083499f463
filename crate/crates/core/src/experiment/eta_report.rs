use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::{create_dir, write_file};
use crate::analytical::{eta_upper_bound, mse_analytic_both, optimize_eta, EtaBound, EtaOptimum, MseVariant};
use crate::error::{Error, Result};
use crate::model::NetworkParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaCurvePoint {
    pub eta: f64,
    pub printed: f64,
    pub rederived: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub eta_opt: f64,
    pub mse_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantOptimum {
    pub variant: MseVariant,
    pub optimum: EtaOptimum<f64>,
    pub at_boundary: bool,
}

/// Denoising-factor diagnostics for one network configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaReport {
    pub bound: EtaBound<f64>,
    pub optima: Vec<VariantOptimum>,
    pub curve: Vec<EtaCurvePoint>,
    /// Optimal η of the driving variant for SNR 10..=40 dB at fixed ω².
    pub snr_scan: Vec<SnrPoint>,
    /// Whether `snr_scan` is monotone in SNR; not guaranteed by the model.
    pub snr_monotone: bool,
}

impl EtaReport {
    pub fn curve_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["eta", "mse_analytic_printed", "mse_analytic_rederived"])?;
        for p in &self.curve {
            w.write_record([p.eta.to_string(), p.printed.to_string(), p.rederived.to_string()])?;
        }
        w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
    }

    /// Writes `eta_curve.csv` and `eta_report.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        create_dir(dir)?;
        write_file(&dir.join("eta_curve.csv"), &self.curve_csv()?)?;
        write_file(
            &dir.join("eta_report.json"),
            serde_json::to_string_pretty(self)?.as_bytes(),
        )
    }

    pub fn summary(&self) -> String {
        let b = &self.bound;
        let mut s = format!(
            "eta upper bound {:.6e}\n  moment term: printed {:.6e}, derived {:.6e}\n  ratio term {:.6e} \
             (E|h| = sqrt(pi/2) sigma = {:.6}; exact E|h| = {:.6} gives {:.6e})\n",
            b.eta_hat,
            b.moment_printed,
            b.moment_derived,
            b.ratio_term,
            b.printed_fading_mean,
            b.exact_fading_mean,
            b.ratio_term_exact_mean
        );
        for o in &self.optima {
            s += &format!(
                "  {:<9} eta_opt {:.6e}  mse {:.6e}  searched [{:.1e}, {:.6e}]{}\n",
                o.variant.as_str(),
                o.optimum.eta,
                o.optimum.mse,
                o.optimum.search_lower,
                o.optimum.search_upper,
                if o.at_boundary { "  (boundary minimum)" } else { "" }
            );
        }
        s += "  snr scan (dB: eta_opt):";
        for p in &self.snr_scan {
            s += &format!(" {}: {:.4e}", p.snr_db, p.eta_opt);
        }
        if !self.snr_monotone {
            s += "  [non-monotone in SNR]";
        }
        s.push('\n');
        s
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

fn monotone(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0]) || xs.windows(2).all(|w| w[1] <= w[0])
}

/// Bound, per-variant optima, an MSE-vs-η curve of `points` log-spaced
/// points over the widest searched interval, and an SNR scan.
pub fn eta_report(cfg: &RunConfig, points: usize) -> Result<EtaReport> {
    if points < 2 {
        return Err(Error::invalid("eta curve needs at least 2 points"));
    }
    let np = cfg.network.resolve()?;
    let bound = eta_upper_bound(&np)?;
    let optima = MseVariant::ALL
        .iter()
        .map(|&variant| {
            let optimum = optimize_eta(&np, variant)?;
            Ok(VariantOptimum {
                variant,
                at_boundary: optimum.at_boundary(),
                optimum,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let lo = optima
        .iter()
        .map(|o| o.optimum.search_lower)
        .fold(f64::INFINITY, f64::min);
    let hi = optima.iter().map(|o| o.optimum.search_upper).fold(0.0, f64::max);
    let curve = log_grid(lo, hi, points)
        .into_iter()
        .map(|eta| {
            let [p, r] = mse_analytic_both(&np, eta)?;
            Ok(EtaCurvePoint {
                eta,
                printed: p.total,
                rederived: r.total,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let driving = cfg.variant.driving_variant();
    let snr_scan = (0..=6)
        .map(|i| {
            let snr_db = 10.0 + 5.0 * i as f64;
            let scanned = NetworkParams {
                p_max: np.noise_power * 10f64.powf(snr_db / 10.0),
                ..np
            };
            let o = optimize_eta(&scanned, driving)?;
            Ok(SnrPoint {
                snr_db,
                eta_opt: o.eta,
                mse_opt: o.mse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let etas: Vec<f64> = snr_scan.iter().map(|p| p.eta_opt).collect();
    let snr_monotone = monotone(&etas);
    if !snr_monotone {
        log::warn!("optimal eta is not monotone in SNR: {etas:?}");
    }

    Ok(EtaReport {
        bound,
        optima,
        curve,
        snr_scan,
        snr_monotone,
    })
}
