use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{EtaPolicy, RunConfig};
use super::{create_dir, write_file};
use crate::analytical::{mse_analytic, optimize_eta, MseVariant};
use crate::error::{Error, Result, ResultExt};
use crate::model::NetworkParams;
use crate::numerics::golden_section;

/// Grid and reference settings for [`optimal_radius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSearch {
    pub r_min: f64,
    pub r_max: f64,
    pub ref_radius: f64,
    /// Coarse grid spacing in m.
    pub spacing: f64,
    /// Width in m at which the golden-section refinement stops.
    pub refine_tol: f64,
}

impl Default for RadiusSearch {
    fn default() -> Self {
        Self {
            r_min: 5.0,
            r_max: 40.0,
            ref_radius: 5.0,
            spacing: 1.0,
            refine_tol: 1e-3,
        }
    }
}

impl RadiusSearch {
    fn validate(&self) -> Result<()> {
        if !(self.r_min > 1.0 && self.r_min < self.r_max) {
            return Err(Error::invalid(format!(
                "radius search needs 1 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if !(self.ref_radius > 1.0) {
            return Err(Error::invalid("reference radius must exceed 1 m"));
        }
        if !(self.spacing > 0.0) || !(self.refine_tol > 0.0) {
            return Err(Error::invalid("radius spacing and tolerance must be positive"));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = ((self.r_max - self.r_min) / self.spacing + 1e-9).floor() as usize;
        let mut g: Vec<f64> = (0..=n).map(|i| self.r_min + i as f64 * self.spacing).collect();
        if self.r_max - g[n] > 1e-9 {
            g.push(self.r_max);
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusPoint {
    pub radius: f64,
    pub eta: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusOptimum {
    pub variant: MseVariant,
    pub r_opt: f64,
    pub eta_opt: f64,
    pub mse_opt: f64,
    pub ref_radius: f64,
    pub mse_ref: f64,
    /// `1 - MSE(R_opt) / MSE(ref_radius)`.
    pub reduction: f64,
    /// Best coarse-grid point was an end of the radius range.
    pub boundary: bool,
    pub grid: Vec<RadiusPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusReport {
    pub rician_b: f64,
    pub optima: Vec<RadiusOptimum>,
}

impl RadiusReport {
    pub fn optimum(&self, variant: MseVariant) -> Option<&RadiusOptimum> {
        self.optima.iter().find(|o| o.variant == variant)
    }

    /// Coarse grid of every variant as CSV: `variant,radius,eta,mse`.
    pub fn grid_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["variant", "radius", "eta", "mse"])?;
        for o in &self.optima {
            for p in &o.grid {
                w.write_record([
                    o.variant.as_str().to_string(),
                    p.radius.to_string(),
                    p.eta.to_string(),
                    p.mse.to_string(),
                ])?;
            }
        }
        w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
    }

    /// Writes `radius_grid.csv` and `radius_report.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        create_dir(dir)?;
        write_file(&dir.join("radius_grid.csv"), &self.grid_csv()?)?;
        write_file(
            &dir.join("radius_report.json"),
            serde_json::to_string_pretty(self)?.as_bytes(),
        )
    }

    pub fn summary(&self) -> String {
        let mut s = format!("B = {}\n", self.rician_b);
        for o in &self.optima {
            s += &format!(
                "  {:<9} R_opt {:.3} m  eta {:.6e}  mse {:.6e}  mse(R={}) {:.6e}  reduction {:.2}%{}\n",
                o.variant.as_str(),
                o.r_opt,
                o.eta_opt,
                o.mse_opt,
                o.ref_radius,
                o.mse_ref,
                100.0 * o.reduction,
                if o.boundary { "  (boundary optimum)" } else { "" }
            );
        }
        s
    }
}

fn point(base: &NetworkParams<f64>, policy: EtaPolicy, variant: MseVariant, radius: f64) -> Result<RadiusPoint> {
    let np = NetworkParams { radius, ..*base };
    let (eta, mse) = match policy {
        EtaPolicy::Optimize => {
            let o = optimize_eta(&np, variant)?;
            (o.eta, o.mse)
        }
        EtaPolicy::Fixed(eta) => (eta, mse_analytic(&np, eta, variant)?.total),
    };
    Ok(RadiusPoint { radius, eta, mse })
}

fn search_variant(
    base: &NetworkParams<f64>,
    policy: EtaPolicy,
    variant: MseVariant,
    search: &RadiusSearch,
) -> Result<RadiusOptimum> {
    let grid: Vec<RadiusPoint> = search
        .grid()
        .par_iter()
        .map(|&r| point(base, policy, variant, r).context(|| format!("{variant} MSE at R = {r}")))
        .collect::<Result<_>>()?;

    let (bi, best) = grid.iter().enumerate().fold(
        (0, grid[0]),
        |(bi, b), (i, p)| if p.mse < b.mse { (i, *p) } else { (bi, b) },
    );
    let boundary = bi == 0 || bi == grid.len() - 1;
    if boundary {
        log::warn!(
            "{variant}: best radius {} is at the end of the search range",
            best.radius
        );
    }

    let lo = grid[bi.saturating_sub(1)].radius;
    let hi = grid[(bi + 1).min(grid.len() - 1)].radius;
    let mut refined = best;
    if lo < hi {
        let (r, mse) = golden_section(
            |r| point(base, policy, variant, r).map(|p| p.mse),
            lo,
            hi,
            search.refine_tol,
        )?;
        if mse < best.mse {
            refined = point(base, policy, variant, r)?;
        }
    }

    let reference = point(base, policy, variant, search.ref_radius)?;
    Ok(RadiusOptimum {
        variant,
        r_opt: refined.radius,
        eta_opt: refined.eta,
        mse_opt: refined.mse,
        ref_radius: search.ref_radius,
        mse_ref: reference.mse,
        reduction: 1.0 - refined.mse / reference.mse,
        boundary,
        grid,
    })
}

/// Access radius minimizing the analytic MSE, per selected variant.
///
/// The coarse grid uses `search.spacing`; golden-section search then
/// refines inside the cells next to the best grid point.
pub fn optimal_radius(cfg: &RunConfig, search: &RadiusSearch) -> Result<RadiusReport> {
    search.validate()?;
    let base = cfg.network.resolve()?;
    let optima = cfg
        .variant
        .variants()
        .iter()
        .map(|&v| search_variant(&base, cfg.eta_policy, v, search))
        .collect::<Result<_>>()?;
    Ok(RadiusReport {
        rician_b: base.rician_b,
        optima,
    })
}
