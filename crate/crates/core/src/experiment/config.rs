use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytical::MseVariant;
use crate::error::{Error, Result};
use crate::model::{InnerRegion, NetworkParams};

/// Network section of a run configuration. Exactly one of `p_max` and
/// `snr_db` must be given; `snr_db` sets `P_max = ω² 10^{snr_db/10}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub lambda: f64,
    pub radius: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub rician_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub noise_power: f64,
    pub wavelength: f64,
}

impl NetworkConfig {
    /// Baseline scenario: λ = 0.05, R = 10 m, α = 2.1, ε = 1, B = 15,
    /// SNR 30 dB, ω² = 1, wavelength 0.3 m.
    pub fn baseline() -> Self {
        Self {
            lambda: 0.05,
            radius: 10.0,
            alpha: 2.1,
            epsilon: 1.0,
            rician_b: 15.0,
            p_max: None,
            snr_db: Some(30.0),
            noise_power: 1.0,
            wavelength: 0.3,
        }
    }

    pub fn resolve(&self) -> Result<NetworkParams<f64>> {
        let p_max = match (self.p_max, self.snr_db) {
            (Some(p), None) => p,
            (None, Some(snr)) => self.noise_power * 10f64.powf(snr / 10.0),
            (Some(_), Some(_)) => return Err(Error::Config("give either p_max or snr_db, not both".into())),
            (None, None) => return Err(Error::Config("one of p_max or snr_db is required".into())),
        };
        let np = NetworkParams {
            lambda: self.lambda,
            radius: self.radius,
            alpha: self.alpha,
            epsilon: self.epsilon,
            rician_b: self.rician_b,
            p_max,
            noise_power: self.noise_power,
            wavelength: self.wavelength,
        };
        np.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(np)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Lambda,
    Radius,
    RicianB,
    Eta,
}

impl SweepParameter {
    /// `np` with the swept parameter set to `value`; η is not a network
    /// parameter and leaves `np` unchanged.
    pub fn apply(self, np: &NetworkParams<f64>, value: f64) -> NetworkParams<f64> {
        let mut out = *np;
        match self {
            SweepParameter::Lambda => out.lambda = value,
            SweepParameter::Radius => out.radius = value,
            SweepParameter::RicianB => out.rician_b = value,
            SweepParameter::Eta => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub log_scale: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !(self.from < self.to) || !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::Config(format!(
                "sweep bounds must satisfy from < to, got [{}, {}]",
                self.from, self.to
            )));
        }
        if self.log_scale && !(self.from > 0.0) {
            return Err(Error::Config("log-scale sweep needs a positive lower bound".into()));
        }
        Ok(())
    }

    /// Sweep points, endpoints included exactly.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.from;
                }
                if i == n - 1 {
                    return self.to;
                }
                let t = i as f64 / (n - 1) as f64;
                if self.log_scale {
                    (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp()
                } else {
                    self.from + t * (self.to - self.from)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub iters: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: InnerRegion,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            iters: 10_000,
            seed: 0,
            mode: InnerRegion::Clamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaPolicy {
    /// Minimize the analytic MSE at every sweep point.
    Optimize,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantSelection {
    Printed,
    Rederived,
    Both,
}

impl VariantSelection {
    pub fn variants(self) -> &'static [MseVariant] {
        match self {
            VariantSelection::Printed => &[MseVariant::AsPrinted],
            VariantSelection::Rederived => &[MseVariant::Rederived],
            VariantSelection::Both => &MseVariant::ALL,
        }
    }

    pub fn includes(self, v: MseVariant) -> bool {
        self.variants().contains(&v)
    }

    /// Variant whose MSE drives η optimisation; `both` uses the rederived form.
    pub fn driving_variant(self) -> MseVariant {
        match self {
            VariantSelection::Printed => MseVariant::AsPrinted,
            _ => MseVariant::Rederived,
        }
    }
}

impl std::str::FromStr for VariantSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(VariantSelection::Printed),
            "rederived" => Ok(VariantSelection::Rederived),
            "both" => Ok(VariantSelection::Both),
            other => Err(Error::invalid(format!("unknown variant selection '{other}'"))),
        }
    }
}

/// Complete description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub mc: McSettings,
    pub eta_policy: EtaPolicy,
    pub variant: VariantSelection,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    /// Density sweep at R = 10 m over λ ∈ [0.01, 0.1] in 10 steps.
    fn default() -> Self {
        Self {
            network: NetworkConfig::baseline(),
            sweep: SweepSpec {
                parameter: SweepParameter::Lambda,
                from: 0.01,
                to: 0.1,
                steps: 10,
                log_scale: false,
            },
            mc: McSettings::default(),
            eta_policy: EtaPolicy::Optimize,
            variant: VariantSelection::Both,
            output_dir: PathBuf::from("results"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.resolve()?;
        self.sweep.validate()?;
        if self.mc.iters == 0 {
            return Err(Error::Config("mc.iters must be at least 1".into()));
        }
        if let EtaPolicy::Fixed(eta) = self.eta_policy {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::Config(format!("fixed eta must be positive, got {eta}")));
            }
        }
        if self.sweep.parameter == SweepParameter::Radius && !(self.sweep.from > 1.0) {
            return Err(Error::Config("radius sweep must stay above 1 m".into()));
        }
        if self.sweep.parameter == SweepParameter::Eta && !(self.sweep.from > 0.0) {
            return Err(Error::Config("eta sweep must stay positive".into()));
        }
        Ok(())
    }
}
