//! Network scenario: parameters, path loss, capped channel-inversion power
//! control, and sampling of Rician fading and Poisson device layouts.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::specfun::RicianParams;

/// Side of the square deployment area used by the literal simulation window.
pub const DEFAULT_SQUARE_SIDE: f64 = 100.0;

/// Full scenario parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams<T> {
    /// Device density in devices/m².
    pub lambda: T,
    /// AP access radius in m; must exceed the 1 m no-path-loss radius.
    pub radius: T,
    pub alpha: T,
    /// Fractional power-control factor in `[0, 1]`.
    pub epsilon: T,
    pub rician_b: T,
    /// Maximum device transmit power in W.
    pub p_max: T,
    /// Receiver noise power ω² in W.
    pub noise_power: T,
    /// Carrier wavelength in m. Only magnitudes enter the model, so this is
    /// carried but never read.
    pub wavelength: T,
}

impl<T: Scalar> NetworkParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: T| Err(Error::invalid(format!("{what} out of range: {v}")));
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return bad("lambda", self.lambda);
        }
        if !(self.radius > T::one()) || !self.radius.is_finite() {
            return bad("radius (must exceed 1 m)", self.radius);
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return bad("alpha", self.alpha);
        }
        if !(self.epsilon >= T::zero() && self.epsilon <= T::one()) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.rician_b >= T::zero()) || !self.rician_b.is_finite() {
            return bad("rician_b", self.rician_b);
        }
        if !(self.p_max > T::zero()) || !self.p_max.is_finite() {
            return bad("p_max", self.p_max);
        }
        if !(self.noise_power > T::zero()) || !self.noise_power.is_finite() {
            return bad("noise_power", self.noise_power);
        }
        Ok(())
    }

    pub fn rician(&self) -> Result<RicianParams<T>> {
        RicianParams::new(self.rician_b)
    }

    /// Mean device count `λπR²` inside the access disc.
    pub fn mean_device_count(&self) -> T {
        self.lambda * T::PI() * self.radius * self.radius
    }

    /// Power-control threshold `D(d) = sqrt(η / P_max) d^{αε/2}` on `|h|`.
    pub fn capping_threshold(&self, d: T, eta: T) -> T {
        (eta / self.p_max).sqrt() * d.powf(self.alpha * self.epsilon * T::lit(0.5))
    }
}

impl NetworkParams<f64> {
    /// Scenario of the density and radius sweeps: λ = 0.05, R = 15 m,
    /// α = 2.1, ε = 1, B = 15, SNR 30 dB with ω² = 1.
    pub fn reference() -> Self {
        Self {
            lambda: 0.05,
            radius: 15.0,
            alpha: 2.1,
            epsilon: 1.0,
            rician_b: 15.0,
            p_max: 1000.0,
            noise_power: 1.0,
            wavelength: 0.3,
        }
    }
}

/// One device inside the access window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Device<T> {
    pub distance: T,
    pub fading_mag: T,
}

/// Region the layout was drawn from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Window {
    /// Points placed directly in the disc of radius R.
    #[default]
    Disc,
    /// Points placed in a square of the given side centred on the AP, then
    /// filtered to the disc.
    Square { side: f64 },
}

/// One sampled layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T> {
    pub devices: Vec<Device<T>>,
    pub radius: T,
    pub window: Window,
}

impl<T> Realization<T> {
    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }
}

/// Treatment of devices closer than 1 m, where there is no path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerRegion {
    /// Participate with effective distance 1 m.
    #[default]
    Clamp,
    /// Excluded from the aggregate and from the device count.
    Annulus,
}

impl InnerRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            InnerRegion::Clamp => "clamp",
            InnerRegion::Annulus => "annulus",
        }
    }

    /// Whether a device at distance `d` takes part in the aggregate.
    pub fn includes<T: Scalar>(self, d: T) -> bool {
        match self {
            InnerRegion::Clamp => true,
            InnerRegion::Annulus => d >= T::one(),
        }
    }
}

impl fmt::Display for InnerRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InnerRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(InnerRegion::Clamp),
            "annulus" => Ok(InnerRegion::Annulus),
            other => Err(Error::invalid(format!("unknown inner-region mode '{other}'"))),
        }
    }
}

/// Log-distance path loss `d^{-α}`, flat inside 1 m.
pub fn path_loss<T: Scalar>(d: T, alpha: T) -> Result<T> {
    if !(d >= T::zero()) {
        return Err(Error::invalid(format!("distance must be >= 0, got {d}")));
    }
    Ok(if d < T::one() { T::one() } else { d.powf(-alpha) })
}

/// Transmit power under capped fractional channel inversion.
///
/// Devices whose fading magnitude is at or below the threshold
/// `sqrt(η/P_max) d^{αε/2}` (including a zero magnitude) transmit at
/// `P_max`; the rest invert the channel with `η d^{αε} / |h|²`.
pub fn transmit_power<T: Scalar>(d: T, h_mag: T, eta: T, np: &NetworkParams<T>) -> Result<T> {
    if !(d >= T::zero()) {
        return Err(Error::invalid(format!("distance must be >= 0, got {d}")));
    }
    if !(h_mag >= T::zero()) {
        return Err(Error::invalid(format!("fading magnitude must be >= 0, got {h_mag}")));
    }
    if !(eta > T::zero()) {
        return Err(Error::invalid(format!("denoising factor must be > 0, got {eta}")));
    }
    if h_mag <= np.capping_threshold(d, eta) {
        return Ok(np.p_max);
    }
    let inverted = eta / (h_mag * h_mag) * d.powf(np.alpha * np.epsilon);
    Ok(inverted.min(np.p_max))
}

/// Fading magnitude `|c + σ (g1 + j g2)|` with the LoS phase fixed at zero.
pub fn sample_fading<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rp: &RicianParams<T>) -> T {
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    let re = rp.los_amplitude + rp.sigma * T::lit(g1);
    let im = rp.sigma * T::lit(g2);
    re.hypot(im)
}

fn sample_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<usize> {
    let dist = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?;
    let k: f64 = dist.sample(rng);
    Ok(k as usize)
}

/// Draw a Poisson layout in the access disc with independent fading.
pub fn sample_ppp_disc<T: Scalar, R: Rng + ?Sized>(rng: &mut R, np: &NetworkParams<T>) -> Result<Realization<T>> {
    sample_ppp(rng, np, Window::Disc)
}

/// Draw a Poisson layout using the given sampling window.
///
/// `Window::Disc` places `Poisson(λπR²)` points by radial inversion
/// `r = R sqrt(u)`. `Window::Square` places `Poisson(λ side²)` points in the
/// square and keeps those within `R`.
pub fn sample_ppp<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    np: &NetworkParams<T>,
    window: Window,
) -> Result<Realization<T>> {
    np.validate()?;
    let rp = np.rician()?;
    let radius = np.radius;
    let mut devices = Vec::new();
    match window {
        Window::Disc => {
            let k = sample_count(rng, np.mean_device_count().as_f64())?;
            devices.reserve(k);
            for _ in 0..k {
                let u: f64 = rng.random();
                // azimuth; only the distance enters the model
                let _theta: f64 = rng.random();
                let distance = (radius * T::lit(u.sqrt())).min(radius);
                let fading_mag = sample_fading(rng, &rp);
                devices.push(Device { distance, fading_mag });
            }
        }
        Window::Square { side } => {
            if !(side > 0.0) || radius.as_f64() > side / 2.0 {
                return Err(Error::Config(format!(
                    "access radius {radius} does not fit a square window of side {side}"
                )));
            }
            let k = sample_count(rng, np.lambda.as_f64() * side * side)?;
            for _ in 0..k {
                let x = (rng.random::<f64>() - 0.5) * side;
                let y = (rng.random::<f64>() - 0.5) * side;
                let fading_mag = sample_fading(rng, &rp);
                let distance = T::lit(x.hypot(y));
                if distance <= radius {
                    devices.push(Device { distance, fading_mag });
                }
            }
        }
    }
    Ok(Realization {
        devices,
        radius,
        window,
    })
}
