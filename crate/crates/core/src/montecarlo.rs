//! Monte Carlo estimation of the aggregation MSE over sampled layouts.
//!
//! Each iteration draws from its own ChaCha8 stream selected by
//! `(seed, iteration index)`, and per-iteration results are reduced in index
//! order, so estimates are bit-identical for any rayon pool size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytical::rician_mean;
use crate::error::{Error, Result};
use crate::model::{path_loss, sample_ppp, transmit_power, InnerRegion, NetworkParams, Realization, Window};
use crate::numerics::{try_integrate, QuadratureSpec};
use crate::scalar::Scalar;

/// Random stream for one iteration.
pub fn iteration_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub n_total: usize,
    /// Iterations with at least one participating device.
    pub n_used: usize,
    pub mode: InnerRegion,
}

impl<T: Scalar> MseEstimate<T> {
    /// `(value - mean) / std_error`.
    pub fn z_score(&self, value: T) -> T {
        (value - self.mean) / self.std_error
    }
}

/// Per-layout MSE `(1/K) [sum_k (d_k^{-α/2} sqrt(P_k) |h_k| / sqrt(η) - 1)² + ω²/η]`.
///
/// Devices inside 1 m are handled per `mode`. Returns
/// [`Error::EmptyRealization`] when no device participates.
pub fn realization_mse<T: Scalar>(re: &Realization<T>, eta: T, np: &NetworkParams<T>, mode: InnerRegion) -> Result<T> {
    if !(eta > T::zero()) {
        return Err(Error::invalid(format!("denoising factor must be > 0, got {eta}")));
    }
    let inv_sqrt_eta = eta.sqrt().recip();
    let mut k = 0usize;
    let mut misalignment = T::zero();
    for dev in re.devices.iter().filter(|d| mode.includes(d.distance)) {
        let p = transmit_power(dev.distance.max(T::one()), dev.fading_mag, eta, np)?;
        let amplitude = path_loss(dev.distance, np.alpha)?.sqrt() * p.sqrt() * dev.fading_mag * inv_sqrt_eta;
        let e = amplitude - T::one();
        misalignment = misalignment + e * e;
        k += 1;
    }
    if k == 0 {
        return Err(Error::EmptyRealization);
    }
    Ok((misalignment + np.noise_power / eta) / T::from_count(k))
}

/// Mean and standard error of the mean, accumulated in slice order.
fn mean_and_stderr<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_count(xs.len());
    let mean = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss = xs.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean));
    let var = ss / (n - T::one());
    (mean, (var / n).sqrt())
}

/// Monte Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub n_iter: usize,
    pub seed: u64,
    pub mode: InnerRegion,
    pub window: Window,
}

impl MonteCarlo {
    pub fn new(n_iter: usize, seed: u64, mode: InnerRegion) -> Self {
        Self {
            n_iter,
            seed,
            mode,
            window: Window::Disc,
        }
    }

    pub fn with_window(self, window: Window) -> Self {
        Self { window, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::invalid("n_iter must be at least 1"));
        }
        Ok(())
    }

    /// Layout of iteration `index`.
    pub fn realization<T: Scalar>(&self, np: &NetworkParams<T>, index: u64) -> Result<Realization<T>> {
        sample_ppp(&mut iteration_rng(self.seed, index), np, self.window)
    }

    pub fn estimate_mse<T: Scalar>(&self, np: &NetworkParams<T>, eta: T) -> Result<MseEstimate<T>> {
        self.check()?;
        np.validate()?;
        let per_iter: Vec<Option<T>> = (0..self.n_iter as u64)
            .into_par_iter()
            .map(|i| {
                let re = self.realization(np, i)?;
                match realization_mse(&re, eta, np, self.mode) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::EmptyRealization) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let used: Vec<T> = per_iter.into_iter().flatten().collect();
        if used.is_empty() {
            return Err(Error::NoNonEmptyRealizations { n_total: self.n_iter });
        }
        let (mean, std_error) = mean_and_stderr(&used);
        Ok(MseEstimate {
            mean,
            std_error,
            n_total: self.n_iter,
            n_used: used.len(),
            mode: self.mode,
        })
    }

    pub fn campbell_check<T: Scalar>(&self, np: &NetworkParams<T>) -> Result<CampbellReport> {
        self.check()?;
        np.validate()?;
        let alpha = np.alpha;
        let sums: Vec<[T; 3]> = (0..self.n_iter as u64)
            .into_par_iter()
            .map(|i| {
                let re = self.realization(np, i)?;
                let mut acc = [T::zero(); 3];
                for dev in re.devices.iter().filter(|d| d.distance >= T::one()) {
                    let (d, h) = (dev.distance, dev.fading_mag);
                    acc[0] = acc[0] + T::one();
                    acc[1] = acc[1] + d.powf(-alpha) * h * h;
                    acc[2] = acc[2] + d.powf(-alpha / T::lit(2.0)) * h;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;

        let rp = np.rician()?;
        let spec = QuadratureSpec::default().with_rel_tol(T::lit(1e-10));
        let campbell = T::lit(2.0) * T::PI() * np.lambda;
        let radial = |exponent: T| -> Result<T> {
            try_integrate(|r: T| Ok(r.powf(exponent)), T::one(), np.radius, &spec).map(|o| o.value * campbell)
        };
        let targets = [
            radial(T::one())?,
            radial(T::one() - alpha)?,
            radial(T::one() - alpha / T::lit(2.0))? * rician_mean(&rp)?,
        ];
        let names = ["count", "power", "amplitude"];

        let entries = (0..3)
            .map(|j| {
                let column: Vec<T> = sums.iter().map(|s| s[j]).collect();
                let (mean, se) = mean_and_stderr(&column);
                let target = targets[j].as_f64();
                CampbellEntry {
                    functional: names[j],
                    empirical: mean.as_f64(),
                    std_error: se.as_f64(),
                    target,
                    z: (mean.as_f64() - target) / se.as_f64(),
                }
            })
            .collect();
        Ok(CampbellReport {
            n_iter: self.n_iter,
            entries,
        })
    }
}

/// Empirical sum of one test functional against its Campbell integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampbellEntry {
    /// `count` (g = 1), `power` (g = d^{-α}|h|²) or `amplitude` (g = d^{-α/2}|h|).
    pub functional: &'static str,
    pub empirical: f64,
    pub std_error: f64,
    pub target: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampbellReport {
    pub n_iter: usize,
    pub entries: Vec<CampbellEntry>,
}

impl CampbellReport {
    pub fn max_abs_z(&self) -> f64 {
        self.entries.iter().map(|e| e.z.abs()).fold(0.0, f64::max)
    }
}

/// Monte Carlo MSE over `n_iter` disc layouts; see [`MonteCarlo::estimate_mse`].
pub fn estimate_mse<T: Scalar>(
    np: &NetworkParams<T>,
    eta: T,
    n_iter: usize,
    seed: u64,
    mode: InnerRegion,
) -> Result<MseEstimate<T>> {
    MonteCarlo::new(n_iter, seed, mode).estimate_mse(np, eta)
}

/// Campbell-theorem check of the layout sampler; requires `n_iter >= 1000`.
pub fn campbell_check<T: Scalar>(np: &NetworkParams<T>, n_iter: usize, seed: u64) -> Result<CampbellReport> {
    if n_iter < 1000 {
        return Err(Error::invalid("campbell_check needs at least 1000 iterations"));
    }
    MonteCarlo::new(n_iter, seed, InnerRegion::Clamp).campbell_check(np)
}
