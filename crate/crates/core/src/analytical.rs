//! Analytic MSE of the aggregate in closed form plus nested quadrature, the
//! search bound on the denoising factor, the per-layout stationary point,
//! and the optimisation of the denoising factor.
//!
//! Two variants of the analytic expression are kept. They differ only in
//! the constant `κ` in the Marcum-Q weighted radial integrand
//! `(r^{αε-α} - 2 r^{(αε-α)/2} + κ) r Q1(c/σ, D(r)/σ)`: the printed closed
//! form carries `κ = 2`, while expanding the branch-wise expectation term by
//! term gives `κ = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::model::{path_loss, transmit_power, NetworkParams, Realization};
use crate::numerics::{try_integrate, try_minimize_unimodal, Boundary, QuadratureSpec};
use crate::scalar::Scalar;
use crate::specfun::{marcum_q1, poisson_inverse_moment, rician_pdf, RicianParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MseVariant {
    /// Printed closed form, `κ = 2`.
    AsPrinted,
    /// Term-by-term expansion of the branch expectation, `κ = 0`.
    Rederived,
}

impl MseVariant {
    pub const ALL: [MseVariant; 2] = [MseVariant::AsPrinted, MseVariant::Rederived];

    fn q_weight_constant<T: Scalar>(self) -> T {
        match self {
            MseVariant::AsPrinted => T::lit(2.0),
            MseVariant::Rederived => T::zero(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MseVariant::AsPrinted => "printed",
            MseVariant::Rederived => "rederived",
        }
    }
}

impl fmt::Display for MseVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" | "as_printed" => Ok(MseVariant::AsPrinted),
            "rederived" => Ok(MseVariant::Rederived),
            other => Err(Error::invalid(format!("unknown MSE variant '{other}'"))),
        }
    }
}

/// Term-by-term value of the analytic MSE.
///
/// `total = k_factor * (2πλ (capped_term + geometry_term + marcumq_term) + noise_term)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticBreakdown<T> {
    pub variant: MseVariant,
    /// `E[1/K; K >= 1]` for `K ~ Poisson(λπR²)`.
    pub k_factor: T,
    /// Double integral over the capped fading range `v ∈ [0, D(r)]`.
    pub capped_term: T,
    /// `(R² - 1) / 2`.
    pub geometry_term: T,
    pub marcumq_term: T,
    /// `ω² / η`.
    pub noise_term: T,
    pub total: T,
}

/// Quadrature settings for the analytic MSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptions<T> {
    pub radial: QuadratureSpec<T>,
    pub fading: QuadratureSpec<T>,
}

impl<T: Scalar> Default for AnalyticOptions<T> {
    fn default() -> Self {
        let base = QuadratureSpec::default();
        Self {
            radial: base.with_rel_tol(T::lit(1e-8)),
            fading: base.with_rel_tol(T::lit(1e-9)),
        }
    }
}

struct Evaluator<'a, T> {
    np: &'a NetworkParams<T>,
    rp: RicianParams<T>,
    eta: T,
    opts: &'a AnalyticOptions<T>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    fn new(np: &'a NetworkParams<T>, eta: T, opts: &'a AnalyticOptions<T>) -> Result<Self> {
        np.validate()?;
        if !(eta > T::zero()) || !eta.is_finite() {
            return Err(Error::invalid(format!(
                "denoising factor must be finite and > 0, got {eta}"
            )));
        }
        Ok(Self {
            np,
            rp: np.rician()?,
            eta,
            opts,
        })
    }

    /// `∫_0^{D(r)} (r^{1-α} P v²/η - 2 r^{1-α/2} sqrt(P) v / sqrt(η)) f(v) dv`.
    fn capped_fading_integral(&self, r: T) -> Result<T> {
        let np = self.np;
        let upper = np.capping_threshold(r, self.eta).min(self.rp.support_limit());
        let quad = r.powf(T::one() - np.alpha) * np.p_max / self.eta;
        let lin = T::lit(2.0) * r.powf(T::one() - np.alpha * T::lit(0.5)) * (np.p_max / self.eta).sqrt();
        let rp = self.rp;
        try_integrate(
            |v| Ok((quad * v * v - lin * v) * rician_pdf(v, &rp)?),
            T::zero(),
            upper,
            &self.opts.fading,
        )
        .map(|o| o.value)
        .context(|| format!("capped-branch fading integral at r = {r}"))
    }

    fn capped_term(&self) -> Result<T> {
        try_integrate(
            |r| self.capped_fading_integral(r),
            T::one(),
            self.np.radius,
            &self.opts.radial,
        )
        .map(|o| o.value)
        .context(|| "radial integral of the capped term".to_string())
    }

    fn inversion_probability(&self, r: T) -> Result<T> {
        let b = self.np.capping_threshold(r, self.eta) / self.rp.sigma;
        marcum_q1(self.rp.noncentrality(), b)
    }

    /// `∫_1^R (r^{αε-α} - 2 r^{(αε-α)/2} + κ) r Q1(c/σ, D(r)/σ) dr`.
    fn marcumq_term(&self, kappa: T) -> Result<T> {
        let np = self.np;
        let e = np.alpha * np.epsilon - np.alpha;
        let two = T::lit(2.0);
        try_integrate(
            |r| {
                let w = r.powf(e) - two * r.powf(e / two) + kappa;
                Ok(w * r * self.inversion_probability(r)?)
            },
            T::one(),
            np.radius,
            &self.opts.radial,
        )
        .map(|o| o.value)
        .context(|| "radial Marcum-Q integral".to_string())
    }

    fn assemble(&self, variant: MseVariant, capped_term: T) -> Result<AnalyticBreakdown<T>> {
        let np = self.np;
        let k_factor = poisson_inverse_moment(np.mean_device_count())?;
        let geometry_term = T::lit(0.5) * (np.radius * np.radius - T::one());
        let marcumq_term = self.marcumq_term(variant.q_weight_constant())?;
        let noise_term = np.noise_power / self.eta;
        let campbell = T::lit(2.0) * T::PI() * np.lambda;
        let total = k_factor * (campbell * (capped_term + geometry_term + marcumq_term) + noise_term);
        Ok(AnalyticBreakdown {
            variant,
            k_factor,
            capped_term,
            geometry_term,
            marcumq_term,
            noise_term,
            total,
        })
    }
}

/// Analytic MSE at denoising factor `eta` with default quadrature settings.
pub fn mse_analytic<T: Scalar>(np: &NetworkParams<T>, eta: T, variant: MseVariant) -> Result<AnalyticBreakdown<T>> {
    mse_analytic_with(np, eta, variant, &AnalyticOptions::default())
}

pub fn mse_analytic_with<T: Scalar>(
    np: &NetworkParams<T>,
    eta: T,
    variant: MseVariant,
    opts: &AnalyticOptions<T>,
) -> Result<AnalyticBreakdown<T>> {
    let ev = Evaluator::new(np, eta, opts)?;
    let capped = ev.capped_term()?;
    ev.assemble(variant, capped)
}

/// Both variants, sharing the capped-term double integral.
pub fn mse_analytic_both<T: Scalar>(np: &NetworkParams<T>, eta: T) -> Result<[AnalyticBreakdown<T>; 2]> {
    let opts = AnalyticOptions::default();
    let ev = Evaluator::new(np, eta, &opts)?;
    let capped = ev.capped_term()?;
    Ok([
        ev.assemble(MseVariant::AsPrinted, capped)?,
        ev.assemble(MseVariant::Rederived, capped)?,
    ])
}

/// `(R^p - 1) / p`, continued to `ln R` at `p = 0`.
pub(crate) fn power_moment<T: Scalar>(radius: T, p: T) -> T {
    let ln_r = radius.ln();
    if p == T::zero() {
        ln_r
    } else {
        (p * ln_r).exp_m1() / p
    }
}

/// Upper end of the denoising-factor search interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaBound<T> {
    pub eta_hat: T,
    /// `P_max (3R²)^{αε} / (2R³ - 2)^{αε}`, the printed reading.
    pub moment_printed: T,
    /// `P_max [2(R³ - 1) / (3R²)]^{αε}`, the reading obtained by derivation.
    pub moment_derived: T,
    /// Squared ratio of expected received power plus noise to expected
    /// received amplitude, using `sqrt(π/2) σ` for `E[|h|]`.
    pub ratio_term: T,
    /// `sqrt(π/2) σ`.
    pub printed_fading_mean: T,
    /// `E[|h|]` by quadrature of `v f(v)`.
    pub exact_fading_mean: T,
    /// `ratio_term` recomputed with `exact_fading_mean`.
    pub ratio_term_exact_mean: T,
}

impl<T: Scalar> EtaBound<T> {
    /// Larger of the two readings of the moment component.
    pub fn moment_term(&self) -> T {
        self.moment_printed.max(self.moment_derived)
    }
}

/// Mean of the Rician magnitude by quadrature.
pub fn rician_mean<T: Scalar>(rp: &RicianParams<T>) -> Result<T> {
    let spec = QuadratureSpec::default().with_rel_tol(T::lit(1e-10));
    try_integrate(|v| Ok(v * rician_pdf(v, rp)?), T::zero(), rp.support_limit(), &spec).map(|o| o.value)
}

pub fn eta_upper_bound<T: Scalar>(np: &NetworkParams<T>) -> Result<EtaBound<T>> {
    np.validate()?;
    let rp = np.rician()?;
    let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
    let r = np.radius;
    let ae = np.alpha * np.epsilon;

    let r2 = r * r;
    let r3 = r2 * r;
    let moment_printed = np.p_max * (three * r2).powf(ae) / (two * r3 - two).powf(ae);
    let moment_derived = np.p_max * (two * (r3 - one) / (three * r2)).powf(ae);

    let campbell = two * T::PI() * np.lambda;
    let power_moment_sum = campbell * np.p_max * power_moment(r, two - np.alpha) + np.noise_power;
    let amplitude = campbell * np.p_max.sqrt() * power_moment(r, two - np.alpha / two);
    let printed_fading_mean = (T::PI() / two).sqrt() * rp.sigma;
    let exact_fading_mean = rician_mean(&rp)?;
    let ratio = |mean: T| {
        let q = power_moment_sum / (amplitude * mean);
        q * q
    };
    let ratio_term = ratio(printed_fading_mean);
    let bound = EtaBound {
        eta_hat: moment_printed.max(moment_derived).max(ratio_term),
        moment_printed,
        moment_derived,
        ratio_term,
        printed_fading_mean,
        exact_fading_mean,
        ratio_term_exact_mean: ratio(exact_fading_mean),
    };
    log::debug!(
        "eta bound: moment {} / {}, ratio {} (exact-mean ratio {})",
        moment_printed,
        moment_derived,
        ratio_term,
        bound.ratio_term_exact_mean
    );
    Ok(bound)
}

/// Per-device received amplitudes `d^{-α/2} sqrt(P_k) |h_k|` with the powers
/// frozen at a reference denoising factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenRealization<T> {
    pub gains: Vec<T>,
    pub noise_power: T,
}

impl<T: Scalar> FrozenRealization<T> {
    pub fn new(re: &Realization<T>, eta_ref: T, np: &NetworkParams<T>) -> Result<Self> {
        if re.is_empty() {
            return Err(Error::EmptyRealization);
        }
        let gains = re
            .devices
            .iter()
            .map(|dev| {
                let p = transmit_power(dev.distance.max(T::one()), dev.fading_mag, eta_ref, np)?;
                Ok(path_loss(dev.distance, np.alpha)?.sqrt() * p.sqrt() * dev.fading_mag)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            gains,
            noise_power: np.noise_power,
        })
    }

    /// `G(η) = (1/K) (sum_k (g_k / sqrt(η) - 1)² + ω² / η)`.
    pub fn objective(&self, eta: T) -> T {
        let s = eta.sqrt();
        let misalignment = self.gains.iter().fold(T::zero(), |acc, &g| {
            let e = g / s - T::one();
            acc + e * e
        });
        (misalignment + self.noise_power / eta) / T::from_count(self.gains.len())
    }

    /// Stationary point `((sum g_k² + ω²) / sum g_k)²` of [`Self::objective`].
    pub fn extreme_point(&self) -> Result<T> {
        let (s1, s2) = self
            .gains
            .iter()
            .fold((T::zero(), T::zero()), |(a, b), &g| (a + g, b + g * g));
        if !(s1 > T::zero()) {
            return Err(Error::invalid("all received amplitudes are zero"));
        }
        let q = (s2 + self.noise_power) / s1;
        Ok(q * q)
    }
}

/// Minimizer of the per-layout objective with transmit powers evaluated at
/// `eta_ref`.
pub fn eta_star_realization<T: Scalar>(re: &Realization<T>, eta_ref: T, np: &NetworkParams<T>) -> Result<T> {
    FrozenRealization::new(re, eta_ref, np)?.extreme_point()
}

/// Search settings for [`optimize_eta_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSearch<T> {
    /// Relative tolerance on the optimal η.
    pub tol: T,
    /// Lower end of the search as a multiple of the noise power.
    pub lower_factor: T,
    /// Growth of the upper end when the optimum sits on it.
    pub safety_factor: T,
    pub max_inflations: u32,
}

impl<T: Scalar> Default for EtaSearch<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            lower_factor: T::lit(1e-6),
            safety_factor: T::lit(10.0),
            max_inflations: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaOptimum<T> {
    pub eta: T,
    pub mse: T,
    pub search_lower: T,
    /// Upper end actually searched, after any inflation.
    pub search_upper: T,
    pub bound: T,
    pub inflations: u32,
    /// Optimum still at a search endpoint.
    #[serde(skip)]
    pub boundary: Option<Boundary>,
}

impl<T> EtaOptimum<T> {
    pub fn at_boundary(&self) -> bool {
        self.boundary.is_some()
    }
}

pub fn optimize_eta<T: Scalar>(np: &NetworkParams<T>, variant: MseVariant) -> Result<EtaOptimum<T>> {
    optimize_eta_with(np, variant, &EtaSearch::default())
}

pub fn optimize_eta_with<T: Scalar>(
    np: &NetworkParams<T>,
    variant: MseVariant,
    search: &EtaSearch<T>,
) -> Result<EtaOptimum<T>> {
    let bound = eta_upper_bound(np)?.eta_hat;
    let lower = search.lower_factor * np.noise_power;
    let mut upper = bound.max(lower * T::lit(10.0));
    let opts = AnalyticOptions::default();
    let mut inflations = 0;
    loop {
        let m = try_minimize_unimodal(
            |eta| mse_analytic_with(np, eta, variant, &opts).map(|b| b.total),
            lower,
            upper,
            search.tol,
        )?;
        if m.boundary == Some(Boundary::Upper) && inflations < search.max_inflations {
            log::warn!(
                "optimum of the {variant} MSE at the search bound {upper}; widening by {}",
                search.safety_factor
            );
            upper = upper * search.safety_factor;
            inflations += 1;
            continue;
        }
        if let Some(b) = m.boundary {
            log::warn!("optimum of the {variant} MSE on the {b:?} end of [{lower}, {upper}]");
        }
        return Ok(EtaOptimum {
            eta: m.x,
            mse: m.value,
            search_lower: lower,
            search_upper: upper,
            bound,
            inflations,
            boundary: m.boundary,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Device, Window};

    fn fig3() -> NetworkParams<f64> {
        NetworkParams::reference()
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("printed".parse::<MseVariant>().unwrap(), MseVariant::AsPrinted);
        assert_eq!("rederived".parse::<MseVariant>().unwrap(), MseVariant::Rederived);
        assert!("both".parse::<MseVariant>().is_err());
    }

    #[test]
    fn power_moment_limits() {
        assert!((power_moment(2.0f64, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((power_moment(2.0f64, 1e-12) - 2f64.ln()).abs() < 1e-11);
        assert!((power_moment(3.0f64, 2.0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn uncapped_limit_noise_floor() {
        let np = NetworkParams { p_max: 1e14, ..fig3() };
        let eta = 2.0;
        let b = mse_analytic(&np, eta, MseVariant::Rederived).unwrap();
        let floor = b.k_factor * np.noise_power / eta;
        assert!((b.total / floor - 1.0).abs() < 1e-4, "{} vs {floor}", b.total);

        let p = mse_analytic(&np, eta, MseVariant::AsPrinted).unwrap();
        let r = np.radius;
        let expected = p.k_factor * (2.0 * std::f64::consts::PI * np.lambda * (r * r - 1.0) + np.noise_power / eta);
        assert!((p.total / expected - 1.0).abs() < 1e-4);
    }

    #[test]
    fn breakdown_sums_to_total() {
        let b = mse_analytic(&fig3(), 3.0, MseVariant::AsPrinted).unwrap();
        let rebuilt = b.k_factor
            * (2.0 * std::f64::consts::PI * 0.05 * (b.capped_term + b.geometry_term + b.marcumq_term) + b.noise_term);
        assert!((rebuilt - b.total).abs() <= 1e-14 * b.total);
        assert!(b.noise_term > 0.0);
    }

    #[test]
    fn both_matches_single_evaluations() {
        let np = fig3();
        let [p, r] = mse_analytic_both(&np, 5.0).unwrap();
        assert_eq!(p, mse_analytic(&np, 5.0, MseVariant::AsPrinted).unwrap());
        assert_eq!(r, mse_analytic(&np, 5.0, MseVariant::Rederived).unwrap());
    }

    #[test]
    fn invalid_eta_rejected() {
        assert!(mse_analytic(&fig3(), 0.0, MseVariant::Rederived).is_err());
        assert!(mse_analytic(&fig3(), -1.0, MseVariant::Rederived).is_err());
    }

    #[test]
    fn eta_bound_exponent_zero() {
        let np = NetworkParams { epsilon: 0.0, ..fig3() };
        let b = eta_upper_bound(&np).unwrap();
        assert_eq!(b.moment_printed, np.p_max);
        assert_eq!(b.moment_derived, np.p_max);
    }

    #[test]
    fn eta_bound_alpha_two_limit() {
        let np = NetworkParams {
            lambda: 0.05,
            radius: 2.0,
            alpha: 2.0,
            epsilon: 1.0,
            rician_b: 15.0,
            p_max: 1000.0,
            noise_power: 1.0,
            wavelength: 0.3,
        };
        let b = eta_upper_bound(&np).unwrap();
        let c = 2.0 * std::f64::consts::PI * 0.05;
        let sigma = (1.0f64 / 32.0).sqrt();
        let num = c * 1000.0 * 2f64.ln() + 1.0;
        let den = c * 1000f64.sqrt() * (2f64.powf(1.0) - 1.0) / 1.0 * (std::f64::consts::PI / 2.0).sqrt() * sigma;
        assert!((b.ratio_term / (num / den).powi(2) - 1.0).abs() < 1e-12);
        assert!(b.eta_hat.is_finite() && b.eta_hat > 0.0);
    }

    #[test]
    fn eta_bound_readings_are_reciprocal() {
        let np = fig3();
        let b = eta_upper_bound(&np).unwrap();
        let p = np.p_max;
        assert!(((b.moment_printed / p) * (b.moment_derived / p) - 1.0).abs() < 1e-12);
        assert!(b.exact_fading_mean > b.printed_fading_mean);
    }

    fn single_device(d: f64, h: f64) -> Realization<f64> {
        Realization {
            devices: vec![Device {
                distance: d,
                fading_mag: h,
            }],
            radius: 15.0,
            window: Window::Disc,
        }
    }

    #[test]
    fn eta_star_single_device() {
        let np = fig3();
        // eta_ref large enough that the device is capped at P_max
        let re = single_device(1.0, 1.0);
        let eta_ref = 1e6;
        let got = eta_star_realization(&re, eta_ref, &np).unwrap();
        let expected = (np.p_max + np.noise_power).powi(2) / np.p_max;
        assert!((got / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eta_star_homogeneous_without_noise() {
        let fr = FrozenRealization {
            gains: vec![0.3, 1.2, 0.7],
            noise_power: 0.0,
        };
        let scaled = FrozenRealization {
            gains: fr.gains.iter().map(|g| g * 3.0).collect(),
            noise_power: 0.0,
        };
        let a = fr.extreme_point().unwrap();
        let b = scaled.extreme_point().unwrap();
        assert!((b / a - 9.0f64).abs() < 1e-12);
    }

    #[test]
    fn eta_star_empty_realization() {
        let re = Realization::<f64> {
            devices: vec![],
            radius: 15.0,
            window: Window::Disc,
        };
        assert!(matches!(
            eta_star_realization(&re, 1.0, &fig3()),
            Err(Error::EmptyRealization)
        ));
    }
}
