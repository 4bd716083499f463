//! Special functions for Rician fading: modified Bessel `I0`, Marcum `Q1`,
//! the Rician density and tail, and the inverse-count moment of a Poisson
//! population.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Switch from the power series to the asymptotic expansion of `I0`.
const I0_ASYMPTOTIC_FROM: f64 = 20.0;

/// Rician shape constants for a given factor `B = c² / (2σ²)`.
///
/// Normalized so that `c² + 2σ² = 1`, i.e. `E[|h|²] = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams<T> {
    pub factor: T,
    /// LoS amplitude `c = sqrt(B / (B + 1))`.
    pub los_amplitude: T,
    /// Scattered-component scale `σ = sqrt(1 / (2 (B + 1)))`.
    pub sigma: T,
}

impl<T: Scalar> RicianParams<T> {
    pub fn new(factor: T) -> Result<Self> {
        if !(factor >= T::zero()) || !factor.is_finite() {
            return Err(Error::invalid(format!(
                "Rician factor must be finite and non-negative, got {factor}"
            )));
        }
        let one = T::one();
        Ok(Self {
            factor,
            los_amplitude: (factor / (factor + one)).sqrt(),
            sigma: (one / (T::lit(2.0) * (factor + one))).sqrt(),
        })
    }

    /// Noncentrality `c / σ` passed to Marcum Q.
    pub fn noncentrality(&self) -> T {
        self.los_amplitude / self.sigma
    }

    /// Magnitude beyond which the density is below the smallest normal float.
    pub(crate) fn support_limit(&self) -> T {
        self.los_amplitude + T::lit(40.0) * self.sigma
    }
}

/// `exp(-x) I0(x)` for `x ≥ 0`.
pub fn bessel_i0_scaled<T: Scalar>(x: T) -> Result<T> {
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::invalid(format!("I0 argument must be finite and >= 0, got {x}")));
    }
    if x < T::lit(I0_ASYMPTOTIC_FROM) {
        // sum (x/2)^{2m} / (m!)^2, all terms positive
        let q = x * x / T::lit(4.0);
        let mut term = T::one();
        let mut sum = T::one();
        let mut m = 1usize;
        loop {
            let mf = T::from_count(m);
            term = term * q / (mf * mf);
            sum = sum + term;
            if term <= sum * T::epsilon() * T::lit(0.25) {
                break;
            }
            m += 1;
        }
        Ok(sum * (-x).exp())
    } else {
        // e^x / sqrt(2πx) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
        let eight_x = T::lit(8.0) * x;
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..60usize {
            let odd = T::from_count(2 * k - 1);
            let next = term * odd * odd / (T::from_count(k) * eight_x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum = sum + term;
            if term <= sum * T::epsilon() * T::lit(0.25) {
                break;
            }
        }
        Ok(sum / (T::lit(2.0) * T::PI() * x).sqrt())
    }
}

/// Modified Bessel function of the first kind, order zero.
///
/// Fails with [`Error::Overflow`] once `I0(x)` leaves the float range; use
/// [`bessel_i0_scaled`] there.
pub fn bessel_i0<T: Scalar>(x: T) -> Result<T> {
    let scaled = bessel_i0_scaled(x)?;
    let v = scaled * x.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow("I0"))
    }
}

/// Marcum Q-function of order one, `Q1(a, b) = P(|Z| > b)` for a 2-D normal
/// `Z` with unit variance per axis and mean of norm `a`.
///
/// Evaluated as the Poisson mixture of chi-square tails,
/// `Q1(a, b) = sum_n Pois(n; a²/2) P(Pois(b²/2) <= n)`, whose terms are all
/// non-negative. For `b < a` the complement
/// `1 - Q1(a, b) = sum_{n>=1} Pois(n; b²/2) P(Pois(a²/2) <= n - 1)` is summed
/// instead so values near one keep full relative accuracy in `1 - Q1`.
/// Weights are built in log space so large arguments neither overflow nor
/// underflow prematurely.
pub fn marcum_q1<T: Scalar>(a: T, b: T) -> Result<T> {
    if !(a >= T::zero()) || !(b >= T::zero()) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!(
            "Marcum Q1 arguments must be finite and >= 0, got ({a}, {b})"
        )));
    }
    if b == T::zero() {
        return Ok(T::one());
    }
    let half = T::lit(0.5);
    let mu = half * a * a;
    let nu = half * b * b;
    if mu == T::zero() {
        return Ok((-nu).exp());
    }
    let q = if b < a {
        T::one() - poisson_mixture(nu, mu, 1)
    } else {
        poisson_mixture(mu, nu, 0)
    };
    Ok(q.max(T::zero()).min(T::one()))
}

/// `sum_n Pois(n; weight_mean) P(Pois(cdf_mean) <= n - shift)`, both means > 0.
fn poisson_mixture<T: Scalar>(weight_mean: T, cdf_mean: T, shift: usize) -> T {
    let (ln_w, ln_c) = (weight_mean.ln(), cdf_mean.ln());
    let cutoff = T::epsilon() * T::lit(1e-3);
    let mut ln_fact = T::zero();
    let mut cdf = T::zero();
    let mut sum = T::zero();
    let mut n = 0usize;
    loop {
        let nf = T::from_count(n);
        if n > 0 {
            ln_fact = ln_fact + nf.ln();
        }
        let weight = (nf * ln_w - weight_mean - ln_fact).exp();
        if n >= shift {
            // ln((n - shift)!) trails ln(n!) by `shift` factors
            let m = n - shift;
            let ln_fact_m = if shift == 0 { ln_fact } else { ln_fact - nf.ln() };
            cdf = cdf + (T::from_count(m) * ln_c - cdf_mean - ln_fact_m).exp();
            sum = sum + weight * cdf.min(T::one());
        }
        if nf > weight_mean && weight <= cutoff {
            break;
        }
        if nf > weight_mean + T::lit(50.0) * (weight_mean.sqrt() + T::one()) {
            break;
        }
        n += 1;
    }
    sum
}

/// Rician density of the fading magnitude `|h|`.
pub fn rician_pdf<T: Scalar>(v: T, rp: &RicianParams<T>) -> Result<T> {
    if !(v >= T::zero()) {
        return Err(Error::invalid(format!("Rician magnitude must be >= 0, got {v}")));
    }
    if v == T::zero() || !v.is_finite() {
        return Ok(T::zero());
    }
    let s2 = rp.sigma * rp.sigma;
    let c = rp.los_amplitude;
    let arg = v * c / s2;
    let d = v - c;
    // exp(-(v²+c²)/2σ²) I0(vc/σ²) = exp(-(v-c)²/2σ²) · e^{-arg} I0(arg)
    Ok(v / s2 * (-(d * d) / (T::lit(2.0) * s2)).exp() * bessel_i0_scaled(arg)?)
}

/// Tail probability `P(|h| > v)`.
pub fn rician_ccdf<T: Scalar>(v: T, rp: &RicianParams<T>) -> Result<T> {
    if !(v >= T::zero()) {
        return Err(Error::invalid(format!("Rician magnitude must be >= 0, got {v}")));
    }
    if !v.is_finite() {
        return Ok(T::zero());
    }
    marcum_q1(rp.noncentrality(), v / rp.sigma)
}

/// `E[1/N; N >= 1]` for `N ~ Poisson(x)`, i.e. `e^{-x} sum_{m>=1} x^m / (m m!)`.
pub fn poisson_inverse_moment<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::invalid(format!("Poisson mean must be finite and > 0, got {x}")));
    }
    let ln_x = x.ln();
    let mut ln_fact = T::zero();
    let mut sum = T::zero();
    let mut m = 1usize;
    loop {
        let mf = T::from_count(m);
        ln_fact = ln_fact + mf.ln();
        let term = (mf * ln_x - x - ln_fact).exp() / mf;
        sum = sum + term;
        if mf > x && term <= sum * T::lit(1e-16) {
            break;
        }
        m += 1;
    }
    Ok(sum)
}
