use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> QuadratureSpec<T> {
    pub fn new(rel_tol: T, abs_tol: T, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > T::zero()) {
            return Err(Error::invalid("rel_tol must be positive"));
        }
        if !(abs_tol >= T::zero()) {
            return Err(Error::invalid("abs_tol must be non-negative"));
        }
        if max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    /// Same spec with a different relative tolerance.
    /// Relative tolerance, raised to at least `50 ε` of the scalar type.
    pub fn with_rel_tol(self, rel_tol: T) -> Self {
        Self {
            rel_tol: rel_tol.max(min_rel_tol()),
            ..self
        }
    }
}

fn min_rel_tol<T: Scalar>() -> T {
    T::lit(50.0) * T::epsilon()
}

impl<T: Scalar> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8).max(min_rel_tol()),
            abs_tol: T::lit(1e-12),
            max_subdivisions: 2000,
        }
    }
}

/// Value, error estimate and work done by a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

// 15-point Kronrod abscissae; the odd entries are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn checked<T: Scalar>(y: T, x: T) -> Result<T> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NotFinite { at: x.as_f64() })
    }
}

/// One Gauss–Kronrod 7/15 panel with the QUADPACK error heuristic.
fn gauss_kronrod<T, F>(f: &mut F, a: T, b: T) -> Result<Panel<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let abs_half_len = half_len.abs();

    let fc = checked(f(center)?, center)?;
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];

    for j in 0..7 {
        let offset = half_len * T::lit(XGK[j]);
        let (xl, xr) = (center - offset, center + offset);
        let f1 = checked(f(xl)?, xl)?;
        let f2 = checked(f(xr)?, xr)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half_len;
    res_abs = res_abs * abs_half_len;
    res_asc = res_asc * abs_half_len;
    let mut error = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        let scaled = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * scaled.min(T::one());
    }
    let eps = T::epsilon();
    if res_abs > T::min_positive_value() / (T::lit(50.0) * eps) {
        error = error.max(T::lit(50.0) * eps * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive integration of a fallible integrand over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// error satisfies `max(abs_tol, rel_tol * |I|)`. Errors raised by `f` are
/// returned unchanged.
pub fn try_integrate<T, F>(mut f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<QuadratureOutcome<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    if a > b {
        return Err(Error::invalid(format!(
            "integration bounds out of order: a = {a}, b = {b}"
        )));
    }
    if a == b {
        return Ok(QuadratureOutcome {
            value: T::zero(),
            error: T::zero(),
            subdivisions: 0,
        });
    }

    let mut panels = vec![gauss_kronrod(&mut f, a, b)?];
    loop {
        let (value, error) = panels
            .iter()
            .fold((T::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error));
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadratureOutcome {
                value,
                error,
                subdivisions: panels.len(),
            });
        }

        // Lowest index wins ties so the refinement order is deterministic.
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = T::lit(0.5) * (pa + pb);
        let too_narrow = !(mid > pa && mid < pb) || (pb - pa) <= T::lit(100.0) * T::epsilon() * pa.abs().max(pb.abs());
        if panels.len() >= spec.max_subdivisions || too_narrow {
            return Err(Error::QuadratureNonConvergence {
                estimate: value.as_f64(),
                error_bound: error.as_f64(),
                subdivisions: panels.len(),
            });
        }
        let left = gauss_kronrod(&mut f, pa, mid)?;
        let right = gauss_kronrod(&mut f, mid, pb)?;
        panels[worst] = left;
        panels.push(right);
    }
}

/// [`try_integrate`] for an infallible integrand, keeping the error estimate.
pub fn integrate_detailed<T, F>(f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<QuadratureOutcome<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    try_integrate(|x| Ok(f(x)), a, b, spec)
}

/// Integrate `f` over `[a, b]` to the tolerances in `spec`.
pub fn integrate<T, F>(f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    integrate_detailed(f, a, b, spec).map(|o| o.value)
}

/// Integrate over `[a, ∞)` through the map `x = a + t / (1 - t)`.
pub fn integrate_semi_infinite<T, F>(f: F, a: T, spec: &QuadratureSpec<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let one = T::one();
    try_integrate(
        |t| {
            let s = one - t;
            let x = a + t / s;
            let y = f(x);
            Ok(if y == T::zero() { y } else { y / (s * s) })
        },
        T::zero(),
        one,
        spec,
    )
    .map(|o| o.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec<f64> {
        QuadratureSpec::default()
    }

    #[test]
    fn quadratic_on_unit_interval() {
        let v = integrate(|x: f64| x * x, 0.0, 1.0, &spec()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_interval_is_exactly_zero() {
        let v = integrate(|_x: f64| 1.0, 2.0, 2.0, &spec()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn exponential_decay_against_antiderivative() {
        let exact = 1.0 - (-50.0f64).exp();
        let v = integrate(|x: f64| (-x).exp(), 0.0, 50.0, &spec()).unwrap();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn single_panel_polynomial_exactness() {
        // Kronrod 15 integrates degree 22 exactly.
        for deg in 0..=22 {
            let one_panel = QuadratureSpec::new(1e-300, 0.0, 1).unwrap();
            let r = try_integrate(|x: f64| Ok(x.powi(deg)), -1.0, 1.0, &one_panel);
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got = match r {
                Ok(o) => o.value,
                Err(Error::QuadratureNonConvergence { estimate, .. }) => estimate,
                Err(e) => panic!("{e}"),
            };
            assert!((got - exact).abs() < 4.0 * f64::EPSILON, "degree {deg}: {got}");
        }
    }

    #[test]
    fn nan_integrand_is_reported() {
        let r = integrate(|x: f64| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &spec());
        assert!(matches!(r, Err(Error::NotFinite { .. })));
    }

    #[test]
    fn budget_exhaustion_carries_best_estimate() {
        let tight = QuadratureSpec::new(1e-15, 0.0, 3).unwrap();
        let r = integrate(|x: f64| x.sqrt().sin() * (30.0 * x).cos(), 0.0, 10.0, &tight);
        match r {
            Err(Error::QuadratureNonConvergence {
                estimate,
                error_bound,
                subdivisions,
            }) => {
                assert!(estimate.is_finite() && error_bound > 0.0);
                assert_eq!(subdivisions, 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn reversed_bounds_rejected() {
        assert!(integrate(|x: f64| x, 1.0, 0.0, &spec()).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 0.0, 0).is_err());
    }

    #[test]
    fn semi_infinite_gaussian() {
        let v = integrate_semi_infinite(|x: f64| (-x * x).exp(), 0.0, &spec()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn works_in_single_precision() {
        let s = QuadratureSpec::<f32>::new(1e-5, 1e-7, 100).unwrap();
        let v = integrate(|x: f32| x.cos(), 0.0, 1.0, &s).unwrap();
        assert!((v - 1.0f32.sin()).abs() < 1e-5);
    }
}
