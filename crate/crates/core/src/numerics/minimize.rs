use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of log-spaced points in the bracketing pre-scan.
pub const PRESCAN_POINTS: usize = 64;

/// Which end of the search interval the pre-scan landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
    /// Set when the best pre-scan point was an endpoint of `[lo, hi]`.
    pub boundary: Option<Boundary>,
    pub evaluations: usize,
}

fn finite<T: Scalar>(y: T, x: T) -> Result<T> {
    if y.is_nan() {
        Err(Error::NotFinite { at: x.as_f64() })
    } else {
        Ok(y)
    }
}

/// Golden-section search for a minimum of `g` on `[a, b]`, stopping once the
/// bracket is narrower than `abs_tol`. Returns the best point evaluated.
pub fn golden_section<T, G>(mut g: G, a: T, b: T, abs_tol: T) -> Result<(T, T)>
where
    T: Scalar,
    G: FnMut(T) -> Result<T>,
{
    if !(a < b) {
        return Err(Error::invalid(format!("golden section needs a < b, got [{a}, {b}]")));
    }
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = finite(g(x1)?, x1)?;
    let mut f2 = finite(g(x2)?, x2)?;
    let tol = abs_tol.max(T::epsilon() * (a.abs() + b.abs()));

    for _ in 0..500 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = finite(g(x1)?, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = finite(g(x2)?, x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Bounded minimization of a fallible `g` over `[lo, hi]`, `0 < lo < hi`.
///
/// A log-spaced grid of [`PRESCAN_POINTS`] points picks the bracketing cell
/// (ties go to the smallest argument), then golden-section search refines
/// in `ln x` until the bracket's relative width is below `tol`.
pub fn try_minimize_unimodal<T, G>(mut g: G, lo: T, hi: T, tol: T) -> Result<Minimum<T>>
where
    T: Scalar,
    G: FnMut(T) -> Result<T>,
{
    if !(lo > T::zero()) || !(lo < hi) || !hi.is_finite() {
        return Err(Error::invalid(format!(
            "minimization bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid("minimization tolerance must be positive"));
    }

    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let n = PRESCAN_POINTS;
    let step = (ln_hi - ln_lo) / T::from_count(n - 1);
    let node = |i: usize| -> T {
        if i == 0 {
            lo
        } else if i == n - 1 {
            hi
        } else {
            (ln_lo + step * T::from_count(i)).exp()
        }
    };

    let mut best = (0, node(0), T::infinity());
    for i in 0..n {
        let x = node(i);
        let y = finite(g(x)?, x)?;
        if y < best.2 {
            best = (i, x, y);
        }
    }
    let mut evaluations = n;
    let (bi, grid_x, grid_y) = best;
    let boundary = match bi {
        0 => Some(Boundary::Lower),
        i if i == n - 1 => Some(Boundary::Upper),
        _ => None,
    };

    let cell_lo = node(bi.saturating_sub(1));
    let cell_hi = node((bi + 1).min(n - 1));
    let (ln_x, y) = golden_section(
        |u: T| {
            evaluations += 1;
            g(u.exp())
        },
        cell_lo.ln(),
        cell_hi.ln(),
        tol,
    )?;

    let (x, value) = if y < grid_y { (ln_x.exp(), y) } else { (grid_x, grid_y) };
    Ok(Minimum {
        x,
        value,
        boundary,
        evaluations,
    })
}

/// [`try_minimize_unimodal`] for an infallible objective.
pub fn minimize_unimodal<T, G>(g: G, lo: T, hi: T, tol: T) -> Result<Minimum<T>>
where
    T: Scalar,
    G: Fn(T) -> T,
{
    try_minimize_unimodal(|x| Ok(g(x)), lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let m = minimize_unimodal(|x: f64| (x - 3.0).powi(2), 1.0, 10.0, 1e-8).unwrap();
        assert!((m.x - 3.0).abs() <= 1e-8 * 3.0 * 2.0, "{}", m.x);
        assert_eq!(m.boundary, None);
    }

    #[test]
    fn am_gm_minimum() {
        let m = minimize_unimodal(|x: f64| 1.0 / x + x, 0.1, 100.0, 1e-8).unwrap();
        // The objective is flat to O(dx^2) so only ~sqrt(eps) is resolvable.
        assert!((m.x - 1.0).abs() < 1e-6, "{}", m.x);
        assert!((m.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_objective_flags_boundary() {
        let m = minimize_unimodal(|x: f64| x, 1.0, 5.0, 1e-6).unwrap();
        assert_eq!(m.boundary, Some(Boundary::Lower));
        assert_eq!(m.x, 1.0);
        let m = minimize_unimodal(|x: f64| -x, 1.0, 5.0, 1e-6).unwrap();
        assert_eq!(m.boundary, Some(Boundary::Upper));
        assert!((m.x - 5.0).abs() < 1e-5);
    }

    #[test]
    fn constant_objective_prefers_lowest_argument() {
        let m = minimize_unimodal(|_x: f64| 1.0, 2.0, 8.0, 1e-6).unwrap();
        assert_eq!(m.x, 2.0);
        assert_eq!(m.boundary, Some(Boundary::Lower));
    }

    #[test]
    fn bad_brackets_rejected() {
        assert!(minimize_unimodal(|x: f64| x, 5.0, 5.0, 1e-6).is_err());
        assert!(minimize_unimodal(|x: f64| x, 0.0, 5.0, 1e-6).is_err());
        assert!(minimize_unimodal(|x: f64| x, 6.0, 5.0, 1e-6).is_err());
    }

    #[test]
    fn errors_from_objective_propagate() {
        let r = try_minimize_unimodal(
            |x: f64| if x > 3.0 { Err(Error::EmptyRealization) } else { Ok(x) },
            1.0,
            5.0,
            1e-6,
        );
        assert!(matches!(r, Err(Error::EmptyRealization)));
    }

    #[test]
    fn golden_section_linear_scale() {
        let (x, _) = golden_section(|x: f64| Ok((x - 0.25).powi(2)), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.25).abs() < 1e-6);
    }

    #[test]
    fn single_precision_bowl() {
        let m = minimize_unimodal(|x: f32| (x - 3.0).powi(2), 1.0, 10.0, 1e-4).unwrap();
        assert!((m.x - 3.0).abs() < 1e-2);
    }
}
