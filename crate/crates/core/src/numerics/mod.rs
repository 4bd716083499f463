//! Numerical kernels: adaptive Gauss–Kronrod quadrature and a log-scale
//! bounded scalar minimizer.

mod minimize;
mod quadrature;

pub use minimize::{golden_section, minimize_unimodal, try_minimize_unimodal, Boundary, Minimum, PRESCAN_POINTS};
pub use quadrature::{
    integrate, integrate_detailed, integrate_semi_infinite, try_integrate, QuadratureOutcome, QuadratureSpec,
};
