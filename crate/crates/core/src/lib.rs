//! Mean squared error of over-the-air computation (AirComp) in a cellular
//! IoT network with Poisson-distributed devices, Rician fading and capped
//! channel-inversion power control.
//!
//! The analytic MSE is evaluated by nested adaptive quadrature and checked
//! against a deterministic, parallel Monte Carlo simulator. Everything
//! numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytical;
pub mod error;
pub mod experiment;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod scalar;
pub mod specfun;

pub use analytical::MseVariant;
pub use error::{Error, Result};
pub use model::{InnerRegion, Window};
pub use scalar::Scalar;

pub type NetworkParams = model::NetworkParams<f64>;
pub type RicianParams = specfun::RicianParams<f64>;
pub type Device = model::Device<f64>;
pub type Realization = model::Realization<f64>;
pub type QuadratureSpec = numerics::QuadratureSpec<f64>;
pub type AnalyticBreakdown = analytical::AnalyticBreakdown<f64>;
pub type EtaBound = analytical::EtaBound<f64>;
pub type EtaOptimum = analytical::EtaOptimum<f64>;
pub type MseEstimate = montecarlo::MseEstimate<f64>;
