//! Special functions and Gaussian quadrature behind every normal expectation.

mod erf;
mod quadrature;

pub use erf::{erfc, erfc_scaled, exp_sq, log_2cosh, log_half_erfc};
pub use quadrature::{expect_normal, gauss_hermite_rule, QuadratureRule, DEFAULT_ORDER};
