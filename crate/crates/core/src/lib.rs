//! Storage capacity of the binary ±1 perceptron.
//!
//! For constraints `G x ≥ κ 1` with `G` an `m × n` standard Gaussian matrix and
//! `x` a corner of the scaled hypercube `{±1/√n}^n`, the capacity `α_c(κ)` is
//! the largest ratio `m/n` that stays feasible with high probability. This
//! crate evaluates three levels of the stationarized lifted random duality
//! estimate of `α_c`:
//!
//! * level 1, a closed form;
//! * level 2 partial, a closed form with a crossover at `κ_c ≈ 0.602957`;
//! * level 2 full, a scalar fixed point `q = ψ_q(q)` whose solution gives the
//!   capacity `ψ_α(q)` (`α_c(0) ≈ 0.8330786`).
//!
//! The [`mc`] module checks these predictions against random instances with
//! exhaustive Gray-code enumeration and a restarted greedy local search.

pub mod error;
pub mod lifting;
pub mod mc;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use lifting::{
    capacity, capacity_curve, capacity_l1, capacity_l2_full, capacity_l2_partial, e_max_sq,
    kappa_c, psi_alpha, psi_p, psi_q, CapacityResult, LiftLevel, LiftingParams,
};
pub use solver::{brent_root, solve_fixed_point, FixedPointState, SolverConfig};
pub use special::{gauss_hermite_rule, QuadratureRule};
