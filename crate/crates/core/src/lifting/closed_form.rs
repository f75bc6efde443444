//! Level 1 and partial level 2: closed forms plus the `κ_c` crossover.

use std::f64::consts::{LN_2, PI, SQRT_2};

use super::{check_kappa, is_extrapolated, CapacityResult, LiftLevel};
use crate::error::Result;
use crate::solver::{brent_root, Root, SolverConfig};
use crate::special::{erfc, erfc_scaled, log_half_erfc};

/// `E max(κ + u, 0)²` for standard normal `u`:
/// `κ φ(κ) + (κ² + 1) erfc(-κ/√2) / 2`.
///
/// For `κ ≤ 0` the common factor `e^{-κ²/2}` is pulled out through `erfcx`
/// so the value does not underflow before it has to.
pub fn e_max_sq(kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
    if kappa > 0.0 {
        kappa * (-0.5 * k2).exp() * inv_sqrt_2pi + 0.5 * (k2 + 1.0) * erfc(-kappa / SQRT_2)
    } else {
        (-0.5 * k2).exp() * (kappa * inv_sqrt_2pi + 0.5 * (k2 + 1.0) * erfc_scaled(-kappa / SQRT_2))
    }
}

/// Level-1 capacity `2 / (π E max(κ + u, 0)²)`.
pub(crate) fn alpha_l1(kappa: f64) -> f64 {
    2.0 / (PI * e_max_sq(kappa))
}

/// The `c_2 → ∞` branch of the partial second level, `-log 2 / log(erfc(κ/√2)/2)`.
pub(crate) fn alpha_partial_branch(kappa: f64) -> f64 {
    -LN_2 / log_half_erfc(kappa / SQRT_2)
}

/// Level-1 minus partial-branch capacity; its zero is `κ_c`.
pub fn kappa_c_difference(kappa: f64) -> f64 {
    alpha_l1(kappa) - alpha_partial_branch(kappa)
}

/// First level of lifting.
pub fn capacity_l1(kappa: f64) -> Result<CapacityResult> {
    check_kappa(kappa)?;
    let e = e_max_sq(kappa);
    let alpha_c = 2.0 / (PI * e);
    let gamma_sq = 0.5 * alpha_c.sqrt() * e.sqrt();
    Ok(CapacityResult {
        kappa,
        level: LiftLevel::L1,
        alpha_c,
        p2: None,
        q2s: None,
        gamma_sq: Some(gamma_sq),
        residual: 0.0,
        iterations: 0,
        quadrature_order: None,
        collapsed: false,
        extrapolated: is_extrapolated(kappa),
        sign_changes: None,
    })
}

/// Threshold where the partial second level stops improving on the first.
pub fn kappa_c(cfg: &SolverConfig) -> Result<Root> {
    brent_root(|k| Ok(kappa_c_difference(k)), cfg)
}

/// Partial second level. `cfg` governs the `κ_c` solve.
///
/// For `κ ≥ κ_c` the optimum sits at `c_2 → 0`, which is the level-1 point;
/// the level-1 result is returned verbatim with `collapsed` set.
pub fn capacity_l2_partial(kappa: f64, cfg: &SolverConfig) -> Result<CapacityResult> {
    check_kappa(kappa)?;
    let crossover = kappa_c(cfg)?.x;
    if kappa >= crossover {
        let mut res = capacity_l1(kappa)?;
        res.level = LiftLevel::L2Partial;
        res.collapsed = true;
        return Ok(res);
    }
    Ok(CapacityResult {
        kappa,
        level: LiftLevel::L2Partial,
        alpha_c: alpha_partial_branch(kappa),
        p2: Some(0.0),
        q2s: Some(0.0),
        gamma_sq: Some(0.0),
        residual: 0.0,
        iterations: 0,
        quadrature_order: None,
        collapsed: false,
        extrapolated: is_extrapolated(kappa),
        sign_changes: None,
    })
}
