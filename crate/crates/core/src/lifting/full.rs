//! Full second level of lifting.
//!
//! In the stationary limit `c_2 → ∞`, `γ_sq → 0` with `q_2 c_2² → q` held
//! finite, the optimality conditions reduce to three scalar maps of `q`:
//!
//! ```text
//! ψ_p(q) = E tanh²(√q h)
//! ψ_α(q) = [ (1 - p) q / 2 - E log(2 cosh(√q h)) ] / E log(erfc(z(u)) / 2)
//! ψ_q(q) = ψ_α(q) E[ √(2/π) / erfcx(z(u)) · (u + √p κ) / (√p (1 - p)^{3/2}) ]
//! z(u)   = (√p u + κ) / (√2 √(1 - p)),      p = ψ_p(q)
//! ```
//!
//! The capacity is `ψ_α` at the fixed point `q = ψ_q(q)`.

use std::f64::consts::{PI, SQRT_2};

use super::{check_kappa, is_extrapolated, CapacityResult, LiftLevel};
use crate::error::{Error, Result};
use crate::solver::{solve_fixed_point, SolverConfig};
use crate::special::{erfc_scaled, log_2cosh, log_half_erfc, QuadratureRule};

/// `ψ_p` closer to one than this is treated as degenerate.
const DEGENERATE_MARGIN: f64 = 1e-12;

/// The three maps evaluated together at one `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValues {
    pub p: f64,
    pub alpha: f64,
    pub q: f64,
}

fn check_q(q2s: f64) -> Result<()> {
    if q2s >= 0.0 && q2s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "q2s must be finite and non-negative, got {q2s}"
        )))
    }
}

/// `ψ_p(q) = E tanh²(√q h)`, in `[0, 1]`; zero at `q = 0`.
pub fn psi_p(q2s: f64, rule: &QuadratureRule) -> Result<f64> {
    check_q(q2s)?;
    if q2s == 0.0 {
        return Ok(0.0);
    }
    let s = q2s.sqrt();
    let v = rule.expect(|h| (s * h).tanh().powi(2))?;
    Ok(v.clamp(0.0, 1.0))
}

/// `ψ_p` in its stationarity form `1 - E[h tanh(√q h)] / √q`.
///
/// Equal to [`psi_p`] by Gaussian integration by parts; kept as a second
/// route for cross-checking. Requires `q > 0`.
pub fn psi_p_by_parts(q2s: f64, rule: &QuadratureRule) -> Result<f64> {
    check_q(q2s)?;
    if q2s == 0.0 {
        return Err(Error::InvalidArgument(
            "the by-parts form of psi_p is singular at q2s = 0".into(),
        ));
    }
    let s = q2s.sqrt();
    Ok(1.0 - rule.expect(|h| h * (s * h).tanh())? / s)
}

fn order_parameter(q2s: f64, rule: &QuadratureRule) -> Result<f64> {
    let p = psi_p(q2s, rule)?;
    if p > 0.0 && p < 1.0 - DEGENERATE_MARGIN {
        Ok(p)
    } else {
        Err(Error::DegenerateOrderParameter { q2s, p2: p })
    }
}

fn alpha_at(q2s: f64, p: f64, kappa: f64, rule: &QuadratureRule) -> Result<f64> {
    let s = q2s.sqrt();
    let sqrt_p = p.sqrt();
    let scale = SQRT_2 * (1.0 - p).sqrt();
    let numerator = 0.5 * (1.0 - p) * q2s - rule.expect(|h| log_2cosh(s * h))?;
    let denominator = rule.expect(|u| log_half_erfc((sqrt_p * u + kappa) / scale))?;
    Ok(numerator / denominator)
}

/// `ψ_α(q)`: the `α` that zeroes the ground-state energy at `q`.
pub fn psi_alpha(q2s: f64, kappa: f64, rule: &QuadratureRule) -> Result<f64> {
    check_q(q2s)?;
    let p = order_parameter(q2s, rule)?;
    alpha_at(q2s, p, kappa, rule)
}

/// Evaluates `ψ_p`, `ψ_α` and `ψ_q` at `q`, sharing the `ψ_p` integral.
pub fn psi_values(q2s: f64, kappa: f64, rule: &QuadratureRule) -> Result<PsiValues> {
    check_q(q2s)?;
    let p = order_parameter(q2s, rule)?;
    let alpha = alpha_at(q2s, p, kappa, rule)?;
    let sqrt_p = p.sqrt();
    let one_minus_p = 1.0 - p;
    let scale = SQRT_2 * one_minus_p.sqrt();
    let prefactor = (2.0 / PI).sqrt() / (sqrt_p * one_minus_p.powf(1.5));
    // e^{-z²}/erfc(z) = 1/erfcx(z)
    let tail = rule.expect(|u| {
        let z = (sqrt_p * u + kappa) / scale;
        prefactor * (u + sqrt_p * kappa) / erfc_scaled(z)
    })?;
    Ok(PsiValues {
        p,
        alpha,
        q: alpha * tail,
    })
}

/// `ψ_q(q)`; its fixed point is the stationary `q̂_2^(s)`.
pub fn psi_q(q2s: f64, kappa: f64, rule: &QuadratureRule) -> Result<f64> {
    Ok(psi_values(q2s, kappa, rule)?.q)
}

/// Full second level: solves `q = ψ_q(q)` and reports `α_c = ψ_α(q̂)`.
pub fn capacity_l2_full(
    kappa: f64,
    cfg: &SolverConfig,
    rule: &QuadratureRule,
) -> Result<CapacityResult> {
    check_kappa(kappa)?;
    let state = solve_fixed_point(|q| psi_q(q, kappa, rule), cfg)?;
    if !state.converged && state.sign_changes > 0 {
        // bracketed, but the tolerance is below what the bracket width allows
        return Err(Error::NoConvergence {
            iterations: state.iterations,
            last: state.q2s,
            residual: state.residual,
        });
    }
    if !state.converged {
        return Err(Error::FixedPointNotFound {
            lo: cfg.bracket_lo,
            hi: cfg.bracket_hi,
            scan: state.scan,
        });
    }
    let vals = psi_values(state.q2s, kappa, rule)?;
    Ok(CapacityResult {
        kappa,
        level: LiftLevel::L2Full,
        alpha_c: vals.alpha,
        p2: Some(vals.p),
        q2s: Some(state.q2s),
        gamma_sq: Some(0.0),
        residual: state.residual,
        iterations: state.iterations,
        quadrature_order: Some(rule.order()),
        collapsed: false,
        extrapolated: is_extrapolated(kappa),
        sign_changes: Some(state.sign_changes),
    })
}
