//! Capacity evaluators for the three implemented lifting levels.

mod closed_form;
mod full;

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::SolverConfig;
use crate::special::QuadratureRule;

pub use closed_form::{capacity_l1, capacity_l2_partial, e_max_sq, kappa_c, kappa_c_difference};
pub use full::{capacity_l2_full, psi_alpha, psi_p, psi_p_by_parts, psi_q, psi_values, PsiValues};

/// Thresholds outside this range are still evaluated but flagged `extrapolated`.
pub const VALIDATED_KAPPA: RangeInclusive<f64> = -1.0..=2.0;

/// Which lifting level a capacity computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LiftLevel {
    #[serde(rename = "1")]
    L1,
    #[serde(rename = "2p")]
    L2Partial,
    #[serde(rename = "2f")]
    L2Full,
}

impl LiftLevel {
    pub const ALL: [LiftLevel; 3] = [LiftLevel::L1, LiftLevel::L2Partial, LiftLevel::L2Full];

    pub fn as_str(self) -> &'static str {
        match self {
            LiftLevel::L1 => "1",
            LiftLevel::L2Partial => "2p",
            LiftLevel::L2Full => "2f",
        }
    }
}

impl fmt::Display for LiftLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LiftLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(LiftLevel::L1),
            "2p" => Ok(LiftLevel::L2Partial),
            "2f" => Ok(LiftLevel::L2Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown lifting level {other:?} (expected 1, 2p or 2f)"
            ))),
        }
    }
}

/// Capacity at one threshold together with the stationary order parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub kappa: f64,
    pub level: LiftLevel,
    /// Scaled capacity `m/n`.
    pub alpha_c: f64,
    pub p2: Option<f64>,
    /// `lim q_2 c_2²`.
    pub q2s: Option<f64>,
    pub gamma_sq: Option<f64>,
    /// `|q2s - ψ_q(q2s)|` for the full level, zero for the closed forms.
    pub residual: f64,
    pub iterations: usize,
    /// `None` for the closed-form levels.
    pub quadrature_order: Option<usize>,
    /// Partial level at `κ ≥ κ_c`, where it coincides with level 1.
    #[serde(default)]
    pub collapsed: bool,
    /// `κ` lies outside [`VALIDATED_KAPPA`].
    #[serde(default)]
    pub extrapolated: bool,
    /// Sign changes of `q - ψ_q(q)` on the fixed-point scan.
    #[serde(default)]
    pub sign_changes: Option<usize>,
}

impl CapacityResult {
    /// The order-parameter sequences realized by this result.
    ///
    /// The full level only exists in the limit `c_2 → ∞`; `c2` picks the
    /// finite representative with `q_2 = q2s / c2²`.
    pub fn lifting_params(&self, c2: f64) -> Result<LiftingParams> {
        match (self.level, self.collapsed) {
            (LiftLevel::L1, _) | (LiftLevel::L2Partial, true) => {
                LiftingParams::first_level(self.gamma_sq.unwrap_or(0.0))
            }
            (LiftLevel::L2Partial, false) => LiftingParams::second_level(0.0, 0.0, c2, 0.0),
            (LiftLevel::L2Full, _) => {
                let p2 = self.p2.unwrap_or(0.0);
                let q2 = self.q2s.unwrap_or(0.0) / (c2 * c2);
                LiftingParams::second_level(p2, q2, c2, self.gamma_sq.unwrap_or(0.0))
            }
        }
    }
}

/// Order-parameter sequences `p_0..p_{r+1}`, `q_0..q_{r+1}`, `c_0..c_{r+1}`
/// and the scaling `γ_sq` of an `r`-level lift.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingParams {
    p: Vec<f64>,
    q: Vec<f64>,
    c: Vec<f64>,
    gamma_sq: f64,
}

impl LiftingParams {
    /// Validates `1 = p_0 ≥ p_1 ≥ … ≥ p_{r+1} = 0` (likewise `q`) and `γ_sq ≥ 0`.
    pub fn new(p: Vec<f64>, q: Vec<f64>, c: Vec<f64>, gamma_sq: f64) -> Result<Self> {
        let len = p.len();
        if len < 2 || q.len() != len || c.len() != len {
            return Err(Error::InvalidArgument(format!(
                "p, q, c need equal lengths of at least 2, got {}, {}, {}",
                p.len(),
                q.len(),
                c.len()
            )));
        }
        for (name, seq) in [("p", &p), ("q", &q)] {
            if seq[0] != 1.0 || seq[len - 1] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must start at 1 and end at 0"
                )));
            }
            if seq
                .windows(2)
                .any(|w| !(w[0] >= w[1]) || !(0.0..=1.0).contains(&w[1]))
            {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-increasing within [0, 1]"
                )));
            }
        }
        if c.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("c contains NaN".into()));
        }
        if !(gamma_sq >= 0.0 && gamma_sq.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma_sq must be finite and non-negative, got {gamma_sq}"
            )));
        }
        Ok(Self { p, q, c, gamma_sq })
    }

    /// `r = 1` with `p̂_1 = q̂_1 = ĉ_1 = 1`.
    pub fn first_level(gamma_sq: f64) -> Result<Self> {
        Self::new(
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            gamma_sq,
        )
    }

    /// `r = 2` with the fixed parts `p̂_1 = q̂_1 = ĉ_1 = 1`.
    pub fn second_level(p2: f64, q2: f64, c2: f64, gamma_sq: f64) -> Result<Self> {
        Self::new(
            vec![1.0, 1.0, p2, 0.0],
            vec![1.0, 1.0, q2, 0.0],
            vec![1.0, 1.0, c2, 0.0],
            gamma_sq,
        )
    }

    /// Number of lifting levels `r`.
    pub fn levels(&self) -> usize {
        self.p.len() - 2
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn gamma_sq(&self) -> f64 {
        self.gamma_sq
    }

    /// `b_k = √(p_{k-1} - p_k)` for `k` in `1..=r+1`.
    pub fn b_k(&self, k: usize) -> f64 {
        (self.p[k - 1] - self.p[k]).sqrt()
    }

    /// `c_k(p, q) = √(q_{k-1} - q_k)` for `k` in `1..=r+1`.
    pub fn c_k(&self, k: usize) -> f64 {
        (self.q[k - 1] - self.q[k]).sqrt()
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "kappa must be finite, got {kappa}"
        )))
    }
}

pub(crate) fn is_extrapolated(kappa: f64) -> bool {
    !VALIDATED_KAPPA.contains(&kappa)
}

/// Capacity at `kappa` for the requested level.
///
/// `cfg` is the fixed-point configuration; the partial level solves for `κ_c`
/// on [`SolverConfig::kappa_c`] with `cfg`'s tolerance and iteration budget.
pub fn capacity(
    kappa: f64,
    level: LiftLevel,
    cfg: &SolverConfig,
    rule: &QuadratureRule,
) -> Result<CapacityResult> {
    match level {
        LiftLevel::L1 => capacity_l1(kappa),
        LiftLevel::L2Partial => {
            let kc_cfg = SolverConfig {
                abs_tol: cfg.abs_tol,
                max_iter: cfg.max_iter,
                ..SolverConfig::kappa_c()
            };
            capacity_l2_partial(kappa, &kc_cfg)
        }
        LiftLevel::L2Full => capacity_l2_full(kappa, cfg, rule),
    }
}

/// One capacity per grid point, in grid order. Points are evaluated in
/// parallel; a failing point leaves its error in place.
pub fn capacity_curve(
    kappa_grid: &[f64],
    level: LiftLevel,
    cfg: &SolverConfig,
    rule: &QuadratureRule,
) -> Result<Vec<Result<CapacityResult>>> {
    if kappa_grid.is_empty() {
        return Err(Error::InvalidArgument("kappa grid is empty".into()));
    }
    Ok(kappa_grid
        .par_iter()
        .map(|&k| capacity(k, level, cfg, rule))
        .collect())
}
