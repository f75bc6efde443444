//! Monte Carlo estimates of the feasibility threshold at finite `n`.
//!
//! Every trial derives its instance (and local-search) seed from the master
//! seed, the constraint count and the trial index alone, so results do not
//! depend on thread count or scheduling.

mod instance;
mod search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::capacity_l1;

pub use instance::{margin_energy, sample_instance, search_seed, trial_seed, FeasibilityInstance};
pub use search::{
    feasible_exhaustive, feasible_exhaustive_capped, feasible_local_search, Feasibility,
    DEFAULT_RESTARTS, EXHAUSTIVE_CAP,
};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// How each trial decides feasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exhaustive,
    LocalSearch { restarts: usize },
}

/// Serialized tag of a [`Method`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Exhaustive,
    LocalSearch,
}

impl Method {
    pub fn kind(self) -> MethodKind {
        match self {
            Method::Exhaustive => MethodKind::Exhaustive,
            Method::LocalSearch { .. } => MethodKind::LocalSearch,
        }
    }

    fn restarts(self) -> Option<usize> {
        match self {
            Method::Exhaustive => None,
            Method::LocalSearch { restarts } => Some(restarts),
        }
    }
}

/// Feasibility rate at one `(n, m, κ)` with a Wilson 95% interval.
///
/// With local search the rate is a lower bound on the true rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub method: MethodKind,
    pub restarts: Option<usize>,
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub instance_seed: u64,
    pub feasible: bool,
    pub witness: Option<Vec<i8>>,
}

/// Wilson score interval for `successes` out of `trials`, clamped to `[0, 1]`
/// and always containing the point estimate.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = Z_95 * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    let lo = (center - half).max(0.0).min(p);
    let hi = (center + half).min(1.0).max(p);
    (lo, hi)
}

/// The instance used by trial `trial` at `(n, m, κ)` under `seed`.
pub fn instance_for_trial(
    n: usize,
    m: usize,
    kappa: f64,
    seed: u64,
    trial: usize,
) -> Result<FeasibilityInstance> {
    sample_instance(n, m, kappa, trial_seed(seed, m, trial))
}

fn check_method(n: usize, method: Method) -> Result<()> {
    match method {
        Method::Exhaustive if n > EXHAUSTIVE_CAP => Err(Error::EnumerationCap {
            n,
            cap: EXHAUSTIVE_CAP,
        }),
        Method::LocalSearch { restarts: 0 } => {
            Err(Error::InvalidArgument("restarts must be at least 1".into()))
        }
        _ => Ok(()),
    }
}

/// Runs `trials` independent trials at one `(n, m, κ)`, in parallel.
pub fn run_trials(
    n: usize,
    m: usize,
    kappa: f64,
    trials: usize,
    method: Method,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    check_method(n, method)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if m as u64 >= 1 << 31 || trials as u64 >= 1 << 32 {
        return Err(Error::InvalidArgument(format!(
            "m = {m} or trials = {trials} exceeds the seed-stream layout"
        )));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = instance_for_trial(n, m, kappa, seed, t)?;
            let f = match method {
                Method::Exhaustive => feasible_exhaustive(&inst)?,
                Method::LocalSearch { restarts } => {
                    feasible_local_search(&inst, restarts, search_seed(seed, m, t))?
                }
            };
            Ok(TrialOutcome {
                trial: t,
                instance_seed: inst.seed,
                feasible: f.feasible,
                witness: f.witness,
            })
        })
        .collect()
}

fn summarize(
    n: usize,
    m: usize,
    kappa: f64,
    method: Method,
    outcomes: &[TrialOutcome],
) -> MCEstimate {
    let trials = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.feasible).count();
    let (ci_lo, ci_hi) = wilson_interval(successes, trials);
    MCEstimate {
        n,
        m,
        alpha: m as f64 / n as f64,
        kappa,
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        ci_lo,
        ci_hi,
        method: method.kind(),
        restarts: method.restarts(),
    }
}

/// Feasibility rate at each `m` of `m_grid`.
pub fn estimate_feasibility(
    n: usize,
    m_grid: &[usize],
    kappa: f64,
    trials: usize,
    method: Method,
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    if m_grid.is_empty() {
        return Err(Error::InvalidArgument("empty m grid".into()));
    }
    m_grid
        .iter()
        .map(|&m| {
            let outcomes = run_trials(n, m, kappa, trials, method, seed)?;
            Ok(summarize(n, m, kappa, method, &outcomes))
        })
        .collect()
}

/// Constraint counts scanned by [`empirical_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub m_min: usize,
    pub m_max: usize,
    pub m_step: usize,
}

impl ThresholdScan {
    /// `m` from 1 to `⌈2 α_1(κ) n⌉ + 1` in unit steps, where `α_1` is the
    /// level-1 capacity; capped at `20 n` for very negative `κ`.
    pub fn for_kappa(n: usize, kappa: f64) -> Result<Self> {
        let alpha = capacity_l1(kappa)?.alpha_c;
        let limit = 20.0 * n as f64;
        let m_max = (2.0 * alpha * n as f64).ceil().min(limit) as usize + 1;
        Ok(Self {
            m_min: 1,
            m_max,
            m_step: 1,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.m_min == 0 || self.m_step == 0 || self.m_max < self.m_min {
            return Err(Error::InvalidArgument(format!(
                "invalid m scan {}..={} step {}",
                self.m_min, self.m_max, self.m_step
            )));
        }
        Ok(())
    }
}

/// Empirical 50% crossing `α̂ = m*/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub n: usize,
    pub kappa: f64,
    pub alpha_hat: f64,
    /// Wilson half-width at the bracketing points, propagated through the
    /// interpolation slope, in units of `α`.
    pub uncertainty: f64,
    pub m_below: usize,
    pub m_above: usize,
    pub curve: Vec<MCEstimate>,
}

/// Scans `m` upward until the feasibility rate first drops below one half and
/// interpolates linearly between the last two points.
pub fn empirical_threshold(
    n: usize,
    kappa: f64,
    trials: usize,
    method: Method,
    seed: u64,
    scan: ThresholdScan,
) -> Result<ThresholdEstimate> {
    scan.validate()?;
    check_method(n, method)?;
    let mut curve: Vec<MCEstimate> = Vec::new();
    let mut m = scan.m_min;
    while m <= scan.m_max {
        let outcomes = run_trials(n, m, kappa, trials, method, seed)?;
        let est = summarize(n, m, kappa, method, &outcomes);
        let below = est.rate < 0.5;
        curve.push(est);
        if below {
            let k = curve.len();
            if k < 2 {
                break;
            }
            let (a, b) = (&curve[k - 2], &curve[k - 1]);
            let slope = (b.m - a.m) as f64 / (a.rate - b.rate);
            let m_star = a.m as f64 + (a.rate - 0.5) * slope;
            let half = 0.25 * ((a.ci_hi - a.ci_lo) + (b.ci_hi - b.ci_lo));
            return Ok(ThresholdEstimate {
                n,
                kappa,
                alpha_hat: m_star / n as f64,
                uncertainty: slope * half / n as f64,
                m_below: a.m,
                m_above: b.m,
                curve: curve.clone(),
            });
        }
        m += scan.m_step;
    }
    Err(Error::NoCrossing {
        m_lo: scan.m_min,
        m_hi: scan.m_max,
        curve: curve.iter().map(|e| (e.m, e.rate)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.27753279986288).abs() < 1e-10, "{hi}");
        let (lo, hi) = wilson_interval(5, 10);
        assert!((lo - 0.23659309051).abs() < 1e-9 && (hi - 0.76340690949).abs() < 1e-9);
        let (lo, hi) = wilson_interval(10, 10);
        assert_eq!(hi, 1.0);
        assert!((lo - 0.72246720013712).abs() < 1e-10);
    }

    #[test]
    fn single_trial_rate_is_binary() {
        let e = &estimate_feasibility(3, &[1], 0.0, 1, Method::Exhaustive, 1).unwrap()[0];
        assert!(e.rate == 0.0 || e.rate == 1.0);
        assert!(e.ci_lo <= e.rate && e.rate <= e.ci_hi);
    }

    #[test]
    fn vacuous_threshold_never_crosses() {
        let scan = ThresholdScan {
            m_min: 1,
            m_max: 30,
            m_step: 1,
        };
        let err = empirical_threshold(6, -1e6, 5, Method::Exhaustive, 3, scan).unwrap_err();
        match err {
            Error::NoCrossing { curve, .. } => {
                assert_eq!(curve.len(), 30);
                assert!(curve.iter().all(|&(_, r)| r == 1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cap_checked_before_running() {
        assert!(matches!(
            run_trials(30, 5, 0.0, 3, Method::Exhaustive, 1),
            Err(Error::EnumerationCap { n: 30, cap: 26 })
        ));
    }

    #[test]
    fn default_scan_bounds() {
        let s = ThresholdScan::for_kappa(10, 0.0).unwrap();
        assert_eq!(s.m_min, 1);
        assert_eq!(s.m_max, 27);
        assert!(ThresholdScan::for_kappa(10, -1e6).unwrap().m_max <= 201);
    }

    #[test]
    fn threshold_at_small_n() {
        let scan = ThresholdScan::for_kappa(10, 0.0).unwrap();
        let t = empirical_threshold(10, 0.0, 60, Method::Exhaustive, 5, scan).unwrap();
        assert!(t.alpha_hat > 0.5 && t.alpha_hat < 2.0, "{}", t.alpha_hat);
        assert!(t.uncertainty > 0.0);
        assert_eq!(t.m_above, t.m_below + 1);
    }
}
