use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{margin_energy, FeasibilityInstance};
use crate::error::{Error, Result};

/// Largest `n` [`feasible_exhaustive`] will enumerate (`2^26` sign vectors).
pub const EXHAUSTIVE_CAP: usize = 26;

/// Default restart count for [`feasible_local_search`].
pub const DEFAULT_RESTARTS: usize = 50;

/// Margins are recomputed from scratch this often during enumeration.
const RECOMPUTE_EVERY: u64 = 1 << 12;

/// Outcome of a feasibility decision; a witness always has zero margin energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<Vec<i8>>,
}

impl Feasibility {
    fn found(x: Vec<i8>) -> Self {
        Self {
            feasible: true,
            witness: Some(x),
        }
    }

    fn none() -> Self {
        Self {
            feasible: false,
            witness: None,
        }
    }
}

fn confirmed(inst: &FeasibilityInstance, x: &[i8]) -> Result<bool> {
    Ok(margin_energy(inst, x)? == 0.0)
}

/// Exact decision over all `2^n` sign vectors, `n ≤ 26`.
pub fn feasible_exhaustive(inst: &FeasibilityInstance) -> Result<Feasibility> {
    feasible_exhaustive_capped(inst, EXHAUSTIVE_CAP)
}

/// [`feasible_exhaustive`] with a caller-chosen cap on `n` (at most 63).
///
/// Walks the reflected Gray code so each step flips one sign and costs `O(m)`.
/// Candidates found on the incremental margins are re-verified with
/// [`margin_energy`] before being reported.
pub fn feasible_exhaustive_capped(inst: &FeasibilityInstance, cap: usize) -> Result<Feasibility> {
    let (n, m) = (inst.n, inst.m);
    if n > cap.min(63) {
        return Err(Error::EnumerationCap { n, cap });
    }
    let threshold = inst.kappa * (n as f64).sqrt();
    let cols = inst.columns();
    let mut x = vec![-1i8; n];
    let mut y = inst.raw_margins(&x);
    if y.iter().all(|&v| v >= threshold) && confirmed(inst, &x)? {
        return Ok(Feasibility::found(x));
    }
    for step in 1..(1u64 << n) {
        let j = step.trailing_zeros() as usize;
        x[j] = -x[j];
        let ok = if step % RECOMPUTE_EVERY == 0 {
            y = inst.raw_margins(&x);
            y.iter().all(|&v| v >= threshold)
        } else {
            let d = 2.0 * f64::from(x[j]);
            let col = &cols[j * m..(j + 1) * m];
            let mut ok = true;
            for (yi, &g) in y.iter_mut().zip(col) {
                *yi += d * g;
                ok &= *yi >= threshold;
            }
            ok
        };
        if ok && confirmed(inst, &x)? {
            return Ok(Feasibility::found(x));
        }
    }
    Ok(Feasibility::none())
}

fn violation(threshold: f64, y: f64) -> f64 {
    let gap = threshold - y;
    if gap > 0.0 {
        gap * gap
    } else {
        0.0
    }
}

/// Greedy best-improvement single-flip descent on the margin energy, from
/// `restarts` uniformly random starts.
///
/// Sound but incomplete: a reported witness is always genuine, while a miss
/// does not prove infeasibility.
pub fn feasible_local_search(
    inst: &FeasibilityInstance,
    restarts: usize,
    search_seed: u64,
) -> Result<Feasibility> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let (n, m) = (inst.n, inst.m);
    let threshold = inst.kappa * (n as f64).sqrt();
    let cols = inst.columns();
    let mut rng = ChaCha8Rng::seed_from_u64(search_seed);
    let max_moves = 4 * n * m + 16;
    for _ in 0..restarts {
        let mut x: Vec<i8> = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let mut y = inst.raw_margins(&x);
        for _ in 0..max_moves {
            let energy: f64 = y.iter().map(|&v| violation(threshold, v)).sum();
            if energy == 0.0 {
                if confirmed(inst, &x)? {
                    return Ok(Feasibility::found(x));
                }
                break;
            }
            let mut best = (0, 0.0);
            for j in 0..n {
                let d = -2.0 * f64::from(x[j]);
                let col = &cols[j * m..(j + 1) * m];
                let delta: f64 = y
                    .iter()
                    .zip(col)
                    .map(|(&v, &g)| violation(threshold, v + d * g) - violation(threshold, v))
                    .sum();
                if delta < best.1 {
                    best = (j, delta);
                }
            }
            if best.1 >= -1e-12 * energy {
                break;
            }
            let j = best.0;
            let d = -2.0 * f64::from(x[j]);
            for (v, &g) in y.iter_mut().zip(&cols[j * m..(j + 1) * m]) {
                *v += d * g;
            }
            x[j] = -x[j];
        }
    }
    Ok(Feasibility::none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::instance::sample_instance;

    fn fixed(n: usize, kappa: f64, entries: Vec<f64>) -> FeasibilityInstance {
        FeasibilityInstance {
            n,
            m: entries.len() / n,
            kappa,
            entries,
            seed: 0,
        }
    }

    #[test]
    fn trivial_feasible_instance() {
        let inst = fixed(2, 0.0, vec![1.0, 1.0]);
        let f = feasible_exhaustive(&inst).unwrap();
        assert!(f.feasible);
        assert_eq!(margin_energy(&inst, &f.witness.unwrap()).unwrap(), 0.0);
        assert!(feasible_local_search(&inst, 5, 1).unwrap().feasible);
    }

    #[test]
    fn unreachable_threshold() {
        // max over x of (x1 + x2)/√2 is √2 < 2
        let inst = fixed(2, 2.0, vec![1.0, 1.0]);
        assert!(!feasible_exhaustive(&inst).unwrap().feasible);
        assert!(!feasible_local_search(&inst, 5, 1).unwrap().feasible);
    }

    #[test]
    fn opposing_constraints() {
        // g and -g with κ > 0 can never both hold
        let inst = fixed(3, 0.1, vec![0.3, -1.2, 0.7, -0.3, 1.2, -0.7]);
        assert!(!feasible_exhaustive(&inst).unwrap().feasible);
    }

    #[test]
    fn vacuous_threshold_is_feasible_at_start() {
        let inst = sample_instance(6, 40, -1e6, 3).unwrap();
        let f = feasible_exhaustive(&inst).unwrap();
        assert_eq!(f.witness.unwrap(), vec![-1; 6]);
    }

    #[test]
    fn enumeration_cap() {
        let inst = sample_instance(27, 1, 0.0, 1).unwrap();
        assert!(matches!(
            feasible_exhaustive(&inst),
            Err(Error::EnumerationCap { n: 27, cap: 26 })
        ));
        let small = sample_instance(5, 2, 0.0, 1).unwrap();
        assert!(matches!(
            feasible_exhaustive_capped(&small, 4),
            Err(Error::EnumerationCap { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn periodic_recompute_does_not_change_answers() {
        // n = 14 crosses several recompute boundaries
        for seed in 0..6 {
            let inst = sample_instance(14, 12, 0.2, seed).unwrap();
            let f = feasible_exhaustive(&inst).unwrap();
            if let Some(w) = &f.witness {
                assert_eq!(margin_energy(&inst, w).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn zero_restarts_rejected() {
        let inst = fixed(2, 0.0, vec![1.0, 1.0]);
        assert!(feasible_local_search(&inst, 0, 1).is_err());
    }

    #[test]
    fn local_search_is_deterministic() {
        let inst = sample_instance(16, 14, 0.0, 5).unwrap();
        let a = feasible_local_search(&inst, 10, 9).unwrap();
        let b = feasible_local_search(&inst, 10, 9).unwrap();
        assert_eq!(a, b);
    }
}
