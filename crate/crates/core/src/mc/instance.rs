use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One random perceptron instance `G x ≥ κ 1` over `x ∈ {±1/√n}^n`.
///
/// `entries` is the raw `m × n` Gaussian matrix in row-major order; the `1/√n`
/// scaling of `x` is applied by [`margin_energy`] and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityInstance {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    pub entries: Vec<f64>,
    pub seed: u64,
}

impl FeasibilityInstance {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Column-major copy, column `j` at `[j * m, (j + 1) * m)`.
    pub(crate) fn columns(&self) -> Vec<f64> {
        let mut cols = vec![0.0; self.n * self.m];
        for i in 0..self.m {
            for (j, &g) in self.row(i).iter().enumerate() {
                cols[j * self.m + i] = g;
            }
        }
        cols
    }

    /// Same matrix, different threshold.
    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self {
            kappa,
            ..self.clone()
        }
    }

    /// Unscaled margins `G x` for a sign vector.
    pub(crate) fn raw_margins(&self, x: &[i8]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(&g, &s)| g * f64::from(s))
                    .sum()
            })
            .collect()
    }
}

/// Draws an instance with i.i.d. standard normal entries from a ChaCha8
/// stream keyed by `seed`.
pub fn sample_instance(n: usize, m: usize, kappa: f64, seed: u64) -> Result<FeasibilityInstance> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "instance needs n >= 1 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    if kappa.is_nan() {
        return Err(Error::InvalidArgument("kappa is NaN".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n * m)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Ok(FeasibilityInstance {
        n,
        m,
        kappa,
        entries,
        seed,
    })
}

const SEARCH_STREAM_BIT: u64 = 1 << 63;

fn keyed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Seed of trial `trial` at constraint count `m`: the first word of the ChaCha8
/// stream `(m << 32) | trial` under key `master`.
pub fn trial_seed(master: u64, m: usize, trial: usize) -> u64 {
    keyed(master, ((m as u64) << 32) | trial as u64)
}

/// Seed for the local-search randomness of the same trial (disjoint streams).
pub fn search_seed(master: u64, m: usize, trial: usize) -> u64 {
    keyed(
        master,
        SEARCH_STREAM_BIT | ((m as u64) << 32) | trial as u64,
    )
}

pub(crate) fn check_signs(inst: &FeasibilityInstance, x: &[i8]) -> Result<()> {
    if x.len() != inst.n {
        return Err(Error::InvalidArgument(format!(
            "sign vector has length {}, instance has n = {}",
            x.len(),
            inst.n
        )));
    }
    if x.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidArgument(
            "sign vector entries must be ±1".into(),
        ));
    }
    Ok(())
}

/// `Σ_i max(κ - (G x̃)_i, 0)²` with `x̃ = x/√n`; zero exactly when `x̃` is feasible.
pub fn margin_energy(inst: &FeasibilityInstance, x: &[i8]) -> Result<f64> {
    check_signs(inst, x)?;
    let scale = (inst.n as f64).sqrt();
    Ok(inst
        .raw_margins(x)
        .into_iter()
        .map(|y| (inst.kappa - y / scale).max(0.0).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn sampling_is_deterministic() {
        let a = sample_instance(2, 1, 0.0, 7).unwrap();
        let b = sample_instance(2, 1, 0.0, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.entries, sample_instance(2, 1, 0.0, 8).unwrap().entries);
    }

    #[test]
    fn scalar_instance_shape() {
        let inst = sample_instance(1, 1, 0.0, 3).unwrap();
        assert_eq!(inst.entries.len(), 1);
        assert!(inst.entries[0].is_finite());
    }

    #[test]
    fn sample_mean_near_zero() {
        for seed in [1, 2, 99] {
            let inst = sample_instance(200, 200, 0.0, seed).unwrap();
            let mean = inst.entries.iter().sum::<f64>() / inst.entries.len() as f64;
            assert!(mean.abs() < 0.05, "seed {seed}: {mean}");
            let var = inst.entries.iter().map(|g| g * g).sum::<f64>() / inst.entries.len() as f64;
            assert!((var - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn empty_shapes_rejected() {
        assert!(sample_instance(0, 1, 0.0, 1).is_err());
        assert!(sample_instance(1, 0, 0.0, 1).is_err());
    }

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let a = trial_seed(42, 8, 0);
        assert_eq!(a, trial_seed(42, 8, 0));
        assert_ne!(a, trial_seed(42, 8, 1));
        assert_ne!(a, trial_seed(42, 9, 0));
        assert_ne!(a, trial_seed(43, 8, 0));
        assert_ne!(a, search_seed(42, 8, 0));
    }

    #[test]
    fn energy_examples() {
        let inst = fixed(2, 0.0, vec![1.0, 1.0]);
        assert_eq!(margin_energy(&inst, &[1, 1]).unwrap(), 0.0);
        assert!(margin_energy(&inst, &[-1, -1]).unwrap() > 0.0);
        let hard = inst.with_kappa(2.0);
        for x in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert!(margin_energy(&hard, &x).unwrap() > 0.0);
        }
        let vacuous = sample_instance(5, 4, -1e6, 11).unwrap();
        assert_eq!(margin_energy(&vacuous, &[1, -1, 1, 1, -1]).unwrap(), 0.0);
    }

    #[test]
    fn energy_rejects_bad_vectors() {
        let inst = fixed(2, 0.0, vec![1.0, 1.0]);
        assert!(margin_energy(&inst, &[1]).is_err());
        assert!(margin_energy(&inst, &[1, 0]).is_err());
    }
}
