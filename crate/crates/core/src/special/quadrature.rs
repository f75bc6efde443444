//! Gauss-Hermite quadrature in the probabilists' convention.
//!
//! A [`QuadratureRule`] of order `n` approximates `E f(h)` for a standard
//! normal `h` by `Σ w_i f(x_i)`, exactly for polynomials of degree `2n - 1`.
//! Nodes come from the eigenvalues of the Jacobi matrix of the orthonormal
//! Hermite polynomials (off-diagonal `√k`), polished by Newton steps on the
//! three-term recurrence; weights use the Christoffel identity
//! `w_i = 1 / (n h_{n-1}(x_i)²)` evaluated in scaled arithmetic so that orders
//! in the thousands neither overflow nor lose the tiny tail weights.

use crate::error::{Error, Result};

/// Quadrature order used by the capacity evaluators unless told otherwise.
pub const DEFAULT_ORDER: usize = 200;

/// Nodes and weights realizing expectations over a scalar standard normal.
///
/// Nodes are sorted ascending and exactly antisymmetric (`x[n-1-i] == -x[i]`),
/// weights are positive, symmetric and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `order`-point Gauss-Hermite rule for the standard normal weight.
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature order must be at least 2, got {order}"
            )));
        }
        let n = order;

        // Jacobi matrix: zero diagonal, off-diagonal √k for k = 1..n-1.
        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
        off.push(0.0);
        tridiagonal_eigenvalues(&mut diag, &mut off)?;
        diag.sort_by(f64::total_cmp);

        // Polish the non-negative half and mirror it.
        let half = n / 2;
        let mut pos = Vec::with_capacity(n - half);
        for &guess in &diag[half..] {
            pos.push(newton_polish(guess.abs(), n));
        }
        if n % 2 == 1 {
            pos[0] = 0.0;
        }

        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for (k, &x) in pos.iter().enumerate() {
            let w = christoffel_weight(x, n);
            let hi = half + k;
            let lo = n - 1 - hi;
            nodes[hi] = x;
            nodes[lo] = -x;
            weights[hi] = w;
            weights[lo] = w;
        }

        // Renormalize, summing the smallest (outermost) weights first.
        let total = sum_outside_in(&weights);
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f(x_i)`, summed in symmetric pairs from the tails inward.
    ///
    /// Pairing makes exactly odd integrands cancel to zero.
    pub fn expect<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let n = self.nodes.len();
        let eval = |i: usize| -> Result<f64> {
            let x = self.nodes[i];
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    context: "expectation integrand",
                    at: x,
                    value: v,
                })
            }
        };
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let pair = eval(i)? + eval(n - 1 - i)?;
            acc += self.weights[i] * pair;
        }
        if n % 2 == 1 {
            acc += self.weights[n / 2] * eval(n / 2)?;
        }
        Ok(acc)
    }
}

/// Builds the `order`-point Gauss-Hermite rule; see [`QuadratureRule::gauss_hermite`].
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    QuadratureRule::gauss_hermite(order)
}

/// `E f(h)` for standard normal `h` under `rule`.
pub fn expect_normal<F>(f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    rule.expect(f)
}

fn sum_outside_in(weights: &[f64]) -> f64 {
    let n = weights.len();
    let mut acc = 0.0;
    for i in 0..n / 2 {
        acc += weights[i] + weights[n - 1 - i];
    }
    if n % 2 == 1 {
        acc += weights[n / 2];
    }
    acc
}

// Values of the orthonormal probabilists' Hermite polynomials h_n(x) and
// h_{n-1}(x), both multiplied by exp(-log_scale).
struct ScaledHermite {
    h_n: f64,
    h_nm1: f64,
    log_scale: f64,
}

fn hermite_pair(x: f64, n: usize) -> ScaledHermite {
    const RESCALE_AT: f64 = 1e150;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            prev /= RESCALE_AT;
            cur /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
        }
    }
    ScaledHermite {
        h_n: cur,
        h_nm1: prev,
        log_scale,
    }
}

fn newton_polish(mut x: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    for _ in 0..8 {
        let h = hermite_pair(x, n);
        // h_n' = √n h_{n-1}
        let step = h.h_n / (sqrt_n * h.h_nm1);
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn christoffel_weight(x: f64, n: usize) -> f64 {
    let h = hermite_pair(x, n);
    let log_w = -(n as f64).ln() - 2.0 * (h.h_nm1.abs().ln() + h.log_scale);
    log_w.exp()
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `off[i]` couples rows `i` and `i + 1`; the last entry is
/// scratch. Eigenvalues overwrite `diag` (unsorted).
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    const MAX_SWEEPS: usize = 60;
    let n = diag.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    iterations: sweeps,
                    last: diag[l],
                    residual: off[l].abs(),
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
