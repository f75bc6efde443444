//! Bracketed scalar root finding and the scan-then-bracket fixed-point solver.

use crate::error::{Error, Result};

/// Tolerance, iteration budget and search interval for a scalar solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once `|g(x)| <= abs_tol`.
    pub abs_tol: f64,
    pub max_iter: usize,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// Geometric grid size used by [`solve_fixed_point`] to locate sign changes.
    pub scan_points: usize,
}

impl Default for SolverConfig {
    /// Fixed-point defaults: `[1e-2, 50]`, 64 scan points, `abs_tol = 1e-10`.
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_iter: 200,
            bracket_lo: 1e-2,
            bracket_hi: 50.0,
            scan_points: 64,
        }
    }
}

impl SolverConfig {
    pub fn new(abs_tol: f64, max_iter: usize, bracket_lo: f64, bracket_hi: f64) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            max_iter,
            bracket_lo,
            bracket_hi,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bracket `[0.3, 0.9]` around the level-1 / partial-level-2 crossover.
    pub fn kappa_c() -> Self {
        Self {
            bracket_lo: 0.3,
            bracket_hi: 0.9,
            ..Self::default()
        }
    }

    pub fn with_bracket(self, bracket_lo: f64, bracket_hi: f64) -> Self {
        Self {
            bracket_lo,
            bracket_hi,
            ..self
        }
    }

    pub fn with_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.bracket_lo < self.bracket_hi)
            || !self.bracket_lo.is_finite()
            || !self.bracket_hi.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "bracket [{}, {}] is empty or not finite",
                self.bracket_lo, self.bracket_hi
            )));
        }
        Ok(())
    }
}

/// A converged root from [`brent_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `|g(x)|`.
    pub residual: f64,
    pub iterations: usize,
}

fn checked(context: &'static str, at: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { context, at, value })
    }
}

/// Brent's method on `[cfg.bracket_lo, cfg.bracket_hi]`.
///
/// Terminates when `|g(x)| <= cfg.abs_tol` or the bracket has shrunk to a few
/// ulps of `x`. The returned root always lies inside the starting bracket.
pub fn brent_root<F>(mut g: F, cfg: &SolverConfig) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    let mut a = cfg.bracket_lo;
    let mut b = cfg.bracket_hi;
    let mut fa = checked("root function", a, g(a)?)?;
    let mut fb = checked("root function", b, g(b)?)?;
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            residual: 0.0,
            iterations: 0,
        });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::Bracket {
            lo: a,
            hi: b,
            g_lo: fa,
            g_hi: fb,
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=cfg.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let xm = 0.5 * (c - b);
        if fb.abs() <= cfg.abs_tol || xm.abs() <= tol1 || fb == 0.0 {
            return Ok(Root {
                x: b,
                residual: fb.abs(),
                iterations: iter,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when only two points
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = checked("root function", b, g(b)?)?;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        last: b,
        residual: fb.abs(),
    })
}

/// Outcome of solving `q = psi(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointState {
    /// The fixed point, or the best scan point when none was bracketed.
    pub q2s: f64,
    /// `|q2s - psi(q2s)|`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Number of sign changes of `q - psi(q)` seen on the scan grid.
    pub sign_changes: usize,
    /// `(q, q - psi(q))` on the geometric scan grid.
    pub scan: Vec<(f64, f64)>,
}

/// Geometric grid of `points` values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = points.saturating_sub(1).max(1) as f64;
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo * (ratio * i as f64 / last).exp()
            }
        })
        .collect()
}

/// Solves `q = psi(q)` on `[cfg.bracket_lo, cfg.bracket_hi]`.
///
/// `q - psi(q)` is sampled on a geometric grid of `cfg.scan_points` values,
/// sign changes are counted, and Brent's method refines the first one. With no
/// sign change the state comes back with `converged == false` and the scan
/// point of smallest residual.
pub fn solve_fixed_point<F>(mut psi: F, cfg: &SolverConfig) -> Result<FixedPointState>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if cfg.bracket_lo <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "geometric scan needs a positive lower bracket, got {}",
            cfg.bracket_lo
        )));
    }
    if cfg.scan_points < 2 {
        return Err(Error::InvalidArgument(
            "scan needs at least 2 points".into(),
        ));
    }

    let mut scan = Vec::with_capacity(cfg.scan_points);
    for q in geometric_grid(cfg.bracket_lo, cfg.bracket_hi, cfg.scan_points) {
        let r = checked("fixed-point residual", q, q - psi(q)?)?;
        scan.push((q, r));
    }

    let sign = |r: f64| {
        if r > 0.0 {
            1
        } else if r < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut sign_changes = scan.iter().filter(|&&(_, r)| r == 0.0).count();
    let mut first_cell = None;
    for (i, w) in scan.windows(2).enumerate() {
        let (s0, s1) = (sign(w[0].1), sign(w[1].1));
        if s0 * s1 < 0 {
            sign_changes += 1;
        }
        if first_cell.is_none() && (s0 == 0 || s0 * s1 < 0) {
            first_cell = Some(i);
        }
    }
    if first_cell.is_none() && sign(scan[scan.len() - 1].1) == 0 {
        first_cell = Some(scan.len() - 2);
    }

    let Some(cell) = first_cell else {
        let &(q, r) = scan
            .iter()
            .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("scan has at least two points");
        return Ok(FixedPointState {
            q2s: q,
            residual: r.abs(),
            iterations: 0,
            converged: false,
            sign_changes,
            scan,
        });
    };

    let (lo, hi) = (scan[cell].0, scan[cell + 1].0);
    let root = brent_root(|q| Ok(q - psi(q)?), &cfg.with_bracket(lo, hi))?;
    Ok(FixedPointState {
        q2s: root.x,
        residual: root.residual,
        iterations: root.iterations,
        converged: root.residual <= cfg.abs_tol,
        sign_changes,
        scan,
    })
}
