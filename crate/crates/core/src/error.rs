use thiserror::Error;

/// Errors produced by the capacity evaluators, solvers and Monte Carlo drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An integrand or residual produced a NaN or infinity.
    #[error("non-finite value {value} from {context} at {at}")]
    NonFinite {
        context: &'static str,
        at: f64,
        value: f64,
    },

    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("root finder did not converge after {iterations} iterations (last iterate {last}, |g| = {residual})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    /// The bracket scan of `q - psi(q)` never changed sign; `scan` holds the
    /// `(q, q - psi(q))` samples.
    #[error("fixed point not bracketed on [{lo}, {hi}] ({} scan points)", scan.len())]
    FixedPointNotFound {
        lo: f64,
        hi: f64,
        scan: Vec<(f64, f64)>,
    },

    #[error("degenerate order parameter: psi_p({q2s}) = {p2} is not inside (0, 1)")]
    DegenerateOrderParameter { q2s: f64, p2: f64 },

    #[error("exhaustive enumeration needs n <= {cap}, got n = {n}")]
    EnumerationCap { n: usize, cap: usize },

    /// The empirical feasibility rate never crossed 1/2; `curve` holds `(m, rate)`.
    #[error("feasibility rate does not cross 0.5 on m in [{m_lo}, {m_hi}]")]
    NoCrossing {
        m_lo: usize,
        m_hi: usize,
        curve: Vec<(usize, f64)>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
