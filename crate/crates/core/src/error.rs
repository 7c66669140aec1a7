use thiserror::Error;

/// Errors reported by evaluators when a query leaves the domain an
/// algorithm is specified for.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Requested accuracy outside the admissible interval (0, 1/10).
    #[error("eps = {0:e} must lie in (0, 1/10)")]
    EpsOutOfRange(f64),

    /// The truncation length must be a positive integer.
    #[error("n = {0} must be >= 1")]
    InvalidN(u64),

    /// Guard multiplier must be positive.
    #[error("guard multiplier {0} must be > 0")]
    InvalidGuardMultiplier(f64),

    /// Mordell integral evaluation needs tau != 0, |tau| < 1.
    #[error("tau = {0} outside (0 < |tau| < 1)")]
    TauOutOfRange(f64),

    /// Public Mordell entry point is contracted for |z| < 10 only.
    #[error("z = {0} outside |z| < 10")]
    ZOutOfRange(f64),

    /// Upward recursion for p_k(x) rejected: x too small for the index.
    #[error("p_k recursion unstable: x = {x} < kmax - 1 = {limit}")]
    UnstableRecursion { x: f64, limit: f64 },

    /// A quadrature-rule root search failed to converge at the working
    /// precision.
    #[error("Laguerre root search failed to bracket root {index} of order {order}")]
    RootSearchFailed { order: usize, index: usize },

    /// Small-tau evaluator called outside its regime.
    #[error("small-tau evaluator requires |tau| < n^-4 and |z| <= 1/2 (n = {n}, z = {z}, tau = {tau:e})")]
    WrongRegime { n: u64, z: f64, tau: f64 },

    /// The Gauss-Laguerre fast path is only advertised at >= 113 bits.
    #[error("fast Mordell path requires working precision >= 113 bits (got {0})")]
    FastPathPrecision(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
