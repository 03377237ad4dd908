//! Crate-wide error type. Variant names mirror the short codes used in
//! diagnostics and tests.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Dimension mismatch in an operator or vector argument.
    #[error("shape: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// Power method failed to converge; carries the last estimate.
    #[error("norm-estimate: no convergence after {iters} iterations (last estimate {last})")]
    NormEstimate { iters: usize, last: f64 },

    /// Dense eigensolve refused: block exceeds the configured size cap.
    #[error("too-large: dimension {dim} exceeds cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    /// No exact prox rule for this (function, set) combination.
    #[error("no-prox-rule: {0}")]
    NoProxRule(String),

    /// Nonpositive dual smoothness parameter.
    #[error("bad-beta: beta must be positive, got {0}")]
    BadBeta(f64),

    /// c outside the admissible interval (-1, 1].
    #[error("bad-c: c must lie in (-1, 1], got {0}")]
    BadC(f64),

    /// Iterate violates its feasible set beyond tolerance.
    #[error("infeasible-iterate: violation {0}")]
    InfeasibleIterate(f64),

    /// Bregman smoother needs a bounded domain for its diameter constants.
    #[error("unbounded-domain: {0}")]
    UnboundedDomain(String),

    /// Inner solver exhausted its budget; carries the best gap bound reached.
    #[error("inner-budget: {iters} iterations, certified gap bound {gap_bound}")]
    InnerBudget { iters: usize, gap_bound: f64 },

    /// Schedule invariant beta*gamma >= L*tau^2 was violated.
    #[error("contraction-broken: product {product} < required {required}")]
    ContractionBroken { product: f64, required: f64 },

    /// The per-step contraction certificate failed.
    #[error("certificate-failed: at iteration {k}, violation {violation}")]
    CertificateFailed { k: usize, violation: f64 },

    /// Starting point requires beta0*gamma0 >= L_bar_g.
    #[error("init-product: beta0*gamma0 = {product} < L_bar_g = {l_bar_g}")]
    InitProduct { product: f64, l_bar_g: f64 },

    /// Strongly convex scheme applied to a problem with sigma_f = 0.
    #[error("needs-strong-convexity")]
    NeedsStrongConvexity,

    /// ADMM kernels require exactly two blocks.
    #[error("needs-two-blocks: got {0}")]
    NeedsTwoBlocks(usize),

    /// A bound set is missing required constants.
    #[error("missing-constant: {0}")]
    MissingConstant(String),

    /// Reference oracle refused: instance too large for exact enumeration.
    #[error("oracle-size: {0}")]
    OracleSize(String),

    /// Cost audit requested on a trace without counters.
    #[error("no-counters")]
    NoCounters,

    /// Performance profile requested with no input data.
    #[error("no-data")]
    NoData,

    /// Scheme/smoother combination rejected by the variant matrix.
    #[error("scheme-smoother: {0}")]
    SchemeSmoother(String),

    /// Configuration rejected at validation time.
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
