//! Primal-dual excessive-gap solvers for linearly constrained convex programs
//!
//! This crate solves problems of the form
//!
//! ```text
//!     minimize  f(x)   subject to  A x = b  (or A x <= b),  x in X,
//! ```
//!
//! where `f` is block-separable and proximally tractable and `X` is a simple
//! set (box, nonnegative orthant, or all of R^n). The solvers maintain a
//! smoothed primal-dual gap that contracts at every iteration, which yields
//! closed-form worst-case bounds on both the objective residual
//! `|f(x_k) - f*|` and the feasibility gap `||A x_k - b||`. The [`bounds`]
//! module evaluates those bounds and certifies recorded iteration traces
//! against them.
//!
//! Main pieces:
//! - [`linop`]: dense / block linear operators with adjoints and norm estimates
//! - [`prox`]: catalog of proximable terms and feasible sets
//! - [`smoothing`]: the two dual smoothers and the smoothed gap function
//! - [`subsolver`]: FISTA inner solver with a certified duality-gap stop
//! - [`schedule`]: step-size and smoothness-parameter sequences
//! - [`schemes`]: the iteration kernels (2P1D, 1P2D, strongly convex,
//!   Lipschitz-gradient, inexact, ADMM variants) and the outer driver
//! - [`bounds`]: closed-form rate bounds and trace certification
//! - [`problems`]: benchmark generators and small-instance reference oracles
//! - [`trace`]: iteration records, CSV round-trip, cost counters

pub mod audit;
pub mod bounds;
pub mod docs;
pub mod error;
pub mod linop;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod schedule;
pub mod schemes;
pub mod smoothing;
pub mod subsolver;
pub mod trace;
pub mod vecmath;

pub use error::Error;
