//! Exact coverage probability and scaled expected length of the confidence
//! interval centered on the bootstrap smoothed (bagged) estimator, in the
//! two-nested-linear-models scenario with unknown error variance.
//!
//! The scenario: a full linear model `y = Xβ + ε` with `ε ~ N(0, σ²I)` and a
//! simpler model obtained by setting the second regression coefficient `τ`
//! to zero. A preliminary two-sided t-test of `τ = 0` (size `α̃`) picks the
//! model; the post-model-selection estimator of the parameter of interest
//! `θ` is then smoothed by averaging over parametric bootstrap replications.
//! This crate evaluates, by semi-infinite numerical quadrature,
//!
//! * the kernel integrals `k_m`, `q_m`, `h_m` and the delta-method scale
//!   factor `r_delta` behind the standard-deviation estimate of the smoothed
//!   estimator ([`kernels`]),
//! * the exact coverage probability `CP_delta(γ, ρ)` of the interval centered
//!   on the smoothed estimator, and its minimum over `γ` ([`coverage`]),
//! * the scaled expected length `SEL_delta(γ, ρ)` ([`sel`]),
//!
//! and cross-validates every closed form against an independent Monte Carlo
//! simulation of the full data-generation / model-selection / bootstrap
//! pipeline ([`oracle`]). Data-facing estimators (least-squares fit,
//! preliminary test, smoothed estimate, realized intervals) live in
//! [`inference`]; the config-driven sweep front end in [`cli`].

pub mod cli;
pub mod coverage;
pub mod distributions;
pub mod engine;
pub mod inference;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod sel;

pub use coverage::{CoveragePoint, MinCoverageResult};
pub use engine::Evaluator;
pub use kernels::{KernelValues, ScenarioConfig};
pub use quadrature::QuadratureSpec;
pub use sel::SelPoint;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature did not converge: refining the rule moved the result by
    /// more than the requested tolerance.
    #[error("quadrature did not converge for {what}: value {value:e}, refinement shift {shift:e} > tolerance {tol:e}")]
    Quadrature {
        what: &'static str,
        value: f64,
        shift: f64,
        tol: f64,
    },

    /// The design matrix does not have full column rank.
    #[error("design matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    /// The residual sum of squares is zero, so `σ̂ = 0` and `γ̂` is undefined.
    #[error("exact fit: residual sum of squares is zero, sigma-hat = 0")]
    ExactFit,

    /// A run configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// File input/output failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
