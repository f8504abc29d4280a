//! Simulation toolkit for a three-level system under continuous null-result
//! monitoring by one or two two-level probes.
//!
//! The crate is organized around four layers:
//!
//! * [`su_n`] - generalized SU(N) generator algebra, Bloch-vector
//!   parameterization of density matrices, structure constants.
//! * [`monitor`] - Kraus operators for the monitored qutrit, the postselected
//!   (null-outcome) measurement map, and trajectory recording.
//! * [`flow`] - the deterministic most-likely-path equations for the
//!   postselected dynamics: coordinate drift, readout backaction, conjugate
//!   momentum flow, a fixed-step RK4 integrator, regime classification, and
//!   a report comparing the published equation set against an independently
//!   derived oracle.
//! * [`gates`] / [`protocols`] - the three-level logical gate set acting on
//!   the frozen qutrit, plus dense-coding and teleportation circuits built
//!   from it.

pub mod flow;
pub mod gates;
pub mod monitor;
pub mod protocols;
pub mod su_n;

// Gate matrices and restrictions are nalgebra types; re-exported so
// downstream code names the same version.
pub use nalgebra;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Level count outside the supported range.
    #[error("level count must be at least 2, got {0}")]
    BadLevelCount(usize),
    /// A vector or matrix had the wrong dimension for the requested operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Matrix failed the Hermiticity tolerance.
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    /// Trace differed from one beyond tolerance.
    #[error("trace is not 1 (got {0:.12})")]
    BadTrace(f64),
    /// An eigenvalue fell below the positivity tolerance.
    #[error("state is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    /// Configuration value out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Single-probe mode was requested with a level-2 rate attached.
    #[error("single-probe mode monitors level 3 only; alpha2 must be 0 (got {0})")]
    SingleModeAlpha2(f64),
    /// The null-outcome branch lost essentially all weight.
    #[error("null-outcome probability vanished at step {step} (trace {trace:.3e})")]
    VanishingNorm { step: usize, trace: f64 },
    /// Unknown gate name.
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    /// A state vector was not normalized.
    #[error("state vector is not normalized (norm {0:.12})")]
    NotNormalized(f64),
    /// Series too short for the requested window.
    #[error("series spans {span:.3} time units, need at least {need:.3}")]
    SeriesTooShort { span: f64, need: f64 },
    /// Two flow specifications that must agree on everything but the variant
    /// did not.
    #[error("flow specifications differ in {0}, not just in variant")]
    SpecMismatch(&'static str),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
