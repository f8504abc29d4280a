//! Deterministic most-likely-path dynamics of the monitored qutrit.
//!
//! The published equations of motion come in two families, one per probe
//! arrangement, each consisting of a coordinate drift, a scalar backaction
//! functional F, and a conjugate-momentum flow generated by
//! `H = sum_i p_i xdot_i + F` through `pdot_i = -dH/dx_i`. This module
//! integrates them, classifies the resulting regimes (coherent oscillation,
//! partial arrest, full Zeno freeze), and measures every printed line against
//! two independent oracles:
//!
//! * the coordinate drift against a finite difference of the exact
//!   measurement map ([`crate::monitor`]),
//! * the momentum flow against a central finite difference of the dynamical
//!   Hamiltonian.
//!
//! Both the verbatim equations and the oracle-derived fields are first-class
//! ([`FlowVariant`]); their disagreements are the subject of
//! [`divergence::divergence_report`], not silently patched.
//!
//! # Coordinate scale
//!
//! The published equations are written in coordinates whose eighth component
//! is half the standard Bloch component produced by [`crate::su_n`]
//! (x8 = y8/2; the first seven agree). Everything in this module and its
//! children speaks flow coordinates; [`flow_from_standard`] and
//! [`standard_from_flow`] translate at the boundary. Forgetting the factor
//! of two makes the drift inconsistent with the map by O(1), so the
//! converters are part of the public contract.

pub mod divergence;
pub mod equations;
pub mod integrate;
mod oracle;
pub mod regime;

use crate::monitor::{MonitorConfig, MonitorMode, QutritFrequencies};
use crate::{Error, Result};

/// A point of the 16-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: [f64; 8],
    pub p: [f64; 8],
}

impl PhasePoint {
    pub fn new(x: [f64; 8], p: [f64; 8]) -> Result<Self> {
        if x.iter().chain(&p).all(|v| v.is_finite()) {
            Ok(Self { x, p })
        } else {
            Err(Error::InvalidConfig(
                "phase-space point has a non-finite entry".into(),
            ))
        }
    }
}

/// Which form of the vector fields to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowVariant {
    /// The equations exactly as printed, typos included.
    AsPublished,
    /// Drift from a Richardson-extrapolated finite difference of the
    /// measurement map; momentum flow from central differences of the
    /// dynamical Hamiltonian.
    OracleCorrected,
}

impl std::fmt::Display for FlowVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlowVariant::AsPublished => write!(f, "as-published"),
            FlowVariant::OracleCorrected => write!(f, "oracle-corrected"),
        }
    }
}

/// Full description of one flow: frequencies, rates, probe arrangement,
/// equation variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub w: QutritFrequencies,
    pub cfg: MonitorConfig,
    pub mode: MonitorMode,
    pub variant: FlowVariant,
}

impl FlowSpec {
    /// Validates mode consistency: the single-probe field has no alpha2.
    pub fn new(
        w: QutritFrequencies,
        cfg: MonitorConfig,
        mode: MonitorMode,
        variant: FlowVariant,
    ) -> Result<Self> {
        if mode == MonitorMode::Single && cfg.alpha2 != 0.0 {
            return Err(Error::SingleModeAlpha2(cfg.alpha2));
        }
        Ok(Self {
            w,
            cfg,
            mode,
            variant,
        })
    }
}

/// Standard Bloch coordinates -> flow coordinates (halve the eighth).
pub fn flow_from_standard(y: &[f64; 8]) -> [f64; 8] {
    let mut x = *y;
    x[7] *= 0.5;
    x
}

/// Flow coordinates -> standard Bloch coordinates (double the eighth).
pub fn standard_from_flow(x: &[f64; 8]) -> [f64; 8] {
    let mut y = *x;
    y[7] *= 2.0;
    y
}

/// The coordinate drift of the given spec.
pub fn drift(spec: &FlowSpec, x: &[f64; 8]) -> [f64; 8] {
    match (spec.variant, spec.mode) {
        (FlowVariant::AsPublished, MonitorMode::Single) => {
            equations::drift_single(x, &spec.w, spec.cfg.alpha3)
        }
        (FlowVariant::AsPublished, MonitorMode::Double) => {
            equations::drift_double(x, &spec.w, spec.cfg.alpha2, spec.cfg.alpha3)
        }
        (FlowVariant::OracleCorrected, _) => oracle::map_drift(x, spec),
    }
}

/// The backaction functional of the spec's probe arrangement. The two
/// printed functionals do not reduce into each other at alpha2 = 0; each
/// mode keeps its own, and the mismatch is quantified in the divergence
/// report.
pub fn backaction(spec: &FlowSpec, x: &[f64; 8]) -> f64 {
    match spec.mode {
        MonitorMode::Single => equations::backaction_single(x, spec.cfg.alpha3),
        MonitorMode::Double => equations::backaction_double(x, spec.cfg.alpha2, spec.cfg.alpha3),
    }
}

/// The generating function `H = sum_i p_i xdot_i + F`, always built from the
/// printed drift and backaction of the spec's mode. The variant does not
/// enter: H is the published generator, and the oracle-corrected momentum
/// flow is defined as its exact (numerical) gradient.
pub fn dynamical_hamiltonian(pt: &PhasePoint, spec: &FlowSpec) -> f64 {
    let xdot = match spec.mode {
        MonitorMode::Single => equations::drift_single(&pt.x, &spec.w, spec.cfg.alpha3),
        MonitorMode::Double => {
            equations::drift_double(&pt.x, &spec.w, spec.cfg.alpha2, spec.cfg.alpha3)
        }
    };
    let dot: f64 = pt.p.iter().zip(&xdot).map(|(p, v)| p * v).sum();
    backaction(spec, &pt.x) + dot
}

/// The conjugate-momentum flow of the given spec.
pub fn momentum_flow(spec: &FlowSpec, pt: &PhasePoint) -> [f64; 8] {
    match (spec.variant, spec.mode) {
        (FlowVariant::AsPublished, MonitorMode::Single) => {
            equations::momentum_flow_single(pt, &spec.w, spec.cfg.alpha3)
        }
        (FlowVariant::AsPublished, MonitorMode::Double) => {
            equations::momentum_flow_double(pt, &spec.w, spec.cfg.alpha2, spec.cfg.alpha3)
        }
        (FlowVariant::OracleCorrected, _) => oracle::momentum_gradient(pt, spec),
    }
}
