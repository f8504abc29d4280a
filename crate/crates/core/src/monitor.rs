//! Null-outcome measurement map for a qutrit watched by one or two two-level
//! probes.
//!
//! One probe couples to level 3 with rate `alpha3`; the optional second probe
//! couples to level 2 with rate `alpha2`. Between readouts the qutrit evolves
//! under its own Hamiltonian. A trajectory conditioned on never seeing an
//! excited probe is generated by alternating the exact unitary
//! `U = exp(-i H dt)` with the null-outcome Kraus operator and renormalizing:
//!
//! ```text
//! rho' = M0 U rho U^+ M0^+ / Tr[...]
//! ```
//!
//! The discarded trace is recorded per step; it is the probability weight of
//! the postselected branch and the natural small parameter of the map. The
//! Kraus family is complete only to O(dt^2), which is the price of the
//! truncated probe expansion; `completeness_defect` exposes the residual so
//! callers can verify the scaling instead of trusting it.

use num_complex::Complex64;

use crate::su_n::{bloch_to_density, bloch_to_matrix, matrix_to_bloch, BlochVector, CMatrix};
use crate::{Error, Result};

/// Null-branch trace below this aborts a trajectory.
pub const NORM_FLOOR: f64 = 1e-14;

/// Transition frequencies of the three-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritFrequencies {
    pub w12: f64,
    pub w23: f64,
    pub w13: f64,
}

impl QutritFrequencies {
    pub fn new(w12: f64, w23: f64, w13: f64) -> Result<Self> {
        for (name, v) in [("w12", w12), ("w23", w23), ("w13", w13)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite")));
            }
        }
        Ok(Self { w12, w23, w13 })
    }

    /// All couplings off; the qutrit idles.
    pub const ZERO: Self = Self {
        w12: 0.0,
        w23: 0.0,
        w13: 0.0,
    };
}

/// Measurement rates and step size of the monitoring map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    pub alpha2: f64,
    pub alpha3: f64,
    pub dt: f64,
}

impl MonitorConfig {
    /// Validates rates (nonnegative, finite) and the step (positive, finite).
    pub fn new(alpha2: f64, alpha3: f64, dt: f64) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive and finite, got {dt}"
            )));
        }
        for (name, v) in [("alpha2", alpha2), ("alpha3", alpha3)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(Self { alpha2, alpha3, dt })
    }

    /// The map is a short-time expansion; alpha * dt must stay small.
    /// Returns a warning string when either product exceeds 0.1.
    pub fn coupling_warning(&self) -> Option<String> {
        let worst = (self.alpha2 * self.dt).max(self.alpha3 * self.dt);
        (worst > 0.1).then(|| {
            format!(
                "alpha*dt = {worst:.3} exceeds 0.1; the truncated measurement map is unreliable here"
            )
        })
    }
}

/// Which probe arrangement is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorMode {
    /// One probe on level 3.
    Single,
    /// Probes on levels 2 and 3.
    Double,
}

impl std::fmt::Display for MonitorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MonitorMode::Single => write!(f, "single"),
            MonitorMode::Double => write!(f, "double"),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn projector(level: usize) -> CMatrix {
    let mut p = CMatrix::zeros(3, 3);
    p[(level - 1, level - 1)] = c(1.0, 0.0);
    p
}

/// The bare qutrit Hamiltonian: symmetric hopping between all three level
/// pairs with the given frequencies and no diagonal part.
pub fn system_hamiltonian(w: &QutritFrequencies) -> CMatrix {
    let mut h = CMatrix::zeros(3, 3);
    h[(0, 1)] = c(w.w12, 0.0);
    h[(1, 0)] = c(w.w12, 0.0);
    h[(1, 2)] = c(w.w23, 0.0);
    h[(2, 1)] = c(w.w23, 0.0);
    h[(0, 2)] = c(w.w13, 0.0);
    h[(2, 0)] = c(w.w13, 0.0);
    h
}

/// exp(scale * H) for Hermitian H via eigendecomposition. Exact up to the
/// eigensolver, with no small-step assumption.
pub fn hermitian_expm(h: &CMatrix, scale: Complex64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = (scale * c(eig.eigenvalues[i], 0.0)).exp();
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// The exact one-step propagator exp(-i H dt).
pub fn unitary_step(h: &CMatrix, dt: f64) -> CMatrix {
    hermitian_expm(h, c(0.0, -dt))
}

/// Kraus pair for the single-probe arrangement:
/// `M0 = I - (alpha3/2) |3><3| dt` and `M1 = sqrt(alpha3 dt) |3><3|`.
///
/// Rejects configurations with a level-2 rate attached.
pub fn kraus_single(cfg: &MonitorConfig) -> Result<Vec<CMatrix>> {
    if cfg.alpha2 != 0.0 {
        return Err(Error::SingleModeAlpha2(cfg.alpha2));
    }
    let p3 = projector(3);
    let m0 = CMatrix::identity(3, 3) - &p3 * c(0.5 * cfg.alpha3 * cfg.dt, 0.0);
    let m1 = &p3 * c((cfg.alpha3 * cfg.dt).sqrt(), 0.0);
    Ok(vec![m0, m1])
}

/// Kraus quadruple for the two-probe arrangement, indexed by the pair of
/// probe outcomes: `[M00, M01, M10, M11]` with
///
/// ```text
/// M00 = I - alpha2 dt |2><2| - alpha3 dt |3><3|
/// M01 = -sqrt(alpha3 dt) |3><3| - i alpha2 dt |2><2|
/// M10 = -sqrt(alpha2 dt) |2><2| - i alpha3 dt |3><3|
/// M11 = i (sqrt(alpha2 dt) |2><2| + sqrt(alpha3 dt) |3><3|)
/// ```
///
/// Note the null operator damps each watched level at the *full* rate: the
/// second probe arrangement couples every level through two channels, so with
/// alpha2 = 0 this family equals [`kraus_single`] at twice the alpha3.
pub fn kraus_double(cfg: &MonitorConfig) -> Vec<CMatrix> {
    let p2 = projector(2);
    let p3 = projector(3);
    let a2dt = cfg.alpha2 * cfg.dt;
    let a3dt = cfg.alpha3 * cfg.dt;
    let m00 = CMatrix::identity(3, 3) - &p2 * c(a2dt, 0.0) - &p3 * c(a3dt, 0.0);
    let m01 = &p3 * c(-a3dt.sqrt(), 0.0) + &p2 * c(0.0, -a2dt);
    let m10 = &p2 * c(-a2dt.sqrt(), 0.0) + &p3 * c(0.0, -a3dt);
    let m11 = &p2 * c(0.0, a2dt.sqrt()) + &p3 * c(0.0, a3dt.sqrt());
    vec![m00, m01, m10, m11]
}

/// The null-outcome operator for the given mode.
pub fn null_outcome_op(cfg: &MonitorConfig, mode: MonitorMode) -> Result<CMatrix> {
    match mode {
        MonitorMode::Single => Ok(kraus_single(cfg)?.swap_remove(0)),
        MonitorMode::Double => Ok(kraus_double(cfg).swap_remove(0)),
    }
}

/// sum_r M_r^+ M_r - I, the completeness residual of a Kraus family.
pub fn completeness_defect(ops: &[CMatrix]) -> CMatrix {
    let n = ops[0].nrows();
    let mut s = CMatrix::zeros(n, n);
    for m in ops {
        s += m.adjoint() * m;
    }
    s - CMatrix::identity(n, n)
}

fn apply_null_step(m: &CMatrix, u: &CMatrix, m0: &CMatrix, step: usize) -> Result<(CMatrix, f64)> {
    let a = m0 * u;
    let numerator = &a * m * a.adjoint();
    let trace = numerator.trace().re;
    if trace < NORM_FLOOR {
        return Err(Error::VanishingNorm { step, trace });
    }
    Ok((numerator / c(trace, 0.0), trace))
}

/// One step of the postselected map on a validated state: evolve under the
/// exact unitary, apply the null-outcome operator, renormalize. Returns the
/// new state and the discarded trace (the branch probability weight).
pub fn step_postselected(
    rho: &crate::su_n::DensityMatrix,
    w: &QutritFrequencies,
    cfg: &MonitorConfig,
    mode: MonitorMode,
) -> Result<(crate::su_n::DensityMatrix, f64)> {
    let u = unitary_step(&system_hamiltonian(w), cfg.dt);
    let m0 = null_outcome_op(cfg, mode)?;
    let (m, norm) = apply_null_step(rho.matrix(), &u, &m0, 0)?;
    Ok((crate::su_n::DensityMatrix::from_matrix_unchecked(m), norm))
}

/// Options for trajectory generation.
#[derive(Debug, Clone, Copy, Default)]
pub struct MapOptions {
    /// Accept initial coordinates whose matrix is not positive semidefinite.
    ///
    /// The map is plain matrix arithmetic and runs fine from any Hermitian
    /// unit-trace starting point; published figure setups use coordinate
    /// patterns that lie outside the physical state space, so reproducing
    /// them requires this escape hatch. Physical conclusions (purity,
    /// probabilities) only make sense when the start is a real state.
    pub allow_nonpositive_initial: bool,
}

/// A sampled trajectory of the postselected map.
///
/// `times` is strictly increasing with `times[0] = 0`; `states[k]` holds the
/// coordinates after k steps and `norms[k]` the trace discarded by step k
/// (`norms[0] = 1` by convention).
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
    pub norms: Vec<f64>,
}

impl TrajectoryRecord {
    /// Coordinate series as one row per sample.
    pub fn coordinate_rows(&self) -> Vec<[f64; 8]> {
        self.states
            .iter()
            .map(|s| {
                let mut row = [0.0; 8];
                row.copy_from_slice(s.coords());
                row
            })
            .collect()
    }
}

/// Runs the postselected map for `round(total_time / dt)` equal steps from
/// the given coordinates, recording every sample.
pub fn map_trajectory(
    x0: &BlochVector,
    w: &QutritFrequencies,
    cfg: &MonitorConfig,
    mode: MonitorMode,
    total_time: f64,
    opts: &MapOptions,
) -> Result<TrajectoryRecord> {
    if total_time <= 0.0 || !total_time.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    let mut m = if opts.allow_nonpositive_initial {
        bloch_to_matrix(x0)
    } else {
        bloch_to_density(x0)?.matrix().clone()
    };

    let steps = (total_time / cfg.dt).round() as usize;
    let u = unitary_step(&system_hamiltonian(w), cfg.dt);
    let m0 = null_outcome_op(cfg, mode)?;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.clone());
    norms.push(1.0);

    for k in 1..=steps {
        let (next, norm) = apply_null_step(&m, &u, &m0, k)?;
        m = next;
        times.push(k as f64 * cfg.dt);
        states.push(matrix_to_bloch(&m));
        norms.push(norm);
    }

    Ok(TrajectoryRecord {
        times,
        states,
        norms,
    })
}
