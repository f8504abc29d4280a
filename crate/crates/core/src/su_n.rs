//! Generalized SU(N) generator algebra and the Bloch-vector parameterization
//! of N-level density matrices.
//!
//! The generator set consists of the symmetric pairs `u_jk = |j><k| + |k><j|`,
//! the antisymmetric pairs `v_jk = -i(|j><k| - |k><j|)`, and the diagonal
//! matrices `w_l = sqrt(2/(l(l+1))) (sum_{m<=l} |m><m| - l |l+1><l+1|)`.
//! They are ordered by nesting: the first k^2 - 1 generators span the SU(k)
//! subalgebra acting on the lowest k levels, so N = 2 yields the Pauli triple
//! and N = 3 the familiar eight-generator set ending in
//! `w_2 = diag(1, 1, -2)/sqrt(3)`.
//!
//! Every generator is Hermitian, traceless, and normalized to
//! `Tr[x_i x_j] = 2 delta_ij`. A density matrix is recovered from a coordinate
//! vector via `rho = I/N + (1/2) sum_i x_i x_i_hat`, and coordinates from a
//! state via `x_i = Tr[rho x_i_hat]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

/// Absolute tolerance for exact algebraic identities.
pub const TOL_ALGEBRA: f64 = 1e-12;
/// Eigenvalues above this (negative) floor count as nonnegative.
pub const TOL_POSITIVITY: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Real coordinate vector of length N^2 - 1 parameterizing an N-level state.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    coords: Vec<f64>,
}

impl BlochVector {
    /// Wraps a coordinate vector, requiring finite entries and a length of
    /// the form n^2 - 1 for some n >= 2.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = level_count_for(coords.len())?;
        debug_assert!(n >= 2);
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite Bloch coordinate {bad}"
            )));
        }
        Ok(Self { coords })
    }

    /// Number of levels of the underlying system.
    pub fn n(&self) -> usize {
        // new() guaranteed len = n^2 - 1
        (((self.coords.len() + 1) as f64).sqrt()).round() as usize
    }

    /// Coordinate slice, ordered like [`generators`].
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean length of the coordinate vector.
    pub fn length(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for BlochVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

fn level_count_for(dim: usize) -> Result<usize> {
    let n = ((dim + 1) as f64).sqrt().round() as usize;
    if n < 2 || n * n != dim + 1 {
        return Err(Error::DimensionMismatch {
            expected: if n >= 2 { n * n - 1 } else { 3 },
            got: dim,
        });
    }
    Ok(n)
}

/// Validated N-level density matrix: Hermitian, unit trace, positive
/// semidefinite within [`TOL_POSITIVITY`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a candidate density matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows().max(2),
                got: m.ncols(),
            });
        }
        let asym = hermitian_asymmetry(&m);
        if asym > TOL_ALGEBRA {
            return Err(Error::NotHermitian(asym));
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > TOL_ALGEBRA || trace.im.abs() > TOL_ALGEBRA {
            return Err(Error::BadTrace(trace.re));
        }
        let min_eig = hermitian_eigenvalues(&m)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -TOL_POSITIVITY {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(Self { m })
    }

    /// Wraps without validation. Callers must uphold the invariants
    /// themselves; intended for matrices produced by trusted arithmetic.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Number of levels.
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// Tr[rho^2]; equals 1/N + |x|^2 / 2 in Bloch coordinates.
    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = hermitian_eigenvalues(&self.m);
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Largest entry of |m - m^dagger|.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix (unsorted).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// The ordered generator set for an N-level system.
///
/// Ordering: for each k = 2..=N, the pairs (u_jk, v_jk) for j = 1..k followed
/// by w_{k-1}. For N = 2 this is exactly (X, Y, Z).
pub fn generators(n: usize) -> Result<Vec<CMatrix>> {
    if n < 2 {
        return Err(Error::BadLevelCount(n));
    }
    let mut out = Vec::with_capacity(n * n - 1);
    for k in 1..n {
        for j in 0..k {
            let mut u = CMatrix::zeros(n, n);
            u[(j, k)] = ONE;
            u[(k, j)] = ONE;
            out.push(u);
            let mut v = CMatrix::zeros(n, n);
            v[(j, k)] = Complex64::new(0.0, -1.0);
            v[(k, j)] = Complex64::new(0.0, 1.0);
            out.push(v);
        }
        // w_k acts on the lowest k+1 levels; k here is the 1-based l index.
        let l = k as f64;
        let scale = (2.0 / (l * (l + 1.0))).sqrt();
        let mut w = CMatrix::zeros(n, n);
        for m in 0..k {
            w[(m, m)] = Complex64::new(scale, 0.0);
        }
        w[(k, k)] = Complex64::new(-l * scale, 0.0);
        out.push(w);
    }
    Ok(out)
}

/// Builds I/N + (1/2) sum_i x_i x_i_hat without any validation.
///
/// The result is always Hermitian with unit trace, but positivity depends on
/// the coordinates; [`bloch_to_density`] is the validating front end.
pub fn bloch_to_matrix(x: &BlochVector) -> CMatrix {
    let n = x.n();
    let gens = generators(n).expect("n >= 2 by BlochVector invariant");
    let mut m = CMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0);
    for (xi, g) in x.coords().iter().zip(&gens) {
        m += g * Complex64::new(0.5 * xi, 0.0);
    }
    m
}

/// Reconstructs the density matrix for a coordinate vector, rejecting
/// coordinates whose matrix has an eigenvalue below -1e-10.
pub fn bloch_to_density(x: &BlochVector) -> Result<DensityMatrix> {
    DensityMatrix::new(bloch_to_matrix(x))
}

/// Coordinates x_i = Tr[rho x_i_hat] of a state.
pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    matrix_to_bloch(rho.matrix())
}

/// Coordinate extraction for a raw Hermitian matrix.
pub fn matrix_to_bloch(m: &CMatrix) -> BlochVector {
    let n = m.nrows();
    let gens = generators(n).expect("square matrix dimension checked by caller");
    let coords = gens.iter().map(|g| (m * g).trace().re).collect();
    BlochVector::new(coords).expect("trace coordinates are finite")
}

/// Antisymmetric (f) and symmetric (g) structure constants of the generator
/// algebra: [x_i, x_j] = 2i f_ijk x_k and {x_i, x_j} = (4/N) d_ij I + 2 g_ijk x_k.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    n: usize,
    d: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl StructureConstants {
    /// Dimension of the algebra (N^2 - 1).
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of levels.
    pub fn n(&self) -> usize {
        self.n
    }

    /// f_ijk, zero-based indices.
    pub fn f(&self, i: usize, j: usize, k: usize) -> f64 {
        self.f[(i * self.d + j) * self.d + k]
    }

    /// g_ijk, zero-based indices.
    pub fn g(&self, i: usize, j: usize, k: usize) -> f64 {
        self.g[(i * self.d + j) * self.d + k]
    }
}

/// Computes both structure-constant tensors from the trace formulas
/// f_ijk = Tr([x_i, x_j] x_k) / 4i and g_ijk = Tr({x_i, x_j} x_k) / 4.
pub fn structure_constants(n: usize) -> Result<StructureConstants> {
    let gens = generators(n)?;
    let d = gens.len();
    let mut f = vec![0.0; d * d * d];
    let mut g = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let comm = &gens[i] * &gens[j] - &gens[j] * &gens[i];
            let anti = &gens[i] * &gens[j] + &gens[j] * &gens[i];
            for k in 0..d {
                let tr_c = (&comm * &gens[k]).trace();
                let tr_a = (&anti * &gens[k]).trace();
                // Tr([i,j]k) is purely imaginary, Tr({i,j}k) purely real.
                f[(i * d + j) * d + k] = tr_c.im / 4.0;
                g[(i * d + j) * d + k] = tr_a.re / 4.0;
            }
        }
    }
    Ok(StructureConstants { n, d, f, g })
}

/// Result of checking |x| against the pure-state bound sqrt(2(N-1)/N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthCheck {
    pub length: f64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Compares the coordinate length against the largest value any state can
/// attain. Equality (pure states) counts as within the bound.
pub fn bloch_length_check(x: &BlochVector) -> LengthCheck {
    let n = x.n() as f64;
    let bound = (2.0 * (n - 1.0) / n).sqrt();
    let length = x.length();
    LengthCheck {
        length,
        bound,
        within_bound: length <= bound + TOL_ALGEBRA,
    }
}

/// Completes a coordinate vector with the final diagonal coordinate chosen so
/// the full vector has pure-state length sqrt(2(N-1)/N).
///
/// Takes the first N^2 - 2 coordinates and appends
/// `sqrt(2(N-1)/N - sum_i x_i^2)`. Errors if the partial length already
/// exceeds the pure-state bound. The completed vector is *not* guaranteed to
/// be a physical state; feed it to [`bloch_to_density`] to find out.
pub fn pure_completion(partial: &[f64]) -> Result<BlochVector> {
    let n = level_count_for(partial.len() + 1)? as f64;
    let bound_sq = 2.0 * (n - 1.0) / n;
    let sum_sq: f64 = partial.iter().map(|c| c * c).sum();
    if sum_sq > bound_sq + TOL_ALGEBRA {
        return Err(Error::InvalidConfig(format!(
            "partial coordinates already have squared length {sum_sq:.6}, above the pure bound {bound_sq:.6}"
        )));
    }
    let mut coords = partial.to_vec();
    coords.push((bound_sq - sum_sq).max(0.0).sqrt());
    BlochVector::new(coords)
}

/// Variant completion using the squared bound (2(N-1)/N)^2 instead of the
/// pure-state norm, i.e. x_last = sqrt((2(N-1)/N)^2 - sum_i x_i^2).
///
/// For N = 3 this reproduces initial conditions quoted with a (4/3)^2 radicand.
/// The resulting vector generally violates the pure-state length bound and is
/// useful only as a formal starting point for coordinate flows.
pub fn published_completion(partial: &[f64]) -> Result<BlochVector> {
    let n = level_count_for(partial.len() + 1)? as f64;
    let bound = 2.0 * (n - 1.0) / n;
    let sum_sq: f64 = partial.iter().map(|c| c * c).sum();
    if sum_sq > bound * bound {
        return Err(Error::InvalidConfig(format!(
            "partial coordinates have squared length {sum_sq:.6}, above {:.6}",
            bound * bound
        )));
    }
    let mut coords = partial.to_vec();
    coords.push((bound * bound - sum_sq).sqrt());
    BlochVector::new(coords)
}

/// Haar-like random pure state of an n-level system.
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let mut v = CVector::from_fn(n, |_, _| Complex64::new(normal(rng), normal(rng)));
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    v
}

/// Random full-rank density matrix: a mixture of n random pure states with
/// uniform random weights.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let mut weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut m = CMatrix::zeros(n, n);
    for w in weights {
        let psi = random_pure_state(n, rng);
        m += &psi * psi.adjoint() * Complex64::new(w, 0.0);
    }
    DensityMatrix::from_matrix_unchecked(m)
}

// Box-Muller; avoids pulling in a distributions crate for one helper.
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
