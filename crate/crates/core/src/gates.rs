//! The three-level logical operator set: level-pair flips, the composite
//! X/Y/Z/H acting on the logical pair (u = (|1>+|2>)/sqrt(2), |3>), the
//! qutrit-controlled cNOT, and the two-control Toffoli block operator.
//!
//! Several of these operators are not unitary on the full qutrit space; the
//! meaningful object is their restriction to the two-dimensional logical
//! subspace. Everything here works with full matrices so leakage out of that
//! subspace is measured by [`gate_defect_report`], never assumed away. The
//! printed phase gate disagrees with its own stated action on u; both that
//! verbatim form (`Z`) and the repaired diagonal (`Z_corrected`) are
//! available, and downstream protocol code defaults to the corrected one.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::su_n::{CMatrix, CVector};
use crate::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// |i> in an n-dimensional space, levels counted from 1.
fn ket(n: usize, level: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[level - 1] = re(1.0);
    v
}

fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// A named operator on the qutrit or one of its product spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    pub name: &'static str,
    m: CMatrix,
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Row-major plain-text dump, entries as "a+bi" with 15 significant
    /// digits, for golden-file comparison.
    pub fn to_plain_text(&self) -> String {
        let n = self.dim();
        let mut out = format!("{} {}x{}\n", self.name, n, n);
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| fmt_complex(self.m[(i, j)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{:.14e}", v);
    let (mantissa, exp) = s.split_once('e').expect("{:e} always carries an exponent");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exp}")
}

fn fmt_complex(c: Complex64) -> String {
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", fmt_real(c.re), sign, fmt_real(im.abs()))
}

/// Flip between levels 1 and 3.
pub fn x13() -> GateMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 2)] = re(1.0);
    m[(2, 0)] = re(1.0);
    GateMatrix { name: "X13", m }
}

/// Flip between levels 2 and 3.
pub fn x23() -> GateMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(1, 2)] = re(1.0);
    m[(2, 1)] = re(1.0);
    GateMatrix { name: "X23", m }
}

/// The logical bit flip (X13 + X23)/sqrt(2): u <-> |3>.
pub fn x() -> GateMatrix {
    let m = (x13().m + x23().m) * re(FRAC_1_SQRT_2);
    GateMatrix { name: "X", m }
}

/// The logical Y: u -> -|3>, |3> -> u.
pub fn y() -> GateMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 2)] = re(1.0);
    m[(1, 2)] = re(1.0);
    m[(2, 0)] = re(-1.0);
    m[(2, 1)] = re(-1.0);
    GateMatrix {
        name: "Y",
        m: m * re(FRAC_1_SQRT_2),
    }
}

/// The phase gate exactly as printed: (1/sqrt(2)) diag(1, 1, -sqrt(2)).
/// Its action on u is u/sqrt(2), not the stated u; see [`z_corrected`].
pub fn z() -> GateMatrix {
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        re(FRAC_1_SQRT_2),
        re(FRAC_1_SQRT_2),
        re(-1.0),
    ]));
    GateMatrix { name: "Z", m }
}

/// The diagonal the stated action (Zu = u, Z|3> = -|3>) actually requires.
pub fn z_corrected() -> GateMatrix {
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        re(1.0),
        re(1.0),
        re(-1.0),
    ]));
    GateMatrix {
        name: "Z_corrected",
        m,
    }
}

/// The logical Hadamard: u -> (u+|3>)/sqrt(2), |3> -> (u-|3>)/sqrt(2).
pub fn hadamard() -> GateMatrix {
    let c = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    let s = std::f64::consts::SQRT_2;
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            re(1.0),
            re(1.0),
            re(s),
            re(1.0),
            re(1.0),
            re(s),
            re(s),
            re(s),
            re(-2.0),
        ],
    ) * re(c);
    GateMatrix { name: "H", m }
}

/// Qutrit-controlled flip of a two-level ancilla: levels 1 and 2 leave the
/// ancilla alone, level 3 flips it. A 6x6 permutation on the product basis
/// |1,0>, |1,1>, |2,0>, |2,1>, |3,0>, |3,1>.
pub fn cnot() -> GateMatrix {
    let i2 = CMatrix::identity(2, 2);
    let sx = pauli_x2();
    let keep = projector(&ket(3, 1)) + projector(&ket(3, 2));
    let flip = projector(&ket(3, 3));
    let m = keep.kronecker(&i2) + flip.kronecker(&sx);
    GateMatrix { name: "cNOT", m }
}

fn pauli_x2() -> CMatrix {
    let mut sx = CMatrix::zeros(2, 2);
    sx[(0, 1)] = re(1.0);
    sx[(1, 0)] = re(1.0);
    sx
}

/// The control pairs the Toffoli block operator covers, in printed order,
/// with their induced action on the two-qubit target.
const TOFFOLI_BRANCHES: [((usize, usize), (bool, bool)); 4] = [
    ((1, 1), (false, false)),
    ((2, 1), (true, false)),
    ((1, 3), (false, true)),
    ((2, 3), (true, true)),
];

/// The two-qutrit-controlled operator on the 3 x 3 x 4 space (two control
/// qutrits, one two-qubit target register). Only four control pairs appear
/// in its projector sum; every other control subspace is annihilated, so the
/// operator is a partial isometry, not a unitary. [`gate_defect_report`]
/// quantifies that.
pub fn toffoli() -> GateMatrix {
    let i2 = CMatrix::identity(2, 2);
    let sx = pauli_x2();
    let mut m = CMatrix::zeros(36, 36);
    for ((c1, c2), (flip1, flip2)) in TOFFOLI_BRANCHES {
        let t1 = if flip1 { &sx } else { &i2 };
        let t2 = if flip2 { &sx } else { &i2 };
        let target = t1.kronecker(t2);
        let control = projector(&ket(3, c1)).kronecker(&projector(&ket(3, c2)));
        m += control.kronecker(&target);
    }
    GateMatrix { name: "Toffoli", m }
}

/// Builds any gate of the set by name.
pub fn build_gate(name: &str) -> Result<GateMatrix> {
    match name {
        "X13" => Ok(x13()),
        "X23" => Ok(x23()),
        "X" => Ok(x()),
        "Y" => Ok(y()),
        "Z" => Ok(z()),
        "Z_corrected" => Ok(z_corrected()),
        "H" => Ok(hadamard()),
        "cNOT" => Ok(cnot()),
        "Toffoli" => Ok(toffoli()),
        other => Err(Error::UnknownGate(other.into())),
    }
}

/// Every name [`build_gate`] accepts, in a stable order.
pub const GATE_NAMES: [&str; 9] = [
    "X13",
    "X23",
    "X",
    "Y",
    "Z",
    "Z_corrected",
    "H",
    "cNOT",
    "Toffoli",
];

/// The ordered two-dimensional logical basis inside the qutrit.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalSubspace {
    b0: CVector,
    b1: CVector,
}

impl LogicalSubspace {
    /// The canonical pair: u = (|1>+|2>)/sqrt(2) and |3>.
    pub fn qutrit() -> Self {
        let mut u = CVector::zeros(3);
        u[0] = re(FRAC_1_SQRT_2);
        u[1] = re(FRAC_1_SQRT_2);
        Self {
            b0: u,
            b1: ket(3, 3),
        }
    }

    /// Any orthonormal pair of 3-vectors, first vector playing the ground
    /// role.
    pub fn new(b0: CVector, b1: CVector) -> Result<Self> {
        if b0.len() != 3 || b1.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: b0.len().max(b1.len()),
            });
        }
        let tol = 1e-12;
        if (b0.norm() - 1.0).abs() > tol || (b1.norm() - 1.0).abs() > tol {
            return Err(Error::NotNormalized(b0.norm().min(b1.norm())));
        }
        let overlap = b0.dotc(&b1).norm();
        if overlap > tol {
            return Err(Error::InvalidConfig(format!(
                "logical basis vectors overlap by {overlap:e}"
            )));
        }
        Ok(Self { b0, b1 })
    }

    pub fn ground(&self) -> &CVector {
        &self.b0
    }

    pub fn excited(&self) -> &CVector {
        &self.b1
    }
}

impl Default for LogicalSubspace {
    fn default() -> Self {
        Self::qutrit()
    }
}

/// The 2x2 matrix [<b_i| g |b_j>] over the subspace's ordered basis.
pub fn restrict_to_subspace(g: &GateMatrix, s: &LogicalSubspace) -> Result<DMatrix<Complex64>> {
    if g.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: g.dim(),
        });
    }
    let basis = [&s.b0, &s.b1];
    Ok(DMatrix::from_fn(2, 2, |i, j| {
        basis[i].dotc(&(g.matrix() * basis[j]))
    }))
}

/// How far a gate is from unitarity, on the full space and (for qutrit
/// gates) on the logical subspace; for the Toffoli, which control states its
/// projector sum misses.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GateDefectReport {
    pub name: String,
    pub dim: usize,
    /// max_ij |(g'g - I)_ij| over the gate's own space.
    pub full_space_defect: f64,
    /// Same quantity for the 2x2 restriction; qutrit gates only.
    pub subspace_defect: Option<f64>,
    /// Singular values of the restriction minus 1, ascending; zero for a
    /// unitary logical action. The printed phase gate shows 1/sqrt(2) - 1
    /// here, the size of its shrink along the logical ground direction.
    pub subspace_singular_gaps: Option<[f64; 2]>,
    /// Control pairs (levels, 1-based) the Toffoli annihilates.
    pub uncovered_controls: Vec<(usize, usize)>,
    /// max-norm gap between the Toffoli's summed control projectors and the
    /// identity on the 9-dimensional control space.
    pub control_sum_defect: Option<f64>,
}

fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    let gap = gram - CMatrix::identity(n, n);
    gap.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn gate_defect_report(g: &GateMatrix) -> GateDefectReport {
    let restriction = (g.dim() == 3).then(|| {
        restrict_to_subspace(g, &LogicalSubspace::qutrit()).expect("dimension checked above")
    });
    let subspace_defect = restriction.as_ref().map(|r| {
        let gap = r.adjoint() * r - DMatrix::identity(2, 2);
        gap.iter().map(|c| c.norm()).fold(0.0, f64::max)
    });
    let subspace_singular_gaps = restriction.as_ref().map(|r| {
        // singular values via the Gram matrix; it is Hermitian by construction
        let gram = r.adjoint() * r;
        let eigs = gram.symmetric_eigen().eigenvalues;
        let mut sv: Vec<f64> = eigs.iter().map(|&l| l.max(0.0).sqrt()).collect();
        sv.sort_by(|a, b| a.total_cmp(b));
        [sv[0] - 1.0, sv[1] - 1.0]
    });

    let (uncovered_controls, control_sum_defect) = if g.name == "Toffoli" {
        let covered: Vec<(usize, usize)> = TOFFOLI_BRANCHES.iter().map(|(c, _)| *c).collect();
        let mut uncovered = Vec::new();
        for c1 in 1..=3 {
            for c2 in 1..=3 {
                if !covered.contains(&(c1, c2)) {
                    uncovered.push((c1, c2));
                }
            }
        }
        let mut sum = CMatrix::zeros(9, 9);
        for (c1, c2) in covered {
            sum += projector(&ket(3, c1)).kronecker(&projector(&ket(3, c2)));
        }
        let gap = sum - CMatrix::identity(9, 9);
        let defect = gap.iter().map(|c| c.norm()).fold(0.0, f64::max);
        (uncovered, Some(defect))
    } else {
        (Vec::new(), None)
    };

    GateDefectReport {
        name: g.name.into(),
        dim: g.dim(),
        full_space_defect: unitarity_defect(g.matrix()),
        subspace_defect,
        subspace_singular_gaps,
        uncovered_controls,
        control_sum_defect,
    }
}

/// One control pair's row in the Toffoli behavior table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ToffoliRow {
    /// Control levels, 1-based.
    pub control: (usize, usize),
    pub covered: bool,
    /// Induced target action, e.g. "X(x)I"; None when uncovered.
    pub target_action: Option<String>,
    /// Target register bits after acting on |00>.
    pub target_bits: Option<(u8, u8)>,
    /// 0 unless both controls are in their flip states.
    pub outcome: Option<u8>,
}

/// Enumerates all nine control pairs with the action and outcome encoding of
/// each covered one.
pub fn toffoli_truth_table() -> Vec<ToffoliRow> {
    let mut rows = Vec::with_capacity(9);
    for c1 in 1..=3 {
        for c2 in 1..=3 {
            let branch = TOFFOLI_BRANCHES.iter().find(|(c, _)| *c == (c1, c2));
            let row = match branch {
                Some((_, (f1, f2))) => {
                    let label = |f: bool| if f { "X" } else { "I" };
                    let bits = (u8::from(*f1), u8::from(*f2));
                    ToffoliRow {
                        control: (c1, c2),
                        covered: true,
                        target_action: Some(format!("{}(x){}", label(*f1), label(*f2))),
                        target_bits: Some(bits),
                        outcome: Some(bits.0 & bits.1),
                    }
                }
                None => ToffoliRow {
                    control: (c1, c2),
                    covered: false,
                    target_action: None,
                    target_bits: None,
                    outcome: None,
                },
            };
            rows.push(row);
        }
    }
    rows
}
