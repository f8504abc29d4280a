//! End-to-end acceptance run. One line per criterion, every tolerance
//! pinned in this file. The expected outcome of each criterion is asserted
//! at the bottom, so a behavior change fails the build even where a
//! criterion is already known not to hold (criterion 3, see its detail).
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use num_complex::Complex64;
use qutrit_zeno::flow::divergence::divergence_report;
use qutrit_zeno::flow::integrate::{integrate_phase, integrate_x};
use qutrit_zeno::flow::regime::{classify_regime, localization_metrics, Regime, RegimeParams};
use qutrit_zeno::flow::{
    drift, dynamical_hamiltonian, flow_from_standard, FlowSpec, FlowVariant, PhasePoint,
};
use qutrit_zeno::gates::{build_gate, gate_defect_report, restrict_to_subspace, LogicalSubspace};
use qutrit_zeno::monitor::{
    map_trajectory, MapOptions, MonitorConfig, MonitorMode, QutritFrequencies,
};
use qutrit_zeno::protocols::{
    dense_decode, dense_encode_with, teleport_with, ProtocolVariant, ZChoice,
};
use qutrit_zeno::su_n::{generators, pure_completion, structure_constants, BlochVector, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    number: usize,
    title: &'static str,
    passed: bool,
    detail: String,
}

impl Criterion {
    fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.title,
            self.detail
        )
    }
}

fn frequencies() -> QutritFrequencies {
    QutritFrequencies::new(0.6, 1.0, 1.6).unwrap()
}

fn single_spec(alpha3: f64, dt: f64) -> FlowSpec {
    let cfg = MonitorConfig::new(0.0, alpha3, dt).unwrap();
    FlowSpec::new(
        frequencies(),
        cfg,
        MonitorMode::Single,
        FlowVariant::AsPublished,
    )
    .unwrap()
}

fn double_spec(alpha2: f64, alpha3: f64) -> FlowSpec {
    let cfg = MonitorConfig::new(alpha2, alpha3, 1e-3).unwrap();
    FlowSpec::new(
        frequencies(),
        cfg,
        MonitorMode::Double,
        FlowVariant::AsPublished,
    )
    .unwrap()
}

/// Default start: the 0.3/0.5 pattern completed onto the pure shell.
fn start_populations() -> [f64; 8] {
    let y = pure_completion(&[0.3, 0.5, 0.3, 0.5, 0.3, 0.5, 0.3]).unwrap();
    let mut out = [0.0; 8];
    out.copy_from_slice(y.coords());
    out
}

/// Phase-portrait start: 0.3/0.4 pattern, same completion.
fn start_portrait() -> [f64; 8] {
    let y = pure_completion(&[0.3, 0.4, 0.3, 0.4, 0.3, 0.4, 0.3]).unwrap();
    let mut out = [0.0; 8];
    out.copy_from_slice(y.coords());
    out
}

// -------------------------------------------------------------------------
// 1. generator algebra for N = 2, 3, 4; Pauli matrices exactly at N = 2

fn criterion_1() -> Criterion {
    const TOL: f64 = 1e-12;
    let clock = Instant::now();
    let mut max_invariant = 0.0_f64;
    let mut max_reconstruction = 0.0_f64;

    for n in 2..=4usize {
        let gens = generators(n).unwrap();
        let sc = structure_constants(n).unwrap();
        let dim = n * n - 1;
        assert_eq!(gens.len(), dim);

        for (i, gi) in gens.iter().enumerate() {
            let herm = (gi - gi.adjoint())
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            max_invariant = max_invariant.max(herm).max(gi.trace().norm());
            for (j, gj) in gens.iter().enumerate() {
                let want = if i == j { 2.0 } else { 0.0 };
                max_invariant = max_invariant.max(((gi * gj).trace().re - want).abs());

                // [g_i, g_j] = 2i sum_k f_ijk g_k
                let comm = gi * gj - gj * gi;
                let mut recon = CMatrix::zeros(n, n);
                for (k, gk) in gens.iter().enumerate() {
                    recon += gk * Complex64::new(0.0, 2.0 * sc.f(i, j, k));
                }
                let gap = (&comm - &recon)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                max_reconstruction = max_reconstruction.max(gap);

                // {g_i, g_j} = (4/n) delta_ij I + 2 sum_k g_ijk g_k
                let anti = gi * gj + gj * gi;
                let mut recon = CMatrix::identity(n, n)
                    * Complex64::new(if i == j { 4.0 / n as f64 } else { 0.0 }, 0.0);
                for (k, gk) in gens.iter().enumerate() {
                    recon += gk * Complex64::new(2.0 * sc.g(i, j, k), 0.0);
                }
                let gap = (&anti - &recon)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                max_reconstruction = max_reconstruction.max(gap);
            }
        }
    }

    // N = 2 must be the Pauli triple bitwise, no tolerance; rows of `pauli`
    // list each matrix by (row, column)
    let pauli: [[[(f64, f64); 2]; 2]; 3] = [
        [[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]],
        [[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]],
        [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]],
    ];
    let gens2 = generators(2).unwrap();
    let pauli_exact = gens2.iter().zip(pauli.iter()).all(|(g, want)| {
        (0..2).all(|r| {
            (0..2).all(|c| {
                let (re, im) = want[r][c];
                g[(r, c)].re == re && g[(r, c)].im == im
            })
        })
    });

    let elapsed = clock.elapsed().as_secs_f64();
    let passed = max_invariant <= TOL && max_reconstruction <= TOL && pauli_exact && elapsed < 1.0;
    Criterion {
        number: 1,
        title: "generator algebra and structure constants",
        passed,
        detail: format!(
            "invariants {max_invariant:.1e}, reconstructions {max_reconstruction:.1e}, \
             Pauli exact {pauli_exact}, {elapsed:.2}s"
        ),
    }
}

// -------------------------------------------------------------------------
// 2. the measurement map tracks the drift flow at first order in the step

/// Sup-norm gap between the map trajectory at step `dt` and a fine RK4
/// reference, both in flow coordinates.
fn map_gap(alpha3: f64, dt: f64, total: f64) -> f64 {
    const TRUTH_H: f64 = 1e-4;
    let x0 = start_populations();
    let truth = integrate_x(
        &flow_from_standard(&x0),
        &single_spec(alpha3, dt),
        total,
        TRUTH_H,
    )
    .unwrap();
    assert!(truth.blow_up.is_none());

    let cfg = MonitorConfig::new(0.0, alpha3, dt).unwrap();
    let opts = MapOptions {
        allow_nonpositive_initial: true,
    };
    let run = map_trajectory(
        &BlochVector::new(x0.to_vec()).unwrap(),
        &frequencies(),
        &cfg,
        MonitorMode::Single,
        total,
        &opts,
    )
    .unwrap();

    let stride = (dt / TRUTH_H).round() as usize;
    let mut sup = 0.0_f64;
    for (k, row) in run.coordinate_rows().iter().enumerate() {
        let ode = &truth.xs[k * stride];
        let map = flow_from_standard(row);
        for i in 0..8 {
            sup = sup.max((ode[i] - map[i]).abs());
        }
    }
    sup
}

fn criterion_2() -> Criterion {
    const SUP_TOL: f64 = 0.02;
    const SHRINK: f64 = 1.8;
    let clock = Instant::now();

    let coarse = map_gap(0.2, 1e-3, 10.0);
    let fine = map_gap(0.2, 5e-4, 10.0);
    let ratio = coarse / fine;

    let elapsed = clock.elapsed().as_secs_f64();
    let passed = coarse <= SUP_TOL && ratio >= SHRINK && elapsed < 10.0;
    Criterion {
        number: 2,
        title: "map tracks the flow, first order in the step",
        passed,
        detail: format!(
            "sup gap {coarse:.3e} at dt=1e-3 (tol {SUP_TOL}), shrink x{ratio:.3} \
             on halving (need >= {SHRINK}), {elapsed:.2}s"
        ),
    }
}

// -------------------------------------------------------------------------
// 3. monitoring regimes across coupling strength, single and double

fn regime_of(spec: &FlowSpec, total: f64) -> (Regime, Option<f64>) {
    let run = integrate_x(&flow_from_standard(&start_populations()), spec, total, 1e-3).unwrap();
    assert!(run.blow_up.is_none());
    let report = classify_regime(&run.times, &run.xs, &RegimeParams::default()).unwrap();
    (report.regime, report.freeze_time)
}

fn rank(r: Regime) -> u8 {
    match r {
        Regime::Oscillatory => 0,
        Regime::Intermediate => 1,
        Regime::Zeno => 2,
    }
}

/// Returns the criterion plus the measured strong-coupling freeze time so
/// the final assertions can pin it.
fn criterion_3() -> (Criterion, f64) {
    let (weak, _) = regime_of(&single_spec(0.2, 1e-3), 20.0);
    let (mid, mid_freeze) = regime_of(&single_spec(0.7, 1e-3), 20.0);
    let (strong, strong_freeze) = regime_of(&single_spec(1.7, 1e-3), 20.0);
    let strong_freeze = strong_freeze.unwrap_or(f64::NAN);

    let weak_ok = weak == Regime::Oscillatory;
    let mid_ok =
        mid == Regime::Intermediate || (mid == Regime::Zeno && mid_freeze.is_some_and(|t| t > 4.0));
    let strong_zeno = strong == Regime::Zeno;
    let strong_window = strong_zeno && (3.0..=10.0).contains(&strong_freeze);

    let doubles: Vec<(Regime, Option<f64>)> = [0.1, 0.7, 1.7]
        .iter()
        .map(|&a| regime_of(&double_spec(a, a), 20.0))
        .collect();
    let double_ordered = doubles.windows(2).all(|w| rank(w[0].0) <= rank(w[1].0))
        && doubles.last().unwrap().0 == Regime::Zeno;

    let passed = weak_ok && mid_ok && strong_window && double_ordered;
    let c = Criterion {
        number: 3,
        title: "regimes order with the monitoring rate",
        passed,
        detail: format!(
            "single 0.2 -> {weak}, 0.7 -> {mid}, 1.7 -> {strong} freeze {strong_freeze:.3} \
             (window [3, 10] misses: classification puts the freeze just past it); \
             double {} -> {} -> {} freeze {:.3}",
            doubles[0].0,
            doubles[1].0,
            doubles[2].0,
            doubles[2].1.unwrap_or(f64::NAN),
        ),
    };
    (c, strong_freeze)
}

// -------------------------------------------------------------------------
// 4. strong monitoring localizes coordinates while momenta grow

fn criterion_4() -> Criterion {
    const VAR_TOL: f64 = 1e-4;
    const GROWTH: f64 = 10.0;
    let x0 = flow_from_standard(&start_portrait());
    let p0 = [1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5];
    let pt0 = PhasePoint::new(x0, p0).unwrap();
    let run = integrate_phase(&pt0, &single_spec(1.7, 1e-3), 20.0, 1e-3).unwrap();
    assert!(run.blow_up.is_none());
    let m = localization_metrics(&run, &RegimeParams::default()).unwrap();

    let worst_var = m.x_trailing_variance.iter().copied().fold(0.0, f64::max);
    let passed = worst_var < VAR_TOL && m.growth >= GROWTH;
    Criterion {
        number: 4,
        title: "coordinates freeze, momenta delocalize",
        passed,
        detail: format!(
            "freeze {:.3}, worst x variance {worst_var:.2e} (tol {VAR_TOL}), \
             |p| growth x{:.3e} (need >= {GROWTH})",
            m.freeze_time, m.growth
        ),
    }
}

// -------------------------------------------------------------------------
// 5. corrected momentum field is -dH/dx; divergences sit on known lines

/// Independent Richardson gradient of the dynamical Hamiltonian, step
/// distinct from anything the library uses internally.
fn hamiltonian_gradient(pt: &PhasePoint, spec: &FlowSpec) -> [f64; 8] {
    let central = |i: usize, h: f64| {
        let mut fwd = *pt;
        let mut bwd = *pt;
        fwd.x[i] += h;
        bwd.x[i] -= h;
        (dynamical_hamiltonian(&fwd, spec) - dynamical_hamiltonian(&bwd, spec)) / (2.0 * h)
    };
    let mut out = [0.0; 8];
    for (i, slot) in out.iter_mut().enumerate() {
        let h = 4e-6;
        *slot = -(4.0 * central(i, h / 2.0) - central(i, h)) / 3.0;
    }
    out
}

fn criterion_5() -> Criterion {
    const GRAD_TOL: f64 = 1e-6;
    let w = frequencies();
    let cfg_s = MonitorConfig::new(0.0, 1.7, 1e-3).unwrap();
    let cfg_d = MonitorConfig::new(1.9, 1.7, 1e-3).unwrap();
    let specs = [
        FlowSpec::new(w, cfg_s, MonitorMode::Single, FlowVariant::OracleCorrected).unwrap(),
        FlowSpec::new(w, cfg_d, MonitorMode::Double, FlowVariant::OracleCorrected).unwrap(),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut grad_gap = 0.0_f64;
    for spec in &specs {
        for _ in 0..100 {
            let mut x = [0.0; 8];
            let mut p = [0.0; 8];
            for v in &mut x {
                *v = rng.random_range(-0.4..0.4);
            }
            for v in &mut p {
                *v = rng.random_range(-2.0..2.0);
            }
            let pt = PhasePoint { x, p };
            let field = qutrit_zeno::flow::momentum_flow(spec, &pt);
            let grad = hamiltonian_gradient(&pt, spec);
            for i in 0..8 {
                grad_gap = grad_gap.max((field[i] - grad[i]).abs());
            }
        }
    }

    // divergence reports: known line sets, and byte-stable re-runs
    let pair = |mode, a2, a3| {
        let cfg = MonitorConfig::new(a2, a3, 1e-3).unwrap();
        (
            FlowSpec::new(w, cfg, mode, FlowVariant::AsPublished).unwrap(),
            FlowSpec::new(w, cfg, mode, FlowVariant::OracleCorrected).unwrap(),
        )
    };
    let (sp, sc) = pair(MonitorMode::Single, 0.0, 0.7);
    let (dp, dc) = pair(MonitorMode::Double, 0.3, 0.7);
    let single = divergence_report(&sp, &sc, 1000, 7).unwrap();
    let double = divergence_report(&dp, &dc, 1000, 7).unwrap();
    let lines_ok = single.drift.divergent_lines.is_empty()
        && single.momentum.divergent_lines == [4, 5, 7]
        && double.drift.divergent_lines == [3, 8]
        && double.momentum.divergent_lines == [3, 8];

    let again = divergence_report(&sp, &sc, 1000, 7).unwrap();
    let stable = serde_json::to_string(&single).unwrap() == serde_json::to_string(&again).unwrap();

    let passed = grad_gap <= GRAD_TOL && lines_ok && stable;
    Criterion {
        number: 5,
        title: "corrected momenta are the Hamiltonian gradient",
        passed,
        detail: format!(
            "gradient gap {grad_gap:.2e} (tol {GRAD_TOL:.0e}) over 100 points x 2 modes, \
             divergent lines single p:{:?} / double x:{:?} p:{:?}, bit-stable {stable}",
            single.momentum.divergent_lines,
            double.drift.divergent_lines,
            double.momentum.divergent_lines,
        ),
    }
}

// -------------------------------------------------------------------------
// 6. with the couplings off, the eighth line is the logistic rate

fn criterion_6() -> Criterion {
    const TOL: f64 = 1e-10;
    let sqrt3 = 3.0_f64.sqrt();
    // flow-coordinate x8 range with both affected populations in [0, 1]
    let (lo, hi) = (-1.0 / sqrt3, 1.0 / (2.0 * sqrt3));

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let alpha3 = rng.random_range(0.05..2.0);
        let cfg = MonitorConfig::new(0.0, alpha3, 1e-3).unwrap();
        let spec = FlowSpec::new(
            QutritFrequencies::ZERO,
            cfg,
            MonitorMode::Single,
            FlowVariant::AsPublished,
        )
        .unwrap();
        let mut x = [0.0; 8];
        for v in &mut x {
            *v = rng.random_range(-0.3..0.3);
        }
        x[7] = rng.random_range(lo..hi);

        let got = drift(&spec, &x)[7];
        let want = (sqrt3 / 2.0) * (2.0 * alpha3 / 9.0) * (1.0 - sqrt3 * x[7] - 6.0 * x[7] * x[7]);
        worst = worst.max((got - want).abs());
    }

    let passed = worst <= TOL;
    Criterion {
        number: 6,
        title: "zero-frequency population line is logistic",
        passed,
        detail: format!("worst gap {worst:.2e} over 1000 states (tol {TOL:.0e})"),
    }
}

// -------------------------------------------------------------------------
// 7. gate truth tables and the logical-subspace algebra

fn criterion_7() -> Criterion {
    const TOL: f64 = 1e-12;

    // controlled-not columns: levels 1 and 2 hold the ancilla, level 3 flips
    let cnot = build_gate("cNOT").unwrap();
    let m = cnot.matrix();
    let mut truth_exact = true;
    for level in 0..3usize {
        for bit in 0..2usize {
            let col = level * 2 + bit;
            let expect_row = if level == 2 { 4 + (1 - bit) } else { col };
            for row in 0..6 {
                let want = if row == expect_row { 1.0 } else { 0.0 };
                let v = m[(row, col)];
                if v.re != want || v.im != 0.0 {
                    truth_exact = false;
                }
            }
        }
    }

    let sub = LogicalSubspace::qutrit();
    let rx = restrict_to_subspace(&build_gate("X").unwrap(), &sub).unwrap();
    let rz = restrict_to_subspace(&build_gate("Z_corrected").unwrap(), &sub).unwrap();
    let rh = restrict_to_subspace(&build_gate("H").unwrap(), &sub).unwrap();
    let eye = qutrit_zeno::nalgebra::DMatrix::<Complex64>::identity(2, 2);
    let gap = |m: &qutrit_zeno::nalgebra::DMatrix<Complex64>,
               t: &qutrit_zeno::nalgebra::DMatrix<Complex64>| {
        (m - t).iter().map(|c| c.norm()).fold(0.0, f64::max)
    };
    let algebra = gap(&(&rx * &rx), &eye)
        .max(gap(&(&rz * &rz), &eye))
        .max(gap(&(&rh * &rh), &eye))
        .max(gap(&(&rh * &rx * &rh), &rz));

    // the as-printed phase gate shrinks the logical ground direction
    let z_report = gate_defect_report(&build_gate("Z").unwrap());
    let shrink = z_report.subspace_singular_gaps.unwrap()[0];
    let shrink_gap = (shrink - (std::f64::consts::FRAC_1_SQRT_2 - 1.0)).abs();

    let passed = truth_exact && algebra <= TOL && shrink_gap <= TOL;
    Criterion {
        number: 7,
        title: "gate truth tables and logical algebra",
        passed,
        detail: format!(
            "cNOT exact {truth_exact}, involutions and HXH=Z within {algebra:.1e}, \
             printed-Z shrink off by {shrink_gap:.1e} (tol {TOL:.0e})"
        ),
    }
}

// -------------------------------------------------------------------------
// 8. dense coding and teleportation round trips

fn criterion_8() -> Criterion {
    const TOL: f64 = 1e-10;
    let clock = Instant::now();
    let variants = [ProtocolVariant::Qubit, ProtocolVariant::Qutrit];

    let mut dense_ok = true;
    for variant in variants {
        for value in 0..4u8 {
            let state = dense_encode_with(value, variant, ZChoice::Corrected).unwrap();
            let decoded = dense_decode(&state, variant).unwrap();
            dense_ok &= decoded.message.value == value
                && (decoded.probability - 1.0).abs() <= TOL
                && decoded.leakage <= TOL;
        }
    }

    let mut min_fidelity = f64::INFINITY;
    let mut max_leakage = 0.0_f64;
    for variant in variants {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (a, b) = loop {
                let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
                if norm > 1e-3 {
                    break (a / norm, b / norm);
                }
            };
            let record = teleport_with(a, b, variant, ZChoice::Corrected).unwrap();
            min_fidelity = min_fidelity.min(record.min_fidelity);
            max_leakage = max_leakage.max(record.leakage);
        }
    }

    let elapsed = clock.elapsed().as_secs_f64();
    let passed = dense_ok && min_fidelity >= 1.0 - TOL && max_leakage <= TOL && elapsed < 5.0;
    Criterion {
        number: 8,
        title: "protocol round trips",
        passed,
        detail: format!(
            "dense 8/8 exact {dense_ok}, teleport min fidelity {min_fidelity:.12} over \
             100 states x 2 variants, leakage {max_leakage:.1e}, {elapsed:.2}s"
        ),
    }
}

// -------------------------------------------------------------------------
// 9. repeated preset runs are byte-identical

fn criterion_9() -> Criterion {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_qzeno"))
            .args(["simulate-flow", "--preset", "fig2c", "--output"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(status.status.success(), "preset run failed: {status:?}");
        std::fs::read(path).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");

    let passed = !first.is_empty() && first == second;
    Criterion {
        number: 9,
        title: "deterministic trajectory output",
        passed,
        detail: format!("two runs, {} bytes each, identical {passed}", first.len()),
    }
}

// -------------------------------------------------------------------------

#[test]
fn all_acceptance_criteria() {
    let (c3, strong_freeze) = criterion_3();
    let criteria = vec![
        criterion_1(),
        criterion_2(),
        c3,
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];

    println!();
    for c in &criteria {
        println!("{}", c.line());
    }
    let passing = criteria.iter().filter(|c| c.passed).count();
    println!("acceptance: {passing}/{} criteria pass", criteria.len());

    // Criterion 3 is pinned as failing on exactly one sub-check: the
    // strong-coupling single-probe run does freeze, but the default
    // classification puts the freeze at 10.48, just past the required
    // [3, 10] window. Everything else about the criterion holds. If the
    // measured freeze moves, this pin fails and the analysis needs a
    // fresh look.
    for c in &criteria {
        match c.number {
            3 => {
                assert!(
                    !c.passed,
                    "criterion 3 now passes; drop the pinned failure: {}",
                    c.line()
                );
                assert!(
                    (10.3..10.7).contains(&strong_freeze),
                    "pinned freeze time moved: got {strong_freeze}"
                );
            }
            _ => assert!(c.passed, "{}", c.line()),
        }
    }
}
