//! The most-likely-path vector fields, transcribed term by term from their
//! published form.
//!
//! Everything here is a plain polynomial in the coordinates; no validation,
//! no allocation. The printed displays carry a handful of suspect terms
//! (wrong index, wrong rate, a questionable constant); they are reproduced
//! verbatim anyway, because quantifying those defects against independent
//! oracles is the point of this crate. See [`crate::flow::divergence`].
//!
//! Coordinate convention: these equations live in "flow coordinates", where
//! the eighth component is half the standard Bloch component (x8 = y8/2,
//! x1..x7 unchanged). Converters sit in the parent module. In this scale the
//! level occupations read rho22 = 1/3 - x3/2 + x8/sqrt(3) and
//! rho33 = 1/3 - 2 x8/sqrt(3).

use crate::flow::PhasePoint;
use crate::monitor::QutritFrequencies;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Single-probe coordinate drift, all eight lines verbatim.
pub fn drift_single(x: &[f64; 8], w: &QutritFrequencies, alpha3: f64) -> [f64; 8] {
    let [x1, x2, x3, x4, x5, x6, x7, x8] = *x;
    let (w12, w23, w13) = (w.w12, w.w23, w.w13);
    let a3 = alpha3;
    let grow = 1.0 - 2.0 * SQRT3 * x8; // shared factor on the unwatched block
    let shrink = 1.0 + 4.0 * SQRT3 * x8;
    [
        w23 * x5 + w13 * x7 + a3 / 3.0 * x1 * grow,
        -2.0 * w12 * x3 - w23 * x4 + w13 * x6 + a3 / 3.0 * x2 * grow,
        2.0 * w12 * x2 + w13 * x5 - w23 * x7 + a3 / 3.0 * x3 * grow,
        w23 * x2 - w12 * x7 - a3 / 6.0 * x4 * shrink,
        -w23 * x1 + w12 * x6 - w13 * (x3 + 2.0 * SQRT3 * x8) - a3 / 6.0 * x5 * shrink,
        -w13 * x2 - w12 * x5 - a3 / 6.0 * x6 * shrink,
        -w13 * x1 + w12 * x4 + w23 * (x3 - 2.0 * SQRT3 * x8) - a3 / 6.0 * x7 * shrink,
        SQRT3 / 2.0
            * (w13 * x5
                + w23 * x7
                + 2.0 / 9.0 * a3 * (1.0 - SQRT3 * x8 * (1.0 + 2.0 * SQRT3 * x8))),
    ]
}

/// Single-probe backaction functional.
pub fn backaction_single(x: &[f64; 8], alpha3: f64) -> f64 {
    -alpha3 / 3.0 * x[7] * (1.0 - 2.0 * SQRT3 * x[7])
}

/// Single-probe conjugate-momentum flow, verbatim.
///
/// Three lines are known not to be the adjoint of [`drift_single`]: the
/// fourth is missing a -w12 p7 term, the fifth has w23 p1 with the wrong
/// sign, and the seventh ends in -(sqrt(3)/2) w23 p7 where the adjoint wants
/// p8. Kept as printed; the corrected field is the finite-difference variant.
pub fn momentum_flow_single(pt: &PhasePoint, w: &QutritFrequencies, alpha3: f64) -> [f64; 8] {
    let [x1, x2, x3, x4, x5, x6, x7, x8] = pt.x;
    let [p1, p2, p3, p4, p5, p6, p7, p8] = pt.p;
    let (w12, w23, w13) = (w.w12, w.w23, w.w13);
    let a3 = alpha3;
    let grow = 1.0 - 2.0 * SQRT3 * x8;
    let shrink = 1.0 + 4.0 * SQRT3 * x8;
    [
        -a3 / 3.0 * grow * p1 + w23 * p5 + w13 * p7,
        -a3 / 3.0 * grow * p2 - 2.0 * w12 * p3 - w23 * p4 + w13 * p6,
        2.0 * w12 * p2 - a3 / 3.0 * grow * p3 + w13 * p5 - w23 * p7,
        w23 * p2 + a3 / 6.0 * shrink * p4,
        w23 * p1 - w13 * p3 + a3 / 6.0 * shrink * p5 + w12 * p6 - SQRT3 / 2.0 * w13 * p8,
        -w13 * p2 - w12 * p5 + a3 / 6.0 * shrink * p6,
        -w13 * p1 + w23 * p3 + w12 * p4 + a3 / 6.0 * shrink * p7 - SQRT3 / 2.0 * w23 * p7,
        2.0 / SQRT3
            * a3
            * (x1 * p1 + x2 * p2 + x3 * p3 + x4 * p4 + x5 * p5 + x6 * p6 + x7 * p7 + 2.0 * x8 * p8)
            + 2.0 * SQRT3 * (w13 * p5 + w23 * p7)
            + a3 / 3.0 * (p8 + 1.0)
            - 4.0 / SQRT3 * a3 * x8,
    ]
}

/// Two-probe coordinate drift, verbatim.
///
/// Two suspect lines: the third carries 3 w23 x5 where the single-probe
/// analog has the 1-3 frequency, and the eighth's trailing bracket is scaled
/// by alpha3 where the alpha2 = 0 limit demands alpha2.
pub fn drift_double(x: &[f64; 8], w: &QutritFrequencies, alpha2: f64, alpha3: f64) -> [f64; 8] {
    let [x1, x2, x3, x4, x5, x6, x7, x8] = *x;
    let (w12, w23, w13) = (w.w12, w.w23, w.w13);
    let (a2, a3) = (alpha2, alpha3);
    let g = (a2 - 2.0 * a3) * (2.0 * SQRT3 * x8 - 1.0) / 3.0;
    [
        -a2 * x1 * x3 + w23 * x5 + w13 * x7 + g * x1,
        -(2.0 * w12 * x3 + a2 * x2 * x3 + w23 * x4 - w13 * x6 - g * x2),
        (6.0 * w12 * x2 + 2.0 * a3 * x3 + 3.0 * w23 * x5
            - 3.0 * w23 * x7
            - 4.0 * SQRT3 * a3 * x3 * x8
            - a2 * (1.0 + x3) * (-2.0 + 3.0 * x3 - 2.0 * SQRT3 * x8))
            / 3.0,
        (3.0 * w23 * x2 - 3.0 * w12 * x7 + a2 * x4 * (2.0 - 3.0 * x3 + 2.0 * SQRT3 * x8)
            - a3 * x4 * (1.0 + 4.0 * SQRT3 * x8))
            / 3.0,
        (-3.0 * w23 * x1
            + (2.0 * a2 - a3 - 3.0 * a2 * x3) * x5
            + 3.0 * w12 * x6
            + 2.0 * SQRT3 * (a2 - 2.0 * a3) * x5 * x8
            - 3.0 * w13 * (x3 + 2.0 * SQRT3 * x8))
            / 3.0,
        -w13 * x2
            - w12 * x5
            - x6 / 3.0 * (a2 + a3 + 3.0 * a2 * x3 - 2.0 * SQRT3 * a2 * x8 + 4.0 * SQRT3 * a3 * x8),
        -w13 * x1 + w12 * x4 - (a2 + a3 + 3.0 * a2 * x3) * x7 / 3.0
            + 2.0 / SQRT3 * (a2 - 2.0 * a3) * x7 * x8
            + w23 * (x3 - 2.0 * SQRT3 * x8),
        (4.0 * a3 + 9.0 * w13 * x5 + 9.0 * w23 * x7 - 4.0 * a3 * x8 * (SQRT3 + 6.0 * x8)
            + a3 * (-2.0 + 3.0 * x3 + 2.0 * SQRT3 * (1.0 - 3.0 * x3) * x8 + 12.0 * x8 * x8))
            / (6.0 * SQRT3),
    ]
}

/// Two-probe backaction functional.
pub fn backaction_double(x: &[f64; 8], alpha2: f64, alpha3: f64) -> f64 {
    alpha2 * x[2]
        - 2.0 / 3.0 * (alpha2 + alpha3 + SQRT3 * alpha2 * x[7] - 2.0 * SQRT3 * alpha3 * x[7])
}

/// Two-probe conjugate-momentum flow, verbatim, with the published display's
/// left-hand sides read as time derivatives.
///
/// The questionable "-1" constant inside the eighth line's long parenthesis
/// is included here; the divergence report evaluates both readings against
/// the gradient oracle and shows the constant belongs.
pub fn momentum_flow_double(
    pt: &PhasePoint,
    w: &QutritFrequencies,
    alpha2: f64,
    alpha3: f64,
) -> [f64; 8] {
    momentum_flow_double_with_shift(pt, w, alpha2, alpha3, 1.0)
}

/// Same field with the questionable constant exposed: `shift` = 1 keeps the
/// printed "-1", 0 drops it.
pub(crate) fn momentum_flow_double_with_shift(
    pt: &PhasePoint,
    w: &QutritFrequencies,
    alpha2: f64,
    alpha3: f64,
    shift: f64,
) -> [f64; 8] {
    let [x1, x2, x3, x4, x5, x6, x7, x8] = pt.x;
    let [p1, p2, p3, p4, p5, p6, p7, p8] = pt.p;
    let (w12, w23, w13) = (w.w12, w.w23, w.w13);
    let (a2, a3) = (alpha2, alpha3);
    let g = (a2 - 2.0 * a3) * (2.0 * SQRT3 * x8 - 1.0) / 3.0;
    [
        a2 * x3 * p1 - g * p1 + w23 * p5 + w13 * p7,
        a2 * x3 * p2 - g * p2 - 2.0 * w12 * p3 - w23 * p4 + w13 * p6,
        a2 * x1 * p1 + 2.0 * w12 * p2 + a2 * x2 * p2 - 2.0 / 3.0 * a3 * p3
            + 4.0 * SQRT3 / 3.0 * a3 * x8 * p3
            + a2 / 3.0 * (1.0 + 6.0 * x3 - 2.0 * SQRT3 * x8) * p3
            + a2 * x4 * p4
            + a2 * x5 * p5
            + w13 * p5
            + a2 * x6 * p6
            + a2 * x7 * p7
            - w23 * p7
            - a3 / (2.0 * SQRT3) * p8
            + x8 * p8
            - a2,
        w23 * p2 - a2 / 3.0 * (2.0 - 3.0 * x3 + 2.0 * SQRT3 * x8) * p4
            + a3 / 3.0 * (1.0 + 4.0 * SQRT3 * x8) * p4
            - w12 * p7,
        -w23 * p1
            - w23 * p3
            - (2.0 * a2 - a3 - 3.0 * a2 * x3) / 3.0 * p5
            - 2.0 * SQRT3 / 3.0 * (a2 - 2.0 * a3) * x8 * p5
            + w12 * p6
            - SQRT3 / 2.0 * w13 * p8,
        -w13 * p2 - w12 * p5
            + (a2 + a3 + 3.0 * a2 * x3 - 2.0 * SQRT3 * a2 * x8 + 4.0 * SQRT3 * a3 * x8) / 3.0 * p6,
        -w13 * p1 + w23 * p3 + w12 * p4 + (a2 + a3 + 3.0 * a2 * x3) / 3.0 * p7
            - 2.0 / SQRT3 * (a2 - 2.0 * a3) * x8 * p7
            - SQRT3 / 2.0 * w23 * p8,
        -2.0 / SQRT3
            * (a2 - 2.0 * a3)
            * (x1 * p1 + x2 * p2 + x3 * p3 + x4 * p4 + x5 * p5 + x6 * p6 + x7 * p7 - shift)
            - 2.0 / SQRT3 * a2 * p3
            + 2.0 * SQRT3 * (w13 * p5 + w23 * p7)
            + 2.0 / 3.0 * a3 * (1.0 + 2.0 * SQRT3 * x8) * p8
            - a3 / 3.0 * (1.0 - 3.0 * x3) * p8
            - 4.0 / SQRT3 * a3 * x8 * p8,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const W: QutritFrequencies = QutritFrequencies {
        w12: 0.6,
        w23: 1.0,
        w13: 1.6,
    };

    #[test]
    fn single_drift_at_the_origin_pushes_only_x8() {
        let d = drift_single(&[0.0; 8], &W, 0.5);
        for v in &d[..7] {
            assert_eq!(*v, 0.0);
        }
        assert_abs_diff_eq!(d[7], SQRT3 / 2.0 * 2.0 / 9.0 * 0.5, epsilon = 1e-16);
    }

    #[test]
    fn single_drift_with_no_monitoring_is_linear_in_x() {
        // alpha3 = 0 leaves the rotation generated by the level couplings;
        // check additivity and homogeneity.
        let a = [0.1, -0.2, 0.3, 0.05, -0.4, 0.25, -0.15, 0.2];
        let b = [0.3, 0.1, -0.2, 0.15, 0.2, -0.35, 0.05, -0.1];
        let da = drift_single(&a, &W, 0.0);
        let db = drift_single(&b, &W, 0.0);
        let mut sum = [0.0; 8];
        for i in 0..8 {
            sum[i] = 2.0 * a[i] - 0.5 * b[i];
        }
        let ds = drift_single(&sum, &W, 0.0);
        for i in 0..8 {
            assert_abs_diff_eq!(ds[i], 2.0 * da[i] - 0.5 * db[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn single_backaction_roots_and_value() {
        assert_eq!(backaction_single(&[0.0; 8], 1.7), 0.0);
        let mut x = [0.0; 8];
        x[7] = 1.0 / (2.0 * SQRT3);
        assert_abs_diff_eq!(backaction_single(&x, 1.7), 0.0, epsilon = 1e-16);
        x[7] = 0.5;
        assert_abs_diff_eq!(
            backaction_single(&x, 1.7),
            -(1.7 / 3.0) * 0.5 * (1.0 - SQRT3),
            epsilon = 1e-15
        );
    }

    #[test]
    fn single_momentum_printed_p1_line() {
        let mut pt = PhasePoint {
            x: [0.0; 8],
            p: [0.0; 8],
        };
        pt.p[0] = 1.0;
        pt.x[7] = 0.3;
        let zero_w = QutritFrequencies::ZERO;
        let dp = momentum_flow_single(&pt, &zero_w, 0.7);
        assert_abs_diff_eq!(
            dp[0],
            -0.7 / 3.0 * (1.0 - 2.0 * SQRT3 * 0.3),
            epsilon = 1e-15
        );
        for v in &dp[1..7] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn single_momentum_origin_constant() {
        let pt = PhasePoint {
            x: [0.0; 8],
            p: [0.0; 8],
        };
        let dp = momentum_flow_single(&pt, &W, 0.9);
        assert_abs_diff_eq!(dp[7], 0.9 / 3.0, epsilon = 1e-16);
        for v in &dp[..7] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn double_drift_origin_values() {
        let d = drift_double(&[0.0; 8], &W, 0.4, 0.0);
        assert_abs_diff_eq!(d[2], 2.0 / 3.0 * 0.4, epsilon = 1e-16);
        // eighth line keeps only its constant bracket terms
        let d = drift_double(&[0.0; 8], &W, 0.0, 0.6);
        assert_abs_diff_eq!(
            d[7],
            (4.0 * 0.6 - 2.0 * 0.6) / (6.0 * SQRT3),
            epsilon = 1e-16
        );
    }

    #[test]
    fn double_backaction_values() {
        assert_eq!(backaction_double(&[0.0; 8], 0.0, 0.0), 0.0);
        let mut x = [0.0; 8];
        x[2] = 1.0;
        assert_abs_diff_eq!(backaction_double(&x, 0.3, 0.0), 0.3 - 0.2, epsilon = 1e-16);
        // alpha2 = 0 leaves a zeroth-order term the single-probe functional
        // does not have; that mismatch is a recorded discrepancy.
        x = [0.0; 8];
        assert_abs_diff_eq!(backaction_double(&x, 0.0, 0.9), -0.6, epsilon = 1e-16);
        assert_eq!(backaction_single(&x, 0.9), 0.0);
    }

    #[test]
    fn double_momentum_shift_term_scales_with_rates() {
        let pt = PhasePoint {
            x: [0.0; 8],
            p: [0.0; 8],
        };
        let with = momentum_flow_double_with_shift(&pt, &W, 1.9, 1.7, 1.0);
        let without = momentum_flow_double_with_shift(&pt, &W, 1.9, 1.7, 0.0);
        assert_abs_diff_eq!(
            with[7] - without[7],
            2.0 / SQRT3 * (1.9 - 2.0 * 1.7),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(with[2], -1.9, epsilon = 1e-16);
    }

    #[test]
    fn momentum_fields_are_affine_in_p() {
        let x = [0.12, -0.3, 0.21, 0.05, -0.17, 0.4, -0.08, 0.19];
        let p = [0.5, -1.0, 0.25, 2.0, -0.75, 0.1, 1.5, -0.6];
        let q = [-0.3, 0.8, 1.2, -0.4, 0.9, -1.1, 0.2, 0.7];
        let combo = |a: f64, b: f64| {
            let mut out = [0.0; 8];
            for i in 0..8 {
                out[i] = a * p[i] + b * q[i];
            }
            out
        };
        for (a2, a3) in [(0.0, 0.7), (1.9, 1.7)] {
            let eval = |pv: [f64; 8]| {
                let pt = PhasePoint { x, p: pv };
                if a2 == 0.0 {
                    momentum_flow_single(&pt, &W, a3)
                } else {
                    momentum_flow_double(&pt, &W, a2, a3)
                }
            };
            let fp = eval(p);
            let fq = eval(q);
            let f0 = eval([0.0; 8]);
            let fc = eval(combo(2.0, -3.0));
            for i in 0..8 {
                // affine: f(ap+bq) - f(0) = a(f(p)-f(0)) + b(f(q)-f(0))
                let lhs = fc[i] - f0[i];
                let rhs = 2.0 * (fp[i] - f0[i]) - 3.0 * (fq[i] - f0[i]);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }
}
