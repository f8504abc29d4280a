//! Fixed-step integration of the flows.
//!
//! Classical fourth-order Runge-Kutta with a constant step: the fields are
//! smooth polynomials (or smooth oracles), and bit-reproducible output
//! matters more here than adaptive efficiency. Momenta near a shelving
//! saddle grow without bound; that divergence is physics, so a blow-up
//! truncates the record and flags it instead of failing the run.

use crate::flow::{drift, momentum_flow, FlowSpec, PhasePoint};
use crate::{Error, Result};

/// Where an integration stopped producing finite numbers.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BlowUp {
    /// Time the non-finite state would have been recorded at.
    pub time: f64,
    /// Index of the first bad step (1-based, matching the sample it failed
    /// to produce).
    pub step: usize,
}

/// An integrated trajectory. `ps` is present only for phase-space runs.
#[derive(Debug, Clone)]
pub struct Integration {
    pub times: Vec<f64>,
    pub xs: Vec<[f64; 8]>,
    pub ps: Option<Vec<[f64; 8]>>,
    pub blow_up: Option<BlowUp>,
}

impl Integration {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn rk4_step<const D: usize>(f: impl Fn(&[f64; D]) -> [f64; D], y: &[f64; D], h: f64) -> [f64; D] {
    let k1 = f(y);
    let mut tmp = [0.0; D];
    for i in 0..D {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(&tmp);
    for i in 0..D {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(&tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * k3[i];
    }
    let k4 = f(&tmp);
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn check_schedule(total_time: f64, h: f64) -> Result<usize> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "integration step must be positive, got {h}"
        )));
    }
    if total_time < h || !total_time.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "total time must be at least one step, got {total_time} with h = {h}"
        )));
    }
    Ok((total_time / h).round() as usize)
}

/// Integrates the coordinate drift alone (it never depends on p).
pub fn integrate_x(x0: &[f64; 8], spec: &FlowSpec, total_time: f64, h: f64) -> Result<Integration> {
    let steps = check_schedule(total_time, h)?;
    let f = |x: &[f64; 8]| drift(spec, x);

    let mut times = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    times.push(0.0);
    xs.push(*x0);
    let mut blow_up = None;

    let mut x = *x0;
    for k in 1..=steps {
        x = rk4_step(f, &x, h);
        let t = k as f64 * h;
        if !x.iter().all(|v| v.is_finite()) {
            blow_up = Some(BlowUp { time: t, step: k });
            break;
        }
        times.push(t);
        xs.push(x);
    }

    Ok(Integration {
        times,
        xs,
        ps: None,
        blow_up,
    })
}

/// Integrates the full 16-dimensional phase-space flow.
pub fn integrate_phase(
    pt0: &PhasePoint,
    spec: &FlowSpec,
    total_time: f64,
    h: f64,
) -> Result<Integration> {
    let steps = check_schedule(total_time, h)?;
    let f = |y: &[f64; 16]| {
        let mut pt = PhasePoint {
            x: [0.0; 8],
            p: [0.0; 8],
        };
        pt.x.copy_from_slice(&y[..8]);
        pt.p.copy_from_slice(&y[8..]);
        let dx = drift(spec, &pt.x);
        let dp = momentum_flow(spec, &pt);
        let mut dy = [0.0; 16];
        dy[..8].copy_from_slice(&dx);
        dy[8..].copy_from_slice(&dp);
        dy
    };

    let mut y = [0.0; 16];
    y[..8].copy_from_slice(&pt0.x);
    y[8..].copy_from_slice(&pt0.p);

    let mut times = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ps = Vec::with_capacity(steps + 1);
    times.push(0.0);
    xs.push(pt0.x);
    ps.push(pt0.p);
    let mut blow_up = None;

    for k in 1..=steps {
        y = rk4_step(f, &y, h);
        let t = k as f64 * h;
        if !y.iter().all(|v| v.is_finite()) {
            blow_up = Some(BlowUp { time: t, step: k });
            break;
        }
        let mut x = [0.0; 8];
        let mut p = [0.0; 8];
        x.copy_from_slice(&y[..8]);
        p.copy_from_slice(&y[8..]);
        times.push(t);
        xs.push(x);
        ps.push(p);
    }

    Ok(Integration {
        times,
        xs,
        ps: Some(ps),
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowVariant;
    use crate::monitor::{MonitorConfig, MonitorMode, QutritFrequencies};
    use approx::assert_abs_diff_eq;

    fn free_rotation() -> FlowSpec {
        FlowSpec::new(
            QutritFrequencies::new(0.6, 1.0, 1.6).unwrap(),
            MonitorConfig::new(0.0, 0.0, 1e-3).unwrap(),
            MonitorMode::Single,
            FlowVariant::AsPublished,
        )
        .unwrap()
    }

    // Bloch length in the standard scale, where rotations preserve it.
    fn length(x: &[f64; 8]) -> f64 {
        let y = crate::flow::standard_from_flow(x);
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn schedule_validation() {
        let spec = free_rotation();
        assert!(integrate_x(&[0.0; 8], &spec, 1.0, 0.0).is_err());
        assert!(integrate_x(&[0.0; 8], &spec, 0.5, 1.0).is_err());
        let r = integrate_x(&[0.0; 8], &spec, 1.0, 0.25).unwrap();
        assert_eq!(r.times.len(), 5);
    }

    #[test]
    fn free_rotation_preserves_bloch_length() {
        let spec = free_rotation();
        let y0 = [0.3, 0.5, 0.3, 0.5, 0.3, 0.5, 0.3, 0.472_581_562_625_26];
        let x0 = crate::flow::flow_from_standard(&y0);
        let r = integrate_x(&x0, &spec, 20.0, 1e-3).unwrap();
        assert!(r.blow_up.is_none());
        let l0 = length(&r.xs[0]);
        for x in r.xs.iter().step_by(500) {
            assert_abs_diff_eq!(length(x), l0, epsilon = 1e-8);
        }
    }

    #[test]
    fn step_halving_converges_at_fourth_order() {
        let spec = FlowSpec::new(
            QutritFrequencies::new(0.6, 1.0, 1.6).unwrap(),
            MonitorConfig::new(0.0, 0.7, 1e-3).unwrap(),
            MonitorMode::Single,
            FlowVariant::AsPublished,
        )
        .unwrap();
        let x0 = [0.3, 0.5, 0.3, 0.5, 0.3, 0.5, 0.3, 0.236_290_781_312_63];
        let coarse = integrate_x(&x0, &spec, 10.0, 1e-3).unwrap();
        let fine = integrate_x(&x0, &spec, 10.0, 5e-4).unwrap();
        let finest = integrate_x(&x0, &spec, 10.0, 2.5e-4).unwrap();
        let at_end = |r: &Integration| *r.xs.last().unwrap();
        let (a, b, c) = (at_end(&coarse), at_end(&fine), at_end(&finest));
        let d1: f64 = (0..8).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
        let d2: f64 = (0..8).map(|i| (b[i] - c[i]).abs()).fold(0.0, f64::max);
        // fourth order: halving the step cuts the increment by ~16; leave
        // slack for the error already sitting near rounding level
        assert!(d1 < 1e-10, "coarse-fine gap {d1:.3e}");
        assert!(d2 < d1, "no convergence: {d1:.3e} -> {d2:.3e}");
    }

    #[test]
    fn phase_space_run_carries_momenta() {
        let spec = free_rotation();
        let pt0 = PhasePoint {
            x: [0.1; 8],
            p: [0.25, -0.25, 0.25, -0.25, 0.25, -0.25, 0.25, -0.25],
        };
        let r = integrate_phase(&pt0, &spec, 1.0, 1e-3).unwrap();
        assert_eq!(r.ps.as_ref().unwrap().len(), r.times.len());
        assert!(r.blow_up.is_none());
    }

    #[test]
    fn blow_up_truncates_and_flags() {
        // dx/dt has a quadratic term; a wildly unphysical start diverges in
        // finite time under the published field
        let spec = FlowSpec::new(
            QutritFrequencies::ZERO,
            MonitorConfig::new(1e6, 1e6, 1e-3).unwrap(),
            MonitorMode::Double,
            FlowVariant::AsPublished,
        )
        .unwrap();
        let x0 = [50.0, -50.0, 80.0, 50.0, -50.0, 50.0, -50.0, -90.0];
        let r = integrate_x(&x0, &spec, 10.0, 1e-3).unwrap();
        let flag = r.blow_up.expect("expected divergence");
        assert!(flag.time <= 10.0);
        assert_eq!(r.times.len() + 1, flag.step + 1);
        assert!(r.xs.iter().all(|x| x.iter().all(|v| v.is_finite())));
    }
}
