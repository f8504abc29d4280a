//! Regime classification: did the trajectory keep oscillating, or did
//! monitoring arrest it?
//!
//! The signal is the per-coordinate variance over a sliding time window.
//! A coordinate is quiet when that variance drops below a threshold; the
//! system is frozen once every coordinate is quiet and stays quiet. The
//! freeze time is the start of the earliest window after which that holds.

use crate::flow::integrate::Integration;
use crate::{Error, Result};

/// Window length (time units) and per-coordinate variance threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub window: f64,
    pub threshold: f64,
}

impl Default for RegimeParams {
    fn default() -> Self {
        // separates the published slow/fast monitoring examples cleanly
        Self {
            window: 5.0,
            threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Oscillatory,
    Intermediate,
    Zeno,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Oscillatory => write!(f, "oscillatory"),
            Regime::Intermediate => write!(f, "intermediate"),
            Regime::Zeno => write!(f, "zeno"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Set only when the trajectory ends frozen.
    pub freeze_time: Option<f64>,
    /// Variance of each coordinate over the final window.
    pub trailing_variance: [f64; 8],
}

/// Per-index windowed variances over a uniformly sampled series.
struct WindowedVariance {
    /// Samples per window, inclusive of both ends.
    span: usize,
    sum: Vec<[f64; 8]>,
    sum_sq: Vec<[f64; 8]>,
}

impl WindowedVariance {
    fn new(times: &[f64], xs: &[[f64; 8]], window: f64) -> Self {
        let dt = times[1] - times[0];
        let span = (window / dt).round() as usize + 1;
        let mut sum = Vec::with_capacity(xs.len() + 1);
        let mut sum_sq = Vec::with_capacity(xs.len() + 1);
        sum.push([0.0; 8]);
        sum_sq.push([0.0; 8]);
        for x in xs {
            let last = *sum.last().unwrap();
            let last_sq = *sum_sq.last().unwrap();
            let mut s = [0.0; 8];
            let mut q = [0.0; 8];
            for i in 0..8 {
                s[i] = last[i] + x[i];
                q[i] = last_sq[i] + x[i] * x[i];
            }
            sum.push(s);
            sum_sq.push(q);
        }
        Self { span, sum, sum_sq }
    }

    /// Variance of each coordinate over the window ending at sample `end`.
    fn at(&self, end: usize) -> [f64; 8] {
        let lo = end + 1 - self.span;
        let n = self.span as f64;
        let mut var = [0.0; 8];
        for (i, v) in var.iter_mut().enumerate() {
            let s = self.sum[end + 1][i] - self.sum[lo][i];
            let q = self.sum_sq[end + 1][i] - self.sum_sq[lo][i];
            *v = (q / n - (s / n) * (s / n)).max(0.0);
        }
        var
    }

    fn first_full(&self) -> usize {
        self.span - 1
    }
}

/// Classifies a uniformly sampled coordinate series.
///
/// Zeno: every coordinate is quiet over the final window. Oscillatory: none
/// is. Anything in between is intermediate. The freeze time reported for a
/// frozen run is the start of the earliest window from which quiet holds to
/// the end.
pub fn classify_regime(
    times: &[f64],
    xs: &[[f64; 8]],
    params: &RegimeParams,
) -> Result<RegimeReport> {
    let need = 2.0 * params.window;
    let span_time = match (times.first(), times.last()) {
        (Some(a), Some(b)) if times.len() >= 4 => b - a,
        _ => 0.0,
    };
    if span_time < need {
        return Err(Error::SeriesTooShort {
            span: span_time,
            need,
        });
    }

    let wv = WindowedVariance::new(times, xs, params.window);
    let last = xs.len() - 1;
    let trailing = wv.at(last);
    let quiet = |var: &[f64; 8]| var.iter().all(|&v| v < params.threshold);

    let regime = if quiet(&trailing) {
        Regime::Zeno
    } else if trailing.iter().all(|&v| v >= params.threshold) {
        Regime::Oscillatory
    } else {
        Regime::Intermediate
    };

    let freeze_time = (regime == Regime::Zeno).then(|| {
        let mut first_quiet = wv.first_full();
        for end in (wv.first_full()..=last).rev() {
            if !quiet(&wv.at(end)) {
                first_quiet = end + 1;
                break;
            }
        }
        times[first_quiet] - params.window
    });

    Ok(RegimeReport {
        regime,
        freeze_time,
        trailing_variance: trailing,
    })
}

/// The shelving signature in phase space: coordinates pinned, momenta
/// running away.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LocalizationReport {
    pub freeze_time: f64,
    pub x_trailing_variance: [f64; 8],
    /// Largest |p_i| at the freeze time.
    pub p_at_freeze: f64,
    /// Largest |p_i| over the final window.
    pub p_trailing_max: f64,
    /// p_trailing_max / p_at_freeze.
    pub growth: f64,
}

/// Quantifies coordinate localization against momentum growth for a frozen
/// phase-space run. Errors when the run has no momenta or never froze.
pub fn localization_metrics(
    run: &Integration,
    params: &RegimeParams,
) -> Result<LocalizationReport> {
    let ps = run.ps.as_ref().ok_or_else(|| {
        Error::InvalidConfig("localization metrics need a phase-space run with momenta".into())
    })?;
    let report = classify_regime(&run.times, &run.xs, params)?;
    let freeze_time = report.freeze_time.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "trajectory is {}; localization metrics need a frozen run",
            report.regime
        ))
    })?;

    let freeze_idx = run
        .times
        .iter()
        .position(|&t| t >= freeze_time)
        .expect("freeze time lies inside the series");
    let max_abs = |p: &[f64; 8]| p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let p_at_freeze = max_abs(&ps[freeze_idx]);

    let t_end = *run.times.last().unwrap();
    let window_start = t_end - params.window;
    let p_trailing_max = run
        .times
        .iter()
        .zip(ps)
        .filter(|(t, _)| **t >= window_start)
        .map(|(_, p)| max_abs(p))
        .fold(0.0_f64, f64::max);

    Ok(LocalizationReport {
        freeze_time,
        x_trailing_variance: report.trailing_variance,
        p_at_freeze,
        p_trailing_max,
        growth: p_trailing_max / p_at_freeze,
    })
}
