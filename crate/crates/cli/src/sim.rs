//! The simulation commands: measurement-map runs, coordinate flows,
//! phase-space flows, and rate sweeps.

use qutrit_zeno::flow::integrate::{integrate_phase, integrate_x, Integration};
use qutrit_zeno::flow::regime::classify_regime;
use qutrit_zeno::flow::{flow_from_standard, FlowSpec, PhasePoint};
use qutrit_zeno::monitor::{map_trajectory, MapOptions, MonitorConfig, MonitorMode};
use qutrit_zeno::su_n::BlochVector;
use rayon::prelude::*;

use crate::output::{csv_bytes, format_float, polyline_svg, write_atomic, Series};
use crate::params::{CliError, CliResult, Params};

fn flow_spec(p: &Params) -> CliResult<FlowSpec> {
    Ok(FlowSpec::new(
        p.frequencies()?,
        p.monitor_config()?,
        p.mode(),
        p.variant(),
    )?)
}

fn x_header() -> Vec<&'static str> {
    vec!["t", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"]
}

fn coordinate_row(t: f64, xs: &[f64; 8]) -> Vec<String> {
    let mut row = Vec::with_capacity(9);
    row.push(format_float(t));
    row.extend(xs.iter().map(|v| format_float(*v)));
    row
}

fn svg_of_series(p: &Params, times: &[f64], blocks: &[(&str, Vec<[f64; 8]>)]) -> CliResult<()> {
    let Some(path) = p.svg.as_ref() else {
        return Ok(());
    };
    let mut series = Vec::new();
    for (prefix, rows) in blocks {
        for i in 0..8 {
            series.push(Series {
                label: format!("{prefix}{}", i + 1),
                points: times
                    .iter()
                    .zip(rows.iter())
                    .map(|(t, r)| (*t, r[i]))
                    .collect(),
            });
        }
    }
    let svg = polyline_svg("coordinate series", "t", "value", &series);
    write_atomic(path, svg.as_bytes())
}

/// Runs the postselected measurement map and writes t, x1..x8, norm.
/// Coordinates are reported in flow scale to match the flow commands.
pub fn simulate_map(p: &Params) -> CliResult<()> {
    let w = p.frequencies()?;
    let cfg = p.monitor_config()?;
    let opts = MapOptions {
        allow_nonpositive_initial: p.allow_unphysical(),
    };
    let x0 = BlochVector::new(p.initial_standard()?.to_vec())?;
    let traj = map_trajectory(&x0, &w, &cfg, p.mode(), p.total_time()?, &opts)?;

    let flow_rows: Vec<[f64; 8]> = traj
        .coordinate_rows()
        .iter()
        .map(flow_from_standard)
        .collect();
    let mut rows = Vec::with_capacity(flow_rows.len());
    for ((t, xs), norm) in traj.times.iter().zip(&flow_rows).zip(&traj.norms) {
        let mut row = coordinate_row(*t, xs);
        row.push(format_float(*norm));
        rows.push(row);
    }
    let mut header = x_header();
    header.push("norm");

    let out = p.output_or("map.csv");
    write_atomic(&out, &csv_bytes(&header, &rows))?;
    svg_of_series(p, &traj.times, &[("x", flow_rows)])?;
    println!("wrote {} ({} samples)", out.display(), rows.len());
    Ok(())
}

/// Appends the truncation marker and reports a blow-up as exit code 2.
fn finish_run(
    p: &Params,
    run: &Integration,
    header: Vec<&str>,
    mut rows: Vec<Vec<String>>,
    default_name: &str,
) -> CliResult<()> {
    let width = header.len() - 1;
    if let Some(blow) = &run.blow_up {
        let mut marker = vec![format_float(blow.time)];
        marker.extend(std::iter::repeat_n("nan".to_string(), width));
        rows.push(marker);
    }
    let out = p.output_or(default_name);
    write_atomic(&out, &csv_bytes(&header, &rows))?;
    if let Some(blow) = &run.blow_up {
        return Err(CliError::Numerical(format!(
            "trajectory diverged at t = {:.6}; {} keeps the {} samples before the marker row",
            blow.time,
            out.display(),
            run.times.len()
        )));
    }
    println!("wrote {} ({} samples)", out.display(), rows.len());
    Ok(())
}

/// Integrates the coordinate drift and writes t, x1..x8 in flow coordinates.
pub fn simulate_flow(p: &Params) -> CliResult<()> {
    let spec = flow_spec(p)?;
    let run = integrate_x(&p.initial_flow()?, &spec, p.total_time()?, p.rk4_step()?)?;
    let rows: Vec<Vec<String>> = run
        .times
        .iter()
        .zip(&run.xs)
        .map(|(t, xs)| coordinate_row(*t, xs))
        .collect();
    if run.blow_up.is_none() {
        svg_of_series(p, &run.times, &[("x", run.xs.clone())])?;
    }
    finish_run(p, &run, x_header(), rows, "flow.csv")
}

/// Integrates coordinates and conjugate momenta together and writes
/// t, x1..x8, p1..p8.
pub fn phase_space(p: &Params) -> CliResult<()> {
    let spec = flow_spec(p)?;
    let pt = PhasePoint::new(p.initial_flow()?, p.initial_momenta()?)?;
    let run = integrate_phase(&pt, &spec, p.total_time()?, p.rk4_step()?)?;
    let ps = run.ps.as_ref().expect("phase integration records momenta");

    let mut header = x_header();
    header.extend(["p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8"]);
    let rows: Vec<Vec<String>> = run
        .times
        .iter()
        .zip(&run.xs)
        .zip(ps)
        .map(|((t, xs), pr)| {
            let mut row = coordinate_row(*t, xs);
            row.extend(pr.iter().map(|v| format_float(*v)));
            row
        })
        .collect();
    if run.blow_up.is_none() {
        svg_of_series(p, &run.times, &[("x", run.xs.clone()), ("p", ps.clone())])?;
    }
    finish_run(p, &run, header, rows, "phase.csv")
}

/// One sweep grid point, fully classified or carrying its own error.
fn sweep_point(p: &Params, alpha2: f64, alpha3: f64) -> (String, String, String) {
    let attempt = || -> CliResult<(String, String)> {
        let spec = FlowSpec::new(
            p.frequencies()?,
            MonitorConfig::new(alpha2, alpha3, p.monitor_config()?.dt)?,
            p.mode(),
            p.variant(),
        )?;
        let run = integrate_x(&p.initial_flow()?, &spec, p.total_time()?, p.rk4_step()?)?;
        if let Some(blow) = &run.blow_up {
            return Err(CliError::Numerical(format!(
                "diverged at t = {:.3}",
                blow.time
            )));
        }
        let report = classify_regime(&run.times, &run.xs, &p.regime_params())?;
        let freeze = report.freeze_time.map(format_float).unwrap_or_default();
        Ok((report.regime.to_string(), freeze))
    };
    match attempt() {
        Ok((regime, freeze)) => (regime, freeze, "ok".into()),
        // commas would break the row; errors never need them
        Err(e) => (
            String::new(),
            String::new(),
            e.to_string().replace(',', ";"),
        ),
    }
}

/// Classifies the flow regime over a rate grid and writes
/// alpha2, alpha3, regime, freeze_time, status.
pub fn sweep(p: &Params) -> CliResult<()> {
    let alphas = p
        .alphas
        .as_deref()
        .ok_or_else(|| CliError::Usage("sweep needs alphas (comma-separated rates)".into()))?;
    if alphas.is_empty() {
        return Err(CliError::Usage("sweep needs a non-empty alpha grid".into()));
    }

    // explicit alpha2s make a full cross grid; otherwise the second rate
    // follows the mode (off for single, tied to alpha3 for double)
    let grid: Vec<(f64, f64)> = match (&p.alpha2s, p.mode()) {
        (Some(a2s), MonitorMode::Double) => a2s
            .iter()
            .flat_map(|a2| alphas.iter().map(move |a3| (*a2, *a3)))
            .collect(),
        (Some(_), MonitorMode::Single) => {
            return Err(CliError::Usage(
                "alpha2s only applies to double mode".into(),
            ))
        }
        (None, MonitorMode::Single) => alphas.iter().map(|a3| (0.0, *a3)).collect(),
        (None, MonitorMode::Double) => alphas.iter().map(|a| (*a, *a)).collect(),
    };

    let run_points = || -> Vec<(String, String, String)> {
        grid.par_iter()
            .map(|(a2, a3)| sweep_point(p, *a2, *a3))
            .collect()
    };
    let results = if p.workers() > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(p.workers())
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))?
            .install(run_points)
    } else {
        run_points()
    };

    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(results)
        .map(|((a2, a3), (regime, freeze, status))| {
            vec![format_float(*a2), format_float(*a3), regime, freeze, status]
        })
        .collect();
    let out = p.output_or("sweep.csv");
    write_atomic(
        &out,
        &csv_bytes(
            &["alpha2", "alpha3", "regime", "freeze_time", "status"],
            &rows,
        ),
    )?;
    println!("wrote {} ({} grid points)", out.display(), rows.len());
    Ok(())
}
