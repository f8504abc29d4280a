//! qzeno: command-line driver for the monitored-qutrit dynamics library.
//!
//! Simulation commands (`simulate-map`, `simulate-flow`, `phase-space`,
//! `sweep`) write CSV trajectories, optionally with an SVG plot; the
//! verification commands (`gates-verify`, `protocols-verify`, `divergence`)
//! write JSON reports. Exit codes: 0 success, 1 usage error, 2 numerical
//! failure during a run, 3 verification failure.

mod output;
mod params;
mod sim;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qutrit_zeno::flow::FlowVariant;
use qutrit_zeno::monitor::MonitorMode;

use params::{
    parse_completion, parse_config_file, parse_mode, parse_variant, preset_params, CliResult,
    Completion, Params,
};
use verify::ProtocolScope;

#[derive(Parser)]
#[command(
    name = "qzeno",
    version,
    about = "Monitored three-level dynamics: measurement maps, drift flows, \
             phase-space runs, and gate and protocol verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the repeated null-measurement map and write the trajectory as CSV
    /// (flow coordinates, for direct comparison with simulate-flow)
    SimulateMap(SimArgs),
    /// Integrate the drift flow with fixed-step RK4 and write the trajectory
    SimulateFlow(SimArgs),
    /// Integrate coordinates and conjugate momenta together (needs p0)
    PhaseSpace(SimArgs),
    /// Classify the dynamical regime over a grid of monitoring rates
    Sweep(SweepArgs),
    /// Check the gate set: truth tables, logical-subspace algebra, and the
    /// as-printed phase gate's unitarity defect
    GatesVerify(GatesArgs),
    /// Round-trip dense coding and teleportation with the corrected phase
    /// gate; report what the as-printed one does instead
    ProtocolsVerify(ProtocolsArgs),
    /// Compare as-published and oracle-corrected flow fields line by line
    Divergence(DivergenceArgs),
}

/// Flags shared by the trajectory commands. Every value is optional;
/// precedence is flags, then --config entries, then the --preset, then the
/// built-in defaults named below.
#[derive(Args, Clone, Default)]
struct SimArgs {
    /// Figure preset supplying parameter defaults: fig2a, fig2b, fig2c,
    /// fig3, fig4, fig5a, fig5b, fig5c, fig6, fig7
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Read "key = value" lines ('#' comments) as a defaults layer between
    /// flags and the preset
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Transition frequency between levels 1 and 2 [default: 0.6]
    #[arg(long, value_name = "W")]
    w12: Option<f64>,

    /// Transition frequency between levels 2 and 3 [default: 1.0]
    #[arg(long, value_name = "W")]
    w23: Option<f64>,

    /// Transition frequency between levels 1 and 3 [default: 1.6]
    #[arg(long, value_name = "W")]
    w13: Option<f64>,

    /// Level-2 monitoring rate; double mode only [default: 0]
    #[arg(long, value_name = "RATE")]
    alpha2: Option<f64>,

    /// Level-3 monitoring rate [default: 0.2]
    #[arg(long, value_name = "RATE")]
    alpha3: Option<f64>,

    /// Interval between null measurements in simulate-map [default: 1e-3]
    #[arg(long, value_name = "STEP")]
    dt: Option<f64>,

    /// RK4 integration step for the flow commands [default: 1e-3]
    #[arg(long, value_name = "STEP")]
    h: Option<f64>,

    /// Total evolution time [default: 20]
    #[arg(long = "T", value_name = "TIME")]
    total_time: Option<f64>,

    /// Flow field to integrate: as-published or oracle-corrected
    /// [default: as-published]
    #[arg(long, value_parser = parse_variant, value_name = "VARIANT")]
    variant: Option<FlowVariant>,

    /// Monitor one level (alpha3) or two (alpha2 and alpha3)
    /// [default: single]
    #[arg(long, value_parser = parse_mode, value_name = "MODE")]
    mode: Option<MonitorMode>,

    /// Initial coordinates, comma separated: 7 values get the eighth from
    /// --completion, 8 are taken verbatim (flow coordinates for the flow
    /// commands) [default: 0.3,0.5,0.3,0.5,0.3,0.5,0.3]
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "LIST"
    )]
    x0: Option<Vec<f64>>,

    /// Initial momenta for phase-space, 8 comma-separated values
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "LIST"
    )]
    p0: Option<Vec<f64>>,

    /// Rule completing a 7-entry x0: canonical (pure-state norm) or
    /// as-published (the captions' radicand) [default: canonical]
    #[arg(long, value_parser = parse_completion, value_name = "RULE")]
    completion: Option<Completion>,

    /// Let simulate-map accept starts outside the physical state space
    /// (the figure presets switch this on) [default: false]
    #[arg(
        long,
        value_name = "BOOL",
        num_args = 0..=1,
        default_missing_value = "true"
    )]
    allow_unphysical: Option<bool>,

    /// Output path [default: map.csv / flow.csv / phase.csv / sweep.csv]
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,

    /// Also write an SVG plot of the coordinates to this path
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,

    /// Seed for seeded commands [default: 7]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

impl SimArgs {
    fn layer(self) -> Params {
        Params {
            w12: self.w12,
            w23: self.w23,
            w13: self.w13,
            alpha2: self.alpha2,
            alpha3: self.alpha3,
            dt: self.dt,
            h: self.h,
            total_time: self.total_time,
            variant: self.variant,
            mode: self.mode,
            x0: self.x0,
            p0: self.p0,
            completion: self.completion,
            allow_unphysical: self.allow_unphysical,
            output: self.output,
            svg: self.svg,
            seed: self.seed,
            ..Params::default()
        }
    }

    /// Flags over config over preset.
    fn resolve(self) -> CliResult<Params> {
        let preset = match self.preset.as_deref() {
            Some(name) => preset_params(name)?,
            None => Params::default(),
        };
        let config = match self.config.as_deref() {
            Some(path) => parse_config_file(path)?,
            None => Params::default(),
        };
        Ok(self.layer().overlay(config).overlay(preset))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: SimArgs,

    /// Comma-separated alpha3 grid (required; doubles as the alpha2 grid in
    /// double mode unless --alpha2s is given)
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "LIST"
    )]
    alphas: Option<Vec<f64>>,

    /// Separate alpha2 grid; crossed with --alphas (double mode only)
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "LIST"
    )]
    alpha2s: Option<Vec<f64>>,

    /// Trailing window length for regime classification [default: 5]
    #[arg(long, value_name = "TIME")]
    window: Option<f64>,

    /// Trailing-variance threshold splitting the regimes [default: 1e-4]
    #[arg(long, value_name = "VAR")]
    threshold: Option<f64>,

    /// Worker threads for the grid; 0 means one per core [default: 0]
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

impl SweepArgs {
    fn resolve(self) -> CliResult<Params> {
        let extra = Params {
            alphas: self.alphas,
            alpha2s: self.alpha2s,
            window: self.window,
            threshold: self.threshold,
            workers: self.workers,
            ..Params::default()
        };
        Ok(extra.overlay(self.common.resolve()?))
    }
}

#[derive(Args)]
struct GatesArgs {
    /// Report path [default: gates.json]
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProtocolsArgs {
    /// Protocol family to verify: qubit, qutrit, or both [default: both]
    #[arg(long, value_parser = verify::parse_scope, default_value = "both", value_name = "FAMILY")]
    variant: ProtocolScope,

    /// Random teleported states per family [default: 100]
    #[arg(long, value_name = "N")]
    samples: Option<usize>,

    /// Seed for the random states [default: 7]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Report path [default: protocols.json]
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DivergenceArgs {
    /// Field pair to compare: single or double [default: single]
    #[arg(long, value_parser = parse_mode, value_name = "MODE")]
    mode: Option<MonitorMode>,

    /// Transition frequency between levels 1 and 2 [default: 0.6]
    #[arg(long, value_name = "W")]
    w12: Option<f64>,

    /// Transition frequency between levels 2 and 3 [default: 1.0]
    #[arg(long, value_name = "W")]
    w23: Option<f64>,

    /// Transition frequency between levels 1 and 3 [default: 1.6]
    #[arg(long, value_name = "W")]
    w13: Option<f64>,

    /// Level-2 monitoring rate [default: 0 single, 0.3 double]
    #[arg(long, value_name = "RATE")]
    alpha2: Option<f64>,

    /// Level-3 monitoring rate [default: 0.7]
    #[arg(long, value_name = "RATE")]
    alpha3: Option<f64>,

    /// Sample points per field line, at least 1000 [default: 1000]
    #[arg(long, value_name = "N")]
    samples: Option<usize>,

    /// Seed for the sample points [default: 7]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Report path [default: divergence.json]
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::SimulateMap(a) => sim::simulate_map(&a.resolve()?),
        Command::SimulateFlow(a) => sim::simulate_flow(&a.resolve()?),
        Command::PhaseSpace(a) => sim::phase_space(&a.resolve()?),
        Command::Sweep(a) => sim::sweep(&a.resolve()?),
        Command::GatesVerify(a) => {
            let p = Params {
                output: a.output,
                ..Params::default()
            };
            verify::gates_verify(&p)
        }
        Command::ProtocolsVerify(a) => {
            let p = Params {
                samples: a.samples,
                seed: a.seed,
                output: a.output,
                ..Params::default()
            };
            verify::protocols_verify(&p, a.variant)
        }
        Command::Divergence(a) => {
            let p = Params {
                mode: a.mode,
                w12: a.w12,
                w23: a.w23,
                w13: a.w13,
                alpha2: a.alpha2,
                alpha3: a.alpha3,
                samples: a.samples,
                seed: a.seed,
                output: a.output,
                ..Params::default()
            };
            verify::divergence(&p)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not failures; everything else is usage
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
