//! Run parameters: one flat key set shared by every command, merged from
//! three layers with fixed precedence (command-line flags, then config file,
//! then figure preset), resolved against documented defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use qutrit_zeno::flow::FlowVariant;
use qutrit_zeno::monitor::{MonitorConfig, MonitorMode, QutritFrequencies};
use qutrit_zeno::su_n::{published_completion, pure_completion};

/// Failure category mapped straight onto the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config keys, inconsistent parameters. Exit 1.
    Usage(String),
    /// The run itself went numerically bad. Exit 2.
    Numerical(String),
    /// A verification command found a violated property. Exit 3.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<qutrit_zeno::Error> for CliError {
    fn from(e: qutrit_zeno::Error) -> Self {
        match e {
            qutrit_zeno::Error::VanishingNorm { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// How the eighth coordinate is filled in when an initial state is given by
/// its first seven components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    /// Pure-state norm: x8 = sqrt(4/3 - sum of squares). Keeps the vector on
    /// the pure shell.
    Canonical,
    /// The figure captions' radicand (4/3)^2 over the squared coordinates.
    /// Produces vectors outside the physical bound; comparison runs only.
    AsPublished,
}

pub fn parse_completion(s: &str) -> Result<Completion, String> {
    match s {
        "canonical" => Ok(Completion::Canonical),
        "as-published" => Ok(Completion::AsPublished),
        other => Err(format!(
            "completion must be canonical or as-published, got {other:?}"
        )),
    }
}

pub fn parse_variant(s: &str) -> Result<FlowVariant, String> {
    match s {
        "as-published" => Ok(FlowVariant::AsPublished),
        "oracle-corrected" => Ok(FlowVariant::OracleCorrected),
        other => Err(format!(
            "variant must be as-published or oracle-corrected, got {other:?}"
        )),
    }
}

pub fn parse_mode(s: &str) -> Result<MonitorMode, String> {
    match s {
        "single" => Ok(MonitorMode::Single),
        "double" => Ok(MonitorMode::Double),
        other => Err(format!("mode must be single or double, got {other:?}")),
    }
}

pub fn parse_float_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("{tok:?} is not a number"))
        })
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

/// The flat parameter set. Every field is optional; [`Params::overlay`]
/// merges layers and the accessors supply defaults.
#[derive(Debug, Clone, Default)]
pub struct Params {
    pub w12: Option<f64>,
    pub w23: Option<f64>,
    pub w13: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub dt: Option<f64>,
    pub h: Option<f64>,
    pub total_time: Option<f64>,
    pub variant: Option<FlowVariant>,
    pub mode: Option<MonitorMode>,
    pub x0: Option<Vec<f64>>,
    pub p0: Option<Vec<f64>>,
    pub completion: Option<Completion>,
    pub allow_unphysical: Option<bool>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub window: Option<f64>,
    pub threshold: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub alpha2s: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

macro_rules! take_first {
    ($hi:expr, $lo:expr, $($field:ident),+ $(,)?) => {
        Params {
            $($field: $hi.$field.or($lo.$field),)+
        }
    };
}

impl Params {
    /// Fields set on `self` win over `lower`.
    pub fn overlay(self, lower: Params) -> Params {
        take_first!(
            self,
            lower,
            w12,
            w23,
            w13,
            alpha2,
            alpha3,
            dt,
            h,
            total_time,
            variant,
            mode,
            x0,
            p0,
            completion,
            allow_unphysical,
            output,
            svg,
            seed,
            samples,
            window,
            threshold,
            alphas,
            alpha2s,
            workers,
        )
    }

    pub fn frequencies(&self) -> CliResult<QutritFrequencies> {
        QutritFrequencies::new(
            self.w12.unwrap_or(0.6),
            self.w23.unwrap_or(1.0),
            self.w13.unwrap_or(1.6),
        )
        .map_err(Into::into)
    }

    pub fn monitor_config(&self) -> CliResult<MonitorConfig> {
        MonitorConfig::new(
            self.alpha2.unwrap_or(0.0),
            self.alpha3.unwrap_or(0.2),
            self.dt.unwrap_or(1e-3),
        )
        .map_err(Into::into)
    }

    pub fn mode(&self) -> MonitorMode {
        self.mode.unwrap_or(MonitorMode::Single)
    }

    pub fn variant(&self) -> FlowVariant {
        self.variant.unwrap_or(FlowVariant::AsPublished)
    }

    pub fn rk4_step(&self) -> CliResult<f64> {
        let h = self.h.unwrap_or(1e-3);
        if h > 0.0 && h.is_finite() {
            Ok(h)
        } else {
            Err(CliError::Usage(format!("h must be positive, got {h}")))
        }
    }

    pub fn total_time(&self) -> CliResult<f64> {
        let t = self.total_time.unwrap_or(20.0);
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(CliError::Usage(format!("T must be positive, got {t}")))
        }
    }

    pub fn completion(&self) -> Completion {
        self.completion.unwrap_or(Completion::Canonical)
    }

    pub fn allow_unphysical(&self) -> bool {
        self.allow_unphysical.unwrap_or(false)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(7)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(1000)
    }

    pub fn regime_params(&self) -> qutrit_zeno::flow::regime::RegimeParams {
        qutrit_zeno::flow::regime::RegimeParams {
            window: self.window.unwrap_or(5.0),
            threshold: self.threshold.unwrap_or(1e-4),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }

    pub fn output_or(&self, default_name: &str) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(default_name))
    }

    /// Initial state in standard Bloch coordinates. Seven entries are
    /// completed per the completion rule; eight are taken verbatim.
    pub fn initial_standard(&self) -> CliResult<[f64; 8]> {
        let default = vec![0.3, 0.5, 0.3, 0.5, 0.3, 0.5, 0.3];
        let entries = self.x0.as_deref().unwrap_or(&default);
        let full: Vec<f64> = match entries.len() {
            7 => {
                let completed = match self.completion() {
                    Completion::Canonical => pure_completion(entries)?,
                    Completion::AsPublished => published_completion(entries)?,
                };
                completed.coords().to_vec()
            }
            8 => entries.to_vec(),
            n => {
                return Err(CliError::Usage(format!(
                    "x0 needs 7 coordinates (eighth completed) or all 8, got {n}"
                )))
            }
        };
        let mut out = [0.0; 8];
        out.copy_from_slice(&full);
        Ok(out)
    }

    /// Initial state in flow coordinates: a 7-entry x0 is completed in
    /// standard coordinates and converted; an 8-entry x0 is already flow.
    pub fn initial_flow(&self) -> CliResult<[f64; 8]> {
        if let Some(entries) = self.x0.as_deref() {
            if entries.len() == 8 {
                let mut out = [0.0; 8];
                out.copy_from_slice(entries);
                return Ok(out);
            }
        }
        Ok(qutrit_zeno::flow::flow_from_standard(
            &self.initial_standard()?,
        ))
    }

    pub fn initial_momenta(&self) -> CliResult<[f64; 8]> {
        let entries = self
            .p0
            .as_deref()
            .ok_or_else(|| CliError::Usage("phase-space runs need p0 (8 values)".into()))?;
        if entries.len() != 8 {
            return Err(CliError::Usage(format!(
                "p0 needs 8 values, got {}",
                entries.len()
            )));
        }
        let mut out = [0.0; 8];
        out.copy_from_slice(entries);
        Ok(out)
    }
}

/// Parses a plain-text config file: one `key = value` per line, `#` starts a
/// comment, blank lines ignored. Unknown keys are rejected by name.
pub fn parse_config_file(path: &Path) -> CliResult<Params> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut p = Params::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected key = value",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        set_key(&mut p, key, value)
            .map_err(|msg| CliError::Usage(format!("{}:{}: {msg}", path.display(), lineno + 1)))?;
    }
    Ok(p)
}

fn set_key(p: &mut Params, key: &str, value: &str) -> Result<(), String> {
    let float = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| format!("{v:?} is not a number"))
    };
    match key {
        "w12" => p.w12 = Some(float(value)?),
        "w23" => p.w23 = Some(float(value)?),
        "w13" => p.w13 = Some(float(value)?),
        "alpha2" => p.alpha2 = Some(float(value)?),
        "alpha3" => p.alpha3 = Some(float(value)?),
        "dt" => p.dt = Some(float(value)?),
        "h" => p.h = Some(float(value)?),
        "T" => p.total_time = Some(float(value)?),
        "variant" => p.variant = Some(parse_variant(value)?),
        "mode" => p.mode = Some(parse_mode(value)?),
        "x0" => p.x0 = Some(parse_float_list(value)?),
        "p0" => p.p0 = Some(parse_float_list(value)?),
        "completion" => p.completion = Some(parse_completion(value)?),
        "allow-unphysical" => p.allow_unphysical = Some(parse_bool(value)?),
        "output" => p.output = Some(PathBuf::from(value)),
        "svg" => p.svg = Some(PathBuf::from(value)),
        "seed" => {
            p.seed = Some(
                value
                    .parse::<u64>()
                    .map_err(|_| format!("{value:?} is not a seed"))?,
            )
        }
        "samples" => {
            p.samples = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| format!("{value:?} is not a count"))?,
            )
        }
        "window" => p.window = Some(float(value)?),
        "threshold" => p.threshold = Some(float(value)?),
        "alphas" => p.alphas = Some(parse_float_list(value)?),
        "alpha2s" => p.alpha2s = Some(parse_float_list(value)?),
        "workers" => {
            p.workers = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| format!("{value:?} is not a count"))?,
            )
        }
        other => return Err(format!("unknown configuration key {other:?}")),
    }
    Ok(())
}

/// Names every preset accepts, for help text and error messages.
pub const PRESET_NAMES: [&str; 10] = [
    "fig2a", "fig2b", "fig2c", "fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig6", "fig7",
];

/// Expands a figure preset to its parameter set.
///
/// Values come straight from the published captions: the Rabi frequencies
/// (0.6, 1, 1.6) everywhere, the coordinate patterns 0.3/0.5 (time-series
/// figures), 0.3/0.4 with momenta 1/0.5 (single-probe phase portraits), and
/// 0.35/0.5 with momenta 0.25/-0.25 over t = 15 (two-probe phase portraits).
/// All of these starts lie outside the physical state space once completed,
/// so the presets switch the measurement map's positivity gate off.
///
/// The captions of the last two phase-portrait figures appear swapped: the
/// weak-rate text (alpha2 = 0.1, alpha3 = 0.2) claims an arrested run and
/// the strong-rate text (1.9, 1.7) claims a free one, while the dynamics do
/// the opposite. The presets follow the parameter values, not the prose.
pub fn preset_params(name: &str) -> CliResult<Params> {
    let populations = vec![0.3, 0.5, 0.3, 0.5, 0.3, 0.5, 0.3];
    let portrait = vec![0.3, 0.4, 0.3, 0.4, 0.3, 0.4, 0.3];
    let two_probe = vec![0.35, 0.5, 0.35, 0.5, 0.35, 0.5, 0.35];
    let momenta_single = vec![1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5];
    let momenta_double = vec![0.25, -0.25, 0.25, -0.25, 0.25, -0.25, 0.25, -0.25];

    let mut p = Params {
        w12: Some(0.6),
        w23: Some(1.0),
        w13: Some(1.6),
        allow_unphysical: Some(true),
        total_time: Some(20.0),
        mode: Some(MonitorMode::Single),
        alpha2: Some(0.0),
        ..Params::default()
    };
    match name {
        "fig2a" => {
            p.alpha3 = Some(0.2);
            p.x0 = Some(populations);
        }
        "fig2b" => {
            p.alpha3 = Some(0.7);
            p.x0 = Some(populations);
        }
        "fig2c" => {
            p.alpha3 = Some(1.7);
            p.x0 = Some(populations);
        }
        "fig3" => {
            p.alpha3 = Some(0.1);
            p.x0 = Some(portrait);
            p.p0 = Some(momenta_single);
        }
        "fig4" => {
            p.alpha3 = Some(1.7);
            p.x0 = Some(portrait);
            p.p0 = Some(momenta_single);
        }
        "fig5a" => {
            p.mode = Some(MonitorMode::Double);
            p.alpha2 = Some(0.1);
            p.alpha3 = Some(0.1);
            p.x0 = Some(populations);
        }
        "fig5b" => {
            p.mode = Some(MonitorMode::Double);
            p.alpha2 = Some(0.7);
            p.alpha3 = Some(0.7);
            p.x0 = Some(populations);
        }
        "fig5c" => {
            p.mode = Some(MonitorMode::Double);
            p.alpha2 = Some(1.7);
            p.alpha3 = Some(1.7);
            p.x0 = Some(populations);
        }
        "fig6" => {
            p.mode = Some(MonitorMode::Double);
            p.alpha2 = Some(0.1);
            p.alpha3 = Some(0.2);
            p.x0 = Some(two_probe);
            p.p0 = Some(momenta_double);
            p.total_time = Some(15.0);
        }
        "fig7" => {
            p.mode = Some(MonitorMode::Double);
            p.alpha2 = Some(1.9);
            p.alpha3 = Some(1.7);
            p.x0 = Some(two_probe);
            p.p0 = Some(momenta_double);
            p.total_time = Some(15.0);
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn overlay_prefers_the_higher_layer() {
        let hi = Params {
            alpha3: Some(1.7),
            ..Params::default()
        };
        let lo = Params {
            alpha3: Some(0.2),
            dt: Some(1e-2),
            ..Params::default()
        };
        let merged = hi.overlay(lo);
        assert_eq!(merged.alpha3, Some(1.7));
        assert_eq!(merged.dt, Some(1e-2));
    }

    #[test]
    fn config_file_round_trips_and_rejects_unknown_keys() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# a comment").unwrap();
        writeln!(f, "alpha3 = 0.7   # trailing comment").unwrap();
        writeln!(f, "x0 = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7").unwrap();
        writeln!(f, "mode = double").unwrap();
        f.flush().unwrap();
        let p = parse_config_file(f.path()).unwrap();
        assert_eq!(p.alpha3, Some(0.7));
        assert_eq!(p.x0.as_ref().unwrap().len(), 7);
        assert_eq!(p.mode, Some(MonitorMode::Double));

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "alpha9 = 1").unwrap();
        g.flush().unwrap();
        let err = parse_config_file(g.path()).unwrap_err();
        assert!(matches!(err, CliError::Usage(ref m) if m.contains("alpha9")));
    }

    #[test]
    fn presets_match_their_captions() {
        // time-series triple: single probe, growing alpha3, 0.3/0.5 pattern
        for (name, a3) in [("fig2a", 0.2), ("fig2b", 0.7), ("fig2c", 1.7)] {
            let p = preset_params(name).unwrap();
            assert_eq!(p.alpha2, Some(0.0));
            assert_eq!(p.alpha3, Some(a3));
            assert_eq!(p.mode, Some(MonitorMode::Single));
            assert_eq!(p.total_time, Some(20.0));
            assert_eq!(
                p.x0.as_deref().unwrap(),
                &[0.3, 0.5, 0.3, 0.5, 0.3, 0.5, 0.3]
            );
            assert!(p.p0.is_none());
        }
        // two-probe triple: equal rates
        for (name, a) in [("fig5a", 0.1), ("fig5b", 0.7), ("fig5c", 1.7)] {
            let p = preset_params(name).unwrap();
            assert_eq!(p.alpha2, Some(a));
            assert_eq!(p.alpha3, Some(a));
            assert_eq!(p.mode, Some(MonitorMode::Double));
        }
        // single-probe portraits
        for (name, a3) in [("fig3", 0.1), ("fig4", 1.7)] {
            let p = preset_params(name).unwrap();
            assert_eq!(p.alpha3, Some(a3));
            assert_eq!(
                p.x0.as_deref().unwrap(),
                &[0.3, 0.4, 0.3, 0.4, 0.3, 0.4, 0.3]
            );
            assert_eq!(
                p.p0.as_deref().unwrap(),
                &[1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5]
            );
            assert_eq!(p.total_time, Some(20.0));
        }
        // two-probe portraits, t = 15, quarter-strength momenta
        for (name, a2, a3) in [("fig6", 0.1, 0.2), ("fig7", 1.9, 1.7)] {
            let p = preset_params(name).unwrap();
            assert_eq!(p.alpha2, Some(a2));
            assert_eq!(p.alpha3, Some(a3));
            assert_eq!(p.mode, Some(MonitorMode::Double));
            assert_eq!(
                p.x0.as_deref().unwrap(),
                &[0.35, 0.5, 0.35, 0.5, 0.35, 0.5, 0.35]
            );
            assert_eq!(
                p.p0.as_deref().unwrap(),
                &[0.25, -0.25, 0.25, -0.25, 0.25, -0.25, 0.25, -0.25]
            );
            assert_eq!(p.total_time, Some(15.0));
        }
        for name in PRESET_NAMES {
            assert_eq!(preset_params(name).unwrap().w12, Some(0.6));
        }
        assert!(preset_params("fig9").is_err());
    }

    #[test]
    fn seven_entry_starts_complete_eight_entry_starts_pass_through() {
        let p = Params::default();
        let std = p.initial_standard().unwrap();
        assert!((std[7] - 0.47258156262526).abs() < 1e-11);
        let flow = p.initial_flow().unwrap();
        assert_eq!(flow[7], std[7] / 2.0);

        let p = Params {
            x0: Some(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.25]),
            ..Params::default()
        };
        assert_eq!(p.initial_flow().unwrap()[7], 0.25);
        assert_eq!(p.initial_standard().unwrap()[7], 0.25);
    }
}
