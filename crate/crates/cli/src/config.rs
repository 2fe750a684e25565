//! Experiment configuration.
//!
//! One `key = value` pair per line, keys written `section.key` (a few keys
//! such as `experiment` and `seed` have no section). `#` starts a comment that
//! runs to the end of the line; blank lines are ignored. Lists are comma
//! separated. Every key that is not listed in [`KEYS`] is an error, and every
//! key has a default except `experiment`, `params.lambda` and `params.hbar`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use semiquantal::{GridSpec, SystemParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Eigen,
    Evolve,
    Ansatz,
    Duffing,
    Epsilon,
    Poposc,
    Crossover,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Self::Eigen,
        Self::Evolve,
        Self::Ansatz,
        Self::Duffing,
        Self::Epsilon,
        Self::Poposc,
        Self::Crossover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Eigen => "eigen",
            Self::Evolve => "evolve",
            Self::Ansatz => "ansatz",
            Self::Duffing => "duffing",
            Self::Epsilon => "epsilon",
            Self::Poposc => "poposc",
            Self::Crossover => "crossover",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Eigen => "lowest eigenpairs and ground doublet of the grid Hamiltonian",
            Self::Evolve => "split-operator run of a two-Gaussian packet, recording Q(t)",
            Self::Ansatz => "ansatz shape and tunneling splitting over a list of hbar values",
            Self::Duffing => "driven centroid trajectory, section and Lyapunov sweep",
            Self::Epsilon => "intra-well displacement dynamics",
            Self::Poposc => "population-imbalance oscillation against the exact doublet",
            Self::Crossover => "short and long Q(t) windows, spectra and Lyapunov exponents",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    None,
    Sinusoid,
    Replay,
}

impl DriveKind {
    fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Sinusoid => "sinusoid",
            Self::Replay => "replay",
        }
    }
}

impl FromStr for DriveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "sinusoid" => Ok(Self::Sinusoid),
            "replay" => Ok(Self::Replay),
            _ => Err(format!("unknown drive kind `{s}` (none, sinusoid, replay)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveConfig {
    pub kind: DriveKind,
    pub amplitude: f64,
    pub omega: f64,
    pub offset: f64,
    pub phase: f64,
    /// CSV with `t` and `q` columns, for replay drives.
    pub series: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateConfig {
    pub n1: f64,
    pub n2: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovConfig {
    pub dt: f64,
    pub renorm_every: usize,
    pub delta0: f64,
    /// Run length in periods of the fast drive `2π/√2`.
    pub periods: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverConfig {
    pub short_periods: f64,
    pub long_periods: f64,
    pub short_dt: f64,
    pub long_dt: f64,
    pub short_samples: usize,
    pub long_samples: usize,
    /// Fast-drive amplitudes in units of `(3/2)λa₀b₀²`.
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub params: SystemParams<f64>,
    pub grid: Option<GridConfig>,
    pub drive: DriveConfig,
    pub run: RunConfig,
    pub state: StateConfig,
    pub initial_x: Option<f64>,
    pub initial_v: f64,
    pub eigen_k: usize,
    pub ansatz_hbar_values: Vec<f64>,
    pub lyapunov: LyapunovConfig,
    pub duffing_amplitudes: Vec<f64>,
    pub duffing_ensemble: usize,
    pub poposc_pop_diff: f64,
    pub poposc_rate: f64,
    pub crossover: CrossoverConfig,
}

/// Every accepted key, in serialization order.
pub const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "output",
    "params.lambda",
    "params.hbar",
    "params.mass",
    "grid.x_min",
    "grid.x_max",
    "grid.n_points",
    "drive.kind",
    "drive.amplitude",
    "drive.omega",
    "drive.offset",
    "drive.phase",
    "drive.series",
    "run.dt",
    "run.t_end",
    "run.sample_every",
    "state.n1",
    "state.n2",
    "state.epsilon",
    "initial.x",
    "initial.v",
    "eigen.k",
    "ansatz.hbar_values",
    "lyapunov.dt",
    "lyapunov.renorm_every",
    "lyapunov.delta0",
    "lyapunov.periods",
    "duffing.amplitudes",
    "duffing.ensemble",
    "poposc.pop_diff",
    "poposc.rate",
    "crossover.short_periods",
    "crossover.long_periods",
    "crossover.short_dt",
    "crossover.long_dt",
    "crossover.short_samples",
    "crossover.long_samples",
    "crossover.sweep",
];

/// Raw values, indexed like [`KEYS`], each with its source line.
struct Raw {
    values: Vec<Option<(String, usize)>>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        let i = KEYS.iter().position(|k| *k == key).expect("known key");
        self.values[i].as_ref().map(|(v, l)| (v.as_str(), *l))
    }

    fn parse<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            Some((text, line)) => text
                .parse()
                .map_err(|e| ConfigError::new(key, Some(line), format!("cannot parse `{text}`: {e}"))),
            None => default.ok_or_else(|| ConfigError::new(key, None, "missing required key")),
        }
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            Some(_) => self.parse(key, None).map(Some),
            None => Ok(None),
        }
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let Some((text, line)) = self.get(key) else {
            return Ok(default.to_vec());
        };
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| ConfigError::new(key, Some(line), format!("cannot parse `{s}`: {e}")))
            })
            .collect()
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.get(key).map(|(_, l)| l)
    }
}

fn check(cond: bool, raw: &Raw, key: &str, message: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::new(key, raw.line(key), message))
    }
}

fn positive(raw: &Raw, key: &str, v: f64) -> Result<(), ConfigError> {
    check(v.is_finite() && v > 0.0, raw, key, "must be positive and finite")
}

fn lift(section: &str, raw: &Raw, e: semiquantal::Error) -> ConfigError {
    match e {
        semiquantal::Error::InvalidParameter { field, reason } => {
            let key = format!("{section}.{field}");
            let line = KEYS.iter().any(|k| *k == key).then(|| raw.line(&key)).flatten();
            ConfigError::new(key, line, reason)
        }
        other => ConfigError::new(section, None, other.to_string()),
    }
}

/// Parses and validates configuration text.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = Raw {
        values: vec![None; KEYS.len()],
    };
    for (index, line) in text.lines().enumerate() {
        let number = index + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::new(content, Some(number), "expected `key = value`"));
        };
        let key = key.trim();
        let Some(slot) = KEYS.iter().position(|k| *k == key) else {
            return Err(ConfigError::new(key, Some(number), "unknown key"));
        };
        if raw.values[slot].is_some() {
            return Err(ConfigError::new(key, Some(number), "key given twice"));
        }
        raw.values[slot] = Some((value.trim().to_string(), number));
    }

    let experiment: Experiment = raw.parse("experiment", None)?;
    let seed: u64 = raw.parse("seed", Some(0))?;
    let output = raw.optional::<PathBuf>("output")?;

    let params = SystemParams::new(
        raw.parse("params.lambda", None)?,
        raw.parse("params.hbar", None)?,
        raw.parse("params.mass", Some(1.0))?,
    )
    .map_err(|e| lift("params", &raw, e))?;

    let x_max: Option<f64> = raw.optional("grid.x_max")?;
    let x_min: Option<f64> = raw.optional("grid.x_min")?;
    let n_points: Option<usize> = raw.optional("grid.n_points")?;
    let grid = match (x_min, x_max, n_points) {
        (None, None, None) => None,
        (_, None, _) => return Err(ConfigError::new("grid.x_max", None, "required when a grid is given")),
        (x_min, Some(x_max), n) => {
            let g = GridConfig {
                x_min: x_min.unwrap_or(-x_max),
                x_max,
                n_points: n.unwrap_or(1024),
            };
            GridSpec::new(g.x_min, g.x_max, g.n_points).map_err(|e| lift("grid", &raw, e))?;
            Some(g)
        }
    };

    let drive = DriveConfig {
        kind: raw.parse("drive.kind", Some(DriveKind::None))?,
        amplitude: raw.parse("drive.amplitude", Some(0.0))?,
        omega: raw.parse("drive.omega", Some(std::f64::consts::SQRT_2))?,
        offset: raw.parse("drive.offset", Some(0.0))?,
        phase: raw.parse("drive.phase", Some(0.0))?,
        series: raw.optional("drive.series")?,
    };
    for key in ["drive.amplitude", "drive.omega", "drive.offset", "drive.phase"] {
        let v: f64 = raw.parse(key, Some(0.0))?;
        check(v.is_finite(), &raw, key, "must be finite")?;
    }
    check(
        drive.kind != DriveKind::Replay || drive.series.is_some(),
        &raw,
        "drive.series",
        "required for replay drives",
    )?;

    let run = RunConfig {
        dt: raw.parse("run.dt", Some(0.005))?,
        t_end: raw.parse("run.t_end", Some(100.0))?,
        sample_every: raw.parse("run.sample_every", Some(10))?,
    };
    positive(&raw, "run.dt", run.dt)?;
    positive(&raw, "run.t_end", run.t_end)?;
    check(run.sample_every > 0, &raw, "run.sample_every", "must be at least 1")?;
    if matches!(experiment, Experiment::Duffing | Experiment::Epsilon) {
        check(
            run.dt <= semiquantal::reduced::MAX_STEP,
            &raw,
            "run.dt",
            "must not exceed 0.01 for the centroid integrator",
        )?;
    }

    let state = StateConfig {
        n1: raw.parse("state.n1", Some(1.0))?,
        n2: raw.parse("state.n2", Some(0.0))?,
        epsilon: raw.parse("state.epsilon", Some(0.1))?,
    };
    check(
        state.n1.is_finite() && state.n2.is_finite() && (state.n1 != 0.0 || state.n2 != 0.0),
        &raw,
        "state.n1",
        "amplitudes must be finite and not both zero",
    )?;
    check(state.epsilon.is_finite(), &raw, "state.epsilon", "must be finite")?;

    let initial_x: Option<f64> = raw.optional("initial.x")?;
    let initial_v: f64 = raw.parse("initial.v", Some(0.0))?;
    check(initial_x.map_or(true, f64::is_finite), &raw, "initial.x", "must be finite")?;
    check(initial_v.is_finite(), &raw, "initial.v", "must be finite")?;

    let eigen_k: usize = raw.parse("eigen.k", Some(4))?;
    check(
        (1..=semiquantal::eigen::MAX_EIGENPAIRS).contains(&eigen_k),
        &raw,
        "eigen.k",
        "must lie in 1..=16",
    )?;

    let ansatz_hbar_values = raw.list("ansatz.hbar_values", &[0.05, 0.08, 0.12, 0.16, 0.2])?;
    check(
        !ansatz_hbar_values.is_empty() && ansatz_hbar_values.iter().all(|h| h.is_finite() && *h > 0.0),
        &raw,
        "ansatz.hbar_values",
        "must be a non-empty list of positive values",
    )?;

    let lyapunov = LyapunovConfig {
        dt: raw.parse("lyapunov.dt", Some(0.005))?,
        renorm_every: raw.parse("lyapunov.renorm_every", Some(10))?,
        delta0: raw.parse("lyapunov.delta0", Some(1e-8))?,
        periods: raw.parse("lyapunov.periods", Some(2000.0))?,
    };
    check(
        lyapunov.dt > 0.0 && lyapunov.dt <= semiquantal::reduced::MAX_STEP,
        &raw,
        "lyapunov.dt",
        "must lie in (0, 0.01]",
    )?;
    check(lyapunov.renorm_every > 0, &raw, "lyapunov.renorm_every", "must be at least 1")?;
    check(
        (1e-9..=1e-6).contains(&lyapunov.delta0),
        &raw,
        "lyapunov.delta0",
        "must lie in [1e-9, 1e-6]",
    )?;
    positive(&raw, "lyapunov.periods", lyapunov.periods)?;

    let duffing_amplitudes = raw.list("duffing.amplitudes", &[])?;
    check(
        duffing_amplitudes.iter().all(|a| a.is_finite()),
        &raw,
        "duffing.amplitudes",
        "must be finite",
    )?;
    let duffing_ensemble: usize = raw.parse("duffing.ensemble", Some(0))?;

    let poposc_pop_diff: f64 = raw.parse("poposc.pop_diff", Some(1.0))?;
    let poposc_rate: f64 = raw.parse("poposc.rate", Some(0.0))?;
    check(poposc_pop_diff.abs() <= 1.0, &raw, "poposc.pop_diff", "must lie in [-1, 1]")?;
    check(poposc_rate.is_finite(), &raw, "poposc.rate", "must be finite")?;

    let crossover = CrossoverConfig {
        short_periods: raw.parse("crossover.short_periods", Some(20.0))?,
        long_periods: raw.parse("crossover.long_periods", Some(3.0))?,
        short_dt: raw.parse("crossover.short_dt", Some(0.002))?,
        long_dt: raw.parse("crossover.long_dt", Some(0.05))?,
        short_samples: raw.parse("crossover.short_samples", Some(2048))?,
        long_samples: raw.parse("crossover.long_samples", Some(131072))?,
        sweep: raw.list("crossover.sweep", &[0.5, 1.0, 2.0, 3.0, 4.0])?,
    };
    for (key, v) in [
        ("crossover.short_periods", crossover.short_periods),
        ("crossover.long_periods", crossover.long_periods),
        ("crossover.short_dt", crossover.short_dt),
        ("crossover.long_dt", crossover.long_dt),
    ] {
        positive(&raw, key, v)?;
    }
    for (key, v) in [
        ("crossover.short_samples", crossover.short_samples),
        ("crossover.long_samples", crossover.long_samples),
    ] {
        check(
            v >= semiquantal::chaos::MIN_SPECTRUM_SAMPLES,
            &raw,
            key,
            "must be at least 256 for a spectrum",
        )?;
    }
    check(
        crossover.sweep.iter().all(|f| f.is_finite()),
        &raw,
        "crossover.sweep",
        "must be finite",
    )?;

    Ok(ExperimentConfig {
        experiment,
        seed,
        output,
        params,
        grid,
        drive,
        run,
        state,
        initial_x,
        initial_v,
        eigen_k,
        ansatz_hbar_values,
        lyapunov,
        duffing_amplitudes,
        duffing_ensemble,
        poposc_pop_diff,
        poposc_rate,
        crossover,
    })
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Canonical text form; parsing it gives back an equal configuration.
    pub fn to_text(&self) -> String {
        let mut pairs: Vec<(&str, String)> = vec![
            ("experiment", self.experiment.name().to_string()),
            ("seed", self.seed.to_string()),
        ];
        if let Some(out) = &self.output {
            pairs.push(("output", out.display().to_string()));
        }
        pairs.extend([
            ("params.lambda", self.params.lambda().to_string()),
            ("params.hbar", self.params.hbar().to_string()),
            ("params.mass", self.params.mass().to_string()),
        ]);
        if let Some(g) = &self.grid {
            pairs.extend([
                ("grid.x_min", g.x_min.to_string()),
                ("grid.x_max", g.x_max.to_string()),
                ("grid.n_points", g.n_points.to_string()),
            ]);
        }
        let d = &self.drive;
        pairs.extend([
            ("drive.kind", d.kind.name().to_string()),
            ("drive.amplitude", d.amplitude.to_string()),
            ("drive.omega", d.omega.to_string()),
            ("drive.offset", d.offset.to_string()),
            ("drive.phase", d.phase.to_string()),
        ]);
        if let Some(s) = &d.series {
            pairs.push(("drive.series", s.display().to_string()));
        }
        pairs.extend([
            ("run.dt", self.run.dt.to_string()),
            ("run.t_end", self.run.t_end.to_string()),
            ("run.sample_every", self.run.sample_every.to_string()),
            ("state.n1", self.state.n1.to_string()),
            ("state.n2", self.state.n2.to_string()),
            ("state.epsilon", self.state.epsilon.to_string()),
        ]);
        if let Some(x) = self.initial_x {
            pairs.push(("initial.x", x.to_string()));
        }
        let l = &self.lyapunov;
        let c = &self.crossover;
        pairs.extend([
            ("initial.v", self.initial_v.to_string()),
            ("eigen.k", self.eigen_k.to_string()),
            ("ansatz.hbar_values", join(&self.ansatz_hbar_values)),
            ("lyapunov.dt", l.dt.to_string()),
            ("lyapunov.renorm_every", l.renorm_every.to_string()),
            ("lyapunov.delta0", l.delta0.to_string()),
            ("lyapunov.periods", l.periods.to_string()),
            ("duffing.amplitudes", join(&self.duffing_amplitudes)),
            ("duffing.ensemble", self.duffing_ensemble.to_string()),
            ("poposc.pop_diff", self.poposc_pop_diff.to_string()),
            ("poposc.rate", self.poposc_rate.to_string()),
            ("crossover.short_periods", c.short_periods.to_string()),
            ("crossover.long_periods", c.long_periods.to_string()),
            ("crossover.short_dt", c.short_dt.to_string()),
            ("crossover.long_dt", c.long_dt.to_string()),
            ("crossover.short_samples", c.short_samples.to_string()),
            ("crossover.long_samples", c.long_samples.to_string()),
            ("crossover.sweep", join(&c.sweep)),
        ]);
        let mut text = String::new();
        for (k, v) in pairs {
            text.push_str(k);
            text.push_str(" = ");
            text.push_str(&v);
            text.push('\n');
        }
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "experiment = eigen\nparams.lambda = 0.2\nparams.hbar = 0.3\n";

    #[test]
    fn minimal_config_parses() {
        let c = validate_config(MINIMAL).unwrap();
        assert_eq!(c.experiment, Experiment::Eigen);
        assert_eq!(c.params.mass(), 1.0);
        assert!(c.grid.is_none());
    }

    #[test]
    fn negative_lambda_names_field() {
        let e = validate_config("experiment = eigen\nparams.lambda = -1\nparams.hbar = 0.3\n").unwrap_err();
        assert_eq!(e.field, "params.lambda");
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn bad_grid_names_field() {
        let text = format!("{MINIMAL}grid.x_max = 6\ngrid.n_points = 1000\n");
        let e = validate_config(&text).unwrap_err();
        assert_eq!(e.field, "grid.n_points");
        assert_eq!(e.line, Some(5));
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        let e = validate_config(&format!("{MINIMAL}params.gamma = 1\n")).unwrap_err();
        assert_eq!(e.field, "params.gamma");
        let e = validate_config(&format!("{MINIMAL}params.hbar = 0.4\n")).unwrap_err();
        assert!(e.message.contains("twice"));
        assert!(validate_config("experiment = nope\nparams.lambda = 1\nparams.hbar = 1\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\nexperiment = eigen # trailing\nparams.lambda = 0.2\n  params.hbar=0.3\n";
        assert!(validate_config(text).is_ok());
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "experiment = crossover\nseed = 42\nparams.lambda = 0.123456789012345\nparams.hbar = 0.4\n\
                    grid.x_max = 6.1\ngrid.n_points = 2048\ndrive.kind = sinusoid\ndrive.amplitude = 1e-3\n\
                    duffing.amplitudes = 0.1, 0.2\ninitial.x = 2.5\noutput = out dir/run\n";
        let a = validate_config(text).unwrap();
        let b = validate_config(&a.to_text()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn centroid_step_limit_enforced() {
        let text = "experiment = duffing\nparams.lambda = 0.2\nparams.hbar = 0.3\nrun.dt = 0.02\n";
        assert_eq!(validate_config(text).unwrap_err().field, "run.dt");
    }
}
