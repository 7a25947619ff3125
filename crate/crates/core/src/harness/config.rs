use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bench::{parse_suite, BenchSpec, Family};
use crate::calibration::CalibrationConfig;
use crate::derive_seed;
use crate::device::{
    build_topology, DriftParams, Topology, TopologyPreset, DEFAULT_BAD_FRACTION, DEFAULT_ELEMENT_SPREAD,
    DEFAULT_GATE_1Q_MEAN, DEFAULT_GATE_2Q_MEAN, DEFAULT_READOUT_ASYMMETRY, DEFAULT_READOUT_MEAN,
    DEFAULT_REVERSION_RATE, DEFAULT_VOLATILITY,
};

use super::HarnessError;

/// Queueing regime between calibration and execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Shared queue: delay drawn per run from [`FAIRSHARE_DELAY_MIN`].
    Fairshare,
    /// Reserved device: calibration and both benchmark jobs back to back.
    Dedicated,
    /// Fixed `jit_delay_min`, which must be set.
    Custom,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fairshare => "fairshare",
            Mode::Dedicated => "dedicated",
            Mode::Custom => "custom",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fairshare" => Ok(Mode::Fairshare),
            "dedicated" => Ok(Mode::Dedicated),
            "custom" => Ok(Mode::Custom),
            _ => Err(format!("unknown mode `{s}` (expected fairshare, dedicated or custom)")),
        }
    }
}

/// Where the just-in-time snapshot comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JitSource {
    /// A calibration job run on the simulated device.
    Calibrated,
    /// The ground truth at calibration time, with no estimation error.
    Oracle,
}

impl fmt::Display for JitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JitSource::Calibrated => "calibrated",
            JitSource::Oracle => "oracle",
        })
    }
}

impl FromStr for JitSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "calibrated" => Ok(JitSource::Calibrated),
            "oracle" => Ok(JitSource::Oracle),
            _ => Err(format!("unknown jit_source `{s}` (expected calibrated or oracle)")),
        }
    }
}

/// Range of the per-run calibration-to-execution delay in fairshare mode.
pub const FAIRSHARE_DELAY_MIN: (f64, f64) = (39.0, 120.0);
/// Calibration-to-execution delay in dedicated mode.
pub const DEDICATED_DELAY_MIN: f64 = 10.0;

/// Drift settings as they appear in a config file.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DriftConfig {
    pub readout_mean: f64,
    pub readout_asymmetry: f64,
    pub gate_1q_mean: f64,
    pub gate_2q_mean: f64,
    pub reversion_rate: f64,
    pub volatility: f64,
    pub element_spread: f64,
    pub bad_fraction: f64,
    /// Drift seed; derived from the master seed when unset.
    pub seed: Option<u64>,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            readout_mean: DEFAULT_READOUT_MEAN,
            readout_asymmetry: DEFAULT_READOUT_ASYMMETRY,
            gate_1q_mean: DEFAULT_GATE_1Q_MEAN,
            gate_2q_mean: DEFAULT_GATE_2Q_MEAN,
            reversion_rate: DEFAULT_REVERSION_RATE,
            volatility: DEFAULT_VOLATILITY,
            element_spread: DEFAULT_ELEMENT_SPREAD,
            bad_fraction: DEFAULT_BAD_FRACTION,
            seed: None,
        }
    }
}

impl DriftConfig {
    pub fn params(&self, master_seed: u64) -> DriftParams {
        DriftParams::with_means(
            self.readout_mean,
            self.readout_asymmetry,
            self.gate_1q_mean,
            self.gate_2q_mean,
            self.reversion_rate,
            self.volatility,
            self.element_spread,
        )
        .with_bad_fraction(self.bad_fraction)
        .with_seed(self.seed.unwrap_or_else(|| derive_seed(master_seed, 0xD41F)))
    }
}

/// Where the coupling graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceSource {
    Preset(TopologyPreset),
    /// Edge-list file, one `i j` pair per line.
    EdgeFile(PathBuf),
}

impl fmt::Display for DeviceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceSource::Preset(p) => write!(f, "{p}"),
            DeviceSource::EdgeFile(p) => write!(f, "@{}", p.display()),
        }
    }
}

impl FromStr for DeviceSource {
    type Err = String;
    /// A preset name, or `@path` for an edge-list file.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix('@') {
            Some(path) => Ok(DeviceSource::EdgeFile(PathBuf::from(path))),
            None => s.parse().map(DeviceSource::Preset).map_err(|e| format!("{e}")),
        }
    }
}

impl DeviceSource {
    pub fn topology(&self) -> Result<Topology, HarnessError> {
        match self {
            DeviceSource::Preset(p) => Ok(build_topology(p)?),
            DeviceSource::EdgeFile(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Io { path: path.clone(), msg: e.to_string() })?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Ok(Topology::parse_edge_list(name, &text)?)
            }
        }
    }
}

/// Everything a scenario, probe or calibration run needs. Every field has
/// a default; see [`ScenarioConfig::parse`] for the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub device: DeviceSource,
    pub drift: DriftConfig,
    pub mode: Mode,
    /// Age of the calibration-of-the-day baseline at execution time.
    pub cotd_age_min: f64,
    /// Fixed calibration-to-execution delay; overrides the mode default.
    pub jit_delay_min: Option<f64>,
    pub jit_source: JitSource,
    pub runs: usize,
    /// Simulated time the runs are spread over.
    pub span_min: f64,
    pub shots: u64,
    pub suite: Vec<BenchSpec>,
    pub seed: u64,
    pub level: u8,
    pub calibration: CalibrationConfig,
    pub probe_span_min: f64,
    pub probe_interval_min: f64,
    pub probe_shots: u64,
}

/// Suite of the primary just-in-time experiment.
pub fn default_experiment_suite() -> Vec<BenchSpec> {
    vec![
        BenchSpec::new(Family::Bv, 4),
        BenchSpec::new(Family::HiddenShift, 4),
        BenchSpec::new(Family::HiddenShift, 6),
        BenchSpec::new(Family::Qft, 4),
        BenchSpec::new(Family::Toffoli, 2),
        BenchSpec::new(Family::Adder, 2),
    ]
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            device: DeviceSource::Preset(TopologyPreset::Paris27),
            drift: DriftConfig::default(),
            mode: Mode::Dedicated,
            cotd_age_min: 600.0,
            jit_delay_min: None,
            jit_source: JitSource::Calibrated,
            runs: 8,
            span_min: 24.0 * 60.0,
            shots: 4096,
            suite: default_experiment_suite(),
            seed: 0,
            level: 3,
            calibration: CalibrationConfig::default(),
            probe_span_min: 24.0 * 60.0,
            probe_interval_min: 60.0,
            probe_shots: 4096,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, HarnessError> {
    value.parse().map_err(|_| HarnessError::Config { line, msg: format!("bad value `{value}` for `{key}`") })
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<usize>, HarnessError> {
    value.split(',').map(|v| parse_value(line, key, v.trim())).collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl ScenarioConfig {
    /// Parses a flat `key = value` document. Blank lines and `#` comments
    /// are ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| HarnessError::Config { line, msg: format!("expected `key = value`, got `{content}`") })?;
            if !seen.insert(key.to_string()) {
                return Err(HarnessError::Config { line, msg: format!("`{key}` set twice") });
            }
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), HarnessError> {
        let cfg_err = |msg: String| HarnessError::Config { line, msg };
        match key {
            "device" => self.device = value.parse().map_err(cfg_err)?,
            "mode" => self.mode = value.parse().map_err(cfg_err)?,
            "cotd_age_min" => self.cotd_age_min = parse_value(line, key, value)?,
            "jit_delay_min" => self.jit_delay_min = Some(parse_value(line, key, value)?),
            "jit_source" => self.jit_source = value.parse().map_err(cfg_err)?,
            "runs" => self.runs = parse_value(line, key, value)?,
            "span_min" => self.span_min = parse_value(line, key, value)?,
            "shots" => self.shots = parse_value(line, key, value)?,
            "suite" => self.suite = parse_suite(value).map_err(|e| cfg_err(e.to_string()))?,
            "seed" => self.seed = parse_value(line, key, value)?,
            "level" => self.level = parse_value(line, key, value)?,
            "drift_seed" => self.drift.seed = Some(parse_value(line, key, value)?),
            "readout_mean" => self.drift.readout_mean = parse_value(line, key, value)?,
            "readout_asymmetry" => self.drift.readout_asymmetry = parse_value(line, key, value)?,
            "gate_1q_mean" => self.drift.gate_1q_mean = parse_value(line, key, value)?,
            "gate_2q_mean" => self.drift.gate_2q_mean = parse_value(line, key, value)?,
            "reversion_rate" => self.drift.reversion_rate = parse_value(line, key, value)?,
            "volatility" => self.drift.volatility = parse_value(line, key, value)?,
            "element_spread" => self.drift.element_spread = parse_value(line, key, value)?,
            "bad_fraction" => self.drift.bad_fraction = parse_value(line, key, value)?,
            "readout_shots" => self.calibration.readout_shots = parse_value(line, key, value)?,
            "rb_shots" => self.calibration.rb_shots = parse_value(line, key, value)?,
            "rb_lengths" => self.calibration.rb_lengths = parse_list(line, key, value)?,
            "rb_samples" => self.calibration.rb_samples = parse_value(line, key, value)?,
            "prior_1q" => self.calibration.prior_1q = parse_value(line, key, value)?,
            "fixed_floor" => self.calibration.fixed_floor = parse_value(line, key, value)?,
            "probe_span_min" => self.probe_span_min = parse_value(line, key, value)?,
            "probe_interval_min" => self.probe_interval_min = parse_value(line, key, value)?,
            "probe_shots" => self.probe_shots = parse_value(line, key, value)?,
            _ => return Err(HarnessError::UnknownKey { line, key: key.to_string() }),
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let d = &self.drift;
        let c = &self.calibration;
        let mut lines = vec![
            format!("device = {}", self.device),
            format!("mode = {}", self.mode),
            format!("cotd_age_min = {}", self.cotd_age_min),
        ];
        if let Some(delay) = self.jit_delay_min {
            lines.push(format!("jit_delay_min = {delay}"));
        }
        lines.extend([
            format!("jit_source = {}", self.jit_source),
            format!("runs = {}", self.runs),
            format!("span_min = {}", self.span_min),
            format!("shots = {}", self.shots),
            format!("suite = {}", join(&self.suite)),
            format!("seed = {}", self.seed),
            format!("level = {}", self.level),
        ]);
        if let Some(s) = d.seed {
            lines.push(format!("drift_seed = {s}"));
        }
        lines.extend([
            format!("readout_mean = {}", d.readout_mean),
            format!("readout_asymmetry = {}", d.readout_asymmetry),
            format!("gate_1q_mean = {}", d.gate_1q_mean),
            format!("gate_2q_mean = {}", d.gate_2q_mean),
            format!("reversion_rate = {}", d.reversion_rate),
            format!("volatility = {}", d.volatility),
            format!("element_spread = {}", d.element_spread),
            format!("bad_fraction = {}", d.bad_fraction),
            format!("readout_shots = {}", c.readout_shots),
            format!("rb_shots = {}", c.rb_shots),
            format!("rb_lengths = {}", join(&c.rb_lengths)),
            format!("rb_samples = {}", c.rb_samples),
            format!("prior_1q = {}", c.prior_1q),
            format!("fixed_floor = {}", c.fixed_floor),
            format!("probe_span_min = {}", self.probe_span_min),
            format!("probe_interval_min = {}", self.probe_interval_min),
            format!("probe_shots = {}", self.probe_shots),
        ]);
        lines.join("\n") + "\n"
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |m: &str| Err(HarnessError::Invalid(m.to_string()));
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if self.runs == 0 {
            return invalid("runs must be at least 1");
        }
        if self.shots == 0 || self.calibration.readout_shots == 0 || self.calibration.rb_shots == 0 || self.probe_shots == 0 {
            return invalid("shot counts must be at least 1");
        }
        if !non_negative(self.cotd_age_min) || !non_negative(self.span_min) || !non_negative(self.probe_span_min) {
            return invalid("times must be non-negative");
        }
        if !(self.probe_interval_min.is_finite() && self.probe_interval_min > 0.0) {
            return invalid("probe_interval_min must be positive");
        }
        match self.jit_delay_min {
            Some(d) if !non_negative(d) => return invalid("jit_delay_min must be non-negative"),
            None if self.mode == Mode::Custom => return invalid("custom mode needs jit_delay_min"),
            _ => {}
        }
        if self.level > 3 {
            return invalid("level must be in 0..=3");
        }
        if self.suite.is_empty() {
            return invalid("suite is empty");
        }
        if self.calibration.rb_samples == 0 || self.calibration.rb_lengths.len() < 3 {
            return invalid("RB needs at least 3 lengths and 1 sample");
        }
        self.drift.params(self.seed).validate()?;
        Ok(())
    }
}
