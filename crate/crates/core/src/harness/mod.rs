//! Scenario orchestration: drifting device, calibration jobs, stale versus
//! just-in-time transpilation, execution and reporting.

mod config;
mod heatmap;
mod report;
mod stats;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    default_experiment_suite, DeviceSource, DriftConfig, JitSource, Mode, ScenarioConfig, DEDICATED_DELAY_MIN,
    FAIRSHARE_DELAY_MIN,
};
pub use heatmap::{emit_heatmap, ramp_color};
pub use report::{emit_report, write_report, ReportFormat, CSV_HEADER};
pub use stats::TTest;

use crate::bench::{accuracy, BenchError, BenchmarkInstance};
use crate::calibration::{calibrate, readout_cal_circuits, CalibrationError, CalibrationSnapshot, SnapshotOrigin};
use crate::derive_seed;
use crate::device::{DeviceError, GroundTruthNoise};
use crate::sim::{run_noisy, ExecutionSpec, SimError};
use crate::transpiler::{transpile, TranspileError, TranspiledCircuit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("qubit {0} is not on the device")]
    UnknownQubit(usize),
    #[error("{}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Transpile(#[from] TranspileError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

impl HarnessError {
    /// True for errors caused by user input rather than a fault in the
    /// pipeline.
    pub fn is_validation(&self) -> bool {
        match self {
            HarnessError::Config { .. }
            | HarnessError::UnknownKey { .. }
            | HarnessError::Invalid(_)
            | HarnessError::UnknownQubit(_)
            | HarnessError::Device(_)
            | HarnessError::Bench(_) => true,
            HarnessError::Calibration(e) => !matches!(e, CalibrationError::Sim(_)),
            HarnessError::Transpile(e) => !matches!(e, TranspileError::NonBasisGate(_)),
            HarnessError::Io { .. } | HarnessError::Sim(_) => false,
        }
    }
}

/// One arm (stale or just-in-time) of one benchmark in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    /// Minutes between the snapshot and execution.
    pub snapshot_age_min: f64,
    pub snapshot_origin: SnapshotOrigin,
    pub layout: Vec<usize>,
    pub layout_id: String,
    /// Layout score under the snapshot the arm was transpiled against.
    pub cost: f64,
    pub swaps: usize,
    pub seed: u64,
    pub accuracy: f64,
}

/// Result for one (run, benchmark) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub run_index: usize,
    pub exec_time_min: f64,
    pub calibration_time_min: f64,
    pub benchmark: String,
    pub n: usize,
    pub param: String,
    pub expected: String,
    pub baseline: ArmResult,
    pub jit: ArmResult,
    /// `(jit − baseline) / baseline`; `None` when the baseline is 0.
    pub rel_improvement: Option<f64>,
}

/// Per-benchmark aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub benchmark: String,
    pub mean_accuracy_baseline: f64,
    pub mean_accuracy_jit: f64,
    /// Mean over runs with a non-zero baseline.
    pub mean_rel_improvement: Option<f64>,
    /// Fraction of runs where the just-in-time arm scored higher.
    pub win_rate: f64,
    /// Relative improvement of every run, in run order.
    pub improvements: Vec<Option<f64>>,
    /// Distinct just-in-time layouts across runs.
    pub distinct_jit_layouts: usize,
}

/// Output of [`run_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub device: String,
    pub mode: Mode,
    pub jit_source: JitSource,
    pub seed: u64,
    pub drift_seed: u64,
    pub runs: usize,
    pub shots: u64,
    pub level: u8,
    pub cotd_age_min: f64,
    pub cells: Vec<CellResult>,
    pub benchmarks: Vec<BenchmarkSummary>,
    pub mean_rel_improvement: Option<f64>,
    pub win_rate: f64,
    /// Paired test of just-in-time accuracy above baseline accuracy.
    pub accuracy_test: TTest,
    /// One-sample test of the relative improvements.
    pub improvement_test: TTest,
}

impl ExperimentReport {
    /// Parses the structured report format.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Invalid(format!("not a structured report: {e}")))
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Execution timestamp of every run: evenly spread over `span_min`,
/// starting late enough that the stale snapshot and the calibration both
/// fall at non-negative times.
fn schedule(cfg: &ScenarioConfig) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xDE1A));
    let max_delay = match (cfg.jit_delay_min, cfg.mode) {
        (Some(d), _) => d,
        (None, Mode::Fairshare) => FAIRSHARE_DELAY_MIN.1,
        (None, _) => DEDICATED_DELAY_MIN,
    };
    let start = cfg.cotd_age_min.max(max_delay);
    let step = cfg.span_min / cfg.runs as f64;
    (0..cfg.runs)
        .map(|r| {
            let delay = match (cfg.jit_delay_min, cfg.mode) {
                (Some(d), _) => d,
                (None, Mode::Fairshare) => rng.random_range(FAIRSHARE_DELAY_MIN.0..=FAIRSHARE_DELAY_MIN.1),
                (None, _) => DEDICATED_DELAY_MIN,
            };
            (start + step * r as f64, delay)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    CaptureStale,
    Calibrate,
    Execute,
}

fn execute_arm(
    inst: &BenchmarkInstance,
    t: &TranspiledCircuit,
    snapshot: &CalibrationSnapshot,
    noise: &GroundTruthNoise,
    shots: u64,
    seed: u64,
) -> Result<ArmResult, HarnessError> {
    let exec_time_min = noise.clock_min();
    let counts = run_noisy(&ExecutionSpec { circuit: t.physical_circuit.clone(), shots, seed, exec_time_min }, noise)?;
    Ok(ArmResult {
        snapshot_age_min: exec_time_min - snapshot.timestamp_min,
        snapshot_origin: snapshot.origin,
        layout: t.initial_layout.as_slice().to_vec(),
        layout_id: t.initial_layout.layout_id(),
        cost: t.cost,
        swaps: t.swaps,
        seed,
        accuracy: accuracy(&counts, &inst.expected)?,
    })
}

/// Runs the stale-versus-just-in-time experiment.
///
/// Per run: the ground truth `cotd_age_min` before execution is captured
/// as the stale baseline; a calibration job runs `jit_delay` before
/// execution; every benchmark is transpiled against both snapshots and
/// both circuits execute on the same device state with different seeds.
/// Events across runs are processed in time order on one drifting device.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let topology = cfg.device.topology()?;
    let drift = cfg.drift.params(cfg.seed);
    let mut noise = GroundTruthNoise::init(&topology, &drift)?;
    let instances: Vec<BenchmarkInstance> = cfg
        .suite
        .iter()
        .enumerate()
        .map(|(i, spec)| spec.instantiate_seeded(derive_seed(cfg.seed, 0xBE7C_0000 + i as u64)))
        .collect::<Result<_, _>>()?;

    let times = schedule(cfg);
    let mut events: Vec<(f64, Event, usize)> = Vec::with_capacity(3 * cfg.runs);
    for (r, &(exec, delay)) in times.iter().enumerate() {
        events.push((exec - cfg.cotd_age_min, Event::CaptureStale, r));
        events.push((exec - delay, Event::Calibrate, r));
        events.push((exec, Event::Execute, r));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut stale: Vec<Option<CalibrationSnapshot>> = vec![None; cfg.runs];
    let mut fresh: Vec<Option<CalibrationSnapshot>> = vec![None; cfg.runs];
    let mut cells = Vec::with_capacity(cfg.runs * instances.len());
    for (time, event, r) in events {
        noise.advance_to(time)?;
        match event {
            Event::CaptureStale => {
                let mut snap = noise.true_snapshot();
                snap.origin = SnapshotOrigin::CotdImport;
                stale[r] = Some(snap);
            }
            Event::Calibrate => {
                fresh[r] = Some(match cfg.jit_source {
                    JitSource::Calibrated => {
                        calibrate(&noise, &cfg.calibration, derive_seed(cfg.seed, 0xCA1B_0000 + r as u64))?.snapshot
                    }
                    JitSource::Oracle => noise.true_snapshot(),
                });
            }
            Event::Execute => {
                let base_snap = stale[r].take().expect("stale snapshot precedes execution");
                let jit_snap = fresh[r].take().expect("calibration precedes execution");
                for (b, inst) in instances.iter().enumerate() {
                    let tag = ((r as u64) << 20) | ((b as u64) << 2);
                    let tseed = derive_seed(cfg.seed, 0x7A45_0000_0000 | tag);
                    let t_base = transpile(&inst.circuit, &topology, &base_snap, cfg.level, tseed)?;
                    let t_jit = transpile(&inst.circuit, &topology, &jit_snap, cfg.level, tseed)?;
                    let baseline = execute_arm(inst, &t_base, &base_snap, &noise, cfg.shots, derive_seed(cfg.seed, tag | 1))?;
                    let jit = execute_arm(inst, &t_jit, &jit_snap, &noise, cfg.shots, derive_seed(cfg.seed, tag | 2))?;
                    // Both arms must see the same device state.
                    assert_eq!(noise.clock_min(), time);
                    let rel_improvement = (baseline.accuracy > 0.0)
                        .then(|| (jit.accuracy - baseline.accuracy) / baseline.accuracy);
                    cells.push(CellResult {
                        run_index: r,
                        exec_time_min: time,
                        calibration_time_min: jit_snap.timestamp_min,
                        benchmark: inst.label(),
                        n: inst.n,
                        param: inst.param.clone(),
                        expected: inst.expected.clone(),
                        baseline,
                        jit,
                        rel_improvement,
                    });
                }
            }
        }
    }
    cells.sort_by_key(|c| c.run_index);
    Ok(summarize(cfg, &topology.name().to_string(), drift.seed, cells, &instances))
}

fn summarize(
    cfg: &ScenarioConfig,
    device: &str,
    drift_seed: u64,
    cells: Vec<CellResult>,
    instances: &[BenchmarkInstance],
) -> ExperimentReport {
    let benchmarks = instances
        .iter()
        .map(|inst| {
            let label = inst.label();
            let mine: Vec<&CellResult> = cells.iter().filter(|c| c.benchmark == label).collect();
            let rels: Vec<f64> = mine.iter().filter_map(|c| c.rel_improvement).collect();
            let wins = mine.iter().filter(|c| c.jit.accuracy > c.baseline.accuracy).count();
            let ids: std::collections::BTreeSet<&str> = mine.iter().map(|c| c.jit.layout_id.as_str()).collect();
            BenchmarkSummary {
                benchmark: label,
                mean_accuracy_baseline: mean(&mine.iter().map(|c| c.baseline.accuracy).collect::<Vec<_>>()),
                mean_accuracy_jit: mean(&mine.iter().map(|c| c.jit.accuracy).collect::<Vec<_>>()),
                mean_rel_improvement: (!rels.is_empty()).then(|| mean(&rels)),
                win_rate: wins as f64 / mine.len().max(1) as f64,
                improvements: mine.iter().map(|c| c.rel_improvement).collect(),
                distinct_jit_layouts: ids.len(),
            }
        })
        .collect();
    let rels: Vec<f64> = cells.iter().filter_map(|c| c.rel_improvement).collect();
    let jit: Vec<f64> = cells.iter().map(|c| c.jit.accuracy).collect();
    let base: Vec<f64> = cells.iter().map(|c| c.baseline.accuracy).collect();
    let wins = cells.iter().filter(|c| c.jit.accuracy > c.baseline.accuracy).count();
    ExperimentReport {
        device: device.to_string(),
        mode: cfg.mode,
        jit_source: cfg.jit_source,
        seed: cfg.seed,
        drift_seed,
        runs: cfg.runs,
        shots: cfg.shots,
        level: cfg.level,
        cotd_age_min: cfg.cotd_age_min,
        win_rate: wins as f64 / cells.len().max(1) as f64,
        mean_rel_improvement: (!rels.is_empty()).then(|| mean(&rels)),
        accuracy_test: TTest::paired(&jit, &base),
        improvement_test: TTest::of(&rels),
        benchmarks,
        cells,
    }
}

/// Hourly readout probe of every qubit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSeries {
    pub device: String,
    pub times_min: Vec<f64>,
    /// `[time][qubit]` fraction of |0⟩-probe shots read as 0.
    pub zero_accuracy: Vec<Vec<f64>>,
    /// `[time][qubit]` fraction of X-probe shots read as 1.
    pub one_accuracy: Vec<Vec<f64>>,
    pub persistent_bad_qubits: Vec<usize>,
}

impl ProbeSeries {
    /// Mean of both probes for qubit `q` over time.
    pub fn qubit_mean(&self, q: usize) -> f64 {
        let v: Vec<f64> = self.zero_accuracy.iter().zip(&self.one_accuracy).map(|(z, o)| 0.5 * (z[q] + o[q])).collect();
        mean(&v)
    }

    /// Tab-separated table: `time_min qubit zero_accuracy one_accuracy`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("time_min\tqubit\tzero_accuracy\tone_accuracy\n");
        for (i, t) in self.times_min.iter().enumerate() {
            for q in 0..self.zero_accuracy[i].len() {
                out.push_str(&format!("{t:.1}\t{q}\t{:.6}\t{:.6}\n", self.zero_accuracy[i][q], self.one_accuracy[i][q]));
            }
        }
        out
    }
}

/// Runs both readout probes on `noise` every `interval_min` from its
/// current clock through `span_min` later.
pub fn probe_noise(
    noise: &mut GroundTruthNoise,
    span_min: f64,
    interval_min: f64,
    shots: u64,
    seed: u64,
) -> Result<ProbeSeries, HarnessError> {
    if !(interval_min > 0.0) {
        return Err(HarnessError::Invalid("probe interval must be positive".into()));
    }
    let topology = noise.topology().clone();
    let n = topology.n_qubits();
    let [zero, one] = readout_cal_circuits(&topology);
    let start = noise.clock_min();
    let steps = (span_min / interval_min + 1e-9).floor() as usize;
    let mut series = ProbeSeries {
        device: topology.name().to_string(),
        times_min: Vec::new(),
        zero_accuracy: Vec::new(),
        one_accuracy: Vec::new(),
        persistent_bad_qubits: (0..n).filter(|&q| noise.persistent_bad_qubits()[q]).collect(),
    };
    for k in 0..=steps {
        let t = start + k as f64 * interval_min;
        noise.advance_to(t)?;
        let run = |c: &crate::circuit::Circuit, tag: u64| {
            run_noisy(
                &ExecutionSpec { circuit: c.clone(), shots, seed: derive_seed(seed, ((k as u64) << 1) | tag), exec_time_min: t },
                noise,
            )
        };
        let cz = run(&zero, 0)?;
        let co = run(&one, 1)?;
        series.times_min.push(t);
        series.zero_accuracy.push((0..n).map(|q| 1.0 - cz.ones_at(q) as f64 / shots as f64).collect());
        series.one_accuracy.push((0..n).map(|q| co.ones_at(q) as f64 / shots as f64).collect());
    }
    Ok(series)
}

/// Readout probe of the configured device and drift.
pub fn probe_drift(cfg: &ScenarioConfig) -> Result<ProbeSeries, HarnessError> {
    cfg.validate()?;
    let topology = cfg.device.topology()?;
    let mut noise = GroundTruthNoise::init(&topology, &cfg.drift.params(cfg.seed))?;
    probe_noise(&mut noise, cfg.probe_span_min, cfg.probe_interval_min, cfg.probe_shots, derive_seed(cfg.seed, 0x9B0E))
}
