use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qjit_core::bench::BenchSpec;
use qjit_core::calibration::{calibrate, CalibrationSnapshot};
use qjit_core::circuit::{decompose_to_basis, emit_circuit, parse_circuit, Circuit};
use qjit_core::derive_seed;
use qjit_core::device::{GroundTruthNoise, Topology};
use qjit_core::harness::{
    emit_heatmap, emit_report, probe_drift, run_scenario, ExperimentReport, HarnessError, ReportFormat,
    ScenarioConfig,
};
use qjit_core::sim::{run_noisy, ExecutionSpec};
use qjit_core::transpiler::{transpile, Layout};

#[derive(Parser)]
#[command(name = "qjit", version, about = "Just-in-time noise-aware transpilation on a drifting simulated device")]
struct Cli {
    /// Scenario config file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: csv, table or structured.
    #[arg(long, global = true, default_value = "table")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a calibration job and emit the snapshot as JSON.
    Calibrate {
        /// Device clock in minutes at calibration time.
        #[arg(long, default_value_t = 0.0)]
        at: f64,
        /// Emit the ground-truth snapshot instead of an estimate.
        #[arg(long)]
        oracle: bool,
    },
    /// Transpile a circuit against a snapshot; writes the circuit and a layout sidecar.
    Transpile {
        circuit: PathBuf,
        #[arg(long)]
        snapshot: PathBuf,
        /// Optimization level 0..=3; defaults to the config.
        #[arg(long)]
        level: Option<u8>,
    },
    /// Benchmark generators.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Execute a circuit on the noisy simulator.
    Run {
        circuit: PathBuf,
        /// Device clock in minutes at execution time.
        #[arg(long, default_value_t = 0.0)]
        at: f64,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Stale versus just-in-time experiment from the config.
    Experiment,
    /// Hourly readout probe of every qubit.
    Probe,
    /// DOT heatmap of a snapshot, optionally with a layout overlay.
    Heatmap {
        #[arg(long)]
        snapshot: PathBuf,
        /// Layout sidecar written by `transpile`.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Virtual circuit whose active qubits are highlighted.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Re-render a structured experiment report.
    Report { report: PathBuf },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Emit a benchmark instance such as `hs(4)` plus its expected output.
    Gen {
        benchmark: String,
        /// Explicit parameter; drawn from the seed when omitted.
        #[arg(long)]
        param: Option<String>,
    },
}

enum CliError {
    Validation(String),
    Internal(String),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Writes named outputs into `--out`, or concatenates them on stdout.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn emit(&self, files: &[(String, String)]) -> Result<(), CliError> {
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
                for (name, body) in files {
                    let path = dir.join(name);
                    fs::write(&path, body).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
                }
            }
            None => {
                let mut out = std::io::stdout().lock();
                for (_, body) in files {
                    match out.write_all(body.as_bytes()) {
                        Ok(()) => {}
                        // A closed reader (e.g. `| head`) is not a failure.
                        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
                        Err(e) => return Err(CliError::Internal(format!("stdout: {e}"))),
                    }
                }
            }
        }
        Ok(())
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::parse(&read(path)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn device_at(cfg: &ScenarioConfig, topology: &Topology, at: f64) -> Result<GroundTruthNoise, CliError> {
    let mut noise = GroundTruthNoise::init(topology, &cfg.drift.params(cfg.seed)).map_err(invalid)?;
    noise.advance_to(at).map_err(invalid)?;
    Ok(noise)
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    parse_circuit(&read(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_snapshot(path: &Path, topology: &Topology) -> Result<CalibrationSnapshot, CliError> {
    let snap = CalibrationSnapshot::from_json(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    snap.validate(topology).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(snap)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "circuit".to_string(), |s| s.to_string_lossy().into_owned())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let sink = Sink { dir: cli.out.clone() };
    let format: ReportFormat = cli.format.parse().map_err(CliError::Validation)?;
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Calibrate { at, oracle } => {
            let topology = cfg.device.topology()?;
            let noise = device_at(&cfg, &topology, *at)?;
            let snapshot = if *oracle {
                noise.true_snapshot()
            } else {
                calibrate(&noise, &cfg.calibration, derive_seed(cfg.seed, 0xCA1B))
                    .map_err(HarnessError::from)?
                    .snapshot
            };
            sink.emit(&[("snapshot.json".into(), snapshot.to_json() + "\n")])
        }
        Command::Transpile { circuit, snapshot, level } => {
            let topology = cfg.device.topology()?;
            let c = load_circuit(circuit)?;
            let snap = load_snapshot(snapshot, &topology)?;
            let t = transpile(&c, &topology, &snap, level.unwrap_or(cfg.level), cfg.seed).map_err(HarnessError::from)?;
            let final_pairs: Vec<String> =
                t.final_layout.as_slice().iter().enumerate().map(|(v, p)| format!("v{v} -> p{p}")).collect();
            let sidecar = format!("{}# after routing: {}\n", t.initial_layout.to_sidecar(), final_pairs.join(", "));
            let name = stem(circuit);
            sink.emit(&[
                (format!("{name}.transpiled.qc"), emit_circuit(&t.physical_circuit)),
                (format!("{name}.layout"), sidecar),
            ])
        }
        Command::Bench { command: BenchCommand::Gen { benchmark, param } } => {
            let spec: BenchSpec = benchmark.parse().map_err(invalid)?;
            let inst = match param {
                Some(p) => spec.with_param(p),
                None => spec.instantiate_seeded(cfg.seed),
            }
            .map_err(invalid)?;
            let name = format!("{}_{}", inst.family, inst.n);
            let expected = format!("expected {}\n", inst.expected);
            match sink.dir {
                Some(_) => sink.emit(&[(format!("{name}.qc"), emit_circuit(&inst.circuit)), (format!("{name}.expected"), expected)]),
                None => sink.emit(&[(String::new(), emit_circuit(&inst.circuit)), (String::new(), format!("# {expected}"))]),
            }
        }
        Command::Run { circuit, at, shots } => {
            let topology = cfg.device.topology()?;
            let c = decompose_to_basis(&load_circuit(circuit)?).map_err(invalid)?;
            let noise = device_at(&cfg, &topology, *at)?;
            let spec = ExecutionSpec {
                circuit: c,
                shots: shots.unwrap_or(cfg.shots),
                seed: derive_seed(cfg.seed, 0x2A7),
                exec_time_min: *at,
            };
            let counts = run_noisy(&spec, &noise).map_err(invalid)?;
            sink.emit(&[("counts.txt".into(), counts.to_string())])
        }
        Command::Experiment => {
            let report = run_scenario(&cfg)?;
            sink.emit(&[(format!("report.{}", format.extension()), emit_report(&report, format))])
        }
        Command::Probe => {
            let series = probe_drift(&cfg)?;
            sink.emit(&[("probe.tsv".into(), series.to_tsv())])
        }
        Command::Heatmap { snapshot, layout, circuit } => {
            let topology = cfg.device.topology()?;
            let snap = load_snapshot(snapshot, &topology)?;
            let layout = match layout {
                Some(p) => Some(Layout::from_sidecar(&read(p)?, topology.n_qubits()).map_err(invalid)?),
                None => None,
            };
            let circuit = match circuit {
                Some(p) => Some(load_circuit(p)?),
                None => None,
            };
            let dot = emit_heatmap(&topology, &snap, layout.as_ref(), circuit.as_ref())?;
            sink.emit(&[("heatmap.dot".into(), dot)])
        }
        Command::Report { report } => {
            let parsed = ExperimentReport::from_json(&read(report)?).map_err(|e| invalid(format!("{}: {e}", report.display())))?;
            sink.emit(&[(format!("report.{}", format.extension()), emit_report(&parsed, format))])
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are validation failures; help and version are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
