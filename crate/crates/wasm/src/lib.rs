//! Browser bindings. Every entry point takes plain values and returns JSON
//! text so the page needs no generated type glue beyond strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qjit_core::bench::{accuracy, BenchSpec, BenchmarkInstance};
use qjit_core::calibration::CalibrationSnapshot;
use qjit_core::circuit::emit_circuit;
use qjit_core::derive_seed;
use qjit_core::device::{build_topology, DriftParams, GroundTruthNoise, Topology, TopologyPreset};
use qjit_core::sim::{run_noisy, ExecutionSpec};
use qjit_core::transpiler::transpile;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn device(name: &str, seed: u64) -> Result<(Topology, GroundTruthNoise), JsError> {
    let preset: TopologyPreset = name.parse().map_err(err)?;
    let topology = build_topology(&preset).map_err(err)?;
    let noise = GroundTruthNoise::init(&topology, &DriftParams::default().with_seed(seed)).map_err(err)?;
    Ok((topology, noise))
}

fn instance(bench: &str, seed: u64) -> Result<BenchmarkInstance, JsError> {
    let spec: BenchSpec = bench.parse().map_err(err)?;
    spec.instantiate_seeded(seed).map_err(err)
}

fn to_json(value: &impl Serialize) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(err)
}

#[derive(Serialize)]
struct Generated {
    label: String,
    param: String,
    expected: String,
    text: String,
}

/// Benchmark instance such as `hs(4)` in circuit text form.
#[wasm_bindgen]
pub fn generate(bench: &str, seed: u64) -> Result<String, JsError> {
    let inst = instance(bench, seed)?;
    to_json(&Generated { label: inst.label(), param: inst.param.clone(), expected: inst.expected.clone(), text: emit_circuit(&inst.circuit) })
}

#[derive(Serialize)]
struct Trace {
    times_h: Vec<f64>,
    /// `readout[q][t]`, averaged over both flip directions.
    readout: Vec<Vec<f64>>,
    bad: Vec<bool>,
}

/// Hourly true readout error of every qubit over `hours`.
#[wasm_bindgen]
pub fn drift_trace(device_name: &str, seed: u64, hours: u32) -> Result<String, JsError> {
    let (topology, mut noise) = device(device_name, seed)?;
    let mut trace = Trace { times_h: Vec::new(), readout: vec![Vec::new(); topology.n_qubits()], bad: noise.persistent_bad_qubits().to_vec() };
    for h in 0..=hours {
        noise.advance_to(f64::from(h) * 60.0).map_err(err)?;
        trace.times_h.push(f64::from(h));
        for (q, series) in trace.readout.iter_mut().enumerate() {
            series.push(noise.qubit(q).readout_err());
        }
    }
    to_json(&trace)
}

#[derive(Serialize)]
struct Arm {
    snapshot_min: f64,
    layout: Vec<usize>,
    swaps: usize,
    cost: f64,
    accuracy: f64,
}

#[derive(Serialize)]
struct Comparison {
    label: String,
    expected: String,
    stale: Arm,
    fresh: Arm,
}

/// Transpiles one benchmark against the true noise as it was `age_min`
/// minutes ago and as it is now, then runs both layouts now.
#[wasm_bindgen]
pub fn compare(device_name: &str, bench: &str, seed: u64, age_min: f64, shots: u32) -> Result<String, JsError> {
    if !(age_min.is_finite() && age_min >= 0.0) {
        return Err(err("age must be a non-negative number of minutes"));
    }
    let (topology, mut noise) = device(device_name, seed)?;
    let inst = instance(bench, derive_seed(seed, 1))?;
    let stale = noise.true_snapshot();
    noise.advance_to(age_min).map_err(err)?;
    let fresh = noise.true_snapshot();
    let arm = |snap: &CalibrationSnapshot, tag: u64| -> Result<Arm, JsError> {
        let t = transpile(&inst.circuit, &topology, snap, 3, seed).map_err(err)?;
        let spec = ExecutionSpec { circuit: t.physical_circuit, shots: u64::from(shots), seed: derive_seed(seed, tag), exec_time_min: age_min };
        let counts = run_noisy(&spec, &noise).map_err(err)?;
        Ok(Arm {
            snapshot_min: snap.timestamp_min,
            layout: t.initial_layout.as_slice()[..inst.circuit.n_qubits()].to_vec(),
            swaps: t.swaps,
            cost: t.cost,
            accuracy: accuracy(&counts, &inst.expected).map_err(err)?,
        })
    };
    let report = Comparison { label: inst.label(), expected: inst.expected.clone(), stale: arm(&stale, 2)?, fresh: arm(&fresh, 3)? };
    to_json(&report)
}
