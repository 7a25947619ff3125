//! Noise-aware transpilation: layout selection scored on a calibration
//! snapshot, swap routing, basis translation and peephole optimization.

mod layout;
mod peephole;
mod route;

use std::collections::BTreeSet;

use num_complex::Complex64;
use thiserror::Error;

pub use layout::{
    score_layout, select_layout, CostModel, Layout, ANNEAL_DECAY, ANNEAL_ITERATIONS, ANNEAL_RESTARTS,
    EXACT_MAX_PHYSICAL, EXACT_MAX_VIRTUAL,
};
pub use peephole::{optimize_full, peephole_optimize};
pub use route::{route, Routed};

use crate::calibration::{CalibrationError, CalibrationSnapshot};
use crate::circuit::{decompose_to_basis, Circuit, CircuitError, Gate, StateVector};
use crate::device::Topology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranspileError {
    #[error("circuit needs {virtual_qubits} qubits but the device has {physical_qubits}")]
    CircuitTooLarge { virtual_qubits: usize, physical_qubits: usize },
    #[error("layout {0:?} is not an injective map onto device qubits")]
    InvalidLayout(Vec<usize>),
    #[error("layout sidecar line {0}: expected `v<i> -> p<j>`")]
    SidecarSyntax(usize),
    #[error("layout does not cover virtual qubit {0}")]
    UncoveredQubit(usize),
    #[error("gate {0:?} must be translated to the basis first")]
    NonBasisGate(Gate),
    #[error("optimization level {0} is not in 0..=3")]
    BadLevel(u8),
    #[error("equivalence check supports at most {limit} qubits, got {got}")]
    TooManyQubits { got: usize, limit: usize },
    #[error("snapshot does not match device: {0}")]
    Snapshot(CalibrationError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Output of [`transpile`].
#[derive(Debug, Clone, PartialEq)]
pub struct TranspiledCircuit {
    /// Basis gates on physical qubit ids; every CX lies on a coupler.
    pub physical_circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    /// Score of the initial layout under the snapshot (lower is better).
    pub cost: f64,
    /// Timestamp of the snapshot the layout was chosen against.
    pub snapshot_id: f64,
    pub level: u8,
    pub swaps: usize,
}

/// Transpiles `c` for `topology`.
///
/// * level 0: virtual `i` on physical `i`, hop-count routing.
/// * level 1: layout minimizing CX count including swaps, snapshot-blind.
/// * level 2: snapshot-scored layout and routing.
/// * level 3: level 2 plus peephole optimization before and after routing.
pub fn transpile(
    c: &Circuit,
    topology: &Topology,
    snapshot: &CalibrationSnapshot,
    level: u8,
    seed: u64,
) -> Result<TranspiledCircuit, TranspileError> {
    if level > 3 {
        return Err(TranspileError::BadLevel(level));
    }
    let np = topology.n_qubits();
    if c.n_qubits() > np {
        return Err(TranspileError::CircuitTooLarge { virtual_qubits: c.n_qubits(), physical_qubits: np });
    }
    let noise_model = CostModel::from_snapshot(topology, snapshot)?;
    let mut prepared = decompose_to_basis(c)?;
    if level == 3 {
        prepared = optimize_full(&prepared)?;
    }
    let (initial, routing_model) = match level {
        0 => (Layout::trivial(c.n_qubits(), np)?, CostModel::uniform(topology)),
        1 => {
            let blind = CostModel::uniform(topology);
            (select_layout(&prepared, &blind, seed)?, blind)
        }
        _ => (select_layout(&prepared, &noise_model, seed)?, noise_model.clone()),
    };
    let routed = route(&prepared, &initial, topology, &routing_model)?;
    let physical_circuit = if level == 3 { optimize_full(&routed.circuit)? } else { routed.circuit };
    let cost = score_layout(&prepared, &initial, &noise_model)?;
    Ok(TranspiledCircuit {
        physical_circuit,
        initial_layout: initial,
        final_layout: routed.final_layout,
        cost,
        snapshot_id: snapshot.timestamp_min,
        level,
        swaps: routed.swaps,
    })
}

/// Largest virtual circuit [`verify_equivalence`] accepts.
pub const VERIFY_MAX_VIRTUAL: usize = 8;
/// Largest number of physical qubits touched by the transpiled circuit.
pub const VERIFY_MAX_ACTIVE: usize = 20;

/// Process fidelity between `original` and its transpilation:
/// `|Σ_j ⟨P·U_orig j | U_phys j⟩| / 2ⁿ` over virtual basis inputs `j`, with
/// `P` placing virtual qubits by the final layout and idle physical qubits
/// in |0⟩. Returns 0 when measurements land on the wrong clbits.
pub fn verify_equivalence(original: &Circuit, t: &TranspiledCircuit) -> Result<f64, TranspileError> {
    let nv = original.n_qubits();
    if nv > VERIFY_MAX_VIRTUAL {
        return Err(TranspileError::TooManyQubits { got: nv, limit: VERIFY_MAX_VIRTUAL });
    }
    let expected_meas: BTreeSet<(usize, usize)> =
        original.measurements().into_iter().map(|(v, k)| (t.final_layout.physical(v), k)).collect();
    let actual_meas: BTreeSet<(usize, usize)> = t.physical_circuit.measurements().into_iter().collect();
    if expected_meas != actual_meas {
        return Ok(0.0);
    }

    let phys = t.physical_circuit.without_measurements();
    let mut active: BTreeSet<usize> = phys.active_qubits();
    active.extend(t.initial_layout.as_slice()[..nv].iter().copied());
    active.extend(t.final_layout.as_slice()[..nv].iter().copied());
    if active.len() > VERIFY_MAX_ACTIVE {
        return Err(TranspileError::TooManyQubits { got: active.len(), limit: VERIFY_MAX_ACTIVE });
    }
    let active: Vec<usize> = active.into_iter().collect();
    let dense = |p: usize| active.binary_search(&p).expect("active qubit");
    let phys_gates: Vec<Gate> = phys.gates().iter().map(|g| g.remap(dense)).collect();
    let orig = original.without_measurements();
    let place = |layout: &Layout, j: usize| {
        (0..nv).fold(0usize, |acc, v| acc | (((j >> v) & 1) << dense(layout.physical(v))))
    };

    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..1usize << nv {
        let mut want = StateVector::basis(nv, j);
        for g in orig.gates() {
            want.apply_gate(g);
        }
        let mut got = StateVector::basis(active.len(), place(&t.initial_layout, j));
        for g in &phys_gates {
            got.apply_gate(g);
        }
        let amps = got.amplitudes();
        for (k, a) in want.amplitudes().iter().enumerate() {
            total += a.conj() * amps[place(&t.final_layout, k)];
        }
    }
    Ok(total.norm() / (1usize << nv) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{build_topology, TopologyPreset};

    #[test]
    fn identity_transpilation_has_unit_fidelity() {
        let t = build_topology(&TopologyPreset::Line(3)).unwrap();
        let snap = CalibrationSnapshot::uniform(&t, 0.0, 0.0, 0.0);
        let c = Circuit::from_gates("", 2, 2, [Gate::H(0), Gate::cx(0, 1), Gate::measure(0, 0), Gate::measure(1, 1)]).unwrap();
        let tc = transpile(&c, &t, &snap, 0, 0).unwrap();
        assert_eq!(tc.physical_circuit.gates(), decompose_to_basis(&c).unwrap().gates());
        assert_eq!(tc.physical_circuit.n_qubits(), 3);
        assert!((verify_equivalence(&c, &tc).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(tc.cost, 0.0);
    }
}
