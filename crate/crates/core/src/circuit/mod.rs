//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over qubit indices with classical
//! readout slots. The same type carries virtual circuits (before layout) and
//! physical circuits (qubit index = device qubit id).

mod decompose;
mod gate;
mod state;
mod text;
mod unitary;

use std::collections::BTreeSet;

use thiserror::Error;

pub use decompose::{decompose_to_basis, inverse, merge_single_qubit_runs};
pub use gate::{mat2_mul, normalize_angle, pauli_matrix, u3_angles, u3_matrix, Gate, Mat2, Pauli};
pub use state::StateVector;
pub use text::{emit_circuit, parse_circuit};
pub use unitary::{phase_fidelity, unitary_of, MAX_UNITARY_QUBITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("qubit q{qubit} out of range (circuit has {n_qubits} qubits)")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("clbit c{clbit} out of range (circuit has {n_clbits} clbits)")]
    ClbitOutOfRange { clbit: usize, n_clbits: usize },
    #[error("clbit c{0} is written by more than one measurement")]
    DuplicateClbit(usize),
    #[error("gate operands must be distinct qubits (got {0:?})")]
    RepeatedOperand(Vec<usize>),
    #[error("gate on q{0} after it was measured")]
    GateAfterMeasure(usize),
    #[error("angle is not finite")]
    NonFiniteAngle,
    #[error("circuit contains a measurement")]
    ContainsMeasurement,
    #[error("circuit has {got} qubits, limit is {limit}")]
    TooManyQubits { got: usize, limit: usize },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
}

/// Ordered gate list over `n_qubits` qubits and `n_clbits` classical bits.
///
/// Every gate is validated on insertion, so a `Circuit` value always
/// satisfies its invariants: operands in range, distinct operands per gate,
/// at most one write per clbit, and no gate on a wire after its measurement.
#[derive(Debug, Clone)]
pub struct Circuit {
    name: String,
    n_qubits: usize,
    n_clbits: usize,
    gates: Vec<Gate>,
    measured: Vec<bool>,
    clbit_written: Vec<bool>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.n_qubits == other.n_qubits
            && self.n_clbits == other.n_clbits
            && self.gates == other.gates
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Self {
        Circuit {
            name: String::new(),
            n_qubits,
            n_clbits,
            gates: Vec::new(),
            measured: vec![false; n_qubits],
            clbit_written: vec![false; n_clbits],
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn from_gates(
        name: impl Into<String>,
        n_qubits: usize,
        n_clbits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(n_qubits, n_clbits).with_name(name);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        if gate.angles().iter().any(|a| !a.is_finite()) {
            return Err(CircuitError::NonFiniteAngle);
        }
        let qubits = gate.qubits();
        for &q in &qubits {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
        }
        for (i, &q) in qubits.iter().enumerate() {
            if qubits[..i].contains(&q) {
                return Err(CircuitError::RepeatedOperand(qubits.clone()));
            }
        }
        for &q in &qubits {
            if self.measured[q] {
                return Err(CircuitError::GateAfterMeasure(q));
            }
        }
        if let Gate::Measure { qubit, clbit } = gate {
            if clbit >= self.n_clbits {
                return Err(CircuitError::ClbitOutOfRange { clbit, n_clbits: self.n_clbits });
            }
            if self.clbit_written[clbit] {
                return Err(CircuitError::DuplicateClbit(clbit));
            }
            self.clbit_written[clbit] = true;
            self.measured[qubit] = true;
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self, CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn has_measurement(&self) -> bool {
        self.measured.iter().any(|&m| m)
    }

    pub fn is_basis(&self) -> bool {
        self.gates.iter().all(Gate::is_basis)
    }

    /// `(qubit, clbit)` pairs of every measurement, in program order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Measure { qubit, clbit } => Some((qubit, clbit)),
                _ => None,
            })
            .collect()
    }

    /// Qubits touched by at least one gate.
    pub fn active_qubits(&self) -> BTreeSet<usize> {
        self.gates.iter().flat_map(|g| g.qubits()).collect()
    }

    /// Copy with all measurements and barriers removed.
    pub fn without_measurements(&self) -> Circuit {
        let mut c = Circuit::new(self.n_qubits, self.n_clbits).with_name(self.name.clone());
        c.gates = self
            .gates
            .iter()
            .filter(|g| !matches!(g, Gate::Measure { .. } | Gate::Barrier))
            .copied()
            .collect();
        c
    }

    /// Copy with every gate angle normalized into `(-π, π]`.
    pub fn normalized(&self) -> Circuit {
        let mut c = self.clone();
        for g in &mut c.gates {
            *g = g.normalized();
        }
        c
    }
}

/// Summary counts of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GateStats {
    pub count_1q: usize,
    /// Gates acting on two or more qubits.
    pub count_2q: usize,
    pub depth: usize,
    pub measured_qubits: BTreeSet<usize>,
    pub qubits_used: BTreeSet<usize>,
}

/// Gate counts and greedy wire-layered depth.
///
/// Measurements occupy a layer on their wire; a barrier synchronizes all
/// wires so the next gate starts a fresh layer.
pub fn gate_stats(c: &Circuit) -> GateStats {
    let mut stats = GateStats::default();
    let mut wire_depth = vec![0usize; c.n_qubits()];
    let mut floor = 0usize;
    for g in c.gates() {
        match g {
            Gate::Barrier => {
                floor = wire_depth.iter().copied().max().unwrap_or(0).max(floor);
                continue;
            }
            Gate::Measure { qubit, .. } => {
                stats.measured_qubits.insert(*qubit);
            }
            g if g.is_multi_qubit() => stats.count_2q += 1,
            _ => stats.count_1q += 1,
        }
        let qubits = g.qubits();
        let layer = qubits.iter().map(|&q| wire_depth[q]).max().unwrap_or(0).max(floor) + 1;
        for q in qubits {
            wire_depth[q] = layer;
            stats.qubits_used.insert(q);
        }
    }
    stats.depth = wire_depth.into_iter().max().unwrap_or(0);
    stats
}
