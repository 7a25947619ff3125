use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::device::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SnapshotOrigin {
    #[serde(rename = "estimated")]
    Estimated,
    #[serde(rename = "oracle")]
    Oracle,
    #[serde(rename = "cotd-import")]
    CotdImport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub id: usize,
    pub p_read_0to1: f64,
    pub p_read_1to0: f64,
    pub readout_err: f64,
    pub gate_err_1q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCalibration {
    pub a: usize,
    pub b: usize,
    /// Error per CX on this coupler.
    pub epc_2q: f64,
}

/// Timestamped error report: the only noise information the transpiler sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSnapshot {
    pub timestamp_min: f64,
    pub device: String,
    pub origin: SnapshotOrigin,
    pub qubits: Vec<QubitCalibration>,
    pub edges: Vec<EdgeCalibration>,
}

impl CalibrationSnapshot {
    /// Every element set to the same values; handy for snapshot-blind scoring.
    pub fn uniform(topology: &Topology, readout_err: f64, gate_err_1q: f64, epc_2q: f64) -> Self {
        CalibrationSnapshot {
            timestamp_min: 0.0,
            device: topology.name().to_string(),
            origin: SnapshotOrigin::Oracle,
            qubits: (0..topology.n_qubits())
                .map(|id| QubitCalibration {
                    id,
                    p_read_0to1: readout_err,
                    p_read_1to0: readout_err,
                    readout_err,
                    gate_err_1q,
                })
                .collect(),
            edges: topology.edges().iter().map(|&(a, b)| EdgeCalibration { a, b, epc_2q }).collect(),
        }
    }

    pub fn qubit(&self, q: usize) -> Option<&QubitCalibration> {
        self.qubits.iter().find(|c| c.id == q)
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&EdgeCalibration> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().find(|e| (e.a.min(e.b), e.a.max(e.b)) == key)
    }

    /// Checks that every topology qubit and edge is present exactly once and
    /// every value lies in `[0, 0.5)`.
    pub fn validate(&self, topology: &Topology) -> Result<(), CalibrationError> {
        let in_range = |v: f64| (0.0..0.5).contains(&v);
        let mut seen = vec![false; topology.n_qubits()];
        for q in &self.qubits {
            if q.id >= seen.len() || std::mem::replace(&mut seen[q.id], true) {
                return Err(CalibrationError::Invalid(format!("unexpected qubit entry {}", q.id)));
            }
            for v in [q.p_read_0to1, q.p_read_1to0, q.readout_err, q.gate_err_1q] {
                if !in_range(v) {
                    return Err(CalibrationError::Invalid(format!("qubit {}: value {v} out of [0, 0.5)", q.id)));
                }
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(CalibrationError::MissingQubit(q));
        }
        for &(a, b) in topology.edges() {
            let e = self.edge(a, b).ok_or(CalibrationError::MissingEdge(a, b))?;
            if !in_range(e.epc_2q) {
                return Err(CalibrationError::Invalid(format!("edge ({a},{b}): value {} out of [0, 0.5)", e.epc_2q)));
            }
        }
        if self.edges.len() != topology.edges().len() {
            return Err(CalibrationError::Invalid("edge list does not match topology".into()));
        }
        Ok(())
    }

    /// Same values, every error multiplied by `factor` (clamped below 0.5).
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: f64| (v * factor).min(0.5 - 1e-9);
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.p_read_0to1 = s(q.p_read_0to1);
            q.p_read_1to0 = s(q.p_read_1to0);
            q.readout_err = s(q.readout_err);
            q.gate_err_1q = s(q.gate_err_1q);
        }
        for e in &mut out.edges {
            e.epc_2q = s(e.epc_2q);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        serde_json::from_str(text).map_err(|e| CalibrationError::Parse(e.to_string()))
    }
}
