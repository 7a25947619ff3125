//! Device topology and the hidden, drifting ground-truth noise.

mod noise;
mod topology;

use thiserror::Error;

pub use noise::{
    logistic, logit, DriftParams, EdgeNoise, GroundTruthNoise, ProcessParams, QubitNoise,
    DEFAULT_BAD_FRACTION, DEFAULT_ELEMENT_SPREAD, DEFAULT_GATE_1Q_MEAN, DEFAULT_GATE_2Q_MEAN,
    DEFAULT_READOUT_ASYMMETRY, DEFAULT_READOUT_MEAN, DEFAULT_REVERSION_RATE, DEFAULT_VOLATILITY,
    P_MAX, P_MIN,
};
pub use topology::{build_topology, Topology, TopologyPreset, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("unknown topology preset `{0}`")]
    UnknownPreset(String),
    #[error("topology has no qubits")]
    Empty,
    #[error("self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("qubit {qubit} out of range (device has {n_qubits} qubits)")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {qubit} has degree {degree}, limit is {}", MAX_DEGREE)]
    DegreeTooHigh { qubit: usize, degree: usize },
    #[error("coupling graph is disconnected")]
    Disconnected,
    #[error("edge list line {0}: expected `i j`")]
    EdgeListSyntax(usize),
    #[error("time step must be finite and non-negative, got {0}")]
    NegativeDt(f64),
    #[error("invalid drift parameter `{0}`")]
    InvalidDrift(&'static str),
}
