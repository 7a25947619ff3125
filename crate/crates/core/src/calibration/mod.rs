//! Error-measurement jobs: paired readout circuits, edge-batched two-qubit
//! randomized benchmarking, decay fitting, and snapshot assembly.

mod clifford;
mod fit;
mod snapshot;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use clifford::{random_clifford2, Clifford2, CliffordOp, PauliRow, Tableau, CLIFFORD2_ORDER};
pub use fit::{fit_decay, fit_decay_with_floor, sse, DecayFit};
pub use snapshot::{CalibrationSnapshot, EdgeCalibration, QubitCalibration, SnapshotOrigin};

use crate::circuit::{Circuit, Gate};
use crate::derive_seed;
use crate::device::{GroundTruthNoise, Topology};
use crate::sim::{run_noisy, Counts, ExecutionSpec, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("counts have zero shots")]
    ZeroShots,
    #[error("bit widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("need at least {need} distinct sequence lengths, got {got}")]
    TooFewLengths { need: usize, got: usize },
    #[error("survival {0} outside [0, 1]")]
    SurvivalOutOfRange(f64),
    #[error("alpha {0} outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("no data for qubit {0}")]
    MissingQubit(usize),
    #[error("no data for edge ({0}, {1})")]
    MissingEdge(usize, usize),
    #[error("invalid snapshot: {0}")]
    Invalid(String),
    #[error("cannot parse snapshot: {0}")]
    Parse(String),
    #[error("calibration job of {got} circuits exceeds the budget of {limit}")]
    OverBudget { got: usize, limit: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Upper bound on circuits in one calibration job.
pub const JOB_CIRCUIT_BUDGET: usize = 900;
pub const DEFAULT_RB_LENGTHS: [usize; 5] = [1, 4, 16, 32, 64];
pub const DEFAULT_RB_SAMPLES: usize = 5;
/// Single-qubit gate error assumed when it is not measured.
pub const DEFAULT_PRIOR_1Q: f64 = 1.5e-3;

/// Circuit A measures every qubit straight away; circuit B flips every qubit
/// with `U3(π, 0, π)` first. Qubit `q` is read into clbit `q`.
pub fn readout_cal_circuits(topology: &Topology) -> [Circuit; 2] {
    let n = topology.n_qubits();
    let mut a = Circuit::new(n, n).with_name("readout-cal-0");
    let mut b = Circuit::new(n, n).with_name("readout-cal-1");
    for q in 0..n {
        b.push(Gate::u3(std::f64::consts::PI, 0.0, std::f64::consts::PI, q)).expect("in range");
    }
    for q in 0..n {
        a.push(Gate::measure(q, q)).expect("in range");
        b.push(Gate::measure(q, q)).expect("in range");
    }
    [a, b]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutEstimate {
    pub p_read_0to1: f64,
    pub p_read_1to0: f64,
    pub readout_err: f64,
}

/// Per-clbit error fractions: how often A reads 1 and B reads 0.
pub fn estimate_readout(counts_a: &Counts, counts_b: &Counts) -> Result<Vec<ReadoutEstimate>, CalibrationError> {
    estimate_readout_corrected(counts_a, counts_b, 0.0)
}

/// Like [`estimate_readout`], but removes the expected contribution of a
/// depolarizing error of probability `p_gate_1q` on circuit B's flip gate
/// (which leaves the qubit in |0⟩ with probability `2/3·p_gate_1q`).
pub fn estimate_readout_corrected(
    counts_a: &Counts,
    counts_b: &Counts,
    p_gate_1q: f64,
) -> Result<Vec<ReadoutEstimate>, CalibrationError> {
    if counts_a.shots() == 0 || counts_b.shots() == 0 {
        return Err(CalibrationError::ZeroShots);
    }
    if counts_a.width() != counts_b.width() {
        return Err(CalibrationError::WidthMismatch(counts_a.width(), counts_b.width()));
    }
    let q = 2.0 * p_gate_1q / 3.0;
    let (na, nb) = (counts_a.shots() as f64, counts_b.shots() as f64);
    Ok((0..counts_a.width())
        .map(|k| {
            let p01 = counts_a.ones_at(k) as f64 / na;
            let f_b = (counts_b.shots() - counts_b.ones_at(k)) as f64 / nb;
            let p10 = ((f_b - q * (1.0 - p01)) / (1.0 - q)).clamp(0.0, 1.0);
            ReadoutEstimate { p_read_0to1: p01, p_read_1to0: p10, readout_err: (p01 + p10) / 2.0 }
        })
        .collect())
}

/// Partitions the couplers into matchings (proper edge coloring) with at
/// most `max_degree + 1` batches, using `max_degree` when the search finds
/// such a coloring. Deterministic.
pub fn edge_batches(topology: &Topology) -> Vec<Vec<(usize, usize)>> {
    let edges = topology.edges();
    if edges.is_empty() {
        return Vec::new();
    }
    let delta = topology.max_degree();
    let coloring = (delta..=delta + 1)
        .find_map(|k| color_edges(topology, k))
        .unwrap_or_else(|| greedy_colors(topology));
    let n_colors = coloring.iter().max().map_or(0, |m| m + 1);
    let mut batches = vec![Vec::new(); n_colors];
    for (e, &c) in coloring.iter().enumerate() {
        batches[c].push(edges[e]);
    }
    batches
}

fn greedy_colors(topology: &Topology) -> Vec<usize> {
    let edges = topology.edges();
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); topology.n_qubits()];
    edges
        .iter()
        .map(|&(a, b)| {
            let c = (0..).find(|c| !used[a].contains(c) && !used[b].contains(c)).unwrap();
            used[a].push(c);
            used[b].push(c);
            c
        })
        .collect()
}

/// Backtracking search for a proper `k`-edge-coloring, capped in effort.
fn color_edges(topology: &Topology, k: usize) -> Option<Vec<usize>> {
    let edges = topology.edges();
    let n = topology.n_qubits();
    let mut color = vec![usize::MAX; edges.len()];
    let mut busy = vec![0u64; n];
    let mut budget = 200_000usize;

    fn go(
        i: usize,
        k: usize,
        edges: &[(usize, usize)],
        color: &mut [usize],
        busy: &mut [u64],
        budget: &mut usize,
    ) -> bool {
        if i == edges.len() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let (a, b) = edges[i];
        for c in 0..k {
            let bit = 1u64 << c;
            if busy[a] & bit == 0 && busy[b] & bit == 0 {
                busy[a] |= bit;
                busy[b] |= bit;
                color[i] = c;
                if go(i + 1, k, edges, color, busy, budget) {
                    return true;
                }
                busy[a] &= !bit;
                busy[b] &= !bit;
            }
        }
        false
    }

    if k >= 64 {
        return None;
    }
    go(0, k, edges, &mut color, &mut busy, &mut budget).then_some(color)
}

/// One randomized-benchmarking circuit: `length` random Cliffords on every
/// listed edge in parallel. Edge `i = (a, b)` is closed by its inverse
/// Clifford and measured with `a` into clbit `2i` and `b` into `2i + 1`.
#[derive(Debug, Clone)]
pub struct RbCircuit {
    pub circuit: Circuit,
    pub length: usize,
    pub sample: usize,
    pub edges: Vec<(usize, usize)>,
    /// Canonical indices of the random Cliffords per edge (inverse excluded).
    pub cliffords: Vec<Vec<usize>>,
}

/// Builds `samples` circuits per length for the given edges, all measured
/// in parallel. Requires at least two distinct lengths, none zero.
pub fn rb_circuits(
    n_qubits: usize,
    edges: &[(usize, usize)],
    lengths: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<RbCircuit>, CalibrationError> {
    let mut distinct = lengths.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 || distinct[0] == 0 {
        return Err(CalibrationError::TooFewLengths { need: 2, got: distinct.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &m in lengths {
        for sample in 0..samples {
            let mut c = Circuit::new(n_qubits, 2 * edges.len())
                .with_name(format!("rb-m{m}-s{sample}"));
            let mut chosen = Vec::with_capacity(edges.len());
            for &(a, b) in edges {
                let mut acc = Clifford2::identity();
                let mut ids = Vec::with_capacity(m);
                for _ in 0..m {
                    let cl = random_clifford2(&mut rng);
                    c.extend(cl.gate_seq(a, b)).expect("edge qubits in range");
                    acc = acc.then(cl);
                    ids.push(cl.index());
                }
                c.extend(acc.inverse().gate_seq(a, b)).expect("edge qubits in range");
                chosen.push(ids);
            }
            for (i, &(a, b)) in edges.iter().enumerate() {
                c.push(Gate::measure(a, 2 * i)).expect("in range");
                c.push(Gate::measure(b, 2 * i + 1)).expect("in range");
            }
            out.push(RbCircuit { circuit: c, length: m, sample, edges: edges.to_vec(), cliffords: chosen });
        }
    }
    Ok(out)
}

/// `(d−1)/d · (1 − alpha)` with `d = 4`.
pub fn epc_from_alpha(alpha: f64) -> Result<f64, CalibrationError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CalibrationError::AlphaOutOfRange(alpha));
    }
    Ok(0.75 * (1.0 - alpha))
}

/// Converts an RB decay rate to a per-CX depolarizing probability.
///
/// Each Clifford `i` of the sampled sequences contributes the depolarizing
/// factor `(1 − 16p/15)^{cx_i} · (1 − 16p₁/15)^{u_i}` where `u_i` counts its
/// single-qubit gates and `p₁` is the single-qubit prior. The returned `p`
/// makes the mean factor equal `alpha` (bisection).
pub fn per_cx_error(alpha: f64, gate_counts: &[(usize, usize)], p_gate_1q: f64) -> f64 {
    if gate_counts.is_empty() {
        return 0.0;
    }
    let l1 = 1.0 - 16.0 * p_gate_1q / 15.0;
    let mean_factor = |p: f64| {
        let l2 = 1.0 - 16.0 * p / 15.0;
        gate_counts.iter().map(|&(cx, u)| l2.powi(cx as i32) * l1.powi(u as i32)).sum::<f64>()
            / gate_counts.len() as f64
    };
    if alpha >= mean_factor(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    if alpha <= mean_factor(hi) {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mean_factor(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fitted RB result for one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RbRun {
    pub edge: (usize, usize),
    pub lengths: Vec<usize>,
    pub samples: usize,
    /// `survival[i][j]`: length index `i`, sample `j`.
    pub survival: Vec<Vec<f64>>,
    pub fit: DecayFit,
    pub epc: f64,
    pub per_cx: f64,
}

/// Assembles an estimated snapshot. `edge_errors` maps `(low, high)` pairs to
/// per-CX error; `gate_err_1q` is per qubit.
pub fn build_snapshot(
    topology: &Topology,
    readout: &[ReadoutEstimate],
    edge_errors: &BTreeMap<(usize, usize), f64>,
    gate_err_1q: &[f64],
    timestamp_min: f64,
) -> Result<CalibrationSnapshot, CalibrationError> {
    let n = topology.n_qubits();
    if readout.len() < n {
        return Err(CalibrationError::MissingQubit(readout.len()));
    }
    if gate_err_1q.len() < n {
        return Err(CalibrationError::MissingQubit(gate_err_1q.len()));
    }
    let cap = |v: f64| v.clamp(0.0, 0.5 - 1e-9);
    let qubits = (0..n)
        .map(|id| {
            let r = readout[id];
            QubitCalibration {
                id,
                p_read_0to1: cap(r.p_read_0to1),
                p_read_1to0: cap(r.p_read_1to0),
                readout_err: cap(r.readout_err),
                gate_err_1q: cap(gate_err_1q[id]),
            }
        })
        .collect();
    let edges = topology
        .edges()
        .iter()
        .map(|&(a, b)| {
            edge_errors
                .get(&(a, b))
                .or_else(|| edge_errors.get(&(b, a)))
                .map(|&e| EdgeCalibration { a, b, epc_2q: cap(e) })
                .ok_or(CalibrationError::MissingEdge(a, b))
        })
        .collect::<Result<_, _>>()?;
    Ok(CalibrationSnapshot {
        timestamp_min,
        device: topology.name().to_string(),
        origin: SnapshotOrigin::Estimated,
        qubits,
        edges,
    })
}

/// Shot counts and RB shape of a calibration job.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub readout_shots: u64,
    pub rb_shots: u64,
    pub rb_lengths: Vec<usize>,
    pub rb_samples: usize,
    pub prior_1q: f64,
    /// Pin the RB asymptote at 1/4 instead of fitting it.
    pub fixed_floor: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            readout_shots: 8192,
            rb_shots: 2048,
            rb_lengths: DEFAULT_RB_LENGTHS.to_vec(),
            rb_samples: DEFAULT_RB_SAMPLES,
            prior_1q: DEFAULT_PRIOR_1Q,
            fixed_floor: true,
        }
    }
}

impl CalibrationConfig {
    /// Circuits in one job on `topology`.
    pub fn job_size(&self, topology: &Topology) -> usize {
        2 + edge_batches(topology).len() * self.rb_samples * self.rb_lengths.len()
    }
}

/// Output of a calibration job.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub snapshot: CalibrationSnapshot,
    pub rb_runs: Vec<RbRun>,
    pub n_circuits: usize,
}

/// Runs the full calibration job against the device at its current clock:
/// two readout circuits plus edge-batched RB, then fits and assembles the
/// snapshot.
pub fn calibrate(
    noise: &GroundTruthNoise,
    config: &CalibrationConfig,
    seed: u64,
) -> Result<CalibrationResult, CalibrationError> {
    let topo = noise.topology();
    let n_circuits = config.job_size(topo);
    if n_circuits > JOB_CIRCUIT_BUDGET {
        return Err(CalibrationError::OverBudget { got: n_circuits, limit: JOB_CIRCUIT_BUDGET });
    }
    let t = noise.clock_min();
    let exec = |circuit: Circuit, shots: u64, s: u64| {
        run_noisy(&ExecutionSpec { circuit, shots, seed: s, exec_time_min: t }, noise)
    };
    let [ca, cb] = readout_cal_circuits(topo);
    let counts_a = exec(ca, config.readout_shots, derive_seed(seed, 1))?;
    let counts_b = exec(cb, config.readout_shots, derive_seed(seed, 2))?;
    let readout = estimate_readout_corrected(&counts_a, &counts_b, config.prior_1q)?;

    let mut rb_runs = Vec::new();
    let mut edge_errors = BTreeMap::new();
    for (bi, batch) in edge_batches(topo).iter().enumerate() {
        let circuits = rb_circuits(
            topo.n_qubits(),
            batch,
            &config.rb_lengths,
            config.rb_samples,
            derive_seed(seed, 100 + bi as u64),
        )?;
        let mut survival = vec![vec![vec![0.0; config.rb_samples]; config.rb_lengths.len()]; batch.len()];
        let mut gate_counts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); batch.len()];
        for (ci, rb) in circuits.iter().enumerate() {
            let counts = exec(rb.circuit.clone(), config.rb_shots, derive_seed(seed, 10_000 + 1000 * bi as u64 + ci as u64))?;
            let li = ci / config.rb_samples;
            for e in 0..batch.len() {
                let ok: u64 = counts
                    .histogram()
                    .iter()
                    .filter(|(bits, _)| {
                        let w = bits.len();
                        let b = bits.as_bytes();
                        b[w - 1 - 2 * e] == b'0' && b[w - 2 - 2 * e] == b'0'
                    })
                    .map(|(_, n)| n)
                    .sum();
                survival[e][li][rb.sample] = ok as f64 / counts.shots() as f64;
                gate_counts[e].extend(rb.cliffords[e].iter().map(|&i| {
                    let c = Clifford2::by_index(i);
                    (c.cx_count(), c.single_qubit_count())
                }));
            }
        }
        for (e, &edge) in batch.iter().enumerate() {
            let points: Vec<(f64, f64)> = config
                .rb_lengths
                .iter()
                .zip(&survival[e])
                .map(|(&m, ys)| (m as f64, ys.iter().sum::<f64>() / ys.len() as f64))
                .collect();
            let fit = if config.fixed_floor { fit_decay_with_floor(&points, 0.25)? } else { fit_decay(&points)? };
            let epc = epc_from_alpha(fit.alpha)?;
            let per_cx = per_cx_error(fit.alpha, &gate_counts[e], config.prior_1q);
            edge_errors.insert(edge, per_cx);
            rb_runs.push(RbRun {
                edge,
                lengths: config.rb_lengths.clone(),
                samples: config.rb_samples,
                survival: survival[e].clone(),
                fit,
                epc,
                per_cx,
            });
        }
    }
    let prior = vec![config.prior_1q; topo.n_qubits()];
    let snapshot = build_snapshot(topo, &readout, &edge_errors, &prior, t)?;
    Ok(CalibrationResult { snapshot, rb_runs, n_circuits })
}
