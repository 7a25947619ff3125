//! Shot-based statevector simulation with stochastic Pauli noise.
//!
//! Each shot draws, in program order, one uniform number per unitary gate to
//! decide whether (and which) Pauli error follows it, then one number per
//! connected block of interacting qubits to sample the measured outcome, then
//! one number per measurement for the readout flip. Blocks whose gates drew
//! no error reuse a cached ideal outcome distribution, so only erroneous
//! blocks are re-simulated.

mod counts;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use counts::{bitstring, Counts, CountsError};

use crate::circuit::{Circuit, Gate, Mat2, Pauli, StateVector};
use crate::device::GroundTruthNoise;

/// Largest block of interacting qubits simulated as one statevector.
pub const MAX_ACTIVE_QUBITS: usize = 24;
/// Outcomes are packed into a `u64`.
pub const MAX_CLBITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("gate {0:?} is not a basis gate")]
    NonBasisGate(Gate),
    #[error("{got} interacting qubits exceed the simulator limit of {limit}")]
    TooManyQubits { got: usize, limit: usize },
    #[error("{0} clbits exceed the limit of 64")]
    TooManyClbits(usize),
    #[error("qubit {qubit} does not exist on a {n_qubits}-qubit device")]
    UnknownQubit { qubit: usize, n_qubits: usize },
    #[error("cx q{0} q{1} is not on a coupler of the device")]
    NotAnEdge(usize, usize),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("noise clock is at {noise} min but execution is at {exec} min")]
    ClockMismatch { noise: f64, exec: f64 },
}

/// One execution request: a physical basis circuit and how to run it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionSpec {
    pub circuit: Circuit,
    pub shots: u64,
    pub seed: u64,
    pub exec_time_min: f64,
}

/// Relabels a circuit onto only the qubits it touches. Returns the dense
/// circuit and `map[dense] = original` (ascending).
pub fn reduce_to_active(c: &Circuit) -> (Circuit, Vec<usize>) {
    let map: Vec<usize> = c.active_qubits().into_iter().collect();
    let mut dense = vec![usize::MAX; c.n_qubits()];
    for (i, &q) in map.iter().enumerate() {
        dense[q] = i;
    }
    let mut out = Circuit::new(map.len(), c.n_clbits()).with_name(c.name());
    for g in c.gates() {
        out.push(g.remap(|q| dense[q])).expect("relabeling preserves validity");
    }
    (out, map)
}

fn check_basis(c: &Circuit) -> Result<(), SimError> {
    match c.gates().iter().find(|g| !g.is_basis()) {
        Some(g) => Err(SimError::NonBasisGate(*g)),
        None => Ok(()),
    }
}

/// Exact outcome distribution over the clbits (unmeasured clbits read 0).
/// Outcomes with probability below 1e-12 are dropped.
pub fn run_noiseless(c: &Circuit) -> Result<BTreeMap<String, f64>, SimError> {
    check_basis(c)?;
    if c.n_clbits() > MAX_CLBITS {
        return Err(SimError::TooManyClbits(c.n_clbits()));
    }
    let (dense, _) = reduce_to_active(c);
    if dense.n_qubits() > MAX_ACTIVE_QUBITS {
        return Err(SimError::TooManyQubits { got: dense.n_qubits(), limit: MAX_ACTIVE_QUBITS });
    }
    let mut s = StateVector::zero(dense.n_qubits());
    for g in dense.gates() {
        s.apply_gate(g);
    }
    let meas = dense.measurements();
    let qubits: Vec<usize> = meas.iter().map(|m| m.0).collect();
    let mut out = BTreeMap::new();
    for (idx, p) in s.marginal(&qubits).into_iter().enumerate() {
        if p < 1e-12 {
            continue;
        }
        let mut word = 0u64;
        for (k, &(_, clbit)) in meas.iter().enumerate() {
            word |= (((idx >> k) & 1) as u64) << clbit;
        }
        *out.entry(bitstring(word, c.n_clbits())).or_insert(0.0) += p;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Op {
    One(usize, Mat2),
    Cx(usize, usize),
}

/// A set of qubits closed under the circuit's two-qubit interactions.
#[derive(Debug)]
struct Block {
    n_qubits: usize,
    /// `(global gate index, op on local ids)`.
    ops: Vec<(usize, Op)>,
    /// `(local qubit, clbit)`.
    measured: Vec<(usize, usize)>,
    /// Cumulative ideal distribution over `measured`.
    ideal_cdf: Vec<f64>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn cumulative(p: Vec<f64>) -> Vec<f64> {
    let mut acc = 0.0;
    p.into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn sample_cdf(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().unwrap_or(&1.0);
    let target = u * total;
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

fn run_ops(state: &mut StateVector, ops: &[(usize, Op)], errors: Option<&[u8]>, two_qubit: &[bool]) {
    for &(gi, op) in ops {
        match op {
            Op::One(q, ref m) => state.apply_1q(q, m),
            Op::Cx(c, t) => state.apply_cx(c, t),
        }
        let Some(err) = errors else { continue };
        let e = err[gi];
        if e == 0 {
            continue;
        }
        match op {
            Op::One(q, _) => state.apply_pauli(q, Pauli::from_index(e as usize)),
            Op::Cx(c, t) => {
                debug_assert!(two_qubit[gi]);
                state.apply_pauli(c, Pauli::from_index(e as usize & 3));
                state.apply_pauli(t, Pauli::from_index(e as usize >> 2));
            }
        }
    }
}

/// Precomputed per-circuit simulation plan.
struct Plan {
    /// Error probability of each unitary gate, program order.
    gate_p: Vec<f64>,
    two_qubit: Vec<bool>,
    gate_block: Vec<usize>,
    blocks: Vec<Block>,
    /// `(clbit, p flip if 0 read, p flip if 1 read)` in program order.
    readout: Vec<(usize, f64, f64)>,
}

impl Plan {
    fn new(c: &Circuit, noise: &GroundTruthNoise) -> Result<Plan, SimError> {
        let topo = noise.topology();
        for g in c.gates() {
            if !g.is_basis() {
                return Err(SimError::NonBasisGate(*g));
            }
            for q in g.qubits() {
                if q >= topo.n_qubits() {
                    return Err(SimError::UnknownQubit { qubit: q, n_qubits: topo.n_qubits() });
                }
            }
            if let Gate::Cx { control, target } = *g {
                if !topo.are_adjacent(control, target) {
                    return Err(SimError::NotAnEdge(control, target));
                }
            }
        }
        let (dense, map) = reduce_to_active(c);
        let n = dense.n_qubits();
        let mut parent: Vec<usize> = (0..n).collect();
        for g in dense.gates() {
            if let Gate::Cx { control, target } = *g {
                let (a, b) = (find(&mut parent, control), find(&mut parent, target));
                parent[a.max(b)] = a.min(b);
            }
        }
        let roots: Vec<usize> = (0..n).map(|q| find(&mut parent, q)).collect();
        let mut block_of_root = vec![usize::MAX; n];
        let mut local = vec![0usize; n];
        let mut sizes = Vec::new();
        for q in 0..n {
            let r = roots[q];
            if block_of_root[r] == usize::MAX {
                block_of_root[r] = sizes.len();
                sizes.push(0);
            }
            let b = block_of_root[r];
            local[q] = sizes[b];
            sizes[b] += 1;
        }
        if let Some(&big) = sizes.iter().max() {
            if big > MAX_ACTIVE_QUBITS {
                return Err(SimError::TooManyQubits { got: big, limit: MAX_ACTIVE_QUBITS });
            }
        }
        let mut blocks: Vec<Block> = sizes
            .iter()
            .map(|&k| Block { n_qubits: k, ops: Vec::new(), measured: Vec::new(), ideal_cdf: Vec::new() })
            .collect();
        let mut plan = Plan {
            gate_p: Vec::new(),
            two_qubit: Vec::new(),
            gate_block: Vec::new(),
            blocks: Vec::new(),
            readout: Vec::new(),
        };
        for g in dense.gates() {
            match *g {
                Gate::Barrier => {}
                Gate::Measure { qubit, clbit } => {
                    let b = block_of_root[roots[qubit]];
                    blocks[b].measured.push((local[qubit], clbit));
                    let qn = noise.qubit(map[qubit]);
                    plan.readout.push((clbit, qn.p_read_0to1, qn.p_read_1to0));
                }
                Gate::Cx { control, target } => {
                    let b = block_of_root[roots[control]];
                    let gi = plan.gate_p.len();
                    let p = noise.edge_between(map[control], map[target]).expect("checked above").p_gate_2q;
                    plan.gate_p.push(p);
                    plan.two_qubit.push(true);
                    plan.gate_block.push(b);
                    blocks[b].ops.push((gi, Op::Cx(local[control], local[target])));
                }
                ref g1 => {
                    let q = g1.qubits()[0];
                    let b = block_of_root[roots[q]];
                    let gi = plan.gate_p.len();
                    plan.gate_p.push(noise.qubit(map[q]).p_gate_1q);
                    plan.two_qubit.push(false);
                    plan.gate_block.push(b);
                    let m = g1.matrix_1q().expect("basis single-qubit gate");
                    blocks[b].ops.push((gi, Op::One(local[q], m)));
                }
            }
        }
        for b in &mut blocks {
            if b.measured.is_empty() {
                continue;
            }
            let mut s = StateVector::zero(b.n_qubits);
            run_ops(&mut s, &b.ops, None, &plan.two_qubit);
            let qs: Vec<usize> = b.measured.iter().map(|m| m.0).collect();
            b.ideal_cdf = cumulative(s.marginal(&qs));
        }
        plan.blocks = blocks;
        Ok(plan)
    }

    fn shot(&self, seed: u64, shot: u64, errors: &mut Vec<u8>, dirty: &mut Vec<bool>) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(seed, shot));
        errors.clear();
        dirty.clear();
        dirty.resize(self.blocks.len(), false);
        for (gi, &p) in self.gate_p.iter().enumerate() {
            let u: f64 = rng.random();
            let e = if u < p {
                let kinds = if self.two_qubit[gi] { 15.0 } else { 3.0 };
                dirty[self.gate_block[gi]] = true;
                1 + ((u / p * kinds) as u8).min(kinds as u8 - 1)
            } else {
                0
            };
            errors.push(e);
        }
        let mut word = 0u64;
        for (bi, b) in self.blocks.iter().enumerate() {
            if b.measured.is_empty() {
                continue;
            }
            let u: f64 = rng.random();
            let outcome = if dirty[bi] {
                let mut s = StateVector::zero(b.n_qubits);
                run_ops(&mut s, &b.ops, Some(errors), &self.two_qubit);
                let qs: Vec<usize> = b.measured.iter().map(|m| m.0).collect();
                sample_cdf(&cumulative(s.marginal(&qs)), u)
            } else {
                sample_cdf(&b.ideal_cdf, u)
            };
            for (k, &(_, clbit)) in b.measured.iter().enumerate() {
                word |= (((outcome >> k) & 1) as u64) << clbit;
            }
        }
        for &(clbit, p01, p10) in &self.readout {
            let u: f64 = rng.random();
            let bit = (word >> clbit) & 1;
            let p = if bit == 0 { p01 } else { p10 };
            if u < p {
                word ^= 1 << clbit;
            }
        }
        word
    }
}

/// SplitMix64 finalizer over the master seed and shot index.
fn shot_seed(seed: u64, shot: u64) -> u64 {
    let mut z = seed ^ shot.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const CHUNK: u64 = 256;

/// Samples `spec.shots` noisy trajectories. Deterministic in `spec.seed`,
/// whether or not shots run in parallel.
pub fn run_noisy(spec: &ExecutionSpec, noise: &GroundTruthNoise) -> Result<Counts, SimError> {
    if spec.shots == 0 {
        return Err(SimError::ZeroShots);
    }
    if (noise.clock_min() - spec.exec_time_min).abs() > 1e-9 {
        return Err(SimError::ClockMismatch { noise: noise.clock_min(), exec: spec.exec_time_min });
    }
    let c = &spec.circuit;
    if c.n_clbits() > MAX_CLBITS {
        return Err(SimError::TooManyClbits(c.n_clbits()));
    }
    let plan = Plan::new(c, noise)?;
    let n_chunks = spec.shots.div_ceil(CHUNK);
    let run_chunk = |k: u64| {
        let mut errors = Vec::with_capacity(plan.gate_p.len());
        let mut dirty = Vec::with_capacity(plan.blocks.len());
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        for shot in k * CHUNK..((k + 1) * CHUNK).min(spec.shots) {
            *hist.entry(plan.shot(spec.seed, shot, &mut errors, &mut dirty)).or_insert(0) += 1;
        }
        hist
    };
    #[cfg(feature = "parallel")]
    let partial: Vec<BTreeMap<u64, u64>> = {
        use rayon::prelude::*;
        (0..n_chunks).into_par_iter().map(run_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<BTreeMap<u64, u64>> = (0..n_chunks).map(run_chunk).collect();
    let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
    for h in partial {
        for (w, n) in h {
            *merged.entry(w).or_insert(0) += n;
        }
    }
    let mut counts = Counts::new(c.n_clbits());
    for (w, n) in merged {
        counts.add(w, n);
    }
    Ok(counts)
}
