//! Layout representation, the additive cost model, and layout search.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TranspileError;
use crate::calibration::CalibrationSnapshot;
use crate::circuit::{Circuit, Gate};
use crate::device::Topology;

/// Injective map from virtual qubit `v` (the index) to a physical qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    map: Vec<usize>,
    n_physical: usize,
}

impl Layout {
    pub fn new(map: Vec<usize>, n_physical: usize) -> Result<Self, TranspileError> {
        let mut seen = vec![false; n_physical];
        for &p in &map {
            if p >= n_physical || std::mem::replace(&mut seen[p], true) {
                return Err(TranspileError::InvalidLayout(map.clone()));
            }
        }
        Ok(Layout { map, n_physical })
    }

    /// Virtual `i` on physical `i`.
    pub fn trivial(n_virtual: usize, n_physical: usize) -> Result<Self, TranspileError> {
        if n_virtual > n_physical {
            return Err(TranspileError::CircuitTooLarge { virtual_qubits: n_virtual, physical_qubits: n_physical });
        }
        Layout::new((0..n_virtual).collect(), n_physical)
    }

    pub fn physical(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn n_virtual(&self) -> usize {
        self.map.len()
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    /// `inv[p] = Some(v)` when virtual `v` sits on `p`.
    pub fn inverse(&self) -> Vec<Option<usize>> {
        let mut inv = vec![None; self.n_physical];
        for (v, &p) in self.map.iter().enumerate() {
            inv[p] = Some(v);
        }
        inv
    }

    /// Short content hash of the `(virtual, physical)` pairs.
    pub fn layout_id(&self) -> String {
        let mut h = Sha256::new();
        for (v, p) in self.map.iter().enumerate() {
            h.update(format!("{v}:{p};").as_bytes());
        }
        h.finalize().iter().take(4).map(|b| format!("{b:02x}")).collect()
    }

    /// Sidecar text: one `v<i> -> p<j>` line per virtual qubit.
    pub fn to_sidecar(&self) -> String {
        self.map.iter().enumerate().map(|(v, p)| format!("v{v} -> p{p}\n")).collect()
    }

    /// Parses [`Layout::to_sidecar`] output. Lines may come in any order
    /// but must cover virtual qubits `0..k` exactly once.
    pub fn from_sidecar(text: &str, n_physical: usize) -> Result<Self, TranspileError> {
        let mut pairs = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parsed = line.split_once("->").and_then(|(v, p)| {
                let v = v.trim().strip_prefix('v')?.parse::<usize>().ok()?;
                let p = p.trim().strip_prefix('p')?.parse::<usize>().ok()?;
                Some((v, p))
            });
            let (v, p) = parsed.ok_or(TranspileError::SidecarSyntax(i + 1))?;
            if pairs.insert(v, p).is_some() {
                return Err(TranspileError::SidecarSyntax(i + 1));
            }
        }
        if let Some((missing, _)) = pairs.keys().enumerate().find(|&(i, &v)| i != v) {
            return Err(TranspileError::UncoveredQubit(missing));
        }
        Layout::new(pairs.into_values().collect(), n_physical)
    }
}

/// Additive negative-log-fidelity costs of every device element.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub n_physical: usize,
    pub gate_1q: Vec<f64>,
    pub readout: Vec<f64>,
    /// Weight of each topology edge, indexed like `Topology::edges`.
    pub edge: Vec<f64>,
    /// Cost of a CX between two physical qubits including the swaps needed
    /// to make them adjacent.
    pub pair: Vec<Vec<f64>>,
}

pub(crate) fn nll(p: f64) -> f64 {
    -(1.0 - p).ln()
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize, usize);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1)).then(o.2.cmp(&self.2))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Dijkstra from `src` over `weights` ordered by `(weight, hops, node)`.
/// Returns `(dist, hops, predecessor)`.
pub(crate) fn dijkstra(topology: &Topology, weights: &[f64], src: usize) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let n = topology.n_qubits();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[src] = 0.0;
    hops[src] = 0;
    let mut heap = BinaryHeap::from([Key(0.0, 0, src)]);
    while let Some(Key(d, h, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &v in topology.neighbors(u) {
            let w = weights[topology.edge_index(u, v).expect("neighbor edge")];
            let cand = (d + w, h + 1);
            let better = match cand.0.total_cmp(&dist[v]) {
                Ordering::Less => true,
                Ordering::Equal => cand.1 < hops[v],
                Ordering::Greater => false,
            };
            if !done[v] && better {
                dist[v] = cand.0;
                hops[v] = cand.1;
                pred[v] = u;
                heap.push(Key(cand.0, cand.1, v));
            }
        }
    }
    (dist, hops, pred)
}

impl CostModel {
    pub fn from_snapshot(topology: &Topology, snapshot: &CalibrationSnapshot) -> Result<Self, TranspileError> {
        snapshot.validate(topology).map_err(TranspileError::Snapshot)?;
        let n = topology.n_qubits();
        let mut gate_1q = vec![0.0; n];
        let mut readout = vec![0.0; n];
        for q in &snapshot.qubits {
            gate_1q[q.id] = nll(q.gate_err_1q);
            readout[q.id] = nll(q.readout_err);
        }
        let edge = topology
            .edges()
            .iter()
            .map(|&(a, b)| nll(snapshot.edge(a, b).expect("validated").epc_2q))
            .collect();
        Ok(Self::with_weights(topology, gate_1q, readout, edge))
    }

    /// Snapshot-blind model: every coupler costs 1, qubits cost nothing, so
    /// the score counts CX gates including swap overhead.
    pub fn uniform(topology: &Topology) -> Self {
        let n = topology.n_qubits();
        Self::with_weights(topology, vec![0.0; n], vec![0.0; n], vec![1.0; topology.edges().len()])
    }

    fn with_weights(topology: &Topology, gate_1q: Vec<f64>, readout: Vec<f64>, edge: Vec<f64>) -> Self {
        let n = topology.n_qubits();
        let dist: Vec<Vec<f64>> = (0..n).map(|s| dijkstra(topology, &edge, s).0).collect();
        let mut pair = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                // Swap one operand along a path until it neighbors the other,
                // then apply the CX on the final coupler.
                let toward = |from: usize, to: usize| {
                    topology
                        .neighbors(to)
                        .iter()
                        .map(|&m| 3.0 * dist[from][m] + edge[topology.edge_index(m, to).unwrap()])
                        .fold(f64::INFINITY, f64::min)
                };
                pair[a][b] = toward(a, b).min(toward(b, a));
            }
        }
        CostModel { n_physical: n, gate_1q, readout, edge, pair }
    }
}

/// Virtual-circuit summary the cost depends on.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    n_virtual: usize,
    n_1q: Vec<usize>,
    measured: Vec<bool>,
    /// `(u, v, count)` with `u < v`.
    pairs: Vec<(usize, usize, usize)>,
}

impl Profile {
    pub(crate) fn of(c: &Circuit) -> Self {
        let n = c.n_qubits();
        let mut n_1q = vec![0; n];
        let mut measured = vec![false; n];
        let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for g in c.gates() {
            match *g {
                Gate::Measure { qubit, .. } => measured[qubit] = true,
                Gate::Barrier => {}
                Gate::Cx { control, target } => {
                    *pairs.entry((control.min(target), control.max(target))).or_insert(0) += 1
                }
                ref g1 => n_1q[g1.qubits()[0]] += 1,
            }
        }
        Profile { n_virtual: n, n_1q, measured, pairs: pairs.into_iter().map(|((u, v), k)| (u, v, k)).collect() }
    }

    fn single(&self, m: &CostModel, v: usize, p: usize) -> f64 {
        self.n_1q[v] as f64 * m.gate_1q[p] + if self.measured[v] { m.readout[p] } else { 0.0 }
    }

    pub(crate) fn cost(&self, m: &CostModel, map: &[usize]) -> f64 {
        let mut total = 0.0;
        for v in 0..self.n_virtual {
            total += self.single(m, v, map[v]);
        }
        for &(u, v, k) in &self.pairs {
            total += k as f64 * m.pair[map[u]][map[v]];
        }
        total
    }
}

fn check_basis(c: &Circuit) -> Result<(), TranspileError> {
    match c.gates().iter().find(|g| !g.is_basis()) {
        Some(g) => Err(TranspileError::NonBasisGate(*g)),
        None => Ok(()),
    }
}

/// Cost of running basis circuit `c` under `layout`: per-CX routed pair
/// cost, per-gate single-qubit cost, and readout cost of measured qubits.
pub fn score_layout(c: &Circuit, layout: &Layout, model: &CostModel) -> Result<f64, TranspileError> {
    check_basis(c)?;
    if layout.n_virtual() < c.n_qubits() {
        return Err(TranspileError::UncoveredQubit(layout.n_virtual()));
    }
    if layout.n_physical() != model.n_physical {
        return Err(TranspileError::InvalidLayout(layout.as_slice().to_vec()));
    }
    Ok(Profile::of(c).cost(model, layout.as_slice()))
}

/// Largest search handled exactly.
pub const EXACT_MAX_VIRTUAL: usize = 6;
pub const EXACT_MAX_PHYSICAL: usize = 12;
pub const ANNEAL_RESTARTS: u64 = 8;
pub const ANNEAL_ITERATIONS: usize = 4000;
pub const ANNEAL_DECAY: f64 = 0.97;
/// Iterations spent at each temperature before it decays.
const ANNEAL_STEPS_PER_LEVEL: usize = 20;
const ANNEAL_PROBE_LAYOUTS: usize = 64;

/// Relative slack under which two costs count as equal (ties then go to the
/// lexicographically smaller physical vector).
const TIE_EPS: f64 = 1e-9;

fn strictly_better(a: f64, b: f64) -> bool {
    a < b - TIE_EPS * (1.0 + b.abs())
}

fn better_layout(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    strictly_better(a.0, b.0) || (!strictly_better(b.0, a.0) && a.1 < b.1)
}

/// Minimum-cost layout. Exact branch-and-bound for small instances,
/// otherwise seeded simulated annealing with restarts.
pub fn select_layout(c: &Circuit, model: &CostModel, seed: u64) -> Result<Layout, TranspileError> {
    check_basis(c)?;
    let nv = c.n_qubits();
    let np = model.n_physical;
    if nv > np {
        return Err(TranspileError::CircuitTooLarge { virtual_qubits: nv, physical_qubits: np });
    }
    let prof = Profile::of(c);
    let map = if nv <= EXACT_MAX_VIRTUAL && np <= EXACT_MAX_PHYSICAL {
        branch_and_bound(&prof, model)
    } else {
        anneal(&prof, model, seed)
    };
    Layout::new(map, np)
}

fn branch_and_bound(prof: &Profile, m: &CostModel) -> Vec<usize> {
    let nv = prof.n_virtual;
    let np = m.n_physical;
    let min_single: Vec<f64> =
        (0..nv).map(|v| (0..np).map(|p| prof.single(m, v, p)).fold(f64::INFINITY, f64::min)).collect();
    let min_pair = (0..np)
        .flat_map(|a| (0..np).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| m.pair[a][b])
        .fold(f64::INFINITY, f64::min);
    let min_pair = if min_pair.is_finite() { min_pair } else { 0.0 };
    // Pairs indexed by their later virtual qubit so each is charged once,
    // when both ends are placed.
    let mut pairs_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for &(u, v, k) in &prof.pairs {
        pairs_at[v].push((u, k));
    }
    // remaining_lb[i]: bound on cost still to come after placing 0..i.
    let mut remaining_lb = vec![0.0; nv + 1];
    for i in (0..nv).rev() {
        let pair_part: f64 = pairs_at[i].iter().map(|&(_, k)| k as f64 * min_pair).sum();
        remaining_lb[i] = remaining_lb[i + 1] + min_single[i] + pair_part;
    }

    struct Search<'a> {
        prof: &'a Profile,
        m: &'a CostModel,
        pairs_at: Vec<Vec<(usize, usize)>>,
        remaining_lb: Vec<f64>,
        map: Vec<usize>,
        used: Vec<bool>,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, acc: f64) {
            if let Some((b, _)) = &self.best {
                // Only a strict improvement may replace the incumbent, which
                // keeps the lexicographically first optimum.
                if !strictly_better(acc + self.remaining_lb[i], *b) {
                    return;
                }
            }
            if i == self.map.len() {
                if self.best.as_ref().is_none_or(|(b, _)| strictly_better(acc, *b)) {
                    self.best = Some((acc, self.map.clone()));
                }
                return;
            }
            for p in 0..self.m.n_physical {
                if self.used[p] {
                    continue;
                }
                let mut add = self.prof.single(self.m, i, p);
                for &(u, k) in &self.pairs_at[i] {
                    add += k as f64 * self.m.pair[self.map[u]][p];
                }
                self.used[p] = true;
                self.map[i] = p;
                self.go(i + 1, acc + add);
                self.used[p] = false;
            }
        }
    }

    let mut s = Search {
        prof,
        m,
        pairs_at,
        remaining_lb,
        map: vec![0; nv],
        used: vec![false; np],
        best: None,
    };
    s.go(0, 0.0);
    s.best.map(|b| b.1).unwrap_or_default()
}

fn restart_seed(seed: u64, r: u64) -> u64 {
    let mut z = seed.wrapping_add(r.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^ (z >> 31)
}

fn anneal_once(prof: &Profile, m: &CostModel, seed: u64) -> (f64, Vec<usize>) {
    let nv = prof.n_virtual;
    let np = m.n_physical;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..np).collect();
    let mut probe = Vec::with_capacity(ANNEAL_PROBE_LAYOUTS);
    for _ in 0..ANNEAL_PROBE_LAYOUTS {
        perm.shuffle(&mut rng);
        probe.push(prof.cost(m, &perm[..nv]));
    }
    let spread = probe.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - probe.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut temp = if spread > 0.0 { spread } else { 1.0 };
    perm.shuffle(&mut rng);
    let mut cur = prof.cost(m, &perm[..nv]);
    let mut best = (cur, perm[..nv].to_vec());
    if nv == 0 {
        return best;
    }
    for it in 0..ANNEAL_ITERATIONS {
        let i = rng.random_range(0..nv);
        let mut j = rng.random_range(0..np - 1);
        if j >= i {
            j += 1;
        }
        perm.swap(i, j);
        let next = prof.cost(m, &perm[..nv]);
        let accept = next <= cur || rng.random::<f64>() < ((cur - next) / temp).exp();
        if accept {
            cur = next;
            if better_layout((cur, &perm[..nv]), (best.0, &best.1)) {
                best = (cur, perm[..nv].to_vec());
            }
        } else {
            perm.swap(i, j);
        }
        if (it + 1) % ANNEAL_STEPS_PER_LEVEL == 0 {
            temp *= ANNEAL_DECAY;
        }
    }
    best
}

fn anneal(prof: &Profile, m: &CostModel, seed: u64) -> Vec<usize> {
    let run = |r: u64| anneal_once(prof, m, restart_seed(seed, r));
    #[cfg(feature = "parallel")]
    let results: Vec<(f64, Vec<usize>)> = {
        use rayon::prelude::*;
        (0..ANNEAL_RESTARTS).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(f64, Vec<usize>)> = (0..ANNEAL_RESTARTS).map(run).collect();
    let mut best = results[0].clone();
    for r in &results[1..] {
        if better_layout((r.0, &r.1), (best.0, &best.1)) {
            best = r.clone();
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{build_topology, TopologyPreset};

    #[test]
    fn pair_cost_counts_swaps() {
        let t = build_topology(&TopologyPreset::Line(4)).unwrap();
        let m = CostModel::uniform(&t);
        assert_eq!(m.pair[0][1], 1.0);
        assert_eq!(m.pair[0][2], 4.0);
        assert_eq!(m.pair[0][3], 7.0);
        assert_eq!(m.pair[3][0], 7.0);
    }

    #[test]
    fn layout_rejects_collisions() {
        assert!(Layout::new(vec![0, 0], 3).is_err());
        assert!(Layout::new(vec![3], 3).is_err());
        let l = Layout::new(vec![2, 0], 3).unwrap();
        assert_eq!(l.to_sidecar(), "v0 -> p2\nv1 -> p0\n");
        assert_eq!(l.layout_id().len(), 8);
        assert_ne!(l.layout_id(), Layout::new(vec![0, 2], 3).unwrap().layout_id());
    }
}
