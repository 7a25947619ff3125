//! Hidden ground-truth error parameters and their drift.
//!
//! Every error probability is driven by its own Ornstein-Uhlenbeck process
//! in logit space, mean-reverting to a per-element mean. Elements flagged
//! persistent-bad have their mean raised by a factor of 5–10 in probability
//! space. Only the simulator and test oracles may read this state; the
//! transpiler sees noise exclusively through a [`CalibrationSnapshot`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DeviceError, Topology};
use crate::calibration::{CalibrationSnapshot, EdgeCalibration, QubitCalibration, SnapshotOrigin};

/// Lower clamp applied to every probability.
pub const P_MIN: f64 = 1e-6;
/// Upper clamp; probabilities stay strictly below one half.
pub const P_MAX: f64 = 0.5 - 1e-9;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(P_MIN, P_MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitNoise {
    /// P(read 1 | prepared |0⟩).
    pub p_read_0to1: f64,
    /// P(read 0 | prepared |1⟩).
    pub p_read_1to0: f64,
    /// Depolarizing probability per single-qubit gate.
    pub p_gate_1q: f64,
}

impl QubitNoise {
    pub fn readout_err(&self) -> f64 {
        (self.p_read_0to1 + self.p_read_1to0) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeNoise {
    /// Depolarizing probability per CX on this coupler.
    pub p_gate_2q: f64,
}

/// Ornstein-Uhlenbeck parameters for one family of error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    /// Long-run mean in logit space.
    pub mean_logit: f64,
    /// Per minute.
    pub reversion_rate: f64,
    /// Per √minute, in logit units.
    pub volatility: f64,
    /// Standard deviation of the static per-element offset of the mean, in
    /// logit units. Gives devices their fixed good and bad elements.
    pub element_spread: f64,
}

impl ProcessParams {
    pub fn around(mean_p: f64, reversion_rate: f64, volatility: f64, element_spread: f64) -> Self {
        ProcessParams { mean_logit: logit(mean_p), reversion_rate, volatility, element_spread }
    }

    /// Standard deviation of the stationary distribution.
    pub fn stationary_std(&self) -> f64 {
        self.volatility / (2.0 * self.reversion_rate).sqrt()
    }

    fn validate(&self, what: &'static str) -> Result<(), DeviceError> {
        let ok = self.mean_logit.is_finite()
            && self.reversion_rate > 0.0
            && self.reversion_rate.is_finite()
            && self.volatility >= 0.0
            && self.volatility.is_finite()
            && self.element_spread >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(DeviceError::InvalidDrift(what))
        }
    }
}

pub const DEFAULT_READOUT_MEAN: f64 = 2e-2;
pub const DEFAULT_READOUT_ASYMMETRY: f64 = 2.0;
pub const DEFAULT_GATE_1Q_MEAN: f64 = 1.5e-3;
pub const DEFAULT_GATE_2Q_MEAN: f64 = 1.5e-2;
/// Three-hour correlation time.
pub const DEFAULT_REVERSION_RATE: f64 = 1.0 / 180.0;
/// Gives a stationary logit standard deviation of 0.6 at the default rate.
pub const DEFAULT_VOLATILITY: f64 = 0.6 * 0.105_409_255_338_945_98;
pub const DEFAULT_ELEMENT_SPREAD: f64 = 0.3;
pub const DEFAULT_BAD_FRACTION: f64 = 0.1;
/// Pinned elements drift less than healthy ones: their defect is the
/// persistent part of their error.
pub const PINNED_VOLATILITY_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub read_0to1: ProcessParams,
    pub read_1to0: ProcessParams,
    pub gate_1q: ProcessParams,
    pub gate_2q: ProcessParams,
    /// Fraction of qubits (readout) and of couplers (CX error) pinned high.
    pub persistent_bad_fraction: f64,
    /// Range of the multiplier applied to a pinned element's mean.
    pub bad_factor: (f64, f64),
    pub seed: u64,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams::with_means(
            DEFAULT_READOUT_MEAN,
            DEFAULT_READOUT_ASYMMETRY,
            DEFAULT_GATE_1Q_MEAN,
            DEFAULT_GATE_2Q_MEAN,
            DEFAULT_REVERSION_RATE,
            DEFAULT_VOLATILITY,
            DEFAULT_ELEMENT_SPREAD,
        )
    }
}

impl DriftParams {
    /// `readout_mean` is the mean of the averaged readout error;
    /// `asymmetry` is the ratio of the 1→0 mean to the 0→1 mean.
    pub fn with_means(
        readout_mean: f64,
        asymmetry: f64,
        gate_1q_mean: f64,
        gate_2q_mean: f64,
        reversion_rate: f64,
        volatility: f64,
        element_spread: f64,
    ) -> Self {
        let p01 = 2.0 * readout_mean / (1.0 + asymmetry);
        let p10 = asymmetry * p01;
        let mk = |m| ProcessParams::around(m, reversion_rate, volatility, element_spread);
        DriftParams {
            read_0to1: mk(p01),
            read_1to0: mk(p10),
            gate_1q: mk(gate_1q_mean),
            gate_2q: mk(gate_2q_mean),
            persistent_bad_fraction: DEFAULT_BAD_FRACTION,
            bad_factor: (5.0, 10.0),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets the volatility of every process.
    pub fn with_volatility(mut self, volatility: f64) -> Self {
        for p in self.processes_mut() {
            p.volatility = volatility;
        }
        self
    }

    pub fn with_reversion_rate(mut self, rate: f64) -> Self {
        for p in self.processes_mut() {
            p.reversion_rate = rate;
        }
        self
    }

    pub fn with_element_spread(mut self, spread: f64) -> Self {
        for p in self.processes_mut() {
            p.element_spread = spread;
        }
        self
    }

    pub fn with_bad_fraction(mut self, fraction: f64) -> Self {
        self.persistent_bad_fraction = fraction;
        self
    }

    fn processes_mut(&mut self) -> [&mut ProcessParams; 4] {
        [&mut self.read_0to1, &mut self.read_1to0, &mut self.gate_1q, &mut self.gate_2q]
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        self.read_0to1.validate("read_0to1")?;
        self.read_1to0.validate("read_1to0")?;
        self.gate_1q.validate("gate_1q")?;
        self.gate_2q.validate("gate_2q")?;
        if !(0.0..=1.0).contains(&self.persistent_bad_fraction) {
            return Err(DeviceError::InvalidDrift("persistent_bad_fraction"));
        }
        let (lo, hi) = self.bad_factor;
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return Err(DeviceError::InvalidDrift("bad_factor"));
        }
        Ok(())
    }
}

/// One drifting probability.
#[derive(Debug, Clone, PartialEq)]
struct Track {
    mean: f64,
    x: f64,
    /// Multiplier on the process volatility.
    scale: f64,
}

impl Track {
    fn p(&self) -> f64 {
        clamp_p(logistic(self.x))
    }
}

/// The device's true, time-varying error parameters.
#[derive(Debug, Clone)]
pub struct GroundTruthNoise {
    topology: Topology,
    drift: DriftParams,
    clock_min: f64,
    /// Per qubit: 0→1 readout, 1→0 readout, single-qubit gate.
    qubit_tracks: Vec<[Track; 3]>,
    edge_tracks: Vec<Track>,
    bad_qubits: Vec<bool>,
    bad_edges: Vec<bool>,
    rng: ChaCha8Rng,
}

impl PartialEq for GroundTruthNoise {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology
            && self.drift == other.drift
            && self.clock_min == other.clock_min
            && self.qubit_tracks == other.qubit_tracks
            && self.edge_tracks == other.edge_tracks
            && self.bad_qubits == other.bad_qubits
            && self.bad_edges == other.bad_edges
    }
}

fn pick_bad(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let k = (fraction * n as f64).round() as usize;
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut flags = vec![false; n];
    for &i in &ids[..k.min(n)] {
        flags[i] = true;
    }
    flags
}

impl GroundTruthNoise {
    /// Samples per-element means and a starting state from the stationary
    /// distribution. Deterministic in `drift.seed`; the clock starts at 0.
    pub fn init(topology: &Topology, drift: &DriftParams) -> Result<Self, DeviceError> {
        drift.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(drift.seed);
        let bad_qubits = pick_bad(topology.n_qubits(), drift.persistent_bad_fraction, &mut rng);
        let bad_edges = pick_bad(topology.edges().len(), drift.persistent_bad_fraction, &mut rng);
        let (lo, hi) = drift.bad_factor;

        let track = |params: &ProcessParams, bad: bool, rng: &mut ChaCha8Rng| {
            // Pinned elements take their level from the factor alone so the
            // spread cannot pull them back into the healthy population.
            let offset: f64 = rng.sample(StandardNormal);
            let scale = if bad { PINNED_VOLATILITY_SCALE } else { 1.0 };
            let mean = if bad {
                let factor = if hi > lo { rng.random_range(lo..hi) } else { lo };
                logit((factor * logistic(params.mean_logit)).min(0.45))
            } else {
                params.mean_logit + params.element_spread * offset
            };
            let z: f64 = rng.sample(StandardNormal);
            Track { mean, x: mean + scale * params.stationary_std() * z, scale }
        };

        let qubit_tracks = (0..topology.n_qubits())
            .map(|q| {
                let bad = bad_qubits[q];
                [
                    track(&drift.read_0to1, bad, &mut rng),
                    track(&drift.read_1to0, bad, &mut rng),
                    track(&drift.gate_1q, false, &mut rng),
                ]
            })
            .collect();
        let edge_tracks = (0..topology.edges().len())
            .map(|e| track(&drift.gate_2q, bad_edges[e], &mut rng))
            .collect();
        Ok(GroundTruthNoise {
            topology: topology.clone(),
            drift: drift.clone(),
            clock_min: 0.0,
            qubit_tracks,
            edge_tracks,
            bad_qubits,
            bad_edges,
            rng,
        })
    }

    /// Static noise with every element exactly at the given values.
    pub fn uniform(topology: &Topology, qubit: QubitNoise, edge: EdgeNoise) -> Self {
        let n_edges = topology.edges().len();
        Self::from_values(topology, &vec![qubit; topology.n_qubits()], &vec![edge; n_edges])
    }

    /// Static noise with explicit per-element values (volatility 0, means at
    /// the given values). Values are clamped into `[P_MIN, P_MAX]`.
    pub fn from_values(topology: &Topology, qubits: &[QubitNoise], edges: &[EdgeNoise]) -> Self {
        assert_eq!(qubits.len(), topology.n_qubits(), "one QubitNoise per qubit");
        assert_eq!(edges.len(), topology.edges().len(), "one EdgeNoise per edge");
        let t = |p: f64| {
            let x = logit(clamp_p(p));
            Track { mean: x, x, scale: 1.0 }
        };
        let drift = DriftParams::default().with_volatility(0.0).with_bad_fraction(0.0);
        GroundTruthNoise {
            topology: topology.clone(),
            drift,
            clock_min: 0.0,
            qubit_tracks: qubits
                .iter()
                .map(|q| [t(q.p_read_0to1), t(q.p_read_1to0), t(q.p_gate_1q)])
                .collect(),
            edge_tracks: edges.iter().map(|e| t(e.p_gate_2q)).collect(),
            bad_qubits: vec![false; topology.n_qubits()],
            bad_edges: vec![false; topology.edges().len()],
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// Evolves every parameter by `dt` minutes using the exact OU transition
    /// `x ← μ + (x − μ)·e^{−θdt} + σ·√((1 − e^{−2θdt}) / 2θ)·N(0,1)`.
    pub fn advance(&mut self, dt: f64) -> Result<(), DeviceError> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(DeviceError::NegativeDt(dt));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let drift = &self.drift;
        let rng = &mut self.rng;
        let mut step = |t: &mut Track, p: &ProcessParams| {
            let decay = (-p.reversion_rate * dt).exp();
            let sd = t.scale * p.volatility * ((1.0 - decay * decay) / (2.0 * p.reversion_rate)).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            t.x = t.mean + (t.x - t.mean) * decay + sd * z;
        };
        for [r01, r10, g1] in &mut self.qubit_tracks {
            step(r01, &drift.read_0to1);
            step(r10, &drift.read_1to0);
            step(g1, &drift.gate_1q);
        }
        for e in &mut self.edge_tracks {
            step(e, &drift.gate_2q);
        }
        self.clock_min += dt;
        Ok(())
    }

    /// Changes the diffusion of every process from now on; the current
    /// state and means are kept.
    pub fn set_volatility(&mut self, volatility: f64) -> Result<(), DeviceError> {
        let drift = self.drift.clone().with_volatility(volatility);
        drift.validate()?;
        self.drift = drift;
        Ok(())
    }

    /// Advances to an absolute time, which must not precede the clock.
    pub fn advance_to(&mut self, t_min: f64) -> Result<(), DeviceError> {
        self.advance(t_min - self.clock_min)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn drift(&self) -> &DriftParams {
        &self.drift
    }

    pub fn clock_min(&self) -> f64 {
        self.clock_min
    }

    pub fn qubit(&self, q: usize) -> QubitNoise {
        let [a, b, c] = &self.qubit_tracks[q];
        QubitNoise { p_read_0to1: a.p(), p_read_1to0: b.p(), p_gate_1q: c.p() }
    }

    pub fn qubits(&self) -> Vec<QubitNoise> {
        (0..self.topology.n_qubits()).map(|q| self.qubit(q)).collect()
    }

    pub fn edge(&self, edge_id: usize) -> EdgeNoise {
        EdgeNoise { p_gate_2q: self.edge_tracks[edge_id].p() }
    }

    pub fn edges(&self) -> Vec<EdgeNoise> {
        (0..self.edge_tracks.len()).map(|e| self.edge(e)).collect()
    }

    /// CX error on the coupler between `a` and `b`, if they are coupled.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<EdgeNoise> {
        self.topology.edge_index(a, b).map(|e| self.edge(e))
    }

    pub fn persistent_bad_qubits(&self) -> &[bool] {
        &self.bad_qubits
    }

    pub fn persistent_bad_edges(&self) -> &[bool] {
        &self.bad_edges
    }

    /// Mean-reversion target of every parameter, as probabilities, in the
    /// order `[qubit q: 0→1, 1→0, 1q]…, [edge e]…`.
    pub fn mean_values(&self) -> Vec<f64> {
        self.qubit_tracks
            .iter()
            .flat_map(|t| t.iter().map(|x| clamp_p(logistic(x.mean))))
            .chain(self.edge_tracks.iter().map(|t| clamp_p(logistic(t.mean))))
            .collect()
    }

    /// Multiplies every current probability (and its mean) by `factor`.
    pub fn scaled(&self, factor: f64) -> GroundTruthNoise {
        let mut out = self.clone();
        let scale = |t: &mut Track| {
            t.x = logit(clamp_p(t.p() * factor));
            t.mean = logit(clamp_p(clamp_p(logistic(t.mean)) * factor));
        };
        out.qubit_tracks.iter_mut().flatten().for_each(scale);
        out.edge_tracks.iter_mut().for_each(scale);
        out
    }

    /// Zero-estimation-error snapshot of the current state.
    pub fn true_snapshot(&self) -> CalibrationSnapshot {
        self.snapshot_with_origin(SnapshotOrigin::Oracle)
    }

    pub(crate) fn snapshot_with_origin(&self, origin: SnapshotOrigin) -> CalibrationSnapshot {
        let qubits = (0..self.topology.n_qubits())
            .map(|q| {
                let n = self.qubit(q);
                QubitCalibration {
                    id: q,
                    p_read_0to1: n.p_read_0to1,
                    p_read_1to0: n.p_read_1to0,
                    readout_err: n.readout_err(),
                    gate_err_1q: n.p_gate_1q,
                }
            })
            .collect();
        let edges = self
            .topology
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| EdgeCalibration { a, b, epc_2q: self.edge(e).p_gate_2q })
            .collect();
        CalibrationSnapshot {
            timestamp_min: self.clock_min,
            device: self.topology.name().to_string(),
            origin,
            qubits,
            edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{build_topology, TopologyPreset};

    fn paris() -> Topology {
        build_topology(&TopologyPreset::Paris27).unwrap()
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    #[test]
    fn zero_volatility_sits_at_means() {
        let d = DriftParams::default().with_volatility(0.0).with_seed(3);
        let n = GroundTruthNoise::init(&paris(), &d).unwrap();
        let snap = n.true_snapshot();
        let means = n.mean_values();
        for q in 0..27 {
            assert_eq!(snap.qubits[q].p_read_0to1, means[3 * q]);
            assert_eq!(snap.qubits[q].p_read_1to0, means[3 * q + 1]);
            assert_eq!(snap.qubits[q].gate_err_1q, means[3 * q + 2]);
        }
    }

    #[test]
    fn single_qubit_errors_an_order_below_two_qubit() {
        let n = GroundTruthNoise::init(&paris(), &DriftParams::default().with_seed(1)).unwrap();
        let g1 = median(n.qubits().iter().map(|q| q.p_gate_1q).collect());
        let g2 = median(n.edges().iter().map(|e| e.p_gate_2q).collect());
        let ratio = g2 / g1;
        assert!((4.0..25.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn same_seed_same_noise() {
        let d = DriftParams::default().with_seed(11);
        let mut a = GroundTruthNoise::init(&paris(), &d).unwrap();
        let mut b = GroundTruthNoise::init(&paris(), &d).unwrap();
        assert_eq!(a, b);
        for dt in [5.0, 60.0, 0.5] {
            a.advance(dt).unwrap();
            b.advance(dt).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn advance_zero_is_identity() {
        let mut n = GroundTruthNoise::init(&paris(), &DriftParams::default().with_seed(2)).unwrap();
        let before = n.clone();
        n.advance(0.0).unwrap();
        assert_eq!(n, before);
        assert!(matches!(n.advance(-1.0), Err(DeviceError::NegativeDt(_))));
    }

    #[test]
    fn static_noise_snapshot_invariant_under_advance() {
        let d = DriftParams::default().with_volatility(0.0).with_seed(4);
        let mut n = GroundTruthNoise::init(&paris(), &d).unwrap();
        let s0 = n.true_snapshot();
        n.advance(600.0).unwrap();
        let s1 = n.true_snapshot();
        assert_eq!(s0.qubits, s1.qubits);
        assert_eq!(s0.edges, s1.edges);
        assert_eq!(s1.timestamp_min, 600.0);
    }

    #[test]
    fn oracle_readout_err_is_average() {
        let n = GroundTruthNoise::init(&paris(), &DriftParams::default().with_seed(5)).unwrap();
        let snap = n.true_snapshot();
        for (q, s) in snap.qubits.iter().enumerate() {
            let g = n.qubit(q);
            assert_eq!(s.readout_err, (g.p_read_0to1 + g.p_read_1to0) / 2.0);
        }
        assert_eq!(snap.origin, SnapshotOrigin::Oracle);
    }
}
