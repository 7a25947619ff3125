mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use qjit_core::calibration::{
    calibrate, edge_batches, epc_from_alpha, fit_decay, random_clifford2, rb_circuits, CalibrationConfig,
    CalibrationSnapshot, PauliRow, CLIFFORD2_ORDER, DEFAULT_RB_LENGTHS, JOB_CIRCUIT_BUDGET,
};
use qjit_core::circuit::{decompose_to_basis, unitary_of, Circuit};
use qjit_core::device::{EdgeNoise, GroundTruthNoise, QubitNoise};
use qjit_core::sim::run_noiseless;

use common::topo;

const PRESETS: [&str; 6] = ["line(5)", "almaden20", "paris27", "grid(3,4)", "tree(7)", "grid(4,4)"];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Matrix of a tableau row, with `x = z = 1` read as Y.
fn row_matrix(r: &PauliRow) -> DMatrix<Complex64> {
    let one = |k: u8| {
        let (x, z) = ((r.x >> k) & 1, (r.z >> k) & 1);
        match (x, z) {
            (0, 0) => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
            (1, 0) => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            (0, 1) => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
            _ => DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        }
    };
    // Qubit 0 is the least significant index bit.
    let m = one(1).kronecker(&one(0));
    if r.sign { -m } else { m }
}

#[test]
fn batches_are_proper_edge_colorings() {
    for p in PRESETS {
        let t = topo(p);
        let batches = edge_batches(&t);
        let mut seen: Vec<(usize, usize)> = batches.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, t.edges(), "{p}: every edge exactly once");
        for b in &batches {
            for (i, &(a, x)) in b.iter().enumerate() {
                for &(c, d) in &b[i + 1..] {
                    assert!(a != c && a != d && x != c && x != d, "{p}: adjacent edges share a batch");
                }
            }
        }
    }
}

#[test]
fn default_job_fits_the_budget() {
    for p in PRESETS {
        assert!(CalibrationConfig::default().job_size(&topo(p)) <= JOB_CIRCUIT_BUDGET, "{p}");
    }
}

#[test]
fn sampling_is_uniform_over_the_group() {
    let samples = 10 * CLIFFORD2_ORDER;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = vec![0u32; CLIFFORD2_ORDER];
    for _ in 0..samples {
        counts[random_clifford2(&mut rng).index()] += 1;
    }
    let expected = samples as f64 / CLIFFORD2_ORDER as f64;
    let sigma = (expected * (1.0 - 1.0 / CLIFFORD2_ORDER as f64)).sqrt();
    assert!(counts.iter().all(|&k| (k as f64 - expected).abs() <= 5.0 * sigma));
    let chi2: f64 = counts.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    // Degrees of freedom 11519; 5 standard deviations of the chi-square.
    let dof = (CLIFFORD2_ORDER - 1) as f64;
    assert!((chi2 - dof).abs() < 5.0 * (2.0 * dof).sqrt(), "chi-square {chi2}");
}

#[test]
fn gate_sequences_implement_their_tableaux() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let inputs = [PauliRow { x: 1, z: 0, sign: false }, PauliRow { x: 0, z: 1, sign: false }, PauliRow { x: 2, z: 0, sign: false }, PauliRow { x: 0, z: 2, sign: false }];
    for _ in 0..1000 {
        let cl = random_clifford2(&mut rng);
        assert!(cl.tableau().is_symplectic());
        let u = unitary_of(&Circuit::from_gates("", 2, 0, cl.gate_seq(0, 1)).unwrap()).unwrap();
        for (input, image) in inputs.iter().zip(&cl.tableau().rows) {
            let conj = &u * row_matrix(input) * u.adjoint();
            assert!((conj - row_matrix(image)).norm() < 1e-9, "Clifford {}", cl.index());
        }
    }
}

#[test]
fn rb_sequences_return_to_zero() {
    for seed in 0..20 {
        let circuits = rb_circuits(2, &[(0, 1)], &[1, 2, 4], 2, seed).unwrap();
        for rb in circuits {
            let d = run_noiseless(&decompose_to_basis(&rb.circuit).unwrap()).unwrap();
            assert!((d["00"] - 1.0).abs() < 1e-9, "seed {seed} m {}", rb.length);
        }
    }
}

#[test]
fn exact_decay_is_recovered() {
    let points: Vec<(f64, f64)> = [1, 4, 16, 32, 64].iter().map(|&m| (m as f64, 0.75 * 0.98f64.powi(m) + 0.25)).collect();
    let fit = fit_decay(&points).unwrap();
    assert!((fit.alpha - 0.98).abs() < 1e-6, "alpha {}", fit.alpha);
}

#[test]
fn noisy_decay_is_recovered() {
    let mut good = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<(f64, f64)> = DEFAULT_RB_LENGTHS
            .iter()
            .map(|&m| {
                let p = 0.75 * 0.96f64.powi(m as i32) + 0.25;
                let k = Binomial::new(4096, p).unwrap().sample(&mut rng);
                (m as f64, k as f64 / 4096.0)
            })
            .collect();
        if (fit_decay(&points).unwrap().alpha - 0.96).abs() <= 0.01 {
            good += 1;
        }
    }
    assert!(good >= 90, "{good}/100 within 0.01");
}

#[test]
fn epc_relation() {
    assert!((epc_from_alpha(0.96).unwrap() - 0.03).abs() < 1e-12);
    assert!(epc_from_alpha(0.0).is_err());
}

#[test]
fn zero_noise_pipeline_reports_near_zero() {
    let t = topo("line(5)");
    let noise = GroundTruthNoise::uniform(&t, QubitNoise { p_read_0to1: 0.0, p_read_1to0: 0.0, p_gate_1q: 0.0 }, EdgeNoise { p_gate_2q: 0.0 });
    let result = calibrate(&noise, &CalibrationConfig { prior_1q: 0.0, ..Default::default() }, 3).unwrap();
    let s = &result.snapshot;
    assert!(s.qubits.iter().all(|q| q.readout_err < 2e-3 && q.p_read_0to1 < 2e-3 && q.p_read_1to0 < 2e-3));
    assert!(s.edges.iter().all(|e| e.epc_2q < 2e-3));
    assert_eq!(result.n_circuits, CalibrationConfig::default().job_size(&t));
}

#[test]
fn static_device_is_recovered_end_to_end() {
    let t = topo("line(4)");
    let p = 0.015;
    let noise = GroundTruthNoise::uniform(&t, QubitNoise { p_read_0to1: 0.02, p_read_1to0: 0.04, p_gate_1q: 1.5e-3 }, EdgeNoise { p_gate_2q: p });
    let config = CalibrationConfig { readout_shots: 65536, ..Default::default() };
    let snap = calibrate(&noise, &config, 11).unwrap().snapshot;
    let se = |q: f64| (q * (1.0 - q) / 65536.0).sqrt();
    for q in &snap.qubits {
        assert!((q.p_read_0to1 - 0.02).abs() < 3.0 * se(0.02), "{q:?}");
        assert!((q.p_read_1to0 - 0.04).abs() < 3.0 * se(0.04), "{q:?}");
    }
    for e in &snap.edges {
        assert!((e.epc_2q - p).abs() < 0.25 * p, "{e:?}");
    }
}

#[test]
fn snapshot_document_field_names() {
    let snap = GroundTruthNoise::uniform(&topo("line(2)"), QubitNoise { p_read_0to1: 0.01, p_read_1to0: 0.02, p_gate_1q: 0.001 }, EdgeNoise { p_gate_2q: 0.01 })
        .true_snapshot();
    let v: serde_json::Value = serde_json::from_str(&snap.to_json()).unwrap();
    let keys = |o: &serde_json::Value| {
        let mut k: Vec<String> = o.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    assert_eq!(keys(&v), ["device", "edges", "origin", "qubits", "timestamp_min"]);
    assert_eq!(keys(&v["qubits"][0]), ["gate_err_1q", "id", "p_read_0to1", "p_read_1to0", "readout_err"]);
    assert_eq!(keys(&v["edges"][0]), ["a", "b", "epc_2q"]);
    assert_eq!(CalibrationSnapshot::from_json(&snap.to_json()).unwrap(), snap);
}
