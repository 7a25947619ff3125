//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qjit_core::bench::{adder_bench, bv, default_suite, hidden_shift, qft_bench, toffoli_bench, BenchSpec, Family};
use qjit_core::calibration::{calibrate, CalibrationConfig, CalibrationSnapshot, DEFAULT_PRIOR_1Q, JOB_CIRCUIT_BUDGET};
use qjit_core::circuit::{decompose_to_basis, Circuit, Gate};
use qjit_core::derive_seed;
use qjit_core::device::{build_topology, DriftParams, EdgeNoise, GroundTruthNoise, QubitNoise, Topology, TopologyPreset};
use qjit_core::harness::{run_scenario, ExperimentReport, JitSource, ScenarioConfig};
use qjit_core::sim::{run_noisy, ExecutionSpec};
use qjit_core::transpiler::{score_layout, select_layout, transpile, verify_equivalence, CostModel};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn topo(preset: &str) -> Topology {
    build_topology(&preset.parse::<TopologyPreset>().unwrap()).unwrap()
}

fn drifted_snapshot(t: &Topology, seed: u64, at_min: f64) -> CalibrationSnapshot {
    let mut noise = GroundTruthNoise::init(t, &DriftParams::default().with_seed(seed)).unwrap();
    noise.advance_to(at_min).unwrap();
    noise.true_snapshot()
}

fn measure_all(c: &Circuit) -> Circuit {
    let mut m = Circuit::new(c.n_qubits(), c.n_qubits());
    m.extend(c.gates().iter().copied()).unwrap();
    for q in 0..c.n_qubits() {
        m.push(Gate::measure(q, q)).unwrap();
    }
    m
}

fn random_basis_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let g = match rng.random_range(0..4) {
            0 => Gate::u1(rng.random_range(-PI..PI), q),
            1 => Gate::u2(rng.random_range(-PI..PI), rng.random_range(-PI..PI), q),
            2 => Gate::u3(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI), q),
            _ => Gate::cx(q, (q + rng.random_range(1..n)) % n),
        };
        c.push(g).unwrap();
    }
    measure_all(&c)
}

/// Layout scorer written from the cost definition alone: Floyd-Warshall
/// distances over `−ln(1 − epc)` edge weights, per-gate summation.
struct BruteForce {
    g1: Vec<f64>,
    readout: Vec<f64>,
    pair: Vec<Vec<f64>>,
}

impl BruteForce {
    fn new(t: &Topology, snap: &CalibrationSnapshot) -> Self {
        let n = t.n_qubits();
        let nll = |p: f64| -(1.0 - p).ln();
        let mut w = vec![vec![f64::INFINITY; n]; n];
        for e in &snap.edges {
            w[e.a][e.b] = nll(e.epc_2q);
            w[e.b][e.a] = nll(e.epc_2q);
        }
        let mut d = w.clone();
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        let toward = |a: usize, b: usize| (0..n).filter(|&m| w[m][b].is_finite()).map(|m| 3.0 * d[a][m] + w[m][b]).fold(f64::INFINITY, f64::min);
        let pair = (0..n).map(|a| (0..n).map(|b| if a == b { 0.0 } else { toward(a, b).min(toward(b, a)) }).collect()).collect();
        BruteForce {
            g1: snap.qubits.iter().map(|q| nll(q.gate_err_1q)).collect(),
            readout: snap.qubits.iter().map(|q| nll(q.readout_err)).collect(),
            pair,
        }
    }

    fn score(&self, c: &Circuit, map: &[usize]) -> f64 {
        let mut total = 0.0;
        let mut measured = vec![false; c.n_qubits()];
        for g in c.gates() {
            match *g {
                Gate::Cx { control, target } => total += self.pair[map[control]][map[target]],
                Gate::Measure { qubit, .. } => measured[qubit] = true,
                Gate::Barrier => {}
                ref g => total += self.g1[map[g.qubits()[0]]],
            }
        }
        total + (0..c.n_qubits()).filter(|&v| measured[v]).map(|v| self.readout[map[v]]).sum::<f64>()
    }

    fn minimum(&self, c: &Circuit, np: usize) -> f64 {
        fn go(bf: &BruteForce, c: &Circuit, np: usize, cur: &mut Vec<usize>, best: &mut f64) {
            if cur.len() == c.n_qubits() {
                *best = best.min(bf.score(c, cur));
                return;
            }
            for p in 0..np {
                if !cur.contains(&p) {
                    cur.push(p);
                    go(bf, c, np, cur, best);
                    cur.pop();
                }
            }
        }
        let mut best = f64::INFINITY;
        go(self, c, np, &mut Vec::new(), &mut best);
        best
    }
}

fn semantic_preservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    let mut worst: f64 = 1.0;
    let mut failures = Vec::new();
    for (d, device) in ["line(6)", "tree(7)"].into_iter().enumerate() {
        let t = topo(device);
        let snap = drifted_snapshot(&t, 100 + d as u64, 300.0);
        for family in Family::ALL {
            for n in 1..=4 {
                let spec = BenchSpec::new(family, n);
                for _ in 0..2 {
                    let Ok(inst) = spec.instantiate(&mut rng) else { continue };
                    if inst.circuit.n_qubits() > t.n_qubits() {
                        continue;
                    }
                    for level in 0..=3 {
                        let tc = transpile(&inst.circuit, &t, &snap, level, rng.random()).unwrap();
                        let f = verify_equivalence(&inst.circuit, &tc).unwrap();
                        checked += 1;
                        worst = worst.min(f);
                        if f < 1.0 - 1e-9 {
                            failures.push(format!("{}@{device}/L{level}", inst.label()));
                        }
                    }
                }
            }
        }
    }
    verdict(failures.is_empty(), format!("{checked} transpilations, min fidelity {worst:.12}, failures {failures:?}"))
}

/// Counts `(qubits within 3 SE, qubits, edges within 25%, edges)` per
/// injected CX error over 20 static devices. `jitter_1q` draws each
/// single-qubit error in ±50% of the calibration prior instead of at it.
fn recovery_counts(jitter_1q: bool) -> Vec<(usize, usize, usize, usize)> {
    let t = topo("line(4)");
    let shots = 65536;
    std::thread::scope(|s| {
        let handles: Vec<_> = [5e-3f64, 1.5e-2, 5e-2]
            .into_iter()
            .map(|p| {
                let t = &t;
                s.spawn(move || {
                    let (mut q_ok, mut q_all, mut e_ok, mut e_all) = (0, 0, 0, 0);
                    for seed in 0..20u64 {
                        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, p.to_bits()));
                        let qubits: Vec<QubitNoise> = (0..t.n_qubits())
                            .map(|_| QubitNoise {
                                p_read_0to1: rng.random_range(0.005..0.05),
                                p_read_1to0: rng.random_range(0.01..0.08),
                                p_gate_1q: if jitter_1q { rng.random_range(0.5..1.5) * DEFAULT_PRIOR_1Q } else { DEFAULT_PRIOR_1Q },
                            })
                            .collect();
                        let edges = vec![EdgeNoise { p_gate_2q: p }; t.edges().len()];
                        let noise = GroundTruthNoise::from_values(t, &qubits, &edges);
                        let config = CalibrationConfig { readout_shots: shots, ..Default::default() };
                        let snap = calibrate(&noise, &config, seed).unwrap().snapshot;
                        let se = |x: f64| (x * (1.0 - x) / shots as f64).sqrt();
                        for (est, truth) in snap.qubits.iter().zip(&qubits) {
                            q_all += 1;
                            let ok0 = (est.p_read_0to1 - truth.p_read_0to1).abs() <= 3.0 * se(truth.p_read_0to1);
                            let ok1 = (est.p_read_1to0 - truth.p_read_1to0).abs() <= 3.0 * se(truth.p_read_1to0);
                            q_ok += usize::from(ok0 && ok1);
                        }
                        for e in &snap.edges {
                            e_all += 1;
                            e_ok += usize::from((e.epc_2q - p).abs() <= 0.25 * p);
                        }
                    }
                    (q_ok, q_all, e_ok, e_all)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn calibration_recovery() -> Verdict {
    let results = recovery_counts(false);
    let jittered: Vec<f64> = recovery_counts(true).iter().map(|r| r.2 as f64 / r.3 as f64).collect();
    let (q_ok, q_all) = results.iter().fold((0, 0), |a, r| (a.0 + r.0, a.1 + r.1));
    let edge_rates: Vec<f64> = results.iter().map(|r| r.2 as f64 / r.3 as f64).collect();
    let q_rate = q_ok as f64 / q_all as f64;
    let pass = q_rate >= 0.95 && edge_rates.iter().all(|&r| r >= 0.9);
    verdict(pass, format!(
            "readout within 3 SE {q_ok}/{q_all}; per-CX within 25% by p {edge_rates:.3?}; with single-qubit error off the prior (informational) {jittered:.3?}"
        ))
}

fn layout_optimality() -> Verdict {
    let devices = ["line(4)", "line(6)", "line(8)", "line(10)", "grid(2,3)", "grid(2,4)", "grid(3,3)", "grid(2,5)", "tree(5)", "tree(7)", "tree(10)"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let name = devices[rng.random_range(0..devices.len())];
        let t = topo(name);
        let snap = drifted_snapshot(&t, trial, rng.random_range(0.0..1440.0));
        let nv = rng.random_range(2..=5usize.min(t.n_qubits()));
        let c = match rng.random_range(0..4) {
            0 if nv >= 2 => decompose_to_basis(&bv(nv - 1, &"1".repeat(nv - 1)).unwrap().circuit).unwrap(),
            1 if nv % 2 == 0 => decompose_to_basis(&hidden_shift(nv, &"10".repeat(nv / 2)).unwrap().circuit).unwrap(),
            2 => decompose_to_basis(&qft_bench(nv, 1).unwrap().circuit).unwrap(),
            _ => {
                let len = rng.random_range(4..20);
                random_basis_circuit(&mut rng, nv, len)
            }
        };
        let model = CostModel::from_snapshot(&t, &snap).unwrap();
        let chosen = select_layout(&c, &model, trial).unwrap();
        let bf = BruteForce::new(&t, &snap);
        let (got, best) = (bf.score(&c, chosen.as_slice()), bf.minimum(&c, t.n_qubits()));
        let internal = score_layout(&c, &chosen, &model).unwrap();
        if (got - best).abs() > 1e-9 * (1.0 + best) || (internal - got).abs() > 1e-9 * (1.0 + got) {
            failures.push(format!("trial {trial} {name} nv={nv}: {got} vs {best}"));
        }
    }
    verdict(failures.is_empty(), format!("100 trials, {} failures {failures:?}", failures.len()))
}

fn scenarios(configs: Vec<ScenarioConfig>) -> Vec<ExperimentReport> {
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_scenario(c).unwrap())).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn fmt_t(t: Option<f64>) -> String {
    t.map_or_else(|| "NA".into(), |v| format!("{v:.2}"))
}

fn jit_beats_stale() -> Verdict {
    let reports = scenarios((0..3).map(|seed| ScenarioConfig { seed, ..Default::default() }).collect());
    let mut held = 0;
    let mut parts = Vec::new();
    for r in &reports {
        let rel = r.mean_rel_improvement.unwrap_or(f64::NAN);
        let ok = rel > 0.0 && r.accuracy_test.significant(0.05) && r.win_rate >= 0.6;
        held += usize::from(ok);
        parts.push(format!(
            "seed {}: rel {:+.3} t {} p {:.1e} wins {:.2}{}",
            r.seed,
            rel,
            fmt_t(r.accuracy_test.t),
            r.accuracy_test.p_one_sided.unwrap_or(1.0),
            r.win_rate,
            if ok { "" } else { " (miss)" }
        ));
    }
    verdict(held >= 2, format!("{held}/3 seeds hold; {}", parts.join("; ")))
}

fn below_threshold(r: &ExperimentReport) -> bool {
    [&r.improvement_test, &r.accuracy_test]
        .iter()
        .all(|t| match (t.t, t.critical_05) {
            (Some(v), Some(c)) => v.abs() < c,
            (None, _) => t.mean == 0.0,
            _ => false,
        })
}

fn null_control() -> Verdict {
    let mut oracle = ScenarioConfig { runs: 20, jit_source: JitSource::Oracle, ..Default::default() };
    oracle.drift.volatility = 0.0;
    let mut calibrated: Vec<ScenarioConfig> = (0..3).map(|seed| ScenarioConfig { seed, ..Default::default() }).collect();
    for c in &mut calibrated {
        c.drift.volatility = 0.0;
    }
    let mut all = vec![oracle];
    all.extend(calibrated);
    let reports = scenarios(all);
    let r = &reports[0];
    let pass = below_threshold(r);
    let info: Vec<String> = reports[1..]
        .iter()
        .map(|c| format!("seed {} t {}{}", c.seed, fmt_t(c.improvement_test.t), if below_threshold(c) { "" } else { " (outside)" }))
        .collect();
    verdict(
        pass,
        format!(
            "identical snapshots, 20 runs: rel {:+.4} t {} vs critical {}; paired accuracy t {}; calibrated source (informational): {}",
            r.mean_rel_improvement.unwrap_or(f64::NAN),
            fmt_t(r.improvement_test.t),
            fmt_t(r.improvement_test.critical_05),
            fmt_t(r.accuracy_test.t),
            info.join(", ")
        ),
    )
}

fn size_degradation() -> Verdict {
    let t = topo("paris27");
    let specs = ["hs(4)", "hs(6)", "hs(8)", "qft(4)", "qft(6)"];
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    for seed in 0..10u64 {
        let noise = GroundTruthNoise::init(&t, &DriftParams::default().with_volatility(0.0).with_seed(seed)).unwrap();
        let snap = noise.true_snapshot();
        for (k, s) in specs.iter().enumerate() {
            let inst = s.parse::<BenchSpec>().unwrap().instantiate_seeded(derive_seed(seed, k as u64)).unwrap();
            let tc = transpile(&inst.circuit, &t, &snap, 3, seed).unwrap();
            let spec = ExecutionSpec { circuit: tc.physical_circuit, shots: 4096, seed: derive_seed(seed, 100 + k as u64), exec_time_min: 0.0 };
            let counts = run_noisy(&spec, &noise).unwrap();
            *sums.entry(s).or_default() += qjit_core::bench::accuracy(&counts, &inst.expected).unwrap() / 10.0;
        }
    }
    let a = |s: &str| sums[s];
    let slack = 0.02;
    let pass = a("hs(4)") + slack >= a("hs(6)") && a("hs(6)") + slack >= a("hs(8)") && a("qft(4)") + slack >= a("qft(6)");
    let detail: Vec<String> = specs.iter().map(|s| format!("{s} {:.3}", a(s))).collect();
    verdict(pass, detail.join(", "))
}

fn qjit(args: &[&str]) -> (i32, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_qjit")).args(args).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), o.stdout)
}

fn files_of(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn cli_determinism() -> Verdict {
    let tmp = std::env::temp_dir().join(format!("qjit-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&tmp);
    fs::create_dir_all(&tmp).unwrap();
    let cfg = tmp.join("small.cfg");
    fs::write(&cfg, "device = line(6)\nruns = 2\nshots = 512\nsuite = bv(3),hs(4)\nseed = 5\nprobe_span_min = 240\n").unwrap();
    let cfg = cfg.to_str().unwrap().to_string();
    let inputs = tmp.join("inputs");
    let ins = inputs.to_str().unwrap().to_string();
    // Shared inputs for the commands that read files.
    let setup: [&[&str]; 3] = [
        &["--config", &cfg, "--out", &ins, "calibrate", "--at", "45"],
        &["--config", &cfg, "--out", &ins, "bench", "gen", "hs(4)"],
        &["--config", &cfg, "--out", &ins, "--format", "structured", "experiment"],
    ];
    for args in setup {
        if qjit(args).0 != 0 {
            return verdict(false, format!("setup failed: {args:?}"));
        }
    }
    let snap = inputs.join("snapshot.json").to_string_lossy().into_owned();
    let circuit = inputs.join("hs_4.qc").to_string_lossy().into_owned();
    let report = inputs.join("report.json").to_string_lossy().into_owned();
    let tin = tmp.join("t_in");
    let t_in = tin.to_str().unwrap().to_string();
    qjit(&["--config", &cfg, "--out", &t_in, "transpile", &circuit, "--snapshot", &snap]);
    let physical = tin.join("hs_4.transpiled.qc").to_string_lossy().into_owned();
    let layout = tin.join("hs_4.layout").to_string_lossy().into_owned();

    let commands: Vec<Vec<&str>> = vec![
        vec!["calibrate"],
        vec!["--config", &cfg, "calibrate", "--at", "90"],
        vec!["--config", &cfg, "calibrate", "--oracle", "--at", "90"],
        vec!["bench", "gen", "adder(3)", "--seed", "11"],
        vec!["bench", "gen", "qft(5)", "--param", "19"],
        vec!["--config", &cfg, "transpile", &circuit, "--snapshot", &snap],
        vec!["--config", &cfg, "run", &physical, "--at", "45"],
        vec!["--config", &cfg, "--format", "csv", "experiment"],
        vec!["--config", &cfg, "--format", "table", "experiment"],
        vec!["--config", &cfg, "--format", "structured", "experiment"],
        vec!["--config", &cfg, "probe"],
        vec!["--config", &cfg, "heatmap", "--snapshot", &snap, "--layout", &layout, "--circuit", &circuit],
        vec!["--format", "table", "report", &report],
    ];
    let tmp_ref = &tmp;
    let differing: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = commands
            .iter()
            .enumerate()
            .map(|(i, args)| {
                s.spawn(move || {
                    let outputs: Vec<_> = (0..2)
                        .map(|rep| {
                            let dir = tmp_ref.join(format!("c{i}_{rep}"));
                            let d = dir.to_str().unwrap().to_string();
                            let mut full: Vec<&str> = vec!["--out", &d];
                            full.extend(args.iter().copied());
                            let (code, _) = qjit(&full);
                            // The full-size calibration is slow on one core; its file output suffices.
                            let (code_stdout, stdout) = if i == 0 { (0, Vec::new()) } else { qjit(args) };
                            (code, files_of(&dir), code_stdout, stdout)
                        })
                        .collect();
                    let same = outputs[0] == outputs[1] && outputs[0].0 == 0 && !outputs[0].1.is_empty();
                    (!same).then(|| args.join(" "))
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().unwrap()).collect()
    });
    let _ = fs::remove_dir_all(&tmp);
    verdict(differing.is_empty(), format!("{} invocations, file and stdout outputs compared; differing {differing:?}", commands.len()))
}

fn structural_constants() -> Verdict {
    let mut problems = Vec::new();
    let ccx = Circuit::from_gates("", 3, 0, [Gate::Ccx { c0: 0, c1: 1, target: 2 }]).unwrap();
    let cx = |c: &Circuit| c.gates().iter().filter(|g| matches!(g, Gate::Cx { .. })).count();
    if cx(&decompose_to_basis(&ccx).unwrap()) != 6 {
        problems.push("CCX is not 6 CX".to_string());
    }
    if cx(&decompose_to_basis(&toffoli_bench(2, "11").unwrap().circuit).unwrap()) != 6 {
        problems.push("toffoli(2) is not 6 CX".to_string());
    }
    for n in 1..=8 {
        let a = adder_bench(n, 0, 0).unwrap();
        if a.circuit.n_qubits() != 2 * n + 2 || a.n_readouts != n + 1 {
            problems.push(format!("adder({n})"));
        }
        if bv(n, &"0".repeat(n)).unwrap().n_readouts != n + 1 {
            problems.push(format!("bv({n})"));
        }
    }
    let mut sizes = Vec::new();
    for device in ["paris27", "almaden20", "grid(4,4)"] {
        let job = CalibrationConfig::default().job_size(&topo(device));
        sizes.push(format!("{device} {job}"));
        if job > JOB_CIRCUIT_BUDGET || JOB_CIRCUIT_BUDGET != 900 {
            problems.push(format!("{device} job {job}"));
        }
    }
    if default_suite(0).unwrap().len() > 900 {
        problems.push("default suite too large".into());
    }
    verdict(problems.is_empty(), format!("calibration jobs {}; problems {problems:?}", sizes.join(", ")))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 8] = [
        ("semantic preservation", Duration::from_secs(120), semantic_preservation),
        ("calibration recovery", Duration::from_secs(600), calibration_recovery),
        ("layout optimality", Duration::from_secs(300), layout_optimality),
        ("just-in-time beats stale", Duration::from_secs(1200), jit_beats_stale),
        ("null control", Duration::from_secs(1200), null_control),
        ("accuracy falls with size", Duration::from_secs(600), size_degradation),
        ("CLI determinism", Duration::from_secs(60), cli_determinism),
        ("structural constants", Duration::from_secs(60), structural_constants),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= budget;
        failed += usize::from(!pass);
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} [{:.1}s of {}s] {}", i + 1, elapsed.as_secs_f64(), budget.as_secs(), v.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
