use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qjit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qjit")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.cfg");
    fs::write(&path, "device = line(5)\nruns = 2\nshots = 256\nsuite = bv(3),hs(4)\njit_source = oracle\nseed = 4\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&qjit(&["--help"])), 0);
    assert_eq!(code(&qjit(&["frobnicate"])), 1);
    assert_eq!(code(&qjit(&["bench", "gen"])), 1);
}

#[test]
fn bench_gen_prints_circuit_and_expected() {
    let o = qjit(&["bench", "gen", "bv(4)", "--param", "1011"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("qubits 5; clbits 5;\n"), "{text}");
    assert!(text.ends_with("# expected 11011\n"));
    assert_eq!(qjit(&["bench", "gen", "hs(6)", "--seed", "9"]).stdout, qjit(&["bench", "gen", "hs(6)", "--seed", "9"]).stdout);
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qjit(&["bench", "gen", "nope(3)"])), 1);
    assert_eq!(code(&qjit(&["bench", "gen", "hs(3)"])), 1);
    assert_eq!(code(&qjit(&["run", "/nonexistent/c.qc"])), 1);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "runs = 2\nwarp_drive = on\n").unwrap();
    let o = qjit(&["--config", bad.to_str().unwrap(), "experiment"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp_drive"));
    assert_eq!(code(&qjit(&["--format", "xml", "experiment"])), 1);
}

#[test]
fn calibrate_transpile_run_heatmap_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d);
    let out = d.to_str().unwrap();
    assert_eq!(code(&qjit(&["--config", &cfg, "--out", out, "calibrate", "--oracle", "--at", "30"])), 0);
    assert_eq!(code(&qjit(&["--config", &cfg, "--out", out, "bench", "gen", "bv(3)", "--param", "101"])), 0);
    let snap = d.join("snapshot.json");
    let circuit = d.join("bv_3.qc");
    assert_eq!(fs::read_to_string(d.join("bv_3.expected")).unwrap(), "expected 1101\n");
    let o = qjit(&["--config", &cfg, "--out", out, "transpile", circuit.to_str().unwrap(), "--snapshot", snap.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let physical = d.join("bv_3.transpiled.qc");
    assert!(fs::read_to_string(&physical).unwrap().contains("qubits 5"));
    let o = qjit(&["--config", &cfg, "run", physical.to_str().unwrap(), "--at", "30", "--shots", "1000"]);
    assert_eq!(code(&o), 0);
    let counts = String::from_utf8(o.stdout).unwrap();
    let total: u64 = counts.lines().skip(1).filter_map(|l| l.split_whitespace().nth(1)?.parse::<u64>().ok()).sum();
    assert!(counts.starts_with("shots 1000\n"));
    assert_eq!(total, 1000, "{counts}");
    let o = qjit(&[
        "--config",
        &cfg,
        "heatmap",
        "--snapshot",
        snap.to_str().unwrap(),
        "--layout",
        d.join("bv_3.layout").to_str().unwrap(),
        "--circuit",
        circuit.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().matches("style=filled").count(), 4);
    // A snapshot of a larger device does not fit this one.
    let wide = d.join("wide.json");
    let wide_cfg = d.join("wide.cfg");
    fs::write(&wide_cfg, "device = line(7)\n").unwrap();
    assert_eq!(code(&qjit(&["--config", wide_cfg.to_str().unwrap(), "--out", d.join("w").to_str().unwrap(), "calibrate", "--oracle"])), 0);
    fs::rename(d.join("w").join("snapshot.json"), &wide).unwrap();
    assert_eq!(code(&qjit(&["--config", &cfg, "heatmap", "--snapshot", wide.to_str().unwrap()])), 1);
    fs::write(&wide, "{ not json").unwrap();
    assert_eq!(code(&qjit(&["--config", &cfg, "heatmap", "--snapshot", wide.to_str().unwrap()])), 1);
}

#[test]
fn experiment_is_byte_identical_and_rerenders() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d);
    for format in ["csv", "table", "structured"] {
        let a = qjit(&["--config", &cfg, "--format", format, "experiment"]);
        let b = qjit(&["--config", &cfg, "--format", format, "experiment"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
    let out = d.join("res");
    assert_eq!(code(&qjit(&["--config", &cfg, "--format", "structured", "--out", out.to_str().unwrap(), "experiment"])), 0);
    let json = out.join("report.json");
    let csv = qjit(&["--format", "csv", "report", json.to_str().unwrap()]);
    let direct = qjit(&["--config", &cfg, "--format", "csv", "experiment"]);
    assert_eq!(csv.stdout, direct.stdout);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 1 + 2 * 2);
}

#[test]
fn probe_emits_a_row_per_qubit_and_hour() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "device = line(3)\nprobe_span_min = 180\nprobe_shots = 128\n").unwrap();
    let o = qjit(&["--config", cfg.to_str().unwrap(), "probe"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 4 * 3);
}
