use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn polyqram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyqram"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> Value {
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    });
    doc["report"].clone()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    ((a - b) / b).abs() <= tol
}

#[test]
fn synth_qram_sequential_pairs() {
    let o = polyqram(&[
        "synth",
        "qram",
        "-n",
        "3",
        "--variant",
        "sequential",
        "--mode",
        "read",
    ]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["toffoli_pairs"], 4);
    assert_eq!(r["core_qubits"], 11);
}

#[test]
fn synth_qlut_depth_two() {
    let dir = TempDir::new().unwrap();
    let table = write(
        &dir,
        "t.hex",
        "0\n1\n1\n0\n1\n0\n0\n1\n1\n1\n0\n0\n0\n0\n1\n1\n",
    );
    let o = polyqram(&[
        "synth", "qlut", "--n1", "2", "--n2", "2", "-l", "1", "--table", &table,
    ]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["toffoli_depth"], 2);
    assert_eq!(r["toffoli_count"], 6);
    assert_eq!(r["matches_formula"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["synth", "qram", "-n", "99"][..],
        &["estimate", "--tdepth", "0"],
        &["estimate", "--tcount", "100"],
        &["synth", "qram"],
        &["frobnicate"],
        &[
            "estimate",
            "--paper-profile",
            "-n",
            "36",
            "--decomp",
            "unit-depth",
        ],
        &["synth", "qlut", "--n1", "2"],
        &["grover", "-n", "3", "--marked", "8"],
    ] {
        let o = polyqram(args);
        assert_eq!(
            code(&o),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty(), "{args:?} printed a report");
    }
}

#[test]
fn bad_table_file_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let short = write(&dir, "short.hex", "0\n1\n");
    let junk = write(&dir, "junk.hex", "zz\n");
    for t in [&short, &junk] {
        let o = polyqram(&["synth", "qlut", "-n", "4", "--table", t]);
        assert_eq!(code(&o), 2);
    }
    let o = polyqram(&["synth", "qlut", "-n", "4", "--table", "/nonexistent/t.hex"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_read_random_memory() {
    let o = polyqram(&["verify", "read", "-n", "8", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["verdict"]["pass"], true);
    assert_eq!(r["verdict"]["checked"], 256);
}

#[test]
fn verify_write_and_phase() {
    for args in [
        &["verify", "write", "-n", "2"][..],
        &[
            "verify",
            "write",
            "-n",
            "3",
            "-l",
            "2",
            "--bus",
            "3",
            "--variant",
            "sequential",
        ],
        &["verify", "phase", "-n", "4"],
        &["verify", "read", "-n", "3", "-l", "2", "--parallel-readout"],
        &["verify", "lookup", "--n1", "2", "--n2", "3", "-l", "2"],
    ] {
        let o = polyqram(args);
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(report(&o)["verdict"]["pass"], true);
    }
}

#[test]
fn memory_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let mem = write(&dir, "m.bin", "10\n01\n11\n00\n");
    let o = polyqram(&["verify", "read", "-n", "2", "-l", "2", "--memory", &mem]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let digests = doc["manifest"]["input_digests"].as_object().unwrap();
    assert_eq!(digests.len(), 1);
    assert!(digests
        .values()
        .next()
        .unwrap()
        .as_str()
        .unwrap()
        .starts_with("sha256:"));
}

/// Deletes the `k`-th CNOT and drops the pair marks, whose indices no longer line up.
fn delete_cnot(src: &str, k: usize) -> String {
    let mut seen = 0;
    src.lines()
        .filter(|l| {
            if l.starts_with("pair ") {
                return false;
            }
            if l.starts_with("cx ") {
                seen += 1;
                return seen != k;
            }
            true
        })
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn saved_circuits_verify_and_mutants_fail() {
    let dir = TempDir::new().unwrap();
    for (fmt, file) in [("text", "q.txt"), ("qasm", "q.qasm")] {
        let path = dir.path().join(file).display().to_string();
        let o = polyqram(&[
            "synth",
            "qram",
            "-n",
            "3",
            "--variant",
            "sequential",
            "--circuit",
            &path,
            "--circuit-format",
            fmt,
        ]);
        assert_eq!(code(&o), 0);
        assert_eq!(report(&o)["circuit"]["path"], path.as_str());
        let o = polyqram(&["verify", "read", "--circuit", &path]);
        assert_eq!(code(&o), 0, "{fmt}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let src = fs::read_to_string(dir.path().join("q.txt")).unwrap();
    let bad = write(&dir, "bad.txt", &delete_cnot(&src, 5));
    let o = polyqram(&["verify", "read", "--circuit", &bad]);
    assert_eq!(code(&o), 1);
    let cx = &report(&o)["verdict"]["counterexample"];
    assert!(cx["address"].is_u64(), "{cx}");
    assert!(!cx["reason"].as_str().unwrap().is_empty());
}

#[test]
fn lookup_mutant_fails() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "t.hex", "1\n0\n1\n1\n0\n0\n1\n0\n");
    let path = dir.path().join("lut.txt").display().to_string();
    let o = polyqram(&[
        "synth",
        "qlut",
        "--n1",
        "2",
        "--n2",
        "1",
        "--table",
        &table,
        "--circuit",
        &path,
    ]);
    assert_eq!(code(&o), 0);
    let o = polyqram(&["verify", "lookup", "--circuit", &path, "--table", &table]);
    assert_eq!(code(&o), 0);
    let other = write(&dir, "u.hex", "1\n0\n1\n1\n0\n0\n1\n1\n");
    let o = polyqram(&["verify", "lookup", "--circuit", &path, "--table", &other]);
    assert_eq!(code(&o), 1);
    assert_eq!(report(&o)["verdict"]["counterexample"]["address"], 7);
}

#[test]
fn paper_profile_estimate() {
    let o = polyqram(&["estimate", "--paper-profile", "-n", "36"]);
    assert_eq!(code(&o), 0);
    let s = &report(&o)["surface"];
    assert_eq!(s["t_depth"], 14);
    assert_eq!(s["sigma"], 150.0);
    assert_eq!(s["pipeline_factor"], 2);
    assert_eq!(s["clifford_distance"], 11);
    assert_eq!(s["footprint_round_2"], 18750.0);
    assert_eq!(s["footprint_round_1"], 5000.0);
    assert!(close(s["total_qubits"].as_f64().unwrap(), 4.18e14, 0.01));
    assert!(close(s["wall_time"].as_f64().unwrap(), 4.2e-4, 0.01));
    let cmp = &report(&o)["comparison"];
    assert_eq!(cmp["baseline_total_qubits"], 1.5e15);
    assert_eq!(cmp["baseline_wall_time"], 2.13e-3);
}

#[test]
fn rough_report_and_ratios() {
    let o = polyqram(&["estimate", "-n", "36", "--report", "rough"]);
    assert_eq!(code(&o), 0);
    let r = &report(&o)["rough"];
    assert_eq!(r["ratios"]["qubits"], 1.0);
    assert!((r["ratios"]["t_depth"].as_f64().unwrap() - 0.1436).abs() < 1e-3);
    let q = r["logical_qubits"].as_f64().unwrap();
    let d = r["t_depth"].as_f64().unwrap();
    assert!((r["rough_cost"].as_f64().unwrap() - (q * d).log2()).abs() < 1e-9);
    assert!(report(&o).get("surface").is_none());
}

#[test]
fn explicit_counts_and_params() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "p.json", r#"{"p_in": 1e-4, "cycles_per_d": 10}"#);
    let o = polyqram(&[
        "estimate",
        "--tcount",
        "1e6",
        "--tdepth",
        "100",
        "--clifford-count",
        "1e5",
        "--logical-qubits",
        "500",
        "--params",
        &params,
        "--distances",
        "7",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = &report(&o)["surface"];
    assert_eq!(s["rounds"], 1);
    assert_eq!(s["magic_states_per_layer"], 10000.0);
    let o = polyqram(&[
        "estimate",
        "--tcount",
        "1e6",
        "--tdepth",
        "100",
        "--clifford-count",
        "1e5",
        "--logical-qubits",
        "500",
        "--distances",
        "7,5,3",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn optimize_three_bit_instance() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.txt", "000\n001\n011\n111\n");
    let circuit = dir.path().join("opt.txt").display().to_string();
    let o = polyqram(&["optimize", "--spec", &spec, "--circuit", &circuit]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["toffoli_count"], 1);
    assert_eq!(r["baseline_toffoli_count"], 8);
    assert_eq!(r["factored"], "1+x1+x2(1+x1+x3)");
    assert_eq!(r["verdict"]["pass"], true);
    let o = polyqram(&["verify", "equiv", "--spec", &spec, "--circuit", &circuit]);
    assert_eq!(code(&o), 0);
    let other = write(&dir, "o.txt", "000\n001\n011\n");
    let o = polyqram(&["verify", "equiv", "--spec", &other, "--circuit", &circuit]);
    assert_eq!(code(&o), 1);
}

#[test]
fn optimize_empty_spec() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "e.txt", "# nothing\n");
    let o = polyqram(&["optimize", "--spec", &spec, "-n", "4"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["gates"], 0);
    assert_eq!(r["toffoli_count"], 0);
    let o = polyqram(&["optimize", "--spec", &spec]);
    assert_eq!(code(&o), 2);
}

#[test]
fn grover_default_iterations() {
    let o = polyqram(&["grover", "-n", "3", "--marked", "5"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["iterations"], 2);
    assert!((r["p_marked"].as_f64().unwrap() - 0.9453125).abs() < 1e-9);
    let o = polyqram(&["grover", "-n", "6", "--marked", "3,40", "--iterations", "3"]);
    let r = report(&o);
    assert!((r["p_marked"].as_f64().unwrap() - r["p_expected"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["synth", "qlut", "-n", "5", "-l", "2", "--seed", "3"][..],
        &["verify", "read", "-n", "4", "--seed", "9"],
        &["estimate", "--paper-profile", "-n", "36", "--report", "all"],
    ] {
        let a = polyqram(args);
        let b = polyqram(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = polyqram(&[
            "grover",
            "-n",
            "4",
            "--marked",
            "1",
            "--out",
            &p.display().to_string(),
        ]);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn seeds_change_random_tables() {
    let a = report(&polyqram(&["synth", "qlut", "-n", "6", "--seed", "1"]));
    let b = report(&polyqram(&["synth", "qlut", "-n", "6", "--seed", "2"]));
    assert_eq!(a["toffoli_count"], b["toffoli_count"]);
    let a = polyqram(&[
        "synth",
        "qlut",
        "-n",
        "6",
        "--seed",
        "1",
        "--circuit",
        "/dev/null",
    ]);
    let b = polyqram(&[
        "synth",
        "qlut",
        "-n",
        "6",
        "--seed",
        "2",
        "--circuit",
        "/dev/null",
    ]);
    assert_ne!(
        report(&a)["circuit"]["sha256"],
        report(&b)["circuit"]["sha256"]
    );
}

#[test]
fn flat_formats() {
    let o = polyqram(&["synth", "qram", "-n", "2", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("manifest.subcommand,synth qram\n"));
    assert!(text.contains("report.toffoli_pairs,1\n"));
    assert!(text.contains("manifest.timestamp,1700000000\n"));
    let o = polyqram(&["synth", "qram", "-n", "2", "--format", "text"]);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("report.resources.total.qubit_count: "));
}
