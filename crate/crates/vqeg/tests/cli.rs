use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use vqeg::matrix_io::read_matrix;
use vqeg::trace::read_trace;
use vqeg_core::game::gen_random;

fn vqeg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqeg")).args(args).current_dir(cwd).env("VQEG_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn gen_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&vqeg(&["gen", "--game", "random", "--size", "8", "--seed", "7", "--out", "a.json"], d)), 0);
    assert_eq!(code(&vqeg(&["gen", "--game", "random", "--size", "8", "--seed", "7", "--out", "b.json"], d)), 0);
    assert_eq!(fs::read(d.join("a.json")).unwrap(), fs::read(d.join("b.json")).unwrap());
    assert_eq!(read_matrix(&d.join("a.json")).unwrap(), gen_random(8, 7).unwrap().matrix);

    let o = vqeg(&["gen", "--game", "pennies", "--size", "2"], d);
    assert_eq!(code(&o), 0);
    let m: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(m["entries"], serde_json::json!([[1.0, -1.0], [-1.0, 1.0]]));
}

#[test]
fn exact_reports_values_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("rps.json"), r#"{"m":3,"n":3,"entries":[[0,-1,1],[1,0,-1],[-1,1,0]]}"#).unwrap();
    let o = vqeg(&["exact", "--matrix", "rps.json", "--verify"], d);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert!(report["value"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(report["verified"], Value::Bool(true));
    for p in report["x_star"].as_array().unwrap() {
        assert!((p.as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-12);
    }

    // The last row of a dominant-row game dominates, so the equilibrium is pure.
    vqeg(&["gen", "--game", "dominant", "--size", "8", "--seed", "1", "--out", "dom.json"], d);
    let o = vqeg(&["exact", "--matrix", "dom.json"], d);
    let report: Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(report["row_support"], serde_json::json!([7]));
    assert_eq!(report["col_support"].as_array().unwrap().len(), 1);

    let o = vqeg(&["exact", "--game", "random", "--size", "4", "--seed", "3", "--verify"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&vqeg(&["--help"], d)), 0);
    assert_eq!(code(&vqeg(&["solve", "--bogus"], d)), 1);
    assert_eq!(code(&vqeg(&["solve", "--game", "pennies", "--size", "2", "--shots", "0"], d)), 1);
    assert_eq!(code(&vqeg(&["solve", "--game", "pennies", "--size", "2", "--eta", "-1"], d)), 1);
    fs::write(d.join("bad.json"), "{\"m\": 2").unwrap();
    assert_eq!(code(&vqeg(&["exact", "--matrix", "bad.json"], d)), 1);
    // The solver needs at least two actions per player.
    fs::write(d.join("one.json"), r#"{"m":1,"n":1,"entries":[[3]]}"#).unwrap();
    assert_eq!(code(&vqeg(&["solve", "--matrix", "one.json", "--steps", "5"], d)), 1);
    assert_eq!(code(&vqeg(&["exact", "--matrix", "missing.json"], d)), 2);
}

#[test]
fn solve_pennies_passes_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = vqeg(&["solve", "--game", "pennies", "--size", "2", "--exact", "--steps", "2000", "--out", "t.jsonl"], d);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("PASS"), "{text}");
    assert!(text.contains("value error"));

    let (records, summary) = read_trace(&d.join("t.jsonl")).unwrap();
    assert_eq!(records.len(), 2000);
    assert!(summary.passed);
    assert_eq!(summary.steps, 2000);
    assert_eq!(summary.shots, Value::from("exact"));
    // q = 1, L = 3 per player: d = 12 parameters in total.
    let d_params = 12u64;
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r.t, k);
        assert_eq!(r.evals, 4 * d_params * (r.t as u64 + 1) + 2 * (k as u64 + 1));
        assert!(r.gap >= 0.0 && (0.0..=1.0).contains(&r.leak_row) && (0.0..=1.0).contains(&r.leak_col));
    }
}

#[test]
fn shot_runs_record_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = vqeg(
        &[
            "solve",
            "--game",
            "dominant",
            "--size",
            "4",
            "--shots",
            "256",
            "--steps",
            "100",
            "--record-every",
            "10",
            "--out",
            "s.jsonl",
        ],
        d,
    );
    assert_eq!(code(&o), 0);
    let (records, summary) = read_trace(&d.join("s.jsonl")).unwrap();
    assert_eq!(summary.shots, Value::from(256));
    assert_eq!(records.iter().map(|r| r.t).collect::<Vec<_>>(), vec![0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 99]);
    assert!(records.windows(2).all(|w| w[1].evals > w[0].evals));
    assert!(records.iter().all(|r| r.gap >= 0.0));
}

#[test]
fn config_file_and_echo_reproduce_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.cfg"), "# pennies, shot mode\ngame = pennies\nsize = 4\nshots = 64\nsteps = 50\nseed = 9\n")
        .unwrap();
    // The flag overrides the file's step count.
    let o = vqeg(&["solve", "--config", "run.cfg", "--steps", "40", "--out", "a.jsonl"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (rec_a, sum_a) = read_trace(&d.join("a.jsonl")).unwrap();
    assert_eq!(sum_a.steps, 40);
    assert_eq!(sum_a.seed, 9);
    assert_eq!(sum_a.config["shots"], "64");

    let echo: String = sum_a.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::write(d.join("echo.cfg"), echo).unwrap();
    assert_eq!(code(&vqeg(&["solve", "--config", "echo.cfg", "--out", "b.jsonl"], d)), 0);
    let (rec_b, sum_b) = read_trace(&d.join("b.jsonl")).unwrap();
    assert_eq!(rec_a, rec_b);
    assert_eq!(sum_a, sum_b);
}

#[test]
fn sweep_writes_one_trace_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = vqeg(
        &[
            "sweep",
            "--game",
            "dominant,pennies",
            "--size",
            "2,4",
            "--seeds",
            "2",
            "--exact",
            "--steps",
            "60",
            "--out-dir",
            "out",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("gap (avg)") && text.contains("gap (best)"));
    let traces: Vec<_> = fs::read_dir(d.join("out/traces")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(traces.len(), 8);
    let csv = fs::read_to_string(d.join("out/summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("kind,size,seed,shots,gap_last,gap_avg,passed,wall_ms,evals"));
    let cfg = fs::read_to_string(d.join("out/sweep_config.txt")).unwrap();
    assert!(cfg.contains("game = dominant,pennies"));
}
