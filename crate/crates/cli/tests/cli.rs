use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("circot-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn circot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circot")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn distance_examples() {
    let d = scratch("distance");
    let a = write(&d, "a.json", r#"{"points": [{"x": 0.25, "m": 1}]}"#);
    let b = write(&d, "b.json", r#"{"points": [{"x": 0.75, "m": 1}]}"#);
    let out = circot(&["distance", s(&a), s(&b), "--lambda", "1"]);
    assert!(out.status.success());
    let r = json(&out);
    assert!((r["cost"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((r["mk_distance"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(r["wall_time_ms"].is_number());

    let out = circot(&["distance", s(&a), s(&a)]);
    let r = json(&out);
    assert_eq!(r["cost"].as_f64(), Some(0.0));
    assert_eq!(r["exact"].as_bool(), Some(true));

    let p = write(&d, "p.csv", "x,m\n0.25,0.5\n0.75,0.5\n");
    let q = write(&d, "q.csv", "0.5,0.5\n1.0,0.5\n");
    let r = json(&circot(&["distance", s(&p), s(&q), "--lambda", "1", "--denominator", "2"]));
    assert!((r["cost"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(r["exact"].as_bool(), Some(true));
    assert_eq!(r["epsilon_used"].as_f64(), Some(0.25));
}

#[test]
fn csv_and_json_give_identical_reports() {
    let d = scratch("formats");
    let pj = write(
        &d,
        "p.json",
        r#"{"points": [{"x": 0.1, "m": 0.2}, {"x": 0.45, "m": 0.3}, {"x": 0.8, "m": 0.5}]}"#,
    );
    let pc = write(&d, "p.csv", "x,m\n0.1,0.2\n0.45,0.3\n0.8,0.5\n");
    let q = write(&d, "q.csv", "0.3,0.6\n0.95,0.4\n");
    for cmd in ["distance", "plan", "curve", "check"] {
        let a = circot(&[cmd, s(&pj), s(&q), "--omit-timing", "--lambda", "1.5"]);
        let b = circot(&[cmd, s(&pc), s(&q), "--omit-timing", "--lambda", "1.5"]);
        assert!(a.status.success(), "{cmd}: {}", String::from_utf8_lossy(&a.stdout));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let d = scratch("determinism");
    let p = write(&d, "p.csv", "0.1,0.25\n0.2,0.25\n0.7,0.5\n");
    let q = write(&d, "q.csv", "0.33,0.5\n0.9,0.5\n");
    let a = circot(&["plan", s(&p), s(&q), "--omit-timing"]);
    let b = circot(&["plan", s(&p), s(&q), "--omit-timing"]);
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    let text = String::from_utf8(a.stdout).unwrap();
    let raw = text.split("\"cost\": ").nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(raw.trim().parse::<f64>().unwrap(), r["cost"].as_f64().unwrap());
    assert!(raw.contains('e') && raw.split('e').next().unwrap().len() == 18, "{raw}");

    let x = circot(&["bench", "--sizes", "4,8", "--epsilons", "1e-3", "--repeats", "1", "--seed", "3", "--omit-timing"]);
    let y = circot(&["bench", "--sizes", "4,8", "--epsilons", "1e-3", "--repeats", "1", "--seed", "3", "--omit-timing"]);
    assert!(x.status.success());
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn seed_defaults_to_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_circot"))
            .args(["bench", "--sizes", "6", "--epsilons", "1e-3", "--repeats", "2", "--omit-timing"])
            .env("CIRC_OT_SEED", seed)
            .output()
            .unwrap()
    };
    let r = json(&run("17"));
    assert_eq!(r["bench"]["seed"].as_u64(), Some(17));
    assert_eq!(run("17").stdout, circot(&["bench", "--sizes", "6", "--epsilons", "1e-3", "--repeats", "2", "--omit-timing", "--seed", "17"]).stdout);
}

#[test]
fn plan_examples() {
    let d = scratch("plan");
    let h0 = write(&d, "h0.json", r#"{"points": [{"x": 0.25, "m": 0.5}, {"x": 0.75, "m": 0.5}], "denominator": 2}"#);
    let h1 = write(&d, "h1.json", r#"{"points": [{"x": 0.5, "m": 0.5}, {"x": 1.0, "m": 0.5}], "denominator": 2}"#);
    let r = json(&circot(&["plan", s(&h0), s(&h1), "--lambda", "1"]));
    let rows: Vec<(f64, f64, f64)> = r["assignments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| {
            (
                a["source_position"].as_f64().unwrap(),
                a["target_position_lifted"].as_f64().unwrap(),
                a["mass"].as_f64().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows, vec![(0.25, 0.5, 0.5), (0.75, 1.0, 0.5)]);
}

#[test]
fn curve_examples() {
    let d = scratch("curve");
    let a = write(&d, "a.csv", "0.5,1\n");
    let b = write(&d, "b.csv", "1.0,1\n");
    let r = json(&circot(&["curve", s(&a), s(&b), "--range", "0:1", "--samples", "11"]));
    let rows = r["curve"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    for row in rows {
        let t = row["theta"].as_f64().unwrap();
        assert!((row["cost"].as_f64().unwrap() - (0.25 + 2.0 * t)).abs() < 1e-12);
    }
    let bp: Vec<f64> = r["curve"]["breakpoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(bp, vec![0.0, 1.0]);

    let r = json(&circot(&["curve", s(&a), s(&a), "--lambda", "1.5", "--range=-1:1", "--samples", "5"]));
    let rows = r["curve"]["rows"].as_array().unwrap();
    let min = rows.iter().min_by(|x, y| x["cost"].as_f64().partial_cmp(&y["cost"].as_f64()).unwrap()).unwrap();
    assert_eq!((min["theta"].as_f64(), min["cost"].as_f64()), (Some(0.0), Some(0.0)));
    // Default range is the search bracket.
    let r = json(&circot(&["curve", s(&a), s(&b), "--samples", "3"]));
    assert_eq!(r["curve"]["range"][0].as_f64(), Some(-6.0));
}

#[test]
fn check_passes_on_oracle_examples() {
    let d = scratch("check");
    let h0 = write(&d, "h0.csv", "0.25,0.5\n0.75,0.5\n");
    let h1 = write(&d, "h1.csv", "0.5,0.5\n1.0,0.5\n");
    let out = circot(&["check", s(&h0), s(&h1), "--lambda", "1", "--denominator", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["check"]["agree"].as_bool(), Some(true));
    assert!((r["check"]["rotations"]["cost"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let a = write(&d, "a.csv", "0.5,1\n");
    let b = write(&d, "b.csv", "1.0,1\n");
    let r = json(&circot(&["check", s(&a), s(&b), "--denominator", "1"]));
    assert_eq!(r["check"]["breakpoints"]["cost"].as_f64(), Some(0.25));

    // Without a denominator only the breakpoint oracle runs.
    let r = json(&circot(&["check", s(&h0), s(&h1)]));
    assert!(r["check"]["rotations"].is_null());
    assert_eq!(r["check"]["agree"].as_bool(), Some(true));
}

#[test]
fn errors_have_codes() {
    let d = scratch("errors");
    let good = write(&d, "good.csv", "0.5,1\n");
    let bad_sum = write(&d, "bad.csv", "0.5,0.7\n");
    let garbage = write(&d, "garbage.json", "{not json");

    let out = circot(&["distance", s(&good), s(&bad_sum)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"].as_str(), Some("invalid_histogram"));

    let out = circot(&["distance", s(&good), s(&garbage)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"].as_str(), Some("parse"));

    let out = circot(&["distance", s(&good), s(&d.join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"].as_str(), Some("io"));

    let out = circot(&["distance", s(&good), s(&good), "--epsilon", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"].as_str(), Some("solver"));

    let out = circot(&["curve", s(&good), s(&good), "--samples", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = circot(&["distance", s(&good)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"].as_str(), Some("invalid_argument"));

    let out = circot(&["distance", s(&good), s(&bad_sum), "--denominator", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verbose_traces_iterations_on_stderr() {
    let d = scratch("verbose");
    let a = write(&d, "a.csv", "0.1,0.3\n0.6,0.7\n");
    let b = write(&d, "b.csv", "0.35,1\n");
    let out = circot(&["distance", s(&a), s(&b), "--verbose", "--tight-bracket"]);
    assert!(out.status.success());
    let r = json(&out);
    let lines = String::from_utf8(out.stderr).unwrap().lines().filter(|l| l.starts_with("iter")).count();
    assert_eq!(lines as u64, r["iterations"].as_u64().unwrap() + 1);
}
