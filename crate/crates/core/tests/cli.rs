use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gameprice"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn price_two_point() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(dir.path(), "g.json", r#"{"type":"two_point","a":19,"b":1}"#);
    let doc = json(&bin(&["price", "--game", &game, "--r", "0.05"]));
    assert!((doc["price"].as_f64().unwrap() - 7.22364).abs() < 1e-5);
    assert_eq!(doc["regime"], "Interior");
}

#[test]
fn empty_game_is_input_error_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(dir.path(), "empty.json", "");
    let out = bin(&["price", "--game", &game, "--r", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("type"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn missing_file_and_bad_rate() {
    let out = bin(&["price", "--game", "/nonexistent/g.json", "--r", "0.05"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let game = write(dir.path(), "g.json", r#"{"type":"two_point","a":19,"b":1}"#);
    assert_eq!(
        bin(&["price", "--game", &game, "--r", "-1"]).status.code(),
        Some(1)
    );
}

#[test]
fn unreachable_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(
        dir.path(),
        "z.json",
        r#"{"type":"discrete","atoms":[{"payoff":0,"w":0.999},{"payoff":1,"w":0.001}]}"#,
    );
    let out = bin(&["price", "--game", &game, "--r", "0.05", "--max-iter", "10"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn option_demo_reports_both_prices() {
    let doc = json(&bin(&[
        "option-demo",
        "--S",
        "90",
        "--K",
        "120",
        "--T",
        "2",
        "--sigma",
        "0.1",
        "--r",
        "0.04",
    ]));
    assert!((doc["growth_optimal"]["price"].as_f64().unwrap() - 17.8157).abs() <= 2e-3);
    assert!((doc["black_scholes"]["price"].as_f64().unwrap() - 21.2176).abs() <= 2e-3);
    assert_eq!(doc["ordering_holds"], true);
}

#[test]
fn put_spec_prices_at_horizon_rate() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(
        dir.path(),
        "put.json",
        r#"{"type":"lognormal_put","S":90,"K":120,"T":2,"sigma":0.1}"#,
    );
    let doc = json(&bin(&["price", "--game", &game, "--r", "0.04"]));
    assert!((doc["price"].as_f64().unwrap() - 17.8157).abs() <= 2e-3);
    assert!((doc["proportion"].as_f64().unwrap() - 0.5434).abs() <= 2e-3);
}

#[test]
fn mixture_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"type":"two_point","a":19,"b":1}"#);
    let b = write(dir.path(), "b.json", r#"{"type":"two_point","a":3,"b":12}"#);
    let csv_path = dir.path().join("curves.csv");
    let out = bin(&[
        "mixture",
        "--game-a",
        &a,
        "--game-b",
        &b,
        "--r",
        "0.05",
        "--grid",
        "11",
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,f,g,h,u,regime"));
    assert_eq!(lines.count(), 13);
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["concavity"].as_array().unwrap().len(), 3);

    let doc = json(&bin(&[
        "mixture", "--game-a", &a, "--game-b", &b, "--r", "0.05", "--grid", "11",
    ]));
    assert_eq!(doc["p"].as_array().unwrap().len(), 13);
    assert!(doc["g"].as_array().unwrap().iter().any(Value::is_null));
}

#[test]
fn least_squares_document() {
    let dir = tempfile::tempdir().unwrap();
    let port = write(
        dir.path(),
        "port.json",
        r#"{"rate":0.05,"games":[{"type":"two_point","a":19,"b":1},{"type":"two_point","a":10,"b":4}]}"#,
    );
    let doc = json(&bin(&["least-squares", "--portfolio", &port]));
    assert_eq!(doc["x"], serde_json::json!([0.0, 0.0]));
    assert!((doc["L"].as_f64().unwrap() - 1.0).abs() <= 1e-4);
    assert_eq!(doc["per_game"].as_array().unwrap().len(), 2);
    assert!(doc["per_game"][0]["E"].as_f64().unwrap() == 10.0);
}

#[test]
fn simulate_is_deterministic_and_stream_independent() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(dir.path(), "g.json", r#"{"type":"two_point","a":19,"b":1}"#);
    let args = |streams: &'static str| {
        bin(&[
            "simulate",
            "--game",
            &game,
            "--r",
            "0.05",
            "--seed",
            "7",
            "--streams",
            streams,
        ])
    };
    let first = args("1");
    let again = args("1");
    assert_eq!(first.stdout, again.stdout);
    let a = json(&first);
    let b = json(&args("8"));
    assert_eq!(a["mean_log"], b["mean_log"]);
    assert!(a["z_vs"].as_f64().unwrap().abs() <= 4.0);

    let fixed = json(&bin(&[
        "simulate", "--game", &game, "--u", "7.2", "--t", "0",
    ]));
    assert_eq!(fixed["geometric_mean"], 1.0);
    assert!(fixed["z_vs"].is_null());
    assert_eq!(bin(&["simulate", "--game", &game]).status.code(), Some(1));
}
