use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn localreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localreg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_step_data(path: &Path) {
    let mut csv = String::from("x1,y\n");
    for i in 0..40 {
        let x = (i as f64 + 0.5) / 40.0;
        let y = if x <= 0.5 { 1.0 } else { 3.0 };
        csv.push_str(&format!("{x},{y}\n"));
    }
    fs::write(path, csv).unwrap();
}

#[test]
fn sauer_bound_prints_the_exact_integer() {
    let out = localreg(&["bounds", "--formula", "sauer", "--n", "3", "--v", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "16");
}

#[test]
fn missing_bound_parameter_is_a_usage_error() {
    let out = localreg(&["bounds", "--formula", "sauer", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_dimensional_cart_leaves_are_perfectly_shaped() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let model = dir.path().join("model.json");
    write_step_data(&data);
    let fit = localreg(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--estimator",
        "cart",
        "--m",
        "4",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(fit.status.code(), Some(0), "{}", String::from_utf8_lossy(&fit.stderr));
    let out = localreg(&["shapecheck", "--tree", model.to_str().unwrap(), "--beta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let audit = json(&out);
    let profile = audit["beta_profile"].as_array().unwrap();
    assert!(profile.len() > 1);
    assert!(profile.iter().all(|b| b.as_f64() == Some(1.0)));
    assert_eq!(audit["verdict"], "PASS");
}

#[test]
fn fit_then_predict_recovers_a_step() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let model = dir.path().join("model.json");
    let query = dir.path().join("query.csv");
    write_step_data(&data);
    fs::write(&query, "x1\n0.2\n0.8\n").unwrap();
    for estimator in ["knn", "cart", "grid"] {
        let fit = localreg(&[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--estimator",
            estimator,
            "--k",
            "5",
            "--m",
            "4",
            "--cells",
            "4",
            "--out",
            model.to_str().unwrap(),
        ]);
        assert_eq!(fit.status.code(), Some(0), "{estimator}");
        let out = localreg(&["predict", "--model", model.to_str().unwrap(), "--query", query.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{estimator}");
        let text = String::from_utf8(out.stdout).unwrap();
        let yhat: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(yhat, vec![1.0, 3.0], "{estimator}");
    }
}

#[test]
fn uniform_non_sr_frequency_clears_its_floor() {
    let out = localreg(&["verify", "--experiment", "prop6_4", "--d", "2", "--N", "50", "--R", "10000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let row = &report["results"][0];
    let freq = row["frequency"].as_f64().unwrap();
    let se = row["se"].as_f64().unwrap();
    assert!(freq >= 1.0 / 11.0 - 3.0 * se, "{freq}");
    assert_eq!(report["verdict"], "PASS");
}

#[test]
fn failing_experiment_exits_one() {
    let out = localreg(&["verify", "--experiment", "event_frequency", "--R", "2000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "FAIL");
}

#[test]
fn unreadable_input_exits_two() {
    let out = localreg(&["predict", "--model", "/nonexistent/model.json", "--query", "/nonexistent/q.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn randomized_commands_need_a_seed() {
    assert_eq!(localreg(&["simulate-tree", "--kind", "uniform"]).status.code(), Some(2));
    assert_eq!(localreg(&["verify", "--experiment", "prop6_4"]).status.code(), Some(2));
}

#[test]
fn simulate_tree_is_reproducible() {
    let args = ["simulate-tree", "--kind", "mondrian", "--d", "3", "--lifetime", "5", "--seed", "11"];
    let a = localreg(&args);
    let b = localreg(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = localreg(&["simulate-tree", "--kind", "mondrian", "--d", "3", "--lifetime", "5", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn centered_path_volume_matches_the_product() {
    let out = localreg(&["simulate-tree", "--kind", "centered", "--d", "2", "--N", "8", "--seed", "3"]);
    let cell = &json(&out)["cell"];
    assert_eq!(cell["volume"].as_f64(), Some(1.0 / 256.0));
    assert_eq!(cell["volume_matches_product"], true);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"experiment": "uniform_non_sr", "seed": 5, "d": 2, "replicates": 500, "splits": 50}"#,
    )
    .unwrap();
    let out = localreg(&["verify", "--config", config.to_str().unwrap(), "--R", "300"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["config"]["replicates"], 300);
    assert_eq!(report["config"]["seed"], 5);
}
