use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qudit-transfer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_body(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config {"));
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn swap_coefficients_for_d3() {
    let v = json(&run(&["swap-coefficients", "--d", "3"]));
    assert_eq!(v["config"]["subcommand"], "swap-coefficients");
    let b: Vec<f64> = v["results"]["b"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (x, y) in b.iter().zip([-1.0, 1.0, 1.0]) {
        assert!((x - y).abs() < 1e-10);
    }
    assert_eq!(v["results"]["rank"], 3);
}

#[test]
fn forced_simulation_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = dir.path().join("run.json");
    let status = run(&[
        "simulate",
        "--n",
        "8",
        "--d",
        "4",
        "--b",
        "0.3",
        "--force",
        "FFS",
        "--payload",
        "1,0;0,1;0.5,-0.5",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );

    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let results = &v["results"];
    assert_eq!(results["records"].as_array().unwrap().len(), 3);
    assert_eq!(results["corrected"], true);
    let rows = csv_body(&csv);
    assert_eq!(rows[0], ["k", "jt", "p", "outcome", "forced", "p_fail"]);
    let outcomes: Vec<&str> = rows[1..].iter().map(|r| r[3].as_str()).collect();
    assert_eq!(outcomes, ["F", "F", "S"]);
}

#[test]
fn seeded_simulation_is_reproducible() {
    let a = json(&run(&[
        "simulate", "--n", "15", "--seed", "42", "--mode", "spectral",
    ]));
    let b = json(&run(&[
        "simulate", "--n", "15", "--seed", "42", "--mode", "spectral",
    ]));
    assert_eq!(a, b);
}

#[test]
fn invalid_input_exits_two_with_json_error() {
    for args in [
        vec!["simulate", "--n", "1"],
        vec!["simulate", "--d", "2"],
        vec!["simulate", "--force", "FX"],
        vec!["simulate", "--payload", "0,0;0,0"],
        vec!["oracle-check", "--n", "12", "--d", "4"],
        vec!["bogus"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is one JSON line");
        assert!(err["error"].as_str().is_some_and(|s| !s.is_empty()), "{args:?}");
    }
}

#[test]
fn sweep_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let summary = json(&run(&[
        "sweep",
        "--mode",
        "spectral",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--n-min",
        "10",
        "--n-max",
        "40",
        "--n-step",
        "5",
        "--k-max",
        "4",
        "--distribution-n",
        "12",
        "--iteration-n",
        "12",
        "--failure-n",
        "12,20",
    ]));
    for name in ["fig2b.csv", "fig2c.csv", "fig3.csv", "fig4.csv", "fig5.csv"] {
        let rows = csv_body(&dir.path().join(name));
        assert!(rows.len() > 1, "{name}");
        assert_eq!(rows[0].last().unwrap(), "mode");
        assert!(
            rows[1..].iter().all(|r| r.last().unwrap() == "spectral"),
            "{name}"
        );
    }
    let p1 = dir.path().join("fig2b.csv");
    let fit = json(&run(&[
        "fit",
        "--input",
        p1.to_str().unwrap(),
        "--model",
        "powerlaw",
    ]));
    assert_eq!(fit["results"]["mode"], "spectral");
    assert_eq!(fit["results"]["points"], 7);
    let a = fit["results"]["fit"]["exponent"].as_f64().unwrap();
    let b = summary["results"]["p1_power_law"]["exponent"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-12);

    let t1 = dir.path().join("fig2c.csv");
    let line = json(&run(&[
        "fit",
        "--input",
        t1.to_str().unwrap(),
        "--model",
        "linear",
    ]));
    assert!(line["results"]["fit"]["r_squared"].as_f64().unwrap() > 0.99);
}

#[test]
fn fit_rejects_mixed_modes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.csv");
    fs::write(
        &path,
        "n,p1,mode\n10,0.5,spectral\n20,0.35,exact\n30,0.3,spectral\n",
    )
    .unwrap();
    let out = run(&["fit", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_check_passes_on_small_chain() {
    let v = json(&run(&["oracle-check", "--n", "4", "--d", "3", "--seeds", "2"]));
    assert_eq!(v["results"]["passed"], true);
}

#[test]
fn propagator_and_distribution_tables() {
    let dir = tempfile::tempdir().unwrap();
    let prop = dir.path().join("prop.csv");
    assert!(run(&[
        "propagator",
        "--n",
        "2",
        "--t-max",
        "3.2",
        "--step",
        "0.01",
        "--out",
        prop.to_str().unwrap()
    ])
    .status
    .success());
    let rows = csv_body(&prop);
    assert_eq!(rows[0], ["jt", "probability"]);
    let peak = rows[1..]
        .iter()
        .map(|r| (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((peak.0 - std::f64::consts::FRAC_PI_2).abs() < 0.01);

    let dist = dir.path().join("dist.csv");
    assert!(run(&[
        "distribution",
        "--n",
        "30",
        "--mode",
        "spectral",
        "--out",
        dist.to_str().unwrap()
    ])
    .status
    .success());
    let rows = csv_body(&dist);
    let total: f64 = rows[1..].iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert_eq!(rows.len() - 1, 29);
    assert!((total - 1.0).abs() < 1e-10);
}
