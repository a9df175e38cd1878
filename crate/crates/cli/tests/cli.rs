use std::process::{Command, Output};

use serde_json::Value;

fn holoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holoflow")).args(args).output().unwrap()
}

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn golden_product_over_its_box() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let run = holoflow(&[
        "analyze",
        "--function",
        "z^3*(z-1)^3",
        "--box",
        "-0.5,-0.75,1.5,0.75",
        "--seeds",
        "grid:15",
        "--json",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out);
    for key in ["function", "region", "equilibria", "orbits", "fed_witnesses", "pb_violations", "config", "version", "wall_time_ms"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let eqs = report["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 2);
    for e in eqs {
        assert_eq!(e["order"], 3);
        assert_eq!(e["index"], 3);
        assert_eq!(e["directions"].as_array().unwrap().len(), 4);
    }
    let witnesses = report["fed_witnesses"].as_array().unwrap();
    assert_eq!(witnesses.len(), 2);
    for w in witnesses {
        assert_eq!(w["sector_count"], 4);
        assert_eq!(w["success"], true);
    }
    assert!(report["pb_violations"].as_array().unwrap().is_empty());
}

#[test]
fn quintic_exponential_with_portrait() {
    let dir = tempfile::tempdir().unwrap();
    let (json, svg) = (dir.path().join("p.json"), dir.path().join("p.svg"));
    let args = [
        "analyze",
        "--function",
        "z^5*exp(z)",
        "--box",
        "-1,-1,1,1",
        "--json",
        json.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ];
    assert!(holoflow(&args).status.success());
    let report = read_json(&json);
    let eqs = report["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 1);
    assert_eq!(eqs[0]["order"], 5);
    let thetas: Vec<f64> = eqs[0]["directions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["theta"].as_f64().unwrap())
        .collect();
    assert_eq!(thetas.len(), 8);
    for (l, t) in thetas.iter().enumerate() {
        assert!((t - l as f64 * std::f64::consts::FRAC_PI_4).abs() <= 1e-12);
    }
    let first_svg = std::fs::read(&svg).unwrap();
    let first_json = report;
    assert!(holoflow(&args).status.success());
    assert_eq!(std::fs::read(&svg).unwrap(), first_svg);
    let mut a = first_json;
    let mut b = read_json(&json);
    a["wall_time_ms"] = Value::from(0);
    b["wall_time_ms"] = Value::from(0);
    assert_eq!(a, b);
}

#[test]
fn rotation_prints_a_center_to_stdout() {
    let run = holoflow(&["analyze", "--function", "i*z", "--box", "-2,-2,2,2"]);
    assert!(run.status.success());
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    let eqs = report["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 1);
    assert_eq!(eqs[0]["kind"], "center");
    assert_eq!(report["config"]["max_time"], 200.0);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["analyze", "--box", "-1,-1,1,1"],
        vec!["analyze", "--function", "z", "--box", "1,2"],
        vec!["analyze", "--function", "z+", "--box", "-1,-1,1,1"],
        vec!["analyze", "--function", "z", "--box", "-1,-1,1,1", "--seeds", "hex:4"],
        vec!["analyze", "--function", "z", "--box", "-1,-1,1,1", "--max-time", "0"],
    ] {
        let run = holoflow(&args);
        assert_eq!(run.status.code(), Some(1), "{args:?}");
        assert!(!run.stderr.is_empty());
    }
}

#[test]
fn analysis_and_write_failures_exit_with_two() {
    let run = holoflow(&["analyze", "--function", "1/z", "--box", "-1,-1,1,1"]);
    assert_eq!(run.status.code(), Some(2));
    let run = holoflow(&["analyze", "--function", "z", "--box", "-1,-1,1,1", "--json", "/nonexistent/dir/x.json"]);
    assert_eq!(run.status.code(), Some(2));
}
