use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superpartner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_lists_four_oscillator_factorizations() {
    let out = run(&["verify", "--potential", "radial-oscillator", "--params", "l=2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let f = v["factorizations"].as_array().unwrap();
    assert_eq!(f.len(), 4);
    assert!(f.iter().all(|p| p["pass"] == true && p["max_abs"].as_f64().unwrap() < 1e-9));
    assert_eq!(v["params"]["l"], 2.0);
}

#[test]
fn constraint_violation_and_unknown_id_exit_2() {
    let out = run(&["verify", "--potential", "poschl-teller", "--params", "alpha=1,lambda=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda > 1"));

    let out = run(&["verify", "--potential", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for id in ["radial-oscillator", "poschl-teller", "special-family"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--potential", "poschl-teller", "--grid", "1:2"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--potential", "poschl-teller", "--params", "beta=2"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--potential", "poschl-teller", "--F", "x"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--potential", "radial-oscillator", "--grid=-1:2:100"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--potential", "poschl-teller", "--levels", "0"]).status.code(), Some(2));
}

#[test]
fn json_output_round_trips() {
    for cmd in ["verify", "spectrum", "si-check", "factorizations"] {
        let out = run(&[cmd, "--potential", "poschl-teller", "--levels", "3"]);
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        let mut again = serde_json::to_string_pretty(&v).unwrap();
        again.push('\n');
        assert_eq!(again, text, "{cmd}");
        assert_eq!(run(&[cmd, "--potential", "poschl-teller", "--levels", "3"]).stdout, out.stdout);
    }
}

#[test]
fn spectrum_ladder_matches_eigensolver() {
    let out = run(&["spectrum", "--potential", "poschl-teller", "--params", "alpha=1,lambda=4", "--levels", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ladder = v["ladders"].as_array().unwrap().iter().find(|l| l["pair"] == "W2").unwrap();
    let levels: Vec<f64> = ladder["levels"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(levels, vec![-9.0, -4.0, -1.0]);
    assert_eq!(ladder["bound_state_count"], 3);
    assert!(ladder["deltas"].as_array().unwrap().iter().all(|d| d.as_f64().unwrap().abs() < 2e-3));
    let w1 = v["annihilation"].as_array().unwrap().iter().find(|a| a["label"] == "W1").unwrap();
    assert_eq!(w1["normalizable"], false);
}

#[test]
fn si_check_reports_the_special_family_member() {
    let out = run(&["si-check", "--potential", "special-family", "--F", "0,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let sweep = v["family_sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 2);
    assert_eq!(sweep[0]["keeps_invariance"], true);
    assert_eq!(sweep[1]["keeps_invariance"], false);
    assert_eq!(v["special_family_failure"]["pass"], true);
}

#[test]
fn family_csv_goes_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.csv");
    let out = run(&[
        "family",
        "--potential",
        "harmonic-oscillator",
        "--F",
        "2,inf",
        "--grid=-5:5:101",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("F=2.0: nodes ["));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,V,W_p,W_g[F=2],Vtilde_g[F=2],W_g[F=inf],Vtilde_g[F=inf]");
    assert_eq!(lines.len(), 102);
    let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], -5.0);
    assert_eq!(first[1], 25.0);
    assert_eq!(first[5], -5.0);
    let digits = lines[1].split(',').next().unwrap().trim_start_matches('-');
    assert_eq!(digits.split('e').next().unwrap().replace('.', "").len(), 17);
}

#[test]
fn factorizations_include_shape_invariance_partners() {
    let out = run(&["factorizations", "--potential", "poschl-teller"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let f = v["factorizations"].as_array().unwrap();
    assert!(f.iter().any(|p| p["origin"] == "shipped"));
    assert!(f.iter().any(|p| p["origin"] == "shape-invariance" && p["order"] == "AAdagger"));
    assert!(f.iter().all(|p| p["valid"] == true));
}

#[test]
fn numeric_failure_exits_1() {
    let out = run(&["spectrum", "--potential", "anharmonic-probe", "--levels", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}
