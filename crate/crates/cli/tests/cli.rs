//! End-to-end runs of the `cone-ext` binary.

use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cone-ext")).args(args).env_remove("CONE_EXT_CONFIG").output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--output", "json"];
    a.extend_from_slice(args);
    let out = run(&a);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn scalar_model(nu: f64, coeffs: &[[f64; 2]]) -> String {
    let c: Vec<String> = coeffs.iter().map(|z| format!("[[{}, {}]]", z[0], z[1])).collect();
    format!(
        r#"{{"label": "m", "nu": {nu}, "d": 1, "indicial": [{{"degree": {}, "coeffs": [{}]}}]}}"#,
        coeffs.len() - 1,
        c.join(", ")
    )
}

#[test]
fn spectrum_of_cex1() {
    let (code, v) = json(&["spectrum", "cex1_a2"]);
    assert_eq!(code, 0);
    let pts = v["results"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0]["algebraic_mult"], 2);
    assert_eq!(pts[0]["sigma"], serde_json::json!([0.0, 0.0]));
    assert_eq!(pts[0]["route"], "closed-form");
    assert_eq!(v["tool"]["name"], "cone-ext");
    assert_eq!(v["model"]["label"], "cex1_a2");
    assert_eq!(v["config"]["rank"], 1e-8);
}

#[test]
fn shifted_model_has_no_extensions() {
    let (code, v) = json(&["spectrum", "shifted"]);
    assert_eq!(code, 0);
    assert!(v["results"]["points"].as_array().unwrap().is_empty());
    assert_eq!(v["notes"][0], "D_min = D_max");
}

#[test]
fn explicit_strip() {
    let (code, v) = json(&["spectrum", "shifted", "--strip", "0", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", r#"{"nu": 2, "d": 1, "indicial": [{"degree": 2, "coeffs": [[[0, 0]]]}]}"#);
    let out = run(&["spectrum", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("indicial[0].coeffs"), "{err}");

    let broken = write(&dir, "broken.json", "{\"nu\": 2,");
    assert_eq!(run(&["spectrum", &broken]).status.code(), Some(1));

    // (sigma - 3i)^2 + 4 has the root i on the weight line.
    let boundary = write(&dir, "b.json", &scalar_model(2.0, &[[-5.0, 0.0], [0.0, -6.0], [1.0, 0.0]]));
    assert_eq!(run(&["spectrum", &boundary]).status.code(), Some(2));

    assert_eq!(run(&["friedrichs", "random_nonsymmetric"]).status.code(), Some(3));
    assert_eq!(run(&["friedrichs", "beta_minus_b05"]).status.code(), Some(4));

    // sigma^3 passes a loose positivity screen but has an odd chain at 0.
    let cubic = write(&dir, "c.json", &scalar_model(2.0, &[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]));
    assert_eq!(run(&["--tol-pos", "1e5", "friedrichs", &cubic]).status.code(), Some(5));

    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["spectrum", "no-such-model"]).status.code(), Some(1));
}

#[test]
fn json_errors_name_their_kind() {
    let (code, v) = json(&["friedrichs", "beta_minus_b05"]);
    assert_eq!(code, 4);
    assert_eq!(v["error"]["kind"], "NotPositive");
}

#[test]
fn reports_are_deterministic() {
    for args in [["verify", "cex1_a2"], ["chains", "cex1_a06"], ["pairing", "alpha_perturbed"]] {
        let mut a = vec!["--output", "json"];
        a.extend_from_slice(&args);
        let x = run(&a);
        let y = run(&a);
        assert!(x.status.success());
        assert_eq!(x.stdout, y.stdout);
    }
}

#[test]
fn friedrichs_reports() {
    let (code, v) = json(&["friedrichs", "cex1_a2"]);
    assert_eq!(code, 0);
    let f = &v["results"]["friedrichs_domain"];
    assert_eq!(f["dictionary"]["vectors"], serde_json::json!([[[1.0, 0.0], [0.0, 0.0]]]));
    assert_eq!(f["raw"]["dim"], 1);
    assert_eq!(v["results"]["selfadjoint"], true);

    let (code, v) = json(&["friedrichs", "cex1_a06"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["friedrichs_domain"]["raw"]["dim"], 2);
    assert_eq!(v["results"]["saturated"], true);
}

#[test]
fn selfadjoint_family_through_the_cli() {
    let (code, v) = json(&["selfadjoint-check", "cex1_a2", "--coords", "dictionary", "--vector", "1+i,-1+i"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["selfadjoint"], true);
    let (_, v) = json(&["selfadjoint-check", "cex1_a2", "--coords", "dictionary", "--vector", "1,1"]);
    assert_eq!(v["results"]["selfadjoint"], false);

    let dir = tempfile::tempdir().unwrap();
    let d = write(&dir, "d.json", r#"{"coords": "dictionary", "vectors": [[1, [0, 1]]]}"#);
    let (code, v) = json(&["selfadjoint-check", "beta_minus_b05", "--domain", &d]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["domain"]["raw"]["dim"], 1);
    let (code, _) = json(&["selfadjoint-check", "cex1_a2", "--vector", "1,2,3"]);
    assert_eq!(code, 1);
}

#[test]
fn adjoint_of_a_line() {
    let (code, v) = json(&["adjoint", "cex1_a2", "--coords", "dictionary", "--vector", "1,1"]);
    assert_eq!(code, 0);
    let d = &v["results"]["adjoint_domain"]["dictionary"]["vectors"];
    assert_eq!(d, &serde_json::json!([[[1.0, 0.0], [-1.0, 0.0]]]));
}

#[test]
fn verify_lists_every_route() {
    let (code, v) = json(&["verify", "cex1_a2"]);
    assert_eq!(code, 0);
    let entries = v["results"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for e in entries {
        let routes: Vec<&str> = e["routes"].as_array().unwrap().iter().map(|r| r["route"].as_str().unwrap()).collect();
        assert_eq!(routes, ["closed-form", "contour", "x-space"]);
        assert_eq!(e["deltas"].as_object().unwrap().len(), 2);
    }
    assert!(v["results"]["max_delta_contour"].as_f64().unwrap() < 1e-8);
    assert!(v["results"]["max_delta_x_space"].as_f64().unwrap() < 1e-6);
}

#[test]
fn pairing_csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.csv");
    let (code, v) = json(&["pairing", "cex1_a2", "--csv", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["nondegenerate"], true);
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn config_layers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "cfg.json", r#"{"rank": 1e-6, "angle": 1e-9}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_cone-ext"))
        .args(["--output", "json", "--tol-angle", "1e-7", "spectrum", "cex1_a2"])
        .env("CONE_EXT_CONFIG", &cfg)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["rank"], 1e-6);
    assert_eq!(v["config"]["angle"], 1e-7);
    assert_eq!(v["config"]["edge"], 1e-6);

    let bad = write(&dir, "bad.json", r#"{"rank": "x"}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_cone-ext")).args(["spectrum", "cex1_a2"]).env("CONE_EXT_CONFIG", &bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stability_reports_both_domains() {
    let (code, v) = json(&["stability", "alpha_perturbed", "cex1_a06"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["report"]["friedrichs_domains_equal"], true);
    assert_eq!(v["results"]["report"]["max_domains_equal"], false);
}

#[test]
fn reproduce_paper_and_mutation() {
    let (code, v) = json(&["reproduce-paper"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["results"]["failed"], 0);
    assert_eq!(v["results"]["criteria"].as_array().unwrap().len(), 12);

    let out = run(&["reproduce-paper", "--mutate-sign"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL [ 1]")), "{text}");
}

#[test]
fn bundled_models_round_trip() {
    for (name, text) in cone_cli::models::BUNDLED {
        let m = cone_ext::Model::from_json_str(text).unwrap();
        assert_eq!(m.label(), name);
        let back = cone_ext::Model::from_json_str(&m.to_json().to_string()).unwrap();
        assert_eq!(back.to_json(), m.to_json());
    }
}
