use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use wkstab::report::StabilityDossier;
use wkstab::ExpansionReport;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn wkstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wkstab")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn invariants_of_cp2() {
    let v = stdout_json(&wkstab(&["invariants", "--catalog", "cp2", "--family", "cscK"]));
    assert!((v["s_hat"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert!((v["vol_w"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["backend_discrepancy"].is_null());
}

#[test]
fn both_backends_report_discrepancy() {
    let v = stdout_json(&wkstab(&[
        "futaki",
        "--catalog",
        "bl1cp2",
        "--family",
        "soliton",
        "--xi",
        "-0.3,0.4",
        "--beta",
        "1,1",
        "--backend",
        "both",
        "--strict",
    ]));
    assert!(v["backend_discrepancy"].as_f64().unwrap() < 1e-10);
    assert!(v["futaki_beta"].as_f64().is_some());
}

#[test]
fn soliton_matches_oracle() {
    let oracle = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/oracles/soliton-bl1cp2-reflexive.json");
    let out = wkstab(&["soliton", "--catalog", "bl1cp2-reflexive", "--oracle", oracle.to_str().unwrap(), "--strict"]);
    let v = stdout_json(&out);
    assert!(v["oracle"]["max_error"].as_f64().unwrap() < 1e-8);
    assert!(v["soliton"]["reflexive"].as_bool().unwrap());
}

#[test]
fn validate_lists_vertices() {
    let v = stdout_json(&wkstab(&["validate", "--catalog", "bl1cp2"]));
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(v["lattice_perimeter"], "5");
    assert_eq!(v["volume"], "3/2");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&wkstab(&["invariants", "--catalog", "nowhere"])), 2);
    assert_eq!(code(&wkstab(&["invariants"])), 2);
    assert_eq!(code(&wkstab(&["futaki", "--catalog", "cp2", "--beta", "1,x"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ \"dim\": 2, ").unwrap();
    assert_eq!(code(&wkstab(&["validate", "--polytope", broken.to_str().unwrap()])), 2);

    // a cone over a non-unimodular corner
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{ "dim": 2, "facets": [
            { "normal": [1, 0], "offset": "0" },
            { "normal": [1, 2], "offset": "0" },
            { "normal": [-1, 0], "offset": "1" },
            { "normal": [0, -1], "offset": "1" } ] }"#,
    )
    .unwrap();
    let out = wkstab(&["validate", "--polytope", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let pole = wkstab(&["invariants", "--catalog", "cp2", "--family", "sasaki", "--xi", "1,0", "--a", "0"]);
    assert_eq!(code(&pole), 3);
    let chop =
        wkstab(&["blowup-expand", "--catalog", "cp2", "--vertex", "0", "--quantity", "volume", "--eps-max", "2"]);
    assert_eq!(code(&chop), 3);
    assert_eq!(code(&wkstab(&["selftest", "--csv"])), 3);
}

#[test]
fn strict_mode_turns_failures_into_exit_4() {
    let args = ["blowup-expand", "--catalog", "cp2", "--vertex", "1", "--quantity", "futaki", "--coefficient-tol", "0"];
    let lenient = wkstab(&args);
    assert_eq!(code(&lenient), 0);
    let r: ExpansionReport = serde_json::from_slice(&lenient.stdout).unwrap();
    assert!(!r.pass);
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&wkstab(&strict)), 4);
}

#[test]
fn testconfig_commands() {
    let tc = data("tc-corner.json");
    let weights = data("weights-soliton.json");
    let base = ["--catalog", "bl1cp2", "--weights", weights.as_str(), "--tc", tc.as_str()];
    let run = |cmd: &str| stdout_json(&wkstab(&[&["testconfig", cmd][..], &base[..]].concat()));
    let df = run("df")["df"].as_f64().unwrap();
    let dft = run("dft");
    assert!((dft["df"].as_f64().unwrap() - df).abs() < 1e-14);
    assert!((dft["df_t"].as_f64().unwrap() - dft["df_extremal"].as_f64().unwrap()).abs() < 1e-10);
    let norm = run("norm");
    assert!(norm["orthogonal_norm"].as_f64().unwrap() <= norm["norm"].as_f64().unwrap());
    assert_eq!(run("chow")["chow_table"].as_array().unwrap().len(), 4);
    let d = run("destabilize");
    assert!(d["destabilizing"]["chow_t"].as_f64().unwrap() > 0.0);

    let csv = wkstab(&["testconfig", "chow", "--catalog", "cp2", "--tc", tc.as_str(), "--csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("vertex,x1,x2,chow,chow_t\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn product_configuration_has_vanishing_orthogonal_part() {
    let tc = data("tc-product.json");
    let v = stdout_json(&wkstab(&["testconfig", "destabilize", "--catalog", "cp2", "--tc", tc.as_str()]));
    assert!(v["destabilizing"]["product"].as_bool().unwrap());
    let dft = stdout_json(&wkstab(&["testconfig", "dft", "--catalog", "bl1cp2", "--tc", tc.as_str()]));
    assert!(dft["df_t"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn expansion_csv_series() {
    let tc = data("tc-corner.json");
    let out = wkstab(&[
        "blowup-expand",
        "--catalog",
        "cp2",
        "--vertex",
        "2",
        "--quantity",
        "df",
        "--tc",
        &tc,
        "--eps-points",
        "6",
        "--csv",
        "--strict",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,exact,predicted");
    assert_eq!(lines.len(), 7);
}

#[test]
fn dossier_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let tc = data("tc-corner.json");
    let product = data("tc-product.json");
    let mut bodies = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("dossier-{k}.json"));
        let out = wkstab(&[
            "report",
            "--catalog",
            "bl1cp2",
            "--tc",
            &tc,
            "--tc",
            &product,
            "--random",
            "2",
            "--seed",
            "5",
            "--expand",
            "--out",
            path.to_str().unwrap(),
            "--strict",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let d: StabilityDossier = serde_json::from_slice(&bodies[0]).unwrap();
    assert_eq!(d.test_configurations.len(), 4);
    assert!(d.verdict.contains("w.r.t. supplied family"));
    assert!(d.test_configurations[1].destabilizing.product);
    assert!(!d.expansions.is_empty());
    assert!(d.expansions.iter().all(|e| e.pass));
}
