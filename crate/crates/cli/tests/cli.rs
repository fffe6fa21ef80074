use std::path::Path;
use std::process::{Command, Output};

use pab_core::{read_report, FitMetrics, ModelKind};

fn pab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pab"))
        .args(args)
        .env_remove("PAB_FIXTURE_DIR")
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn single_error_line(out: &Output) -> String {
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    assert!(lines[0].starts_with("pab: error stage="), "{stderr}");
    lines[0].to_string()
}

#[test]
fn fit_kinetics_on_bundled_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    let run = pab(&["fit-kinetics", "--input", "pcbc_run1.csv", "-o", path_str(&out)]);
    assert!(run.status.success(), "{run:?}");
    let r = read_report(&out).unwrap();
    assert_eq!(r.model_kind, ModelKind::FirstOrder);
    let k = r.scalar("k").unwrap();
    assert!((k + 0.0006).abs() < 0.00005, "k = {k}");
    assert_eq!(r.provenance["final_removal_pct"], "86.94%");
    assert!(out.with_extension("csv").exists());
}

#[test]
fn published_lead_gp_reproduces_training_data() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("gp.json");
    let run = pab(&[
        "fit-gp",
        "--contaminant",
        "pb",
        "--input",
        "pcp_run1.csv",
        "--hyper",
        "v=0.3852,w=0.7839,2.8869,2.859e-9",
        "-o",
        path_str(&model),
    ]);
    assert!(run.status.success(), "{run:?}");
    let fit = read_report(&model).unwrap();
    assert_eq!(fit.scalar("v").unwrap(), 0.3852);
    assert_eq!(fit.vector("w").unwrap(), &[0.7839, 2.8869, 2.859e-9]);

    let times: Vec<String> = fit.predictions.rows.iter().map(|r| r.inputs[0].to_string()).collect();
    let pred = dir.path().join("pred.json");
    let run = pab(&[
        "predict",
        "--model",
        path_str(&model),
        "--t-grid",
        &times.join(","),
        "--w-grid",
        "3",
        "--ph",
        "7",
        "-o",
        path_str(&pred),
    ]);
    assert!(run.status.success(), "{run:?}");
    let p = read_report(&pred).unwrap();
    let predicted: Vec<f64> = p.predictions.rows.iter().map(|r| r.predicted).collect();
    let observed: Vec<f64> = fit.predictions.rows.iter().map(|r| r.observed.unwrap()).collect();
    let m = FitMetrics::compute(&observed, &predicted).unwrap();
    assert!(m.r2 >= 0.99, "{m:?}");
}

#[test]
fn synth_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let run = pab(&["synth", "--generator", "first-order", "--k", "-0.0006", "--seed", "1", "--noise-sd", "0.2", "-o", path_str(p)]);
        assert!(run.status.success(), "{run:?}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn synthetic_output_feeds_back_into_fit() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    assert!(pab(&["synth", "--generator", "first-order", "--k", "-0.0007", "-o", path_str(&data)]).status.success());
    let out = dir.path().join("k.json");
    let run = pab(&["fit-kinetics", "--input", path_str(&data), "--contaminant", "pb", "-o", path_str(&out)]);
    assert!(run.status.success(), "{run:?}");
    assert!((read_report(&out).unwrap().scalar("k").unwrap() + 0.0007).abs() < 1e-8);
}

#[test]
fn report_merges_and_scans_thickness() {
    let dir = tempfile::tempdir().unwrap();
    let exp = dir.path().join("exp.json");
    let kin = dir.path().join("kin.json");
    assert!(pab(&["fit-exp", "--input", "mb_w1.csv", "--x0", "2.5,3", "-o", path_str(&exp)]).status.success());
    assert!(pab(&["fit-kinetics", "--input", "pcp_run2.csv", "-o", path_str(&kin)]).status.success());
    let merged = dir.path().join("cmp.json");
    let run = pab(&["report", "--input", path_str(&exp), path_str(&kin), "--w-grid", "0.5,1,1.5", "-o", path_str(&merged)]);
    assert!(run.status.success(), "{run:?}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&merged).unwrap()).unwrap();
    let entries = json["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries[0]["optimum_w"].is_number());
    assert!(entries[1]["optimum_w"].is_null());
    let csv = std::fs::read_to_string(merged.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn fixture_dir_override_is_used() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("custom.csv"),
        "time_min,concentration_mg_l,thickness_cm\n10,40,1\n20,30,1\n30,25,1\n",
    )
    .unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_pab"))
        .args(["fit-kinetics", "--input", "custom.csv", "--contaminant", "pb"])
        .env("PAB_FIXTURE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("\"model_kind\": \"FirstOrder\""), "{stdout}");
}

#[test]
fn exit_codes_by_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");

    let missing = pab(&["fit-kinetics", "--input", "missing.csv", "-o", path_str(&out)]);
    assert_eq!(missing.status.code(), Some(5));
    assert!(single_error_line(&missing).contains("kind=io"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "time_min,concentration_mg_l\n0,40\n20,30\n30,25\n").unwrap();
    let invalid = pab(&["fit-kinetics", "--input", path_str(&bad), "--contaminant", "pb", "-o", path_str(&out)]);
    assert_eq!(invalid.status.code(), Some(3));
    assert!(single_error_line(&invalid).contains("stage=input"));

    std::fs::write(&bad, "time_min,concentration_mg_l\n10,forty\n20,30\n30,25\n").unwrap();
    let parse = pab(&["fit-kinetics", "--input", path_str(&bad), "--contaminant", "pb", "-o", path_str(&out)]);
    assert_eq!(parse.status.code(), Some(2));
    single_error_line(&parse);

    std::fs::write(&bad, "time_min,concentration_mg_l\n10,0\n20,0\n30,0\n").unwrap();
    let zero = pab(&["fit-kinetics", "--input", path_str(&bad), "--contaminant", "pb", "-o", path_str(&out)]);
    assert_eq!(zero.status.code(), Some(3), "{zero:?}");

    let numeric = pab(&["fit-exp", "--input", "mb_w1.csv", "--x0", "1e308,1e308", "-o", path_str(&out)]);
    assert_eq!(numeric.status.code(), Some(4), "{numeric:?}");
    assert!(single_error_line(&numeric).contains("kind=numeric"));

    let usage = pab(&["fit-gp"]);
    assert_eq!(usage.status.code(), Some(2));

    assert!(!out.exists(), "failed runs must not leave output behind");
}

#[test]
fn predict_needs_a_thickness_grid_for_exp_models() {
    let dir = tempfile::tempdir().unwrap();
    let exp = dir.path().join("exp.json");
    assert!(pab(&["fit-exp", "--input", "mb_w1.csv", "-o", path_str(&exp)]).status.success());
    let run = pab(&["predict", "--model", path_str(&exp), "--t-grid", "60,120"]);
    assert_eq!(run.status.code(), Some(3));
    let run = pab(&["predict", "--model", path_str(&exp), "--t-grid", "60,120", "--w-grid", "1"]);
    assert!(run.status.success());
}

#[test]
fn help_is_available_per_subcommand() {
    for sub in ["fit-kinetics", "fit-exp", "fit-gp", "predict", "report", "synth"] {
        let run = pab(&[sub, "--help"]);
        assert!(run.status.success(), "{sub}");
        assert!(String::from_utf8_lossy(&run.stdout).contains("Usage"));
    }
}
