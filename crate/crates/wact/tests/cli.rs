use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use wact::{run, Outcome, StructureFile, EXIT_MATH, EXIT_OK, EXIT_USAGE};

fn bundled(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "structures", &format!("{name}.json")]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn wact(args: &[&str]) -> Outcome {
    run(std::iter::once("wact").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (u8, Value) {
    let mut full = args.to_vec();
    full.extend(["--json", "-"]);
    let out = wact(&full);
    (
        out.code,
        serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout)),
    )
}

fn flag(report: &Value, id: &str) -> bool {
    report["classification"]["flags"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["id"] == id)
        .unwrap()["holds"]
        .as_bool()
        .unwrap()
}

#[test]
fn check_accepts_bundled_sasakian() {
    let out = wact(&["check", &bundled("sasakian_r3")]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("eta(xi)=1"));
}

#[test]
fn check_reports_eta_xi_violation() {
    let out = wact(&["check", &bundled("broken_eta_xi")]);
    assert_eq!(out.code, EXIT_MATH);
    assert!(out.stderr.contains("AxiomViolation"));
    assert!(out.stderr.contains("`eta(xi)=1`"));
}

#[test]
fn check_json_lists_every_axiom() {
    let (code, r) = json(&["check", &bundled("sasakian_r5")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["axioms"].as_array().unwrap().len(), 14);
    assert!(r["axioms"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a["worst_point"].as_array().unwrap().len() == 5));
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(&keys[..5], &["schema", "command", "structure", "plan", "tol"]);
}

#[test]
fn malformed_expression_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut f: Value = serde_json::from_str(&std::fs::read_to_string(bundled("sasakian_r3")).unwrap()).unwrap();
    f["phi"][0][1] = Value::String("1+*y1".into());
    std::fs::write(&path, f.to_string()).unwrap();
    let out = wact(&["check", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("phi[0][1]"), "{}", out.stderr);
    assert!(out.stderr.contains("position 2"), "{}", out.stderr);
}

#[test]
fn missing_nu_without_q_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no_nu.json");
    let mut f: Value = serde_json::from_str(&std::fs::read_to_string(bundled("sasakian_r3")).unwrap()).unwrap();
    f.as_object_mut().unwrap().remove("nu");
    std::fs::write(&path, f.to_string()).unwrap();
    let out = wact(&["check", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("nu is required"));
}

#[test]
fn asymmetric_metric_text_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("asym.json");
    let mut f: Value =
        serde_json::from_str(&std::fs::read_to_string(bundled("product_cosymplectic")).unwrap()).unwrap();
    f["metric"][0][1] = Value::String("u".into());
    std::fs::write(&path, f.to_string()).unwrap();
    assert_eq!(wact(&["check", path.to_str().unwrap()]).code, EXIT_USAGE);
    // equal values written differently are fine
    f["metric"][0][1] = Value::String("0*u".into());
    std::fs::write(&path, f.to_string()).unwrap();
    assert_eq!(wact(&["check", path.to_str().unwrap()]).code, EXIT_OK);
}

#[test]
fn classify_product_is_weak_cosymplectic() {
    let out = wact(&["classify", &bundled("product_cosymplectic")]);
    assert_eq!(out.code, EXIT_OK);
    let row = out
        .stdout
        .lines()
        .find(|l| l.starts_with("weak_cosymplectic "))
        .unwrap();
    assert!(row.ends_with('✓'), "{row}");
}

#[test]
fn classify_never_fails_on_verdicts() {
    let (code, r) = json(&["classify", &bundled("weak_sasakian_mismatch")]);
    assert_eq!(code, EXIT_OK);
    assert!(!flag(&r, "weak_contact_metric"));
}

#[test]
fn classify_fails_on_invalid_structure() {
    assert_eq!(wact(&["classify", &bundled("broken_metric")]).code, EXIT_MATH);
}

#[test]
fn point_count_does_not_change_verdicts() {
    for name in [
        "sasakian_r3",
        "sasakian_r5",
        "weak_sasakian_l2",
        "weak_sasakian_mismatch",
        "product_cosymplectic",
        "classical_cosymplectic",
    ] {
        let (_, a) = json(&["verify", &bundled(name), "--points", "10"]);
        let (_, b) = json(&["verify", &bundled(name), "--points", "100"]);
        let verdicts = |r: &Value| -> Vec<Value> {
            r["checks"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c["verdict"].clone())
                .collect()
        };
        let flags = |r: &Value| -> Vec<Value> {
            r["classification"]["flags"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c["holds"].clone())
                .collect()
        };
        assert_eq!(verdicts(&a), verdicts(&b), "{name}");
        assert_eq!(flags(&a), flags(&b), "{name}");
    }
}

#[test]
fn verify_single_check() {
    let (code, r) = json(&["verify", &bundled("product_cosymplectic"), "--check", "C4"]);
    assert_eq!(code, EXIT_OK);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["verdict"], "pass");
    assert_eq!(
        wact(&["verify", &bundled("sasakian_r3"), "--check", "Q7"]).code,
        EXIT_USAGE
    );
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = wact(&["verify", &bundled("weak_sasakian_l2"), "--json", p.to_str().unwrap()]);
        assert_eq!(out.code, EXIT_OK);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!std::fs::read_to_string(&a).unwrap().contains("timings"));
    let (_, timed) = json(&["verify", &bundled("sasakian_r3"), "--timings"]);
    assert!(timed["timings"]["total_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn deform_then_classify_gives_classical_sasakian() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    let out = wact(&[
        "deform",
        &bundled("weak_sasakian_l2"),
        "--lambda",
        "2",
        "--lambda-prime",
        "2",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let (code, r) = json(&["classify", out_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    for f in ["weak_contact_metric", "normal", "weak_Sasakian", "Q_scalar_on_D"] {
        assert!(flag(&r, f), "{f}");
    }
    assert!((r["classification"]["lambda"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn deform_rejects_bad_parameters() {
    let out = wact(&[
        "deform",
        &bundled("sasakian_r3"),
        "--lambda",
        "-1",
        "--lambda-prime",
        "2",
    ]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("BadParameters"));
}

#[test]
fn extract_rejects_cosymplectic_input() {
    let out = wact(&["extract-sasakian", &bundled("product_cosymplectic")]);
    assert_eq!(out.code, EXIT_MATH);
    assert!(out.stderr.contains("NotWeakSasakian"));
}

#[test]
fn extract_writes_a_loadable_file() {
    let out = wact(&["extract-sasakian", &bundled("weak_sasakian_l2")]);
    assert_eq!(out.code, EXIT_OK);
    let f = StructureFile::from_json(&out.stdout).unwrap();
    assert_eq!(f.nu, Some(1.0));
    f.to_raw().unwrap();
}

#[test]
fn product_command_matches_bundled_file() {
    let out = wact(&["product", "--phitilde", &bundled("phitilde_rotation"), "--nu", "4"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(
        out.stdout,
        std::fs::read_to_string(bundled("product_cosymplectic")).unwrap()
    );
}

#[test]
fn product_rejects_rank_deficient_base() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("base.json");
    let mut f: Value = serde_json::from_str(&std::fs::read_to_string(bundled("phitilde_rotation")).unwrap()).unwrap();
    f["phitilde"] = serde_json::json!([["0", "0"], ["1", "0"]]);
    std::fs::write(&path, f.to_string()).unwrap();
    let out = wact(&["product", "--phitilde", path.to_str().unwrap(), "--nu", "1"]);
    assert_eq!(out.code, EXIT_MATH);
    assert!(out.stderr.contains("RankDeficient"));
}

#[test]
fn cvf_accepts_xi() {
    let (code, r) = json(&["cvf", &bundled("sasakian_r3"), "--field", "0;0;2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["is_weak_contact"], true);
    assert_eq!(r["strict"], true);
}

#[test]
fn cvf_reports_perturbed_field() {
    let (code, r) = json(&["cvf", &bundled("weak_sasakian_l2"), "--field", "1;0;2+y1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["is_weak_contact"], false);
    assert!(r["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn cvf_from_potential() {
    let (code, r) = json(&["cvf", &bundled("weak_sasakian_l2"), "--potential", "z"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["is_weak_contact"], true);
    assert_eq!(r["strict"], false);
    assert!((r["sigma_sup"].as_f64().unwrap() - 2.0).abs() <= 1e-12);
}

#[test]
fn cvf_needs_contact_metric_structure() {
    let out = wact(&["cvf", &bundled("product_cosymplectic"), "--field", "0;0;1"]);
    assert_eq!(out.code, EXIT_MATH);
    assert!(out.stderr.contains("NotContactMetric"));
}

#[test]
fn cvf_field_must_match_dimension() {
    assert_eq!(
        wact(&["cvf", &bundled("sasakian_r3"), "--field", "0;2"]).code,
        EXIT_USAGE
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(wact(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(wact(&["check"]).code, EXIT_USAGE);
    assert_eq!(
        wact(&["check", &bundled("sasakian_r3"), "--points", "0"]).code,
        EXIT_USAGE
    );
    assert_eq!(wact(&["check", "/nonexistent/file.json"]).code, EXIT_USAGE);
    assert_eq!(wact(&["--help"]).code, EXIT_OK);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_wact");
    let status = |args: &[&str]| Command::new(bin).args(args).env("WACT_THREADS", "2").output().unwrap();
    let ok = status(&["check", &bundled("sasakian_r3")]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = status(&["check", &bundled("broken_nu")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Q xi=nu xi"));
    assert_eq!(status(&["nope"]).status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_reports() {
    let bin = env!("CARGO_BIN_EXE_wact");
    let report = |threads: &str| {
        Command::new(bin)
            .args(["verify", &bundled("sasakian_r5"), "--json", "-"])
            .env("WACT_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(report("1"), report("4"));
}

#[test]
fn structure_files_round_trip() {
    for name in [
        "sasakian_r3",
        "weak_sasakian_l2",
        "product_cosymplectic",
        "broken_d_invariant",
    ] {
        let text = std::fs::read_to_string(bundled(name)).unwrap();
        let f = StructureFile::from_json(&text).unwrap();
        let again = StructureFile::from_json(&f.to_json()).unwrap();
        assert_eq!(f, again);
        let (a, b) = (f.to_raw().unwrap(), again.to_raw().unwrap());
        assert_eq!(a, b);
    }
}
