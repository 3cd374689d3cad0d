use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fullgroup-lab"))
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_entropy_writes_artifacts_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    let st = bin()
        .args(["build-entropy", "--lambda", "1/2", "--max-len", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    for f in ["levels.json", "report.json", "free_product.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["exitCode"].as_i64(), Some(0));
    let csv = std::fs::read_to_string(out.join("free_product.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn infeasible_schedule_exits_2_with_failure_record() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let st = bin()
        .args(["build-entropy", "--lambda", "1/2", "--dims", "4x4", "--levels", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(out.join("FAILED.json").exists());
}

#[test]
fn usage_errors_exit_64() {
    let st = bin().args(["build-entropy", "--lambda", "0.5"]).output().unwrap();
    assert_eq!(st.status.code(), Some(64));
    let st = bin().arg("no-such-command").output().unwrap();
    assert_eq!(st.status.code(), Some(64));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn faulty_labeling_fails_certification() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t");
    let st = bin()
        .args(["build-toeplitz", "--scan", "8", "--fault", "0,0=3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(3));
    let cert = json(&out.join("certificate.json"));
    assert_eq!(cert["passed"], serde_json::Value::Bool(false));
}

#[test]
fn verify_rejects_a_tampered_level_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    let st = bin().args(["build-entropy", "--lambda", "1/2", "--max-len", "1", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let good = out.join("levels.json");
    let st = bin().arg("verify").arg("--level-file").arg(&good).arg("--out").arg(tmp.path().join("v1")).status().unwrap();
    assert_eq!(st.code(), Some(0));

    let mut doc = json(&good);
    // every run of level 1 collapsed to symbol 0
    let runs = doc["levels"][0]["labelRuns"].as_array_mut().unwrap();
    for r in runs.iter_mut() {
        if let Some(a) = r.as_array_mut() {
            a[1] = serde_json::json!(1);
        }
    }
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let st = bin().arg("verify").arg("--level-file").arg(&bad).arg("--out").arg(tmp.path().join("v2")).output().unwrap();
    assert_eq!(st.status.code(), Some(3));
}

#[test]
fn gamma_table_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let st = bin()
        .args(["gamma-table", "--nu", "uniform2", "--eps", "1/4", "--max", "5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("delta_curve.csv")).unwrap();
    assert!(text.lines().count() >= 2);
}
