mod common;

use common::*;

#[test]
fn usage_errors_exit_64() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(cli(&["sample", "--n", "10"]).status.code(), Some(64));
    assert_eq!(cli(&["audit", "--data", "x.csv"]).status.code(), Some(64));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let (data, sch) = write_fixture(dir.path(), &planted(300, 1));
    let missing = dir.path().join("nope.csv");
    let o = cli(&[
        "discover",
        "--data",
        p(&missing),
        "--schema",
        p(&sch),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
    let o = cli(&[
        "audit",
        "--data",
        p(&data),
        "--schema",
        p(&sch),
        "--intervention",
        "kbest:0",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn version_prints_name_and_version() {
    let o = cli(&["version"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("fairprobe "));
    assert!(s.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn discover_fit_sample_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (data, sch) = write_fixture(dir.path(), &planted(1500, 2));
    let out = dir.path().join("disc");
    let o = cli(&[
        "discover",
        "--data",
        p(&data),
        "--schema",
        p(&sch),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("cpdag.dot").exists());
    let dag = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("dag_"))
        .expect("at least one DAG file");
    let model = dir.path().join("m.json");
    let o = cli(&[
        "fit",
        "--data",
        p(&data),
        "--schema",
        p(&sch),
        "--dag",
        p(&dag),
        "--out",
        p(&model),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cli(&["sample", "--model", p(&model), "--n", "25", "--seed", "4"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert_eq!(text.lines().next().unwrap(), "S,M,Y");
    let again = cli(&["sample", "--model", p(&model), "--n", "25", "--seed", "4"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn null_audit_exits_0_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let (data, sch) = write_fixture(dir.path(), &null_fixture(1500, 3));
    let out = dir.path().join("out");
    let o = cli(&[
        "audit",
        "--data",
        p(&data),
        "--schema",
        p(&sch),
        "--intervention",
        "drop-sens",
        "--repeats",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["violation_found"], false);
    assert_eq!(
        report["interventions"][0]["repeats"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
    assert!(out.join("summary.txt").exists());
}

#[test]
fn validate_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let (data, sch) = write_fixture(dir.path(), &multi_feature(1500, 6));
    let o = cli(&["validate", "--data", p(&data), "--schema", p(&sch)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = String::from_utf8(o.stdout).unwrap();
    for row in ["PC", "GES", "RND", "EQ"] {
        assert!(
            s.lines().any(|l| l.starts_with(row)),
            "missing {row} in\n{s}"
        );
    }
}
