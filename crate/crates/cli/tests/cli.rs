use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hc3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hc3")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn pack_reports_optimum_and_count() {
    let o = hc3(&["pack", "--d2", "2", "--diag", "2", "--count"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("optimum 4, count 2\n"));
    let o = hc3(&["pack", "--d2", "3", "--diag", "2", "--count", "--mod-translations"]);
    assert!(stdout(&o).starts_with("optimum 2, count 1 (up to translation)\n"));
}

#[test]
fn pack_budget_exhaustion_exits_3() {
    let o = hc3(&["pack", "--d2", "5", "--period", "6,0,0;3,3,0;4,1,3", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(hc3(&["pack", "--d2", "5", "--diag", "2"]).status.code(), Some(2));
    assert_eq!(hc3(&["verify", "/nonexistent/doc.json"]).status.code(), Some(2));
    assert_eq!(hc3(&["pc", "--d2", "7"]).status.code(), Some(2));
}

#[test]
fn inadmissible_document_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    fs::write(&f, r#"{"d2": 2, "period": [[4,0,0],[0,4,0],[0,0,4]], "sites": [[0,0,0],[1,0,0]]}"#).unwrap();
    let o = hc3(&["verify", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("admissible no: (0,0,0) and (1,0,0) at squared distance 1"));
    let o = hc3(&["voronoi", path(&f), "--site", "0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("squared distance 1"));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("odd.json");
    fs::write(&f, r#"{"d2": 2, "period": [[2,0,0],[0,2,0],[0,0,2]], "sites": [], "colour": "red"}"#).unwrap();
    assert_eq!(hc3(&["verify", path(&f)]).status.code(), Some(2));
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let o = hc3(&["--json", "layered", "--d2", "5", "--word", "ST", "--out", path(&first)]);
    assert!(o.status.success());
    let written = fs::read_to_string(&first).unwrap();
    assert_eq!(stdout(&o), written);
    let o = hc3(&["verify", path(&first)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("admissible yes"));
    assert!(stdout(&o).contains("min pair squared distance 5"));
}

#[test]
fn catalog_cell_volume() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p9.json");
    assert!(hc3(&["pc", "--d2", "9", "--out", path(&f)]).status.success());
    let o = hc3(&["voronoi", path(&f), "--site", "(0,0,0)"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("volume 20\n"));
}

#[test]
fn geometry_dump_writes_obj_and_exact_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fcc.json");
    let obj = dir.path().join("cell.obj");
    assert!(hc3(&["pc", "--d2", "2", "--out", path(&f)]).status.success());
    assert!(hc3(&["voronoi", path(&f), "--site", "0,0,0", "--dump-geometry", path(&obj)]).status.success());
    let text = fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 14);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
    let exact: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cell.obj.exact.json")).unwrap()).unwrap();
    assert_eq!(exact["volume"], "2");
}

#[test]
fn embedding_classes_for_scale_two() {
    let o = hc3(&["embed", "--ell", "2", "--classes"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("in 1 classes"));
    let o = hc3(&["--json", "embed", "--ell", "3", "--classes", "--layered"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["classes"].as_array().unwrap().iter().all(|c| c["layered"] == true));
}

#[test]
fn excitations_and_slides_from_documents() {
    let dir = tempfile::tempdir().unwrap();
    let hcp = dir.path().join("hcp.json");
    assert!(hc3(&["layered", "--d2", "5", "--word", "ST", "--out", path(&hcp)]).status.success());
    let o = hc3(&["excite", path(&hcp), "--max-order", "2", "--radius", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("min insertion order 2"));
    assert!(text.lines().filter(|l| l.starts_with("2 1 3 ")).count() >= 1);

    let cubic = dir.path().join("cubic.json");
    assert!(hc3(&["pc", "--d2", "4", "--scale", "2", "--out", path(&cubic)]).status.success());
    let o = hc3(&["slide", path(&cubic), "--mesh", "0,0,0:0,0,2", "--shift", "0,0,1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("valid yes"));
    let o = hc3(&["slide", path(&cubic), "--mesh", "0,0,0:0,0,2", "--shift", "1,0,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["embed", "--ell", "3", "--classes", "--layered"];
    assert_eq!(hc3(&args).stdout, hc3(&args).stdout);
}
