use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn netscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netscope")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

fn write_faure(dir: &Path, b: &str, m: &str) -> String {
    let path = dir.join(format!("faure{b}_{m}.txt"));
    let o = netscope(&["generate", "--kind", "faure", "--base", b, "--s", "2", "--m", m, "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_embeds_meta_and_provenance() {
    let o = netscope(&["generate", "--kind", "gfaure", "--base", "5", "--s", "2", "--m", "2", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let meta: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# meta: ").unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["invocation"].as_array().unwrap().iter().any(|a| a == "gfaure"));
    assert!(lines.next().unwrap().starts_with("# provenance: "));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 25);
}

#[test]
fn generation_is_reproducible() {
    let args = ["generate", "--kind", "gfaure", "--base", "3", "--s", "3", "--m", "3", "--seed", "4"];
    assert_eq!(netscope(&args).stdout, netscope(&args).stdout);
}

#[test]
fn quality_of_a_faure_net_is_cqe() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_faure(dir.path(), "3", "3");
    let v = json(&netscope(&["quality", "--in", &pts, "--base", "3"]));
    assert_eq!(v["result"]["cqe"], true);
    assert!(v["meta"]["invocation"].is_array());
    let w = json(&netscope(&["witness", "--in", &pts, "--base", "3"]));
    assert_eq!(w["result"]["witness"], Value::Null);
}

#[test]
fn sobol_projection_with_positive_t_has_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("sobol.txt");
    let o = netscope(&["generate", "--kind", "sobol-unit", "--s", "17", "--m", "10", "--coords", "16,17", "--out", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let w = json(&netscope(&["witness", "--in", pts.to_str().unwrap(), "--base", "2"]));
    assert_eq!(w["result"]["cqe"], false);
    assert!(w["result"]["witness"].is_object());
}

#[test]
fn pdf_and_hxy_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_faure(dir.path(), "2", "4");
    let o = netscope(&["pdf", "--in", &pts, "--base", "2", "--format", "csv", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# meta: "));
    assert_eq!(text.lines().nth(1), Some("i,N,psi"));
    let h = json(&netscope(&["hxy", "--in", &pts, "--base", "2", "--x", "0.5,0.25", "--y", "0.5,0.75"]));
    let (a, b) = (h["result"]["h_pdf"].as_f64().unwrap(), h["result"]["h_decomposition"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn scramble_round_trip_and_variance() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write_faure(dir.path(), "3", "3");
    let out = dir.path().join("scrambled.txt");
    let o = netscope(&["scramble", "--in", &pts, "--seed", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let a = json(&netscope(&["quality", "--in", &pts, "--base", "3"]));
    let b = json(&netscope(&["quality", "--in", out.to_str().unwrap(), "--base", "3"]));
    assert_eq!(a["result"], b["result"]);
    let v = json(&netscope(&["variance", "--in", &pts, "--replicates", "10", "--seed", "3", "--monte-carlo"]));
    assert_eq!(v["meta"]["seed"], 3);
    assert_eq!(v["result"]["scrambled"]["replicates"], 10);
    assert!(v["result"]["monte_carlo"]["variance"].as_f64().unwrap() > 0.0);
    let o = netscope(&["variance", "--in", &pts, "--replicates", "5", "--monte-carlo", "--format", "csv"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with('"'));
    assert!(rows.iter().all(|r| r.rsplitn(6, ',').count() == 6));
}

#[test]
fn tables_one_csv() {
    let o = netscope(&["tables", "--which", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("point_set,b,k=1"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(netscope(&["quality"]).status.code(), Some(2));
    assert_eq!(netscope(&["tables", "--which", "9"]).status.code(), Some(2));
    assert_eq!(netscope(&["quality", "--in", "/nonexistent/points.txt", "--base", "2"]).status.code(), Some(2));
    let dup = dir.path().join("dup.txt");
    fs::write(&dup, "base=3 s=2 n=2 precision=2\n01 02\n01 12\n").unwrap();
    let o = netscope(&["quality", "--in", dup.to_str().unwrap(), "--base", "3"]);
    assert_eq!(o.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(netscope(&["generate", "--kind", "faure", "--base", "4", "--s", "2", "--m", "1"]).status.code(), Some(1));
}
