use std::process::{Command, Output};

use tamecube::fnexpr::{parse_map, serialize_map};
use tamecube::retract::{approx_retraction, RetractionParams};

fn tamecube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tamecube"))
        .args(args)
        .env_remove("TAMECUBE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn schema_prints_version() {
    let o = tamecube(&["schema"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.0.0");
}

#[test]
fn sample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = tamecube(&["sample", "--map", "(map 2 (prod (coord 1) (coord 2)))", "--grid", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t1,t2,y1");
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[1], "0,0,0");
    assert_eq!(rows[9], "1,1,1");
}

#[test]
fn sample_reads_map_files() {
    let r = approx_retraction(&RetractionParams::new(2, 0.25, 0.1, 0.2).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("r.map");
    std::fs::write(&map, serialize_map(&r)).unwrap();
    let o = tamecube(&["sample", "--map", map.to_str().unwrap(), "--grid", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t1,t2,y1,y2"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (y1, y2) = (v[2], v[3]);
        let on_j = y1.abs() < 1e-9 || (1.0 - y1).abs() < 1e-9 || (1.0 - y2).abs() < 1e-9;
        assert!(on_j, "{line}");
    }
    // the serialized descriptor is itself parseable
    parse_map(&std::fs::read_to_string(&map).unwrap()).unwrap();
}

#[test]
fn malformed_map_is_a_usage_error() {
    let o = tamecube(&["sample", "--map", "(map 2 (sum (coord 1) (bogus 2)))", "--grid", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column"), "{}", stderr(&o));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = tamecube(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_of_range_config_is_a_usage_error() {
    assert_eq!(tamecube(&["verify", "--suite", "kernels", "--n", "5"]).status.code(), Some(2));
    assert_eq!(tamecube(&["verify", "--suite", "tame", "--eps", "0.7"]).status.code(), Some(2));
    assert_eq!(tamecube(&["verify"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("r.json");
    let o = tamecube(&["verify", "--suite", "kernels", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = tamecube(&["sample", "--map", "(map 1 (coord 1))", "--grid", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn kernel_report_is_deterministic() {
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let obj = v.as_object_mut().unwrap();
        assert!(obj.remove("timestamp").is_some());
        v
    };
    let a = tamecube(&["verify", "--suite", "kernels", "--seed", "11"]);
    let b = tamecube(&["verify", "--suite", "kernels", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let (ra, rb) = (strip(&a), strip(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra["schema"], "1.0.0");
    assert_eq!(ra["failures"], 0);
    assert!(ra["results"].as_array().unwrap().iter().all(|r| r["passed"] == true));
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_tamecube"))
            .args(["verify", "--suite", "kernels"])
            .env("TAMECUBE_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(2));
    assert_eq!(run("0").status.code(), Some(2));
}
