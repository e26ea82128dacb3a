use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aadd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aadd")).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    aadd(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn fail_safe_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["waterlevel", "--fault", "--observer", "--horizon", "40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("tank.level in [-inf, 15] [safety]: PASS"), "{report}");
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("time,signal,hull_lo,hull_hi,leaf_count\n"));
    // 401 tags, 5 signals
    assert_eq!(csv.lines().count(), 1 + 401 * 5);
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert!(stats["lp_calls"].as_u64().unwrap() > 0);
    assert_eq!(stats["leaf_counts"].as_array().unwrap().len(), 401);
}

#[test]
fn unchecked_fault_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["waterlevel", "--fault", "--horizon", "30"]);
    assert_eq!(code(&o), 2);
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("[safety]: VIOLATED"), "{report}");
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_in(dir.path(), &["waterlevel", "--horizon", "0"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["waterlevel", "--horizon", "0.25"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["waterlevel", "--frobnicate"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["/nonexistent/s.toml"])), 1);
    assert_eq!(code(&aadd(&[])), 1);
    let o = aadd(&["--help"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn corners_are_written_and_contained() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["waterlevel", "--horizon", "10", "--corners", "--samples", "2", "--seed", "5"],
    );
    assert_eq!(code(&o), 0);
    let corners = dir.path().join("corners");
    for label in ["e--", "e+-", "e-+", "e++", "sample0", "sample1"] {
        assert!(corners.join(format!("{label}.csv")).exists(), "{label}");
    }
    let summary = fs::read_to_string(corners.join("containment.txt")).unwrap();
    assert!(summary.ends_with("6/6 runs contained\n"), "{summary}");
}

#[test]
fn same_config_and_seed_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["waterlevel", "--fault", "--observer", "--horizon", "12", "--samples", "3", "--seed", "9"];
    run_in(a.path(), &args);
    run_in(b.path(), &args);
    for f in ["trace.csv", "corners/sample2.csv", "report.txt"] {
        let x = fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn json_and_lp_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["waterlevel", "--horizon", "5", "--emit-json", "--dump-lp", "--no-reduce", "--parallel"],
    );
    assert_eq!(code(&o), 0);
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    let level = trace["signals"].as_array().unwrap().iter().find(|s| s["name"] == "tank.level").unwrap();
    let last = level["events"].as_array().unwrap().last().unwrap();
    assert_eq!(last["leaves"].as_array().unwrap().len() as u64, last["leaf_count"].as_u64().unwrap());
    assert!(!trace["conditions"].as_array().unwrap().is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["results"][0]["status"], "VIOLATED-POSSIBLY");
    assert!(fs::metadata(dir.path().join("lp_dump.txt")).unwrap().len() > 0);
}

#[test]
fn scenario_files_round_trip_through_show() {
    let dir = tempfile::tempdir().unwrap();
    let o = aadd(&["show", "waterlevel", "--fault", "--observer"]);
    assert_eq!(code(&o), 0);
    let file = dir.path().join("wl.toml");
    fs::write(&file, &o.stdout).unwrap();
    let f = file.to_str().unwrap();
    let out = dir.path().join("out");
    let o = run_in(&out, &[f, "--horizon", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("8,"));
    assert_eq!(code(&run_in(&out, &[f, "--fault"])), 1);

    fs::write(&file, "name = \"x\"\nhorizon = 1.0\n[[process]]\nname = \"t\"\nkind = \"pipe\"\nperiod = 0.1\n").unwrap();
    let o = run_in(&out, &[f]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("pipe"));
}
