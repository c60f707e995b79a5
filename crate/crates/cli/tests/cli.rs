use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn locbc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locbc"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("spawn locbc")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["region", "--preset", "example9", "--seed", "1"],
        &["region", "--preset", "example1"],
        &["region", "--eps1", "0.3,0.15,0.55", "--eps2", "0.05,0.24,0.71", "--seed", "1", "--n", "10"],
        &["teleport"],
        &["pg22", "--preset", "example1", "--format", "xml"],
    ];
    for args in cases {
        let out = locbc(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read_dir(dir.path()).map(|d| d.count()).unwrap_or(0), 0);
}

#[test]
fn degrade_reports_the_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = locbc(dir.path(), &["degrade", "--preset", "example1"]);
    assert!(out.status.success());
    let v = json(&dir.path().join("verdict.json"));
    assert_eq!(v["order"], "Y2DegradedFromY1");
    assert_eq!(v["certificate_pass"], true);
    assert!(dir.path().join("t_matrix.csv").exists());

    let dir = tempfile::tempdir().unwrap();
    let out = locbc(dir.path(), &["degrade", "--eps1", "0.2,0.5,0.3", "--eps2", "0.3,0.1,0.6"]);
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("verdict.json"))["order"], "Incomparable");
    assert!(!dir.path().join("certificate.json").exists());
}

#[test]
fn pg22_example_is_convex() {
    let dir = tempfile::tempdir().unwrap();
    let out = locbc(dir.path(), &["pg22", "--eps1", "0.05,0.20,0.75", "--eps2", "0.30,0.15,0.55", "--points", "11"]);
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("summary.json"))["case"], "ConvexCaseII");
    let curve = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 12);
    assert!(curve.starts_with("sigma,r1,r2\n0,0,"));
}

#[test]
fn filtered_points_dominate_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = locbc(
        dir.path(),
        &["region", "--preset", "example1", "--seed", "4", "--n", "2000", "--mu-points", "5", "--restarts", "2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ts = fs::read_to_string(dir.path().join("timeshare.csv")).unwrap();
    let after = fs::read_to_string(dir.path().join("after.csv")).unwrap();
    let corners: Vec<(f64, f64)> = ts
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    let c1 = corners.iter().map(|c| c.0).fold(0.0, f64::max);
    let c2 = corners.iter().map(|c| c.1).fold(0.0, f64::max);
    for line in after.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (r1, r2): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert!(r1 / c1 + r2 / c2 >= 1.0 - 1e-9, "{line}");
    }
    for entry in fs::read_dir(dir.path()).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(!name.ends_with(".tmp"), "leftover {name}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# settings\npreset = example1\npoints = 7\nlog-base = bits\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = locbc(&out_dir, &["pg22", "--config", cfg.to_str().unwrap(), "--points", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = fs::read_to_string(out_dir.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 6);
    assert_eq!(json(&out_dir.join("summary.json"))["unit"], "bits");
}

#[test]
fn json_format_writes_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = locbc(dir.path(), &["capacity", "--preset", "example3", "--format", "json"]);
    assert!(out.status.success());
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["capacity.json"]);
}
