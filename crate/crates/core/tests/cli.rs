use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn moran(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moran"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(args: &[&str], system: &str) -> Output {
    let path = fixture(system);
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    moran(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn decide_exit_codes() {
    assert_eq!(run(&["decide"], "diagonal_spectral.json").status.code(), Some(0));
    assert_eq!(run(&["decide"], "triangular.json").status.code(), Some(0));
    let o = run(&["decide"], "diagonal_not_spectral.json");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NotSpectral"));
}

#[test]
fn invalid_systems_exit_with_three() {
    for f in ["singular.json", "unbounded_digits.json", "growing_shear.json"] {
        let o = run(&["validate"], f);
        assert_eq!(o.status.code(), Some(3), "{f}");
        assert!(stderr(&o).starts_with("error: ["), "{f}: {}", stderr(&o));
    }
    let o = moran(&["decide", "/nonexistent/system.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn growth_rejections_name_the_condition() {
    let o = run(&["validate"], "unbounded_digits.json");
    assert!(stderr(&o).contains("[bounded-digits]"));
    let o = run(&["validate"], "growing_shear.json");
    assert!(stderr(&o).contains("[contraction]"));
    let o = run(&["--json", "validate"], "growing_shear.json");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["diagnostics"][0]["condition"], "contraction");
}

#[test]
fn zeros_of_two_direction_digits() {
    let o = run(&["zeros"], "two_directions.json");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(1,2) (1,3)"), "{}", stdout(&o));
}

#[test]
fn json_reports_are_byte_identical() {
    for args in [
        vec!["--json", "decide"],
        vec!["--json", "zeros"],
        vec!["--json", "spectrum", "--levels", "1"],
        vec!["--json", "verify-orth", "--level", "1"],
        vec!["--json", "admissible"],
    ] {
        let a = run(&args, "sierpinski.json");
        let b = run(&args, "sierpinski.json");
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["schema"], 1);
        assert!(v["timings"].is_null());
        for key in ["command", "params", "witnesses"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
        assert!(v.get("verdict").is_some() || v.get("report").is_some());
    }
}

#[test]
fn decide_json_carries_witness() {
    let o = run(&["--json", "decide"], "diagonal_not_spectral.json");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["outcome"], "NotSpectral");
    assert_eq!(v["verdict"]["witness"]["level"], 2);
    assert_eq!(v["verdict"]["witness"]["index"], 1);
    assert_eq!(v["verdict"]["witness"]["value"], "6");
}

#[test]
fn render_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cloud.csv");
    let o = run(
        &["render", "--level", "2", "--format", "csv", "--out", csv.to_str().unwrap()],
        "diagonal_spectral.json",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 25);

    let ppm = dir.path().join("cloud.ppm");
    let o = run(
        &["render", "--level", "1", "--format", "ppm", "--size", "64", "--out", ppm.to_str().unwrap()],
        "sierpinski.json",
    );
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n64 64\n255\n"));
}

#[test]
fn spectrum_cap_is_enforced() {
    let o = run(&["spectrum", "--levels", "2", "--cap", "100"], "sierpinski.json");
    assert_eq!(o.status.code(), Some(3));
}
