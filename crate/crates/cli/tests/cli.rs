use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn lamcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamcert")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn square_slope_three_four() {
    let sq = fixture("square.json");
    let o = lamcert(&["slope", "--manifold", path(&sq), "--slope", "3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("total normalized length 5\n"), "{}", stdout(&o));
    let o = lamcert(&["slope", "--manifold", path(&sq), "--slope", "3,4", "--json"]);
    let v = json(&o);
    assert_eq!(v["total_normalized_length"], 5.0);
    assert_eq!(v["cusps"][0]["length"], 5.0);
}

#[test]
fn malformed_input_exits_2() {
    let sq = fixture("square.json");
    for bad in ["3;4", "3,x", "2,4", "1,0;1,0"] {
        let o = lamcert(&["slope", "--manifold", path(&sq), "--slope", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}: {}", stderr(&o));
        assert!(stderr(&o).contains("--slope"), "{bad}: {}", stderr(&o));
    }
    let o = lamcert(&["slope", "--manifold", "/nonexistent.json", "--slope", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--manifold"));
    let o = lamcert(&["nz"]);
    assert_eq!(o.status.code(), Some(2));
    let deep = fixture("deep_square.json");
    for c in ["X=1", "C=abc", "C"] {
        let o = lamcert(&["certify", "--manifold", path(&deep), "--slope", "20,21", "--class", "21,-20", "-C", c]);
        assert_eq!(o.status.code(), Some(2), "{c}");
        assert!(stderr(&o).contains("--constants"), "{c}: {}", stderr(&o));
    }
}

#[test]
fn nz_window_matches_closed_form() {
    let o = lamcert(&["nz", "--ell", "10", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let (lo, hi) = (v["lo"].as_f64().unwrap(), v["hi"].as_f64().unwrap());
    assert!((lo - TAU / 116.17).abs() < 1e-15 && (hi - TAU / 71.22).abs() < 1e-15);
    assert!(stdout(&lamcert(&["nz", "--ell", "10"])).contains("0.0540861264"));
    let o = lamcert(&["nz", "--ell", "7.823"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn certify_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let deep = fixture("deep_square.json");
    let args = ["certify", "--manifold", path(&deep), "--slope", "20,21", "--class", "21,-20", "--norm", "3"];
    let o = lamcert(&[&args[..], &["--out", path(&out)]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: certified-cores"));
    let o = lamcert(&[&args[..], &["--json"]].concat());
    assert_eq!(json(&o)["report"]["verdict"], "certified-cores");
    assert_eq!(json(&o), serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(&out).unwrap()).unwrap());

    let o = lamcert(&["verify-report", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let text = std::fs::read_to_string(&out).unwrap();
    let tampered = dir.path().join("tampered.json");
    let edited = text.replacen("\"ell\": \"29.0\"", "\"ell\": \"30.0\"", 1);
    assert_ne!(edited, text);
    std::fs::write(&tampered, edited).unwrap();
    let o = lamcert(&["verify-report", path(&tampered)]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    assert!(stdout(&o).contains("$.report.ell"), "{}", stdout(&o));
}

#[test]
fn hypothesis_failure_exits_3() {
    let deep = fixture("deep_square.json");
    let o = lamcert(&["certify", "--manifold", path(&deep), "--slope", "1,2", "--class", "2,-1", "--norm", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("hypotheses-failed"));
    let o = lamcert(&["certify", "--manifold", path(&deep), "--slope", "20,21", "--class", "1,0", "--norm", "3"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn family_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("family.csv");
    let (spec, m) = (fixture("bd_family.json"), fixture("bd_synthetic.json"));
    let o = lamcert(&["family", "--spec", path(&spec), "--manifold", path(&m), "-C", "1.0", "--csv", path(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("N = 36\n"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 201);
    assert!(text.lines().nth(37).unwrap().starts_with("36,") && text.lines().nth(37).unwrap().contains(",true,"));
    assert!(text.lines().nth(36).unwrap().contains(",false,"));

    // a larger C pushes the threshold out
    let o = lamcert(&["family", "--spec", path(&spec), "--manifold", path(&m), "-C", "C=4", "--json"]);
    let n = json(&o)["table"]["threshold"]["n"].as_i64().unwrap();
    assert!(n > 36);
}

#[test]
fn verify_tubes_is_reproducible() {
    let args = ["verify-tubes", "--samples", "2000", "--seed", "7", "--json"];
    let a = lamcert(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let one = lamcert(&[&["--jobs", "1"], &args[..]].concat());
    assert_eq!(a.stdout, one.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 7);
    assert!(v["suites"].as_array().unwrap().iter().all(|s| s["violations"] == 0));
    let text = stdout(&lamcert(&["verify-tubes", "--samples", "2000", "--seed", "7"]));
    assert!(text.contains("0 violations"));
}
