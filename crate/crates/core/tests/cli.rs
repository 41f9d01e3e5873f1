use std::path::Path;
use std::process::{Command, Output};

use bscrit::harness::ScalingReport;

fn bscrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bscrit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exponent_map_csv() {
    let o = bscrit(&["exponent-map", "--n", "1", "--family", "J", "--grid", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "inv_p1,inv_p2,region,critical_order,piecewise_order");
    assert_eq!(lines.len(), 26);
    // 1 - x - y wins alone at (1/4, 0) and ties with 1/2 at (1/4, 1/4)
    assert!(lines.contains(&"1/4,0/1,J0,-3/4,-3/4"));
    assert!(lines.contains(&"1/4,1/4,J0*,-1/2,-1/2"));
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[3], f[4]);
    }
}

#[test]
fn exponent_map_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    let o = bscrit(&["exponent-map", "--family", "I", "--grid", "3", "--max", "3/2", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("3/2,3/2,I4"));
}

#[test]
fn derive_exit_codes() {
    let ok = bscrit(&["derive", "--p1", "2", "--p2", "2", "--p", "1", "--rho", "1/2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("# conclusion ForcesEquality"));

    let bad = bscrit(&["derive", "--p1", "2", "--p2", "2", "--p", "2", "--rho", "1/2", "--format", "json"]);
    assert_eq!(bad.status.code(), Some(2));
    let trace = bscrit::derivation::DerivationTrace::from_json(&stdout(&bad)).unwrap();
    trace.replay().unwrap();

    let invalid = bscrit(&["derive", "--p1", "2", "--p2", "2", "--p", "2", "--rho", "1"]);
    assert_eq!(invalid.status.code(), Some(3));
    let garbled = bscrit(&["derive", "--p1", "x", "--p2", "2", "--p", "2", "--rho", "1/2"]);
    assert_eq!(garbled.status.code(), Some(3));
}

#[test]
fn blowup_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("out/run");
    let o = bscrit(&[
        "blowup", "--p1", "2", "--p2", "2", "--p", "2", "--rho", "1/2", "--output", stem.to_str().unwrap(), "--format",
        "csv,json,plotdata",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict: UNBOUNDED_WITNESS"));
    let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
    // 6 values of j, 7 quantities each
    assert_eq!(csv.lines().count(), 1 + 6 * 7);
    let report = ScalingReport::from_json(&std::fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert!(Path::new(&stem.with_extension("dat")).exists());
}

#[test]
fn blowup_rejects_bad_config() {
    let o = bscrit(&["blowup", "--p1", "2", "--p2", "2", "--p", "2", "--rho", "1/2", "--jmin", "9", "--jmax", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let o = bscrit(&["blowup", "--p1", "2", "--p2", "2", "--p", "2", "--rho", "1/2", "--jmin", "4", "--jmax", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lemma_suite_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    std::fs::write(&cfg, "# default run\np1 = 2\np2 = 2\np = 2\nrho = 1/2\nseminorm_seeds = 10\n").unwrap();
    let o = bscrit(&["lemma-suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for name in ["f_norms", "dk_max", "dk_l2", "slice_cardinality", "seminorm_uniformity", "khintchine_stability"] {
        assert!(text.contains(&format!("PASS {name}:")), "{text}");
    }

    std::fs::write(&cfg, "p1 = 2\np2 = 2\np = 2\nb1_offset = -0.25\nseminorm_seeds = 4\n").unwrap();
    let o = bscrit(&["lemma-suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL f_norms"));

    let o = bscrit(&["lemma-suite", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn selftest_passes() {
    let o = bscrit(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
