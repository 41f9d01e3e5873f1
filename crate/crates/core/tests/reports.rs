use bscrit::exponents::{ExponentTriple, Rational};
use bscrit::harness::{
    emit_report, run_blowup_experiment, BlowupVerdict, ExperimentConfig, ReportFormat, ReportKind, ScalingReport,
};

fn short_run(seed: u64) -> ScalingReport {
    let mut cfg = ExperimentConfig::for_triple(ExponentTriple::from_exponents("2", "2", "2").unwrap(), Rational::HALF);
    cfg.j_min = 4;
    cfg.j_max = 7;
    cfg.seed = seed;
    run_blowup_experiment(&cfg).unwrap()
}

#[test]
fn json_round_trip() {
    let r = short_run(1);
    assert_eq!(r.kind, ReportKind::Blowup);
    assert_eq!(r.m0, "-1/2");
    let back = ScalingReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn deterministic_per_seed() {
    assert_eq!(short_run(3), short_run(3));
    let (a, b) = (short_run(3), short_run(4));
    assert_ne!(a.series("t_norm"), b.series("t_norm"));
    // f norms do not see the signs
    assert_eq!(a.series("f1_norm"), b.series("f1_norm"));
}

#[test]
fn ratio_is_consistent_with_norms() {
    let r = short_run(1);
    for row in &r.rows {
        let q = &row.quantities;
        let expect = q["t_norm"] / (q["f1_norm"] * q["f2_norm"]);
        assert!((q["ratio"] - expect).abs() <= 1e-12 * expect);
    }
    assert!(matches!(r.verdict, Some(BlowupVerdict::UnboundedWitness | BlowupVerdict::Consistent)));
}

#[test]
fn emitted_formats() {
    let r = short_run(1);
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("blowup");

    let csv = std::fs::read_to_string(emit_report(&r, ReportFormat::Csv, &stem).unwrap()).unwrap();
    let quantities = r.rows[0].quantities.len();
    assert_eq!(csv.lines().count(), 1 + r.rows.len() * quantities);
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "4");
    assert!(first[2].parse::<f64>().unwrap() > 0.0);

    let dat = std::fs::read_to_string(emit_report(&r, ReportFormat::Plotdata, &stem).unwrap()).unwrap();
    assert_eq!(dat.lines().filter(|l| l.starts_with('#')).count(), quantities);
    let ratio_block: Vec<&str> = dat.split("# ratio\n").nth(1).unwrap().lines().take_while(|l| !l.is_empty()).collect();
    assert_eq!(ratio_block.len(), r.rows.len());
    let (j, v) = ratio_block[0].split_once(' ').unwrap();
    assert_eq!(j, "4");
    assert!((v.parse::<f64>().unwrap() - r.rows[0].quantities["ratio"].log2()).abs() < 1e-9);

    let path = emit_report(&r, ReportFormat::Json, &stem).unwrap();
    assert_eq!(path.extension().unwrap(), "json");

    let empty = ScalingReport { rows: Vec::new(), ..r };
    assert!(emit_report(&empty, ReportFormat::Csv, &stem).is_err());
}
