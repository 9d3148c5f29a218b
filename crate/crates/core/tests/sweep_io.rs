use perfect_partitions::harness::{
    emit, label_regime, load_csv, run_sweep, OutputFormat, RegimeLabel, SweepConfig, SweepMode,
};

fn config() -> SweepConfig {
    let mut cfg = SweepConfig::new(3, vec![6, 9], vec![1.5, 3.0, 20.0]);
    cfg.trials = 60;
    cfg.seed = 5;
    cfg.mode = SweepMode::Count;
    cfg
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let records = run_sweep(&config()).unwrap();
    emit(&records, OutputFormat::Csv, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), records);

    let again = dir.path().join("again.csv");
    emit(&run_sweep(&config()).unwrap(), OutputFormat::Csv, &again).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn json_file_has_csv_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let records = run_sweep(&config()).unwrap();
    emit(&records, OutputFormat::Json, &path).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let first = &v.as_array().unwrap()[0];
    for key in [
        "nu",
        "kappa_eff",
        "M",
        "exists_count",
        "mean_Z",
        "var_Z",
        "regime_label",
        "budget_flag",
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(first["budget_flag"], "ok");
}

#[test]
fn emit_reports_path_on_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let err = emit(&[], OutputFormat::Csv, &path).unwrap_err();
    assert!(err.to_string().contains("out.csv"));
}

#[test]
fn labels_come_from_kappa_only() {
    let records = run_sweep(&config()).unwrap();
    for r in &records {
        assert_eq!(r.regime_label, label_regime(3, r.kappa).unwrap());
    }
    assert_eq!(records[0].regime_label, RegimeLabel::Subcritical);
    assert_eq!(records[2].regime_label, RegimeLabel::SecondMoment);

    let mut two = config();
    two.nu = 2;
    assert!(run_sweep(&two)
        .unwrap()
        .iter()
        .all(|r| r.regime_label == RegimeLabel::Unknown));
}
