use twistdex::{examples, report, run_all, Overrides};

#[test]
fn every_corpus_scenario_passes() {
    let reports = run_all(&examples::corpus(), Overrides::default());
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures())
        .map(|f| format!("{} {} {}: {:e} (scale {:e})", f.scenario, f.check, f.subject, f.residual, f.scale))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(report::passed(&reports));
}

#[test]
fn half_integer_index_only_without_a_ribbon_root() {
    let reports = run_all(&[examples::linear_swap(), examples::linear_ribbon()], Overrides::default());
    let swap_e = reports[0].records_for("index").find(|r| r.subject == "e").unwrap();
    assert_eq!(swap_e.values["index"], 0.5);
    assert!(reports[0].records_for("ribbon").all(|r| r.status == twistdex::Status::Skipped));
    for r in reports[1].records_for("index") {
        let i = r.values["index"].as_f64().unwrap();
        assert_eq!(i, i.round(), "{}", r.subject);
    }
}
