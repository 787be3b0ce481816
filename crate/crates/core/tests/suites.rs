use maxbv::verify::{claim, replay, run_suite, SUITES};

#[test]
fn suites_are_byte_identical_across_runs() {
    for name in ["remark-log", "weak-type", "counterexample", "charact", "orlicz"] {
        let a = serde_json::to_string(&run_suite(name, 7).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(name, 7).unwrap()).unwrap();
        assert_eq!(a, b, "{name}");
        assert!(!a.contains("wall_time"));
    }
}

#[test]
fn seeds_change_the_random_instances() {
    let a = run_suite("orlicz", 1).unwrap();
    let b = run_suite("orlicz", 2).unwrap();
    assert_eq!(a.reports.len(), b.reports.len());
    assert_ne!(a.reports[1].measured, b.reports[1].measured);
}

#[test]
fn every_report_names_a_registered_claim() {
    assert!(SUITES.contains(&"all"));
    for name in ["remark-log", "counterexample", "charact", "orlicz", "weak-type"] {
        for rep in run_suite(name, 11).unwrap().reports {
            assert!(claim(&rep.claim_id).is_some(), "{}", rep.claim_id);
            assert!(!rep.provenance.is_empty());
        }
    }
}

#[test]
fn suite_json_reads_back_and_replays() {
    let res = run_suite("weak-type", 5).unwrap();
    let text = serde_json::to_string(&res).unwrap();
    let back: maxbv::verify::SuiteResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back.reports, res.reports);
    // force an instance onto a passing report and replay it
    let mut rep = back.reports[3].clone();
    assert!(rep.instance.is_none());
    let f = maxbv::step::StepFn::indicator(
        maxbv::step::Interval::int(-8, 8),
        maxbv::rat::Rat::zero(),
        maxbv::rat::Rat::one(),
    )
    .unwrap();
    rep.instance = Some(serde_json::json!({ "f": f, "params": { "thresholds": ["1", "2"] } }));
    let again = replay(&rep).unwrap();
    assert!(again.passed);
    assert!((again.measured["Mf_star@1"] - 1.0).abs() < 1e-12);
}
