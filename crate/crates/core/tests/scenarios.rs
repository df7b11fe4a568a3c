use restart_ar_core::scenarios::{predicted_law, CATALOG};
use restart_ar_core::{
    run_scenario, scenario_by_name, validate_family, Prediction, Scenario, SimulationReport,
};

fn small(name: &str) -> Scenario {
    let mut s = scenario_by_name(name).unwrap();
    s.m_grid = vec![100];
    s.samples = 4000;
    s.tau_replicas = s.tau_replicas.min(200);
    s
}

#[test]
fn catalog_entries_are_well_formed() {
    for name in CATALOG {
        let s = scenario_by_name(name).unwrap();
        assert!(s.structural_errors().is_empty(), "{name}");
        assert!(validate_family(&s.family, s.m_grid[0]).passed(), "{name}");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&json).unwrap(), s);
    }
    assert!(scenario_by_name("example-9").is_err());
}

#[test]
fn predicted_laws_follow_the_predictions() {
    let half = predicted_law(&scenario_by_name("example-1.2").unwrap()).unwrap();
    assert!((half.feasibility_ratio() - 1.0).abs() < 1e-12);
    let zero = predicted_law(&scenario_by_name("example-2").unwrap()).unwrap();
    assert_eq!(zero.p(), 0.0);
    assert_eq!(
        scenario_by_name("example-2").unwrap().prediction,
        Prediction::DegenerateZero
    );
}

#[test]
fn reports_round_trip_and_repeat() {
    let s = small("example-1.1");
    let a = run_scenario(&s, 5).unwrap();
    let b = run_scenario(&s, 5).unwrap();
    assert_eq!(a, b);
    let text = serde_json::to_string_pretty(&a).unwrap();
    let back: SimulationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, a);
    assert_ne!(run_scenario(&s, 6).unwrap().estimates, a.estimates);
}

#[test]
fn small_runs_produce_every_verdict() {
    let report = run_scenario(&small("example-1.2"), 1).unwrap();
    assert!(report
        .verdicts
        .iter()
        .any(|v| v.name.starts_with("ks-to-limit")));
    assert!(report
        .verdicts
        .iter()
        .any(|v| v.name.starts_with("min-at-least-minus-gamma")));
    let e = &report.estimates[0];
    assert!(e.min_visited >= -e.gamma - 1e-12);
    let plain = run_scenario(&small("no-restart"), 1).unwrap();
    assert!(plain.estimates[0].tau.is_none());
}
