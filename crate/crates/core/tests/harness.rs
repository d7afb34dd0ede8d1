use deep_mpc::harness::{load_log_json, log_to_csv, parse_csv, run_scenario, save_log_json, Scenario, ScenarioConfig, UncertaintyKind, Variant};

fn short(steps: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::wing_rock();
    cfg.simulation.steps = steps;
    cfg
}

#[test]
fn nominal_tube_at_origin_stays_at_rest() {
    let mut cfg = short(100);
    cfg.uncertainty.kind = UncertaintyKind::None;
    cfg.simulation.variant = Variant::Tube;
    cfg.simulation.x0 = vec![0.0, 0.0];
    let log = run_scenario(&cfg).unwrap();
    assert_eq!(log.summary.cumulative_cost, 0.0);
    assert!(log.trace.records.iter().all(|r| r.x.amax() == 0.0 && r.u_m.amax() < 1e-12));
}

#[test]
fn identical_seeds_give_identical_logs() {
    let cfg = short(120);
    assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
    let mut other = cfg.clone();
    other.simulation.seed = 1;
    assert_ne!(run_scenario(&cfg).unwrap().trace, run_scenario(&other).unwrap().trace);
}

#[test]
fn csv_has_one_row_per_step_and_round_trips() {
    let log = run_scenario(&short(300)).unwrap();
    let text = log_to_csv(&log);
    assert_eq!(text.lines().count(), 301);
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 300);
    for (row, rec) in rows.iter().zip(&log.trace.records) {
        assert_eq!(row.t, rec.t);
        assert_eq!(row.x, rec.x.as_slice());
        assert_eq!(row.u_a, rec.u_a.as_slice());
        assert_eq!(row.v_m, rec.v_m);
    }
}

#[test]
fn empty_run_exports_header_only() {
    let scenario = Scenario::prepare(&short(0)).unwrap();
    let log = scenario.run_steps(0).unwrap();
    let text = log_to_csv(&log);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("t,"));
    assert!(parse_csv(&text).unwrap().is_empty());
}

#[test]
fn switch_events_follow_the_gain_schedule() {
    let log = run_scenario(&short(300)).unwrap();
    assert_eq!(log.events_of("switch"), vec![50, 100, 150, 200, 250]);
}

#[test]
fn json_log_round_trips() {
    let log = run_scenario(&short(60)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/log.json");
    save_log_json(&log, &path).unwrap();
    assert_eq!(load_log_json(&path).unwrap(), log);
}
