use std::path::{Path, PathBuf};

use cdts_core::cdts::CdtsState;
use cdts_sim::log::Records;
use cdts_sim::run::{circle_distance, collinearity};
use cdts_sim::scenario::TaskConfig;
use cdts_sim::{compare_stacked_vs_cooperative, run_scenario, RunOptions, Scenario, Setup, SimError};

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled(name: &str) -> Setup {
    Setup::load(&dir().join(format!("{name}.json"))).unwrap()
}

const ALL: [&str; 6] = ["reach_point_left", "reach_point_right", "reach_circle", "reach_plane", "align_axis", "balance_plate"];

fn text(name: &str) -> String {
    std::fs::read_to_string(dir().join(format!("{name}.json"))).unwrap()
}

fn edited(name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> Result<Setup, SimError> {
    let mut v: serde_json::Value = serde_json::from_str(&text(name)).unwrap();
    edit(&mut v);
    Setup::from_text(&v.to_string(), &dir())
}

fn final_q(log: &cdts_sim::RunLog) -> Vec<f64> {
    match &log.records {
        Records::Ik(r) => r.last().unwrap().q.clone(),
        Records::Mpc(r) => r.last().unwrap().q.clone(),
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn every_bundled_scenario_meets_its_thresholds() {
    for name in ALL {
        let setup = bundled(name);
        let log = run_scenario(&setup, &RunOptions::default()).unwrap();
        assert!(log.passed(), "{name}: {} {:#?}", log.status, log.checks);
        assert!(!log.checks.is_empty());
    }
    let report = compare_stacked_vs_cooperative(&bundled("reach_plane"), &RunOptions::default()).unwrap();
    assert!(report.passed(), "{:#?}", report.checks);
    assert!(report.difference > 1e-3);
}

#[test]
fn reach_point_layout() {
    for (name, near) in [("reach_point_left", 0), ("reach_point_right", 1)] {
        let setup = bundled(name);
        let TaskConfig::ReachPoint { target } = setup.scenario.task else { panic!() };
        let q0 = setup.initial_configuration(0);
        let (a, b) = CdtsState::from_stacked(&setup.system, &q0).unwrap().positions();
        let d = [dist(target, a), dist(target, b)];
        assert!((d[near] - 0.3).abs() < 1e-9, "{d:?}");
        assert!(d[1 - near] > 0.8);

        let log = run_scenario(&setup, &RunOptions::default()).unwrap();
        let (e1, e2) = CdtsState::from_stacked(&setup.system, &final_q(&log)).unwrap().positions();
        let moved = [dist(a, e1), dist(b, e2)];
        assert!(moved[near] > moved[1 - near], "{moved:?}");
        assert!(dist(e1, target).min(dist(e2, target)) < 1e-8);
    }
}

#[test]
fn circle_points_lie_on_the_circle() {
    let setup = bundled("reach_circle");
    let TaskConfig::ReachCircle { points, .. } = setup.scenario.task else { panic!() };
    let log = run_scenario(&setup, &RunOptions::default()).unwrap();
    let (e1, e2) = CdtsState::from_stacked(&setup.system, &final_q(&log)).unwrap().positions();
    assert!(circle_distance(&points, &[e1, e2]) <= 1e-4);
    // oracle sanity: points of the circle itself
    assert!(circle_distance(&points, &points) < 1e-12);
    assert!(circle_distance(&points, &[[0.0, 0.0, 0.4]]) > 0.2);
}

#[test]
fn collinearity_oracle() {
    let x = ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
    assert_eq!(collinearity(x, ([3.0, 1.0, 0.0], [-1.0, 0.0, 0.0])), (0.0, 0.0));
    let (d, m) = collinearity(x, ([0.0, 1.5, 0.0], [1.0, 0.0, 0.0]));
    assert!(d == 0.0 && (m - 0.5).abs() < 1e-15);
    assert!(collinearity(x, ([0.0, 1.0, 0.0], [0.0, 1.0, 0.0])).0 > 0.9);
}

#[test]
fn compare_with_satisfied_target_returns_the_start() {
    let setup = bundled("reach_plane");
    let q0 = setup.initial_configuration(0);
    let (a, b) = CdtsState::from_stacked(&setup.system, &q0).unwrap().positions();
    // plane through both end-effectors and a third point
    let setup = edited("reach_plane", |v| {
        v["task"]["points"] = serde_json::json!([a, b, [a[0], a[1] + 1.0, a[2]]]);
    })
    .unwrap();
    let report = compare_stacked_vs_cooperative(&setup, &RunOptions::default()).unwrap();
    assert!(report.cooperative.solver_ok && report.stacked.solver_ok);
    assert!(report.difference < 1e-12, "{}", report.difference);
    for q in [&report.q_cooperative, &report.q_stacked] {
        assert!(q.iter().zip(&q0).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}

#[test]
fn unreachable_plane_fails_in_both_formulations() {
    let setup = edited("reach_plane", |v| {
        v["task"]["points"] = serde_json::json!([[0.0, 0.0, 5.0], [1.0, 0.0, 5.0], [0.0, 1.0, 5.0]]);
        v["gauss_newton"] = serde_json::json!({ "max_iter": 60 });
    })
    .unwrap();
    let report = compare_stacked_vs_cooperative(&setup, &RunOptions::default()).unwrap();
    assert!(!report.cooperative.passed() && !report.stacked.passed());
    assert!(!report.passed());
}

#[test]
fn compare_needs_a_plane_scenario() {
    let err = compare_stacked_vs_cooperative(&bundled("reach_circle"), &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn validation_rejects_malformed_scenarios() {
    let cases: Vec<(&str, Box<dyn FnOnce(&mut serde_json::Value)>)> = vec![
        ("reach_circle", Box::new(|v| v["task"]["points"] = serde_json::json!([[0, 0, 0], [1, 1, 1], [2, 2, 2]]))),
        ("reach_plane", Box::new(|v| v["task"]["points"] = serde_json::json!([[0, 0, 0], [0, 0, 0], [1, 0, 0]]))),
        ("align_axis", Box::new(|v| v["task"]["line1"]["direction"] = serde_json::json!([0, 0, 0]))),
        ("balance_plate", Box::new(|v| v["task"]["axis"]["direction"] = serde_json::json!([0.0, 0.0, 0.0]))),
        ("balance_plate", Box::new(|v| v["mpc"]["horizon"] = serde_json::json!(0))),
        ("balance_plate", Box::new(|v| v["mpc"]["dt"] = serde_json::json!(0.0))),
        ("balance_plate", Box::new(|v| v["mpc"]["dt"] = serde_json::json!(-0.01))),
        ("balance_plate", Box::new(|v| v["mpc"]["dt"] = serde_json::json!(0.0105))),
        ("balance_plate", Box::new(|v| v["mpc"]["replan_every"] = serde_json::json!(0))),
        ("balance_plate", Box::new(|v| v["task"]["perturbations"][0]["joints"] = serde_json::json!([8]))),
        ("balance_plate", Box::new(|v| v["task"]["perturbations"][0]["arm"] = serde_json::json!(3))),
        ("balance_plate", Box::new(|v| v["task"]["perturbations"][0]["tick"] = serde_json::json!(99999))),
        ("reach_point_left", Box::new(|v| v["arms"][0]["initial"] = serde_json::json!([0.0, 0.0]))),
        ("reach_point_left", Box::new(|v| v["arms"][0]["initial"][3] = serde_json::json!(0.5))),
        ("reach_point_left", Box::new(|v| v["arms"][0]["robot"] = serde_json::json!("no_such_robot"))),
        ("reach_point_left", Box::new(|v| v["arms"][1]["base"] = v["arms"][0]["base"].clone())),
        ("reach_point_left", Box::new(|v| v["arms"][0]["base"]["quaternion"] = serde_json::json!([2.0, 0.0, 0.0, 0.0]))),
        ("reach_point_left", Box::new(|v| v["unknown_field"] = serde_json::json!(1))),
        ("reach_point_left", Box::new(|v| v["task"]["kind"] = serde_json::json!("juggle"))),
        ("reach_point_left", Box::new(|v| v["name"] = serde_json::json!("a/b"))),
        ("reach_point_left", Box::new(|v| v["initial_noise"] = serde_json::json!(-1.0))),
    ];
    for (i, (name, edit)) in cases.into_iter().enumerate() {
        match edited(name, edit) {
            Err(e @ SimError::Validation(_)) => assert_eq!(e.exit_code(), 1),
            Err(SimError::Io { .. }) => assert_eq!(i, 14, "only the missing robot file is an I/O error"),
            other => panic!("case {i} ({name}) accepted: {other:?}"),
        }
    }
}

#[test]
fn hash_is_stable_under_formatting_and_defaults() {
    for name in ALL {
        let setup = bundled(name);
        // compact, reordered through a Value roundtrip, and with every default spelled out
        let reparsed = Setup::from_text(&serde_json::to_string(&setup.scenario).unwrap(), &dir()).unwrap();
        assert_eq!(setup.hash, reparsed.hash, "{name}");
        let compact: serde_json::Value = serde_json::from_str(&text(name)).unwrap();
        assert_eq!(Setup::from_text(&compact.to_string(), &dir()).unwrap().hash, setup.hash);
        assert_eq!(setup.hash.len(), 64);
    }
    let a = bundled("reach_circle");
    let b = edited("reach_circle", |v| v["task"]["points"][0][2] = serde_json::json!(0.41)).unwrap();
    assert_ne!(a.hash, b.hash);
    let c = edited("reach_circle", |v| v["task"]["objective_weight"] = serde_json::json!(1.0)).unwrap();
    assert_eq!(a.hash, c.hash);
}

#[test]
fn seeded_noise_changes_the_start_deterministically() {
    let setup = edited("reach_point_left", |v| v["initial_noise"] = serde_json::json!(0.05)).unwrap();
    let (a, b, c) = (setup.initial_configuration(1), setup.initial_configuration(1), setup.initial_configuration(2));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let base = bundled("reach_point_left").initial_configuration(1);
    assert!(a.iter().zip(&base).all(|(x, y)| (x - y).abs() <= 0.05));
    let l1 = run_scenario(&setup, &RunOptions { seed: Some(3), max_iter: None }).unwrap();
    let l2 = run_scenario(&setup, &RunOptions { seed: Some(3), max_iter: None }).unwrap();
    assert_eq!(l1, l2);
    assert_eq!(l1.seed, 3);
}

#[test]
fn iteration_budget_failure_keeps_the_log() {
    let log = run_scenario(&bundled("reach_point_left"), &RunOptions { seed: None, max_iter: Some(1) }).unwrap();
    assert!(!log.solver_ok && !log.passed());
    assert_eq!(log.status, "max_iterations");
    assert_eq!(log.records.len(), 2);
}

#[test]
fn balance_log_has_one_row_per_tick() {
    let setup = edited("balance_plate", |v| {
        v["mpc"]["steps"] = serde_json::json!(120);
        v["task"]["perturbations"][0]["tick"] = serde_json::json!(50);
    })
    .unwrap();
    let log = run_scenario(&setup, &RunOptions::default()).unwrap();
    let Records::Mpc(rows) = &log.records else { panic!() };
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().enumerate().all(|(i, r)| r.tick == i));
    assert!(rows[..50].iter().all(|r| r.res_align < 1e-12 && r.u.iter().all(|u| *u == 0.0)));
    assert!(rows[50].res_align > 1e-2);
    assert_eq!(rows[0].q.len(), 14);
}

#[test]
fn scenario_roundtrips_through_json() {
    for name in ALL {
        let s = bundled(name).scenario;
        let back = Scenario::parse(&serde_json::to_string_pretty(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }
}
