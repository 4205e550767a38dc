//! End-to-end checks of the verification pipelines through the public API.

use std::time::Instant;

use painleve_core::io::{params_from_json, params_to_json, read_trajectory_csv, variable_names, write_trajectory_csv};
use painleve_core::dynamics::{integrate, linspace, HamiltonianSystem, IntegratorOptions, SystemId};
use painleve_core::verify::{
    all_tasks, failure_count, misspecified_component_residual, run_tasks, scenario_degeneration,
    scenario_particular_solution, scenario_weyl, strip_timing, Tolerances, VerificationReport, ST_CANONICAL,
};
use painleve_core::ParameterSet;

fn worst(report: &VerificationReport, quantity: &str) -> f64 {
    report
        .measurements
        .iter()
        .find(|m| m.quantity.contains(quantity))
        .unwrap_or_else(|| panic!("no measurement '{quantity}' in {report:#?}"))
        .value
}

#[test]
fn particular_solution_rank_one_passes() {
    let r = scenario_particular_solution(1, 1, &Tolerances::default());
    assert!(r.pass, "{r:#?}");
    assert_eq!((r.n, r.r, r.seed), (Some(1), None, 1));
    assert!(worst(&r, "system residual") < 1e-8);
    assert!(worst(&r, "integrated vs series") < 1e-8);
}

#[test]
fn particular_solution_rank_four_within_budget() {
    let start = Instant::now();
    let r = scenario_particular_solution(4, 2, &Tolerances::default());
    assert!(r.pass, "{r:#?}");
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn misspecified_component_is_rejected() {
    let p = ParameterSet::sample_generic(2, 1).unwrap();
    assert!(misspecified_component_residual(&p, 0.3).unwrap() >= 1e-4);
}

#[test]
fn degeneration_includes_canonical_checks() {
    let tol = Tolerances::default();
    for (n, r, name) in [(1, 1, "fifth Painleve"), (2, 3, "rank-two system (r=3)")] {
        let rep = scenario_degeneration(n, r, 3, &tol);
        assert!(rep.pass, "{rep:#?}");
        assert!(rep.measurements.iter().any(|m| m.statement == ST_CANONICAL && m.quantity.contains(name)));
        let order = worst(&rep, "field error order");
        assert!((0.8..=1.2).contains(&order));
    }
    // no canonical form is tabulated for n = 3
    let rep = scenario_degeneration(3, 2, 3, &tol);
    assert!(rep.pass, "{rep:#?}");
    assert!(rep.measurements.iter().all(|m| m.statement != ST_CANONICAL));
}

#[test]
fn weyl_scenario_passes_for_each_rank() {
    for n in 1..=3 {
        let r = scenario_weyl(n, 11, &Tolerances::default());
        assert!(r.pass, "{r:#?}");
        assert!(worst(&r, "parameter sum") < 1e-14);
        assert!(worst(&r, "mapped trajectory") < 1e-6);
    }
}

#[test]
fn invalid_scenario_arguments_fail_cleanly() {
    let tol = Tolerances::default();
    let r = scenario_particular_solution(0, 1, &tol);
    assert!(!r.pass && r.error.is_some());
    let r = scenario_degeneration(1, 3, 1, &tol);
    assert!(!r.pass && r.error.is_some());
}

#[test]
fn full_run_is_deterministic() {
    let tol = Tolerances::default();
    let mut a = run_tasks(&all_tasks(), 9, &tol, 0).unwrap();
    let mut b = run_tasks(&all_tasks(), 9, &tol, 3).unwrap();
    assert_eq!(failure_count(&a), 0, "{:#?}", a.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    strip_timing(&mut a);
    strip_timing(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn parameter_file_and_trajectory_round_trip() {
    let p = ParameterSet::sample_generic(2, 8).unwrap();
    let q = params_from_json(&params_to_json(&p).unwrap()).unwrap();
    assert_eq!(p, q);
    let sys = HamiltonianSystem::new(SystemId::Symmetric, q).unwrap();
    let z0: Vec<_> = [0.4, 1.3, 0.8, 0.1, -0.05, 0.2].iter().map(|&v| v.into()).collect();
    let tr = integrate(|t, z| sys.field(t, z), 0.1, &z0, 0.3, &linspace(0.1, 0.3, 7), &IntegratorOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&tr, &variable_names(sys.representation(), sys.dof()), &mut buf).unwrap();
    let (_, times, states) = read_trajectory_csv(buf.as_slice()).unwrap();
    assert_eq!(times, tr.times);
    assert_eq!(states, tr.states);
}
