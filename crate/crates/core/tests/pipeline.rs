//! Symmetry check, currents, extremals and conservation on the worked models.

use gauge_noether::conservation::{conservation_suite, evaluate_current_along, HalvingCheck};
use gauge_noether::expr::{equivalent, parse, parse_in, Dims, Expr, IdentityConfig, Scope, Symbol, Verdict};
use gauge_noether::extremal::{check_adjoint, check_dhdt, check_extremality, integrate_extremal, ControlLaw, ExtremalityTolerances};
use gauge_noether::models;
use gauge_noether::noether::{generate_currents, NoetherCurrent};
use gauge_noether::problem::OcpProblem;
use gauge_noether::symmetry::{check_invariance, check_linearized, check_semi_invariance, GaugeSymmetry, SymmetryParts};
use proptest::prelude::*;

fn law(text: &str) -> ControlLaw {
    ControlLaw::Feedback { u: vec![parse_in(text, Dims::plain(1, 1), Scope::CONTROL_LAW).unwrap()] }
}

fn sym_expr(text: &str) -> Expr {
    parse(text, Dims::new(1, 1, 1, 2)).unwrap()
}

#[test]
fn time_optimal_symmetry_is_verified() {
    let problem = models::time_optimal_problem();
    let sym = models::time_optimal_symmetry(&problem);
    let report = check_invariance(&sym, &problem, &IdentityConfig::default()).unwrap();
    assert!(report.overall);
    for eq in &report.full_check.equations {
        match eq.verdict.as_ref().unwrap() {
            Verdict::IdenticallyZero { trials, max_abs, .. } => assert!(*trials == 200 && *max_abs <= 1e-9),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn mutated_state_map_is_rejected_with_a_witness() {
    let problem = models::time_optimal_problem();
    let base = models::time_optimal_symmetry(&problem);
    let parts = SymmetryParts {
        k: 1,
        m: 2,
        time: base.time().clone(),
        state: vec![sym_expr("(dp1 + 1)*x1")],
        control: base.control().to_vec(),
        gauge: base.gauge().clone(),
        lambda: vec![],
    };
    let mutated = GaugeSymmetry::new(&problem, parts).unwrap();
    let full = check_semi_invariance(&mutated, &problem, &IdentityConfig::default()).unwrap();
    assert!(!full.passed);
    let witness = full.equations.iter().find_map(|e| match &e.verdict {
        Some(Verdict::NonZeroWitness { value, .. }) => Some(*value),
        _ => None,
    });
    assert!(witness.unwrap().abs() > 1e-3);
}

#[test]
fn linearized_conditions_hold_for_every_model() {
    let cases = [
        (models::time_optimal_problem(), models::time_optimal_symmetry as fn(&OcpProblem) -> GaugeSymmetry),
        (models::linear_cost_problem(), models::translation_symmetry),
        (models::growth_problem(), models::reparametrization_symmetry),
    ];
    for (problem, make) in cases {
        let sym = make(&problem);
        let lin = check_linearized(&sym, &problem, &IdentityConfig::default().scaled_tol(10.0)).unwrap();
        assert!(lin.passed, "{}", problem.name);
        assert_eq!(lin.entries.len(), sym.k() * (sym.m() + 1));
    }
}

#[test]
fn identity_group_is_a_symmetry_of_anything() {
    let problem = OcpProblem {
        lagrangian: parse("x1^2 + sin(u1)*t", Dims::plain(1, 1)).unwrap(),
        dynamics: vec![parse("exp(-x1) + u1^3", Dims::plain(1, 1)).unwrap()],
        ..models::time_optimal_problem()
    };
    let id = GaugeSymmetry::identity(&problem, 2, 2);
    assert!(check_invariance(&id, &problem, &IdentityConfig::default()).unwrap().overall);
    assert!(generate_currents(&id, &problem).unwrap().iter().all(|c| c.trivial));
}

#[test]
fn time_optimal_bundle_conserves_every_current() {
    let problem = models::time_optimal_problem();
    let currents = generate_currents(&models::time_optimal_symmetry(&problem), &problem).unwrap();
    let laws = [
        ControlLaw::constant(vec![0.5]),
        ControlLaw::PiecewiseConstant { breakpoints: vec![0.5], values: vec![vec![0.9], vec![-0.9]] },
        ControlLaw::PiecewiseConstant { breakpoints: vec![0.1, 0.7], values: vec![vec![-0.2], vec![0.6], vec![0.0]] },
        law("0.9*sin(7*t)"),
        law("-0.5*x1/(1 + x1^2)"),
    ];
    let trajs: Vec<_> = laws.iter().map(|l| integrate_extremal(&problem, l, &[0.3], -1.0, &[0.0], 1000).unwrap()).collect();
    let suite = conservation_suite(&currents, &trajs, None);
    assert!(suite.passed);
    for p in &suite.pairs {
        assert!(p.record.as_ref().unwrap().relative_drift < 1e-10);
    }
    for t in &trajs {
        let report = check_extremality(&problem, t, 10, 0);
        assert!(report.adjoint_residual_max < 1e-8 && report.maximality_violation_max == 0.0);
        assert!(report.passes(&ExtremalityTolerances::default()));
    }
}

#[test]
fn corrupted_current_drifts_on_growth_problem() {
    let problem = models::growth_problem();
    let traj = integrate_extremal(&problem, &ControlLaw::constant(vec![0.5]), &[0.2], -1.0, &[1.0], 1000).unwrap();
    let corrupted = NoetherCurrent::new(1, 1, parse("3*psi1*x1", problem.dims()).unwrap(), &IdentityConfig::default()).unwrap();
    let record = evaluate_current_along(&corrupted, &traj, 1e-8).unwrap();
    assert!(!record.conserved && record.drift > 1e-3);
}

/// `L ≡ 1`, `dx/dt = sin(x) + u` and its time reparametrization. Unlike the
/// linear growth model, RK4 errors in `x` and `ψ` do not cancel in the
/// current, so its drift shows the integrator's order.
fn nonlinear_growth() -> (OcpProblem, GaugeSymmetry) {
    let problem = OcpProblem { dynamics: vec![parse("sin(x1) + u1", Dims::plain(1, 1)).unwrap()], ..models::growth_problem() };
    let d = Dims::new(1, 1, 1, 1);
    let parts = SymmetryParts {
        k: 1,
        m: 1,
        time: parse("t + p1", d).unwrap(),
        state: vec![parse("x1", d).unwrap()],
        control: vec![parse("(sin(x1) + u1)/(1 + dp1) - sin(x1)", d).unwrap()],
        gauge: parse("p1", d).unwrap(),
        lambda: vec![],
    };
    let sym = GaugeSymmetry::new(&problem, parts).unwrap();
    (problem, sym)
}

#[test]
fn current_drift_is_fourth_order() {
    let (problem, sym) = nonlinear_growth();
    assert!(check_invariance(&sym, &problem, &IdentityConfig::default()).unwrap().overall);
    let currents = generate_currents(&sym, &problem).unwrap();
    let drift = |steps| {
        let traj = integrate_extremal(&problem, &ControlLaw::constant(vec![0.5]), &[0.2], -1.0, &[1.0], steps).unwrap();
        evaluate_current_along(&currents[0], &traj, 1e-8).unwrap().drift
    };
    let check = HalvingCheck::new(drift(20), drift(40), 1e-12);
    assert!(!check.at_floor);
    assert!(check.consistent_with(12.0, 20.0), "{check:?}");
}

#[test]
fn linear_growth_current_superconverges() {
    // R(h) R(−h) = 1 + O(h⁶) for the RK4 stability polynomial R
    let problem = models::growth_problem();
    let currents = generate_currents(&models::reparametrization_symmetry(&problem), &problem).unwrap();
    let drift = |steps| {
        let traj = integrate_extremal(&problem, &ControlLaw::constant(vec![0.5]), &[0.2], -1.0, &[1.0], steps).unwrap();
        evaluate_current_along(&currents[0], &traj, 1e-8).unwrap().drift
    };
    let ratio = drift(20) / drift(40);
    assert!((28.0..=36.0).contains(&ratio), "{ratio}");
}

#[test]
fn final_state_error_is_fourth_order() {
    let problem = models::linear_cost_problem();
    let error = |steps| {
        let traj = integrate_extremal(&problem, &law("x1"), &[1.0], -1.0, &[1.0], steps).unwrap();
        (traj.x[steps][0] - 1f64.exp()).abs()
    };
    let ratio = error(25) / error(50);
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn hamiltonian_rate_matches_time_partial() {
    let problem = models::time_optimal_problem();
    let traj = integrate_extremal(&problem, &law("0.8*cos(3*t)"), &[0.0], -1.0, &[0.0], 1000).unwrap();
    assert!(traj.h_values.iter().all(|h| (h - traj.h_values[0]).abs() < 1e-10));

    let timed = OcpProblem { lagrangian: Expr::var(Symbol::Time), ..models::time_optimal_problem() };
    let traj = integrate_extremal(&timed, &law("0.8*cos(3*t)"), &[0.0], -1.0, &[0.0], 1000).unwrap();
    assert!(check_dhdt(&timed, &traj) < 1e-5);
}

#[test]
fn adjoint_residual_shrinks_quadratically() {
    let problem = models::growth_problem();
    let residual = |steps| {
        let traj = integrate_extremal(&problem, &law("0.5*sin(4*t)"), &[0.2], -1.0, &[1.0], steps).unwrap();
        check_adjoint(&problem, &traj)
    };
    let ratio = residual(100) / residual(200);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn statistics_ignore_the_time_origin() {
    let shifted = OcpProblem { a: 3.0, b: 4.0, ..models::growth_problem() };
    let problem = models::growth_problem();
    let currents = generate_currents(&models::reparametrization_symmetry(&problem), &problem).unwrap();
    let run = |p: &OcpProblem| {
        let traj = integrate_extremal(p, &ControlLaw::constant(vec![-0.3]), &[1.0], -1.0, &[0.4], 50).unwrap();
        evaluate_current_along(&currents[0], &traj, 1e-8).unwrap()
    };
    let (a, b) = (run(&problem), run(&shifted));
    assert_eq!(a.values, b.values);
    assert_eq!(a.drift, b.drift);
}

#[test]
fn current_matches_closed_forms() {
    let problem = models::time_optimal_problem();
    let currents = generate_currents(&models::time_optimal_symmetry(&problem), &problem).unwrap();
    let cfg = IdentityConfig::new(100, 1e-9, 3);
    let h = problem.hamiltonian().expr;
    assert!(equivalent(&currents[0].expr, &Expr::sub(Expr::var(Symbol::Costate0), h), &cfg).unwrap());
    assert!(equivalent(&currents[1].expr, &parse("2*psi1*x1", problem.dims()).unwrap(), &cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trivial_currents_stay_at_the_rounding_floor(
        x0 in -2.0f64..2.0,
        psi in -2.0f64..2.0,
        u in -0.99f64..0.99,
        steps in 10usize..300,
    ) {
        let problem = models::growth_problem();
        let currents = generate_currents(&models::reparametrization_symmetry(&problem), &problem).unwrap();
        let traj = integrate_extremal(&problem, &ControlLaw::constant(vec![u]), &[x0], -1.0, &[psi], steps).unwrap();
        for c in currents.iter().filter(|c| c.trivial) {
            prop_assert!(evaluate_current_along(c, &traj, 1e-8).unwrap().drift < 1e-13);
        }
    }

    #[test]
    fn linear_cost_current_equals_psi0_plus_seed(psi in prop::sample::select(vec![-1.0, 0.0, 2.0]), c in -3.0f64..3.0) {
        let problem = models::linear_cost_problem();
        let currents = generate_currents(&models::translation_symmetry(&problem), &problem).unwrap();
        let traj = integrate_extremal(&problem, &law(&format!("{c} + sin(t)*x1")), &[0.5], -1.0, &[psi], 200).unwrap();
        let r = evaluate_current_along(&currents[0], &traj, 1e-8).unwrap();
        prop_assert!(r.drift < 1e-10);
        prop_assert!((r.mean - (psi - 1.0)).abs() < 1e-12);
    }
}
