use approx::assert_relative_eq;
use idepca_core::audit::{check_instance, CheckOptions, Status};
use idepca_core::battery::{instance, without_impulses, DEFAULT_SEED};
use idepca_core::reduction::{compute_an, compute_bn};
use idepca_core::trajectory::reconstruct_from;
use idepca_core::{
    analyze, build_discrete_system, build_discrete_system_with, parse, reconstruct_with, solve, CriterionId, Direction,
    Exec, ImpulseSpec, OverallVerdict, ProblemSpec, SignVerdict,
};
use proptest::prelude::*;

const E: f64 = std::f64::consts::E;
const TOL: f64 = 1e-10;

fn spec(a: &str, b: &str, dir: Direction, k: usize, impulse: ImpulseSpec, n0: i64, horizon: i64) -> ProblemSpec {
    let mut s = ProblemSpec::new(
        parse(a, "t").unwrap(),
        parse(b, "t").unwrap(),
        dir,
        k,
        impulse,
        vec![1.0; k + 1],
        n0,
        horizon,
    );
    s.t_start = n0 as f64;
    s
}

fn example1(horizon: i64) -> ProblemSpec {
    spec(
        "-1",
        "-1/3",
        Direction::Delayed,
        3,
        ImpulseSpec::ConstantFactor(0.5),
        0,
        horizon,
    )
}

#[test]
fn example1_end_to_end() {
    let s = example1(60);
    let ds = build_discrete_system(&s, TOL).unwrap();
    assert_relative_eq!(ds.alpha(1).unwrap(), 2.0 * E, max_relative = 1e-12);
    let q_star = 8.0 / 3.0 * E.powi(3) * (E - 1.0);
    for (n, q) in ds.q_iter() {
        assert_relative_eq!(-q, q_star, max_relative = 1e-9);
        assert_relative_eq!(ds.q_star(n).unwrap(), q_star, max_relative = 1e-9);
    }

    let sol = solve(&ds, &s.initial_window).unwrap();
    // z_1 = a_0 + b_0 with the all-ones window
    assert_relative_eq!(sol.z(1).unwrap(), 0.07858629411429488, max_relative = 1e-10);

    let analysis = analyze(&ds, 0.5);
    assert_eq!(analysis.overall, OverallVerdict::Oscillatory);
    assert!(analysis.report(CriterionId::ErbeZhang).unwrap().fires());

    let check = check_instance(&s, CheckOptions::default()).unwrap();
    assert!(check.passed(), "{:?}", check.failures().collect::<Vec<_>>());
    assert_eq!(check.discrete.as_ref().unwrap().verdict, SignVerdict::Oscillatory);
}

#[test]
fn example2_coefficients_and_q() {
    let s = spec(
        "1/t",
        "1/t",
        Direction::Advanced,
        5,
        ImpulseSpec::ConstantFactor(0.5),
        1,
        60,
    );
    let ds = build_discrete_system(&s, TOL).unwrap();
    for n in 1..60 {
        let nf = n as f64;
        assert_relative_eq!(ds.a(n).unwrap(), (nf + 1.0) / (2.0 * nf), max_relative = 1e-10);
        assert_relative_eq!(ds.b(n).unwrap(), 1.0 / (2.0 * nf), max_relative = 1e-10);
    }
    for (n, q) in ds.q_iter() {
        let nf = n as f64;
        assert_relative_eq!(q, (nf + 5.0) / (32.0 * nf * (nf + 1.0)), max_relative = 1e-9);
    }
    assert_eq!(analyze(&ds, 0.5).overall, OverallVerdict::Nonoscillatory);
}

#[test]
fn pure_ode_solution() {
    let s = spec("1", "0", Direction::Delayed, 1, ImpulseSpec::None, 0, 4);
    let ds = build_discrete_system(&s, TOL).unwrap();
    let sol = solve(&ds, &s.initial_window).unwrap();
    let traj = reconstruct_from(&s, &ds, &sol, 2, TOL).unwrap();
    let half = traj.samples.iter().find(|(t, _)| *t == 0.5).unwrap().1;
    assert_relative_eq!(half, 1.6487212707001282, max_relative = 1e-9);
    let check = check_instance(&s, CheckOptions::default()).unwrap();
    assert_eq!(check.row("pure_ode").unwrap().status, Status::Pass);
}

#[test]
fn execution_modes_agree_bitwise() {
    for index in [0, 3, 8] {
        let s = instance(DEFAULT_SEED, index, 30);
        let seq = build_discrete_system_with(&s, TOL, Exec::Sequential).unwrap();
        let par = build_discrete_system_with(&s, TOL, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        let sol = solve(&seq, &s.initial_window).unwrap();
        let a = reconstruct_with(&s, &sol, 4, TOL, Exec::Sequential).unwrap();
        let b = reconstruct_with(&s, &sol, 4, TOL, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn constant_coefficients_have_closed_forms(
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
        r in 0.25f64..2.0,
        n in 0i64..5,
    ) {
        let s = spec(&format!("{alpha}"), &format!("{beta}"), Direction::Delayed, 2, ImpulseSpec::ConstantFactor(r), 0, 6);
        let an = compute_an(&s, n, TOL).unwrap();
        let bn = compute_bn(&s, n, TOL).unwrap();
        let growth = if alpha.abs() < 1e-12 { 1.0 } else { alpha.exp_m1() / alpha };
        prop_assert!((an - r * alpha.exp()).abs() <= 1e-10 * an.abs().max(1.0));
        prop_assert!((bn - r * beta * growth).abs() <= 1e-10 * bn.abs().max(1.0));
    }

    #[test]
    fn solutions_are_linear_in_the_initial_window(index in 0usize..100, scale in -3.0f64..3.0) {
        let s = instance(DEFAULT_SEED, index, 25);
        let ds = build_discrete_system(&s, TOL).unwrap();
        let base = solve(&ds, &s.initial_window).unwrap();
        let scaled_window: Vec<f64> = s.initial_window.iter().map(|v| v * scale).collect();
        let scaled = solve(&ds, &scaled_window).unwrap();
        for n in s.n0..=base.n_hi().min(scaled.n_hi()) {
            let (z, zs) = (base.z(n).unwrap(), scaled.z(n).unwrap());
            prop_assert!((zs - scale * z).abs() <= 1e-9 * (scale * z).abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn battery_invariants_hold(index in 0usize..100) {
        let s = instance(DEFAULT_SEED, index, 30);
        let opts = CheckOptions { samples_per_interval: 4, ..CheckOptions::default() };
        let check = check_instance(&s, opts).unwrap();
        for row in ["dual_route_q", "alpha_telescoping", "recursion_residual", "reduced_residual", "node_consistency"] {
            prop_assert_eq!(check.row(row).unwrap().status, Status::Pass, "{}", row);
        }
        let depca = check_instance(&without_impulses(&s), opts).unwrap();
        prop_assert_eq!(depca.row("depca_continuity").unwrap().status, Status::Pass);
    }
}
