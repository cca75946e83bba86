use neumann_layers_validation as common;

use neumann_layers::basis::GreenBasis;
use neumann_layers::finite_p::{
    m_p, shoot_decreasing, shoot_increasing, solve_1layer, solve_klayer, KLayerSolution, MonotoneSolution,
};
use neumann_layers::limit::reflection_point;
use neumann_layers::ode::IntegratorParams;
use neumann_layers::Error;

fn params() -> IntegratorParams {
    IntegratorParams::default()
}

fn energy_cap(p: f64) -> f64 {
    ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0))
}

fn assert_increasing_invariants(sol: &MonotoneSolution) {
    let tag = format!("p = {}, [{}, {}]", sol.p, sol.a, sol.b);
    assert!(sol.c < 1.0 && sol.end_value() > 1.0, "{tag}");
    assert!(sol.is_strictly_monotone(), "{tag}");
    assert!(
        sol.umax <= energy_cap(sol.p),
        "{tag}: {} > {}",
        sol.umax,
        energy_cap(sol.p)
    );
    assert!(sol.max_abs_slope() < 1.0, "{tag}: {}", sol.max_abs_slope());
    assert!(sol.boundary_residual < 1e-8, "{tag}: {}", sol.boundary_residual);
    assert!(sol.eval(sol.a).du.abs() < 1e-8);
}

#[test]
fn increasing_solutions_stay_in_the_cone() {
    for p in [50.0, 100.0, 200.0] {
        for (a, b) in [(0.0, 1.0), (0.4, 1.0)] {
            let sol = shoot_increasing(3, p, a, b, &params()).unwrap();
            assert_increasing_invariants(&sol);
            assert_eq!(sol.roots_found, 1);
        }
    }
}

#[test]
fn decreasing_solutions_have_mirrored_sign_pattern() {
    for p in [50.0, 100.0, 200.0] {
        let sol = shoot_decreasing(3, p, 0.4, 1.0, &params()).unwrap();
        assert!(sol.c > 1.0 && sol.end_value() < 1.0, "p = {p}");
        assert!(sol.is_strictly_monotone());
        assert!(sol.boundary_residual < 1e-8);
        // E = u'²/2 + u^{p+1}/(p+1) - u²/2 satisfies E' = -(N-1)/r u'² < 0.
        let energy =
            |s: neumann_layers::ode::RadialState| 0.5 * s.du * s.du + s.u.powf(p + 1.0) / (p + 1.0) - 0.5 * s.u * s.u;
        let samples = sol.sample(400);
        assert!(
            samples.windows(2).all(|w| energy(w[1]) < energy(w[0]) + 1e-12),
            "p = {p}"
        );
    }
}

#[test]
fn drift_free_mode_is_mirror_symmetric() {
    let inc = shoot_increasing(1, 60.0, 0.0, 1.0, &params()).unwrap();
    let dec = shoot_decreasing(1, 60.0, 0.0, 1.0, &params()).unwrap();
    assert!((inc.c - dec.end_value()).abs() < 1e-8);
    for i in 0..=50 {
        let r = i as f64 / 50.0;
        assert!((inc.eval(r).u - dec.eval(1.0 - r).u).abs() < 1e-8, "r = {r}");
        assert!((inc.eval(r).du + dec.eval(1.0 - r).du).abs() < 1e-7, "r = {r}");
    }
}

#[test]
fn ball_p50_matches_collocation() {
    let sol = shoot_increasing(3, 50.0, 0.0, 1.0, &params()).unwrap();
    let seed = |r: f64| sol.eval(r).u;
    let oracle = common::collocation_richardson(3, 50.0, 0.0, 1.0, 2000, &seed);
    let err = oracle
        .iter()
        .map(|&(r, u)| (sol.eval(r).u - u).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "sup error {err:e}");
}

#[test]
fn rejects_exponent_below_eigenvalue() {
    match shoot_increasing(3, 10.0, 0.0, 1.0, &params()) {
        Err(Error::BelowEigenvalueThreshold { lambda2, .. }) => {
            assert!((lambda2 - common::lambda2_ball_n3()).abs() < 1e-6);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(shoot_increasing(2, 50.0, 0.0, 1.0, &params()).is_err());
    assert!(shoot_increasing(3, 1.0, 0.0, 1.0, &params()).is_err());
    assert!(shoot_increasing(3, 50.0, 0.6, 0.4, &params()).is_err());
}

fn assert_glued(sol: &KLayerSolution, k: usize) {
    assert_eq!(sol.count_interior_maxima(200), k);
    assert!(sol.junction_jump < 1e-7, "jump {}", sol.junction_jump);
    assert!(sol.peak_jump < 1e-7, "peak jump {}", sol.peak_jump);
    assert!(sol.junction_slope < 1e-8, "slope {}", sol.junction_slope);
}

#[test]
fn one_layer_at_p100() {
    let sol = solve_1layer(3, 100.0, 0.0, 1.0, &params()).unwrap();
    assert_glued(&sol, 1);
    assert!(sol.umax() <= energy_cap(100.0));
}

#[test]
fn one_layer_maximum_approaches_reflection_point() {
    let basis = GreenBasis::build(3, &params()).unwrap();
    let alpha_bar = reflection_point(&basis.annulus(0.0, 1.0).unwrap()).unwrap();
    let mut prev = f64::INFINITY;
    for p in [100.0, 200.0, 400.0] {
        let sol = solve_1layer(3, p, 0.0, 1.0, &params()).unwrap();
        let gap = (sol.alpha[0] - alpha_bar).abs();
        assert!(gap < prev, "p = {p}: {gap}");
        prev = gap;
    }
}

#[test]
fn two_layers_at_large_p_match_collocation() {
    let sol = solve_klayer(3, 1000.0, 2, &params()).unwrap();
    assert_glued(&sol, 2);
    let seed = |r: f64| sol.eval(r).u;
    let oracle = common::collocation_richardson(3, 1000.0, 0.0, 1.0, 4000, &seed);
    let err = oracle
        .iter()
        .map(|&(r, u)| (sol.eval(r).u - u).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "sup error {err:e}");
}

#[test]
fn m_p_vanishes_for_symmetric_drift_free_split() {
    let m = m_p(1, 200.0, &[0.5], &params()).unwrap();
    assert!(m[0].abs() < 1e-8, "{m:?}");
    let off = m_p(1, 200.0, &[0.45], &params()).unwrap();
    assert!(off[0].abs() > 1e-4);
    assert!(m_p(3, 200.0, &[0.6, 0.5], &params()).is_err());
}
