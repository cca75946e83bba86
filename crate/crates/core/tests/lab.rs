use neumann_layers_validation as common;

use neumann_layers::basis::GreenBasis;
use neumann_layers::finite_p::{shoot_increasing, solve_1layer};
use neumann_layers::lab::{
    blowup_profile, energy_level, lemma_u_p_ratio, limit_slope, linearized_spectrum, nondegeneracy_spectrum,
    pohozaev_klayer, pohozaev_limit, pohozaev_residual, run_validation, ValidationOptions, CHECK_NAMES,
};
use neumann_layers::limit::{solve_limit_config, LimitOptions};
use neumann_layers::ode::{neumann_lambda2, IntegratorParams};
use neumann_layers::Error;

fn params() -> IntegratorParams {
    IntegratorParams::default()
}

#[test]
fn limit_slope_n3_closed_form() {
    // On the ball ξ_{[0,1]} ∝ sinh r / r, so ξ'/ξ at 1 is coth 1 - 1.
    let basis = GreenBasis::build(3, &params()).unwrap();
    let s = limit_slope(&basis, 0.0, 1.0).unwrap();
    assert!((s - (1.0 / 1f64.tanh() - 1.0)).abs() < 1e-12);
}

#[test]
fn boundary_ratio_approaches_one() {
    let mut prev = f64::INFINITY;
    for p in [100.0, 200.0, 400.0] {
        let ratio = lemma_u_p_ratio(3, p, 0.0, 1.0, &params()).unwrap();
        let err = (ratio - 1.0).abs();
        assert!(err < prev, "p = {p}: {ratio}");
        prev = err;
    }
    assert!(prev < 2e-2);
}

#[test]
fn blowup_error_shrinks() {
    let mut prev = f64::INFINITY;
    for p in [50.0, 100.0, 200.0, 400.0] {
        let sol = shoot_increasing(3, p, 0.0, 1.0, &params()).unwrap();
        let prof = blowup_profile(&sol, 5.0, 201).unwrap();
        assert!(prof.sup_error < prev, "p = {p}: {}", prof.sup_error);
        assert!(prof.samples.last().unwrap().z_p.abs() < 1e-12);
        prev = prof.sup_error;
    }
    let sol = shoot_increasing(3, 50.0, 0.0, 1.0, &params()).unwrap();
    assert!(matches!(
        blowup_profile(&sol, 1e3, 10),
        Err(Error::WindowExceedsDomain { .. })
    ));
}

#[test]
fn pohozaev_and_nehari_hold_for_computed_solutions() {
    let basis = GreenBasis::build(3, &params()).unwrap();
    for p in [50.0, 100.0, 200.0, 400.0] {
        for a in [0.0, 0.4] {
            let sol = shoot_increasing(3, p, a, 1.0, &params()).unwrap();
            let ph = pohozaev_residual(&sol);
            assert!(ph.residual < 1e-7, "p = {p}, a = {a}: {ph:?}");
        }
        let sol = shoot_increasing(3, p, 0.0, 1.0, &params()).unwrap();
        let e = energy_level(&sol, &basis).unwrap();
        assert!(e.identity_gap < 1e-8, "p = {p}: {e:?}");
    }
    let glued = solve_1layer(3, 100.0, 0.0, 1.0, &params()).unwrap();
    let ph = pohozaev_klayer(&glued);
    assert!(ph.residual < 1e-7, "{ph:?}");
}

#[test]
fn pohozaev_holds_in_the_limit() {
    let basis = GreenBasis::build(3, &params()).unwrap();
    for k in 1..=3 {
        let cfg = solve_limit_config(&basis, k, &LimitOptions::default()).unwrap();
        let ph = pohozaev_limit(&basis, &cfg, 64).unwrap();
        assert!(ph.residual < 1e-8, "k = {k}: {ph:?}");
    }
}

#[test]
fn constant_state_spectrum_matches_lambda2() {
    for (n, a, b) in [(3, 0.0, 1.0), (4, 0.3, 1.0)] {
        let lambda2 = neumann_lambda2(n, a, b).unwrap();
        // Linearizing at u = 1 gives -Δ + 1 - p; pick p just below λ₂ so the
        // eigenvalue nearest zero is λ₂ - p.
        let p = lambda2 - 1.0;
        let s = linearized_spectrum(n, a, b, 4000, |_| 1.0 - p).unwrap();
        let got = s.nearest + p;
        assert!((got - lambda2).abs() < 1e-4 * lambda2, "N = {n}: {got} vs {lambda2}");
        assert_eq!(s.negative_count, 1);
    }
}

#[test]
fn solution_spectrum_is_refined_and_nonzero() {
    for a in [0.0, 0.4] {
        let sol = shoot_increasing(3, 100.0, a, 1.0, &params()).unwrap();
        let coarse = nondegeneracy_spectrum(&sol, 2000).unwrap();
        let fine = nondegeneracy_spectrum(&sol, 4000).unwrap();
        let var = (coarse.nearest - fine.nearest).abs();
        assert!(var < 0.1 * fine.min_abs_eig, "a = {a}");
        assert!(fine.min_abs_eig > 10.0 * var);
        // Independent dense eigensolve of a different discretization.
        let q = |r: f64| 1.0 - 100.0 * sol.eval(r).u.powf(99.0);
        let dense = common::richardson_eigenvalues(3, a, 1.0, 400, &q, 6);
        let nearest = dense
            .iter()
            .cloned()
            .min_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap();
        assert!(
            (nearest - fine.nearest).abs() < 1e-3 * fine.min_abs_eig,
            "a = {a}: {nearest} vs {}",
            fine.nearest
        );
    }
}

#[test]
fn validation_subset_runs() {
    let opts = ValidationOptions {
        sweep: vec![100.0, 200.0],
        checks: vec!["pohozaev".into(), "blowup".into()],
        ..ValidationOptions::default()
    };
    let report = run_validation(&opts).unwrap();
    assert_eq!(report.trend.len(), 2);
    assert!(report.passed(), "{}", report.to_table());
    assert!(report.to_table().contains("pohozaev"));

    let bad = ValidationOptions {
        checks: vec!["nonsense".into()],
        ..ValidationOptions::default()
    };
    assert!(run_validation(&bad).is_err());
    let unsorted = ValidationOptions {
        sweep: vec![200.0, 100.0],
        ..ValidationOptions::default()
    };
    assert!(run_validation(&unsorted).is_err());
    assert_eq!(CHECK_NAMES.len(), 6);
}
