use neumann_layers_validation as common;

use neumann_layers::basis::GreenBasis;
use neumann_layers::limit::{
    amplitudes, assemble_limit_profile, junction_residual, layer_points, limit_1layer, m_infty, m_infty_quotient,
    phi_criticality_residual, reflection_point, solve_limit_config, uniform_grid, LimitOptions,
};
use neumann_layers::ode::IntegratorParams;
use proptest::prelude::*;

fn basis(n: u32) -> GreenBasis {
    GreenBasis::build(n, &IntegratorParams::default()).unwrap()
}

#[test]
fn ball_reflection_point_n3() {
    let b = basis(3);
    let alpha = reflection_point(&b.annulus(0.0, 1.0).unwrap()).unwrap();
    let exact = common::reflection_point_n3();
    assert!((alpha - exact).abs() < 1e-9, "{alpha} vs {exact}");
    assert!((alpha - 0.7968).abs() < 1e-4);
}

#[test]
fn reflection_point_is_critical_for_phi() {
    for n in [3, 4, 5] {
        let ab = basis(n).annulus(0.0, 1.0).unwrap();
        let alpha = reflection_point(&ab).unwrap();
        let (phi, dphi) = ab.phi(alpha).unwrap();
        assert!(dphi.abs() < 1e-9 * phi.max(1.0), "N = {n}: φ' = {dphi}");
        // The reflection point maximizes φ on the interval.
        for t in [0.3, 0.6, 0.9] {
            assert!(ab.phi(t * alpha).unwrap().0 < phi);
        }
        assert!(ab.phi(0.5 * (alpha + 1.0)).unwrap().0 < phi);
    }
}

#[test]
fn small_ball_law() {
    for n in [3, 4, 5] {
        let b = basis(n);
        let target = 0.5f64.powf(1.0 / n as f64);
        let mut prev = f64::INFINITY;
        for bb in [0.2, 0.1, 0.05, 0.02, 0.01] {
            let alpha = reflection_point(&b.annulus(0.0, bb).unwrap()).unwrap();
            let err = (alpha / bb - target).abs();
            assert!(err < prev, "N = {n}, b = {bb}: {err} >= {prev}");
            prev = err;
        }
        assert!(prev < 2e-2, "N = {n}: {prev}");
    }
}

#[test]
fn one_layer_profile_peaks_at_one() {
    let ab = basis(3).annulus(0.0, 1.0).unwrap();
    let grid = uniform_grid(0.0, 1.0, 401);
    let (alpha, pts) = limit_1layer(&ab, &grid).unwrap();
    let top = pts.iter().map(|p| p.u).fold(0.0, f64::max);
    assert!(top <= 1.0 + 1e-14);
    let at = neumann_layers::limit::one_layer_value(&ab, alpha, alpha);
    assert!((at.0 - 1.0).abs() < 1e-14);
    for w in pts.windows(2) {
        if w[1].r <= alpha {
            assert!(w[1].u > w[0].u);
        } else if w[0].r >= alpha {
            assert!(w[1].u < w[0].u);
        }
    }
    // Reflection law: one-sided slopes at α are opposite.
    let h = 1e-7;
    let left = neumann_layers::limit::one_layer_value(&ab, alpha, alpha - h).1;
    let right = neumann_layers::limit::one_layer_value(&ab, alpha, alpha + h).1;
    assert!((left + right).abs() < 1e-5);
}

#[test]
fn mismatch_forms_agree() {
    for n in [3, 4] {
        let b = basis(n);
        for beta in [vec![0.5], vec![0.3, 0.7], vec![0.55, 0.7, 0.9]] {
            let a = m_infty(&b, &beta).unwrap();
            let q = m_infty_quotient(&b, &beta).unwrap();
            for (x, y) in a.iter().zip(&q) {
                assert!((x - y).abs() < 1e-10 * x.abs().max(1.0), "{beta:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn layer_configurations_n3_n4() {
    let opts = LimitOptions::default();
    for n in [3, 4] {
        let b = basis(n);
        for k in 1..=4 {
            let cfg = solve_limit_config(&b, k, &opts).unwrap();
            assert_eq!(cfg.beta.len(), k + 1);
            assert!(cfg.beta.windows(2).all(|w| w[0] < w[1]));
            let interior = cfg.interior_junctions();
            if k > 1 {
                let m = m_infty(&b, interior).unwrap();
                assert!(m.iter().all(|x| x.abs() < 1e-8), "N={n} k={k}: {m:?}");
                let jr = junction_residual(&b, interior, &cfg.alpha);
                assert!(jr.iter().all(|x| x.abs() < 1e-8), "N={n} k={k}: {jr:?}");
                assert_eq!(layer_points(&b, interior).unwrap(), cfg.alpha);
            }
            let amp = amplitudes(&b, &cfg.alpha).unwrap();
            assert!(amp.residual < 1e-12, "N={n} k={k}: {}", amp.residual);
            assert!(amp.values.iter().all(|a| *a > 0.0));
            let crit = phi_criticality_residual(&b, &cfg.alpha);
            assert!(crit.iter().all(|x| x.abs() < 1e-8), "N={n} k={k}: {crit:?}");
            let prof = assemble_limit_profile(&b, &cfg, &uniform_grid(0.0, 1.0, 801)).unwrap();
            assert!(
                prof.representation_gap < 1e-7,
                "N={n} k={k}: {}",
                prof.representation_gap
            );
            // Exactly k maxima, each of height one.
            for &a in &cfg.alpha {
                let i = prof.points.iter().position(|p| p.r >= a).unwrap();
                assert!(prof.points[i].u <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn layers_crowd_towards_the_boundary() {
    // Successive layers on the ball shrink in width towards r = 1.
    let b = basis(3);
    let cfg = solve_limit_config(&b, 4, &LimitOptions::default()).unwrap();
    let widths: Vec<f64> = cfg.beta.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
}

#[test]
fn rejects_bad_junctions() {
    let b = basis(3);
    assert!(m_infty(&b, &[0.7, 0.3]).is_err());
    assert!(m_infty(&b, &[1.2]).is_err());
    assert!(m_infty(&b, &[0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflection_point_lies_inside(n in 3u32..7, lo in 0.0f64..0.8, len in 0.01f64..0.5) {
        let b = basis(n);
        let hi = (lo + len).min(1.0);
        let ab = b.annulus(lo, hi).unwrap();
        let alpha = reflection_point(&ab).unwrap();
        prop_assert!(alpha > lo && alpha < hi);
        prop_assert!(ab.reflection_law(alpha).abs() < 1e-6 * (1.0 / (hi - lo)));
    }
}
