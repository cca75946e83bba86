//! Acceptance suite. Runs every criterion, prints one `PASS`/`FAIL` line
//! each (with the measured numbers), and exits non-zero if any criterion
//! fails. Tolerances are fixed here and are not tuned to the results.

use neumann_layers_validation as common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use neumann_layers::basis::GreenBasis;
use neumann_layers::finite_p::{shoot_decreasing, shoot_increasing, solve_1layer, solve_klayer, KLayerSolution};
use neumann_layers::lab::{
    linearized_spectrum, nondegeneracy_spectrum, pohozaev_residual, run_validation, ValidationOptions,
};
use neumann_layers::limit::{
    amplitudes, assemble_limit_profile, junction_residual, m_infty, phi_criticality_residual, reflection_point,
    solve_limit_config, uniform_grid, LimitOptions,
};
use neumann_layers::ode::{neumann_lambda2, IntegratorParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Outcome of one criterion: overall verdict plus one note per sub-check.
struct Outcome {
    notes: Vec<(bool, String)>,
}

impl Outcome {
    fn new() -> Self {
        Self { notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, note: impl Into<String>) {
        self.notes.push((ok, note.into()));
    }

    fn within(&mut self, what: &str, value: f64, tol: f64) {
        self.check(value < tol, format!("{what} = {value:.3e} (< {tol:.0e})"));
    }

    fn runtime(&mut self, t: Duration, limit_s: f64) {
        let s = t.as_secs_f64();
        self.check(s < limit_s, format!("runtime {s:.2} s (< {limit_s} s)"));
    }

    fn passed(&self) -> bool {
        !self.notes.is_empty() && self.notes.iter().all(|(ok, _)| *ok)
    }
}

fn params() -> IntegratorParams {
    IntegratorParams::default()
}

fn halved() -> IntegratorParams {
    let p = params();
    IntegratorParams {
        rel_tol: 0.5 * p.rel_tol,
        abs_tol: 0.5 * p.abs_tol,
        ..p
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_seq(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn closed_form_basis() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    // Compare the integrated (tabulated) pair, not the built-in closed form.
    let tab = GreenBasis::build_tabulated(3, &params()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let r = 1e-4 * (1e4f64).powf(i as f64 / 2000.0);
        let v = tab.eval(r);
        let (s, e) = (r.sinh(), r.exp());
        let exact = [s / r, (r * r.cosh() - s) / (r * r), e / r, e * (r - 1.0) / (r * r)];
        let got = [v.xi, v.dxi, v.zeta, v.dzeta];
        for (g, x) in got.iter().zip(&exact) {
            worst = worst.max((g - x).abs() / x.abs().max(1.0));
        }
    }
    out.within("N=3 tabulated vs sinh r/r, e^r/r (relative)", worst, 1e-9);
    let mut rng = StdRng::seed_from_u64(1);
    let mut wr: f64 = 0.0;
    for n in 3..=6 {
        let b = GreenBasis::build(n, &params()).unwrap();
        for _ in 0..200 {
            let r = rng.random_range(1e-4..1.0);
            wr = wr.max((b.wronskian(r) - 1.0).abs());
        }
    }
    out.within("Wronskian deviation N=3..6", wr, 1e-9);
    out.runtime(t.elapsed(), 5.0);
    out
}

fn reflection() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let basis = GreenBasis::build(3, &params()).unwrap();
    let ab = basis.annulus(0.0, 1.0).unwrap();
    let alpha = reflection_point(&ab).unwrap();
    let exact = common::reflection_point_n3();
    out.within(
        &format!("|ᾱ - root of coth s + 1 - 2/s| (ᾱ = {alpha:.10})"),
        (alpha - exact).abs(),
        1e-9,
    );
    // On the N = 3 ball ξ_[0,1] = sinh r / r and ζ_[0,1] = e^r / r, so
    // φ(s) = 4π s² / (e^s sinh s), written out independently of the crate.
    let phi = |s: f64| 4.0 * std::f64::consts::PI * s * s / (s.exp() * s.sinh());
    let (_, dphi) = ab.phi(alpha).unwrap();
    let h = 1e-5;
    let fd = (phi(alpha + h) - phi(alpha - h)) / (2.0 * h);
    out.within("|φ'(ᾱ)|", dphi.abs(), 1e-9);
    out.within("|central difference of φ at ᾱ|", fd.abs(), 1e-9);
    out.runtime(t.elapsed(), 1.0);
    out
}

fn small_ball() -> Outcome {
    let mut out = Outcome::new();
    for n in [3, 4, 5] {
        let basis = GreenBasis::build(n, &params()).unwrap();
        let target = 0.5f64.powf(1.0 / n as f64);
        let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&b| (reflection_point(&basis.annulus(0.0, b).unwrap()).unwrap() / b - target).abs())
            .collect();
        out.check(strictly_decreasing(&errs), format!("N={n} monotone {}", fmt_seq(&errs)));
        out.within(&format!("N={n} error at b=0.01"), *errs.last().unwrap(), 2e-2);
    }
    out
}

fn limit_layers() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let (mut m, mut j, mut amp, mut crit, mut gap) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for n in [3, 4] {
        let basis = GreenBasis::build(n, &params()).unwrap();
        for k in 1..=4 {
            let cfg = solve_limit_config(&basis, k, &LimitOptions::default()).unwrap();
            let interior = cfg.interior_junctions();
            if k > 1 {
                m = m.max(
                    m_infty(&basis, interior)
                        .unwrap()
                        .iter()
                        .fold(0.0, |a, x| a.max(x.abs())),
                );
                j = j.max(
                    junction_residual(&basis, interior, &cfg.alpha)
                        .iter()
                        .fold(0.0, |a, x| a.max(x.abs())),
                );
            }
            amp = amp.max(amplitudes(&basis, &cfg.alpha).unwrap().residual);
            crit = crit.max(
                phi_criticality_residual(&basis, &cfg.alpha)
                    .iter()
                    .fold(0.0, |a, x| a.max(x.abs())),
            );
            let prof = assemble_limit_profile(&basis, &cfg, &uniform_grid(0.0, 1.0, 2001)).unwrap();
            gap = gap.max(prof.representation_gap);
        }
    }
    out.within("‖M∞‖∞", m, 1e-8);
    out.within("junction residual", j, 1e-8);
    out.within("amplitude residual", amp, 1e-12);
    out.within("φ-criticality", crit, 1e-8);
    out.within("profile representation gap", gap, 1e-7);
    out.runtime(t.elapsed(), 30.0);
    out
}

fn monotone_solutions() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    for p in [50.0, 100.0, 200.0] {
        for (a, b) in [(0.0, 1.0), (0.4, 1.0)] {
            let tag = format!("p={p} [{a},{b}]");
            match shoot_increasing(3, p, a, b, &params()) {
                Ok(sol) => {
                    let cap = ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
                    let pattern = sol.c < 1.0 && sol.end_value() > 1.0 && sol.is_strictly_monotone();
                    let ok = pattern
                        && sol.umax <= cap
                        && sol.max_abs_slope() < 1.0
                        && sol.boundary_residual < 1e-8
                        && sol.eval(a).du.abs() < 1e-8;
                    out.check(
                        ok,
                        format!(
                            "{tag}: u(a)={:.6} u(b)={:.6} cap={cap:.6} sup|u'|={:.4} |u'(b)|={:.1e}",
                            sol.c,
                            sol.end_value(),
                            sol.max_abs_slope(),
                            sol.boundary_residual
                        ),
                    );
                    if p == 50.0 && a == 0.0 {
                        let seed = |r: f64| sol.eval(r).u;
                        let oracle = common::collocation_richardson(3, p, a, b, 2000, &seed);
                        let err = oracle
                            .iter()
                            .map(|&(r, u)| (sol.eval(r).u - u).abs())
                            .fold(0.0, f64::max);
                        out.within("p=50 ball vs 4000-node collocation", err, 1e-6);
                    }
                }
                Err(e) => out.check(false, format!("{tag}: {e}")),
            }
        }
    }
    out.runtime(t.elapsed(), 60.0);
    out
}

fn glue_diagnostics(out: &mut Outcome, sol: &KLayerSolution, k: usize) {
    let maxima = sol.count_interior_maxima(400);
    out.check(maxima == k, format!("k={k}: {maxima} interior maxima"));
    out.within(
        &format!("k={k}: junction value jump"),
        sol.junction_jump.max(sol.peak_jump),
        1e-7,
    );
    out.within(&format!("k={k}: one-sided |u'| at junctions"), sol.junction_slope, 1e-8);
    let seed = |r: f64| sol.eval(r).u;
    let oracle = common::collocation_richardson(3, sol.p, 0.0, 1.0, 4000, &seed);
    let err = oracle
        .iter()
        .map(|&(r, u)| (sol.eval(r).u - u).abs())
        .fold(0.0, f64::max);
    out.within(&format!("k={k}: glued profile vs collocation"), err, 1e-6);
}

fn gluing() -> Outcome {
    let mut out = Outcome::new();
    match solve_1layer(3, 100.0, 0.0, 1.0, &params()) {
        Ok(sol) => glue_diagnostics(&mut out, &sol, 1),
        Err(e) => out.check(false, format!("k=1: {e}")),
    }
    match solve_klayer(3, 100.0, 2, &params()) {
        Ok(sol) => glue_diagnostics(&mut out, &sol, 2),
        Err(e) => out.check(false, format!("k=2: {e}")),
    }
    out
}

fn trends() -> Outcome {
    let mut out = Outcome::new();
    let opts = ValidationOptions {
        checks: vec!["ratio".into(), "energy".into(), "blowup".into(), "pohozaev".into()],
        ..ValidationOptions::default()
    };
    let report = match run_validation(&opts) {
        Ok(r) => r,
        Err(e) => {
            out.check(false, e.to_string());
            return out;
        }
    };
    let ratio: Vec<f64> = report.trend.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let energy: Vec<f64> = report
        .trend
        .iter()
        .map(|r| (r.energy.c_p - r.energy.reference).abs())
        .collect();
    let blowup: Vec<f64> = report
        .trend
        .iter()
        .map(|r| r.blowup_sup_error.unwrap_or(f64::NAN))
        .collect();
    out.check(
        strictly_decreasing(&ratio),
        format!("ratio error decreasing {}", fmt_seq(&ratio)),
    );
    out.check(
        strictly_decreasing(&energy),
        format!("|c_p - |∂B₁|u'∞(1)| decreasing {}", fmt_seq(&energy)),
    );
    out.check(
        strictly_decreasing(&blowup),
        format!("blow-up sup error decreasing {}", fmt_seq(&blowup)),
    );
    // Pohozaev residual recomputed here for each exponent.
    let mut worst: f64 = 0.0;
    for p in [50.0, 100.0, 200.0, 400.0] {
        let sol = shoot_increasing(3, p, 0.0, 1.0, &params()).unwrap();
        worst = worst.max(pohozaev_residual(&sol).residual);
    }
    out.within("max Pohozaev residual", worst, 1e-7);
    out
}

fn nondegeneracy() -> Outcome {
    let mut out = Outcome::new();
    let p = 100.0;
    let sols = [
        ("increasing ball", shoot_increasing(3, p, 0.0, 1.0, &params())),
        ("increasing [0.4,1]", shoot_increasing(3, p, 0.4, 1.0, &params())),
        ("decreasing [0.4,1]", shoot_decreasing(3, p, 0.4, 1.0, &params())),
    ];
    for (name, sol) in sols {
        let sol = match sol {
            Ok(s) => s,
            Err(e) => {
                out.check(false, format!("{name}: {e}"));
                continue;
            }
        };
        let coarse = nondegeneracy_spectrum(&sol, 2000).unwrap();
        let fine = nondegeneracy_spectrum(&sol, 4000).unwrap();
        let var = (coarse.nearest - fine.nearest).abs();
        let ok = var < 0.1 * fine.min_abs_eig && fine.min_abs_eig > 10.0 * var;
        out.check(
            ok,
            format!("{name}: min|λ| = {:.6}, variation {var:.2e}", fine.min_abs_eig),
        );
    }
    let lambda2 = neumann_lambda2(3, 0.0, 1.0).unwrap();
    let shift = lambda2 - 1.0;
    let s = linearized_spectrum(3, 0.0, 1.0, 4000, |_| 1.0 - shift).unwrap();
    out.within(
        "constant state vs λ₂ (relative)",
        ((s.nearest + shift) - lambda2).abs() / lambda2,
        1e-4,
    );
    out
}

/// Runs the command-line front end in-process, without stdout output.
fn run_cli(args: &[&str]) -> i32 {
    let argv = ["neumann-layers"].iter().chain(args).chain(&["--quiet"]);
    neumann_layers::cli::run(argv.copied())
}

fn determinism_and_tolerances() -> Outcome {
    let mut out = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let runs: [(&[&str], &[&str]); 4] = [
        (&["basis", "--N", "5"], &["basis_report.json", "basis_table.csv"]),
        (
            &["limit", "--N", "3", "--k", "3"],
            &["limit_config.json", "limit_profile.csv"],
        ),
        (
            &["solve", "--N", "3", "--p", "100", "--k", "1"],
            &["solution.json", "profile.csv"],
        ),
        (
            &["validate", "--p", "100,200"],
            &["validation_report.json", "validation_trend.csv"],
        ),
    ];
    for (args, files) in runs {
        let mut full = args.to_vec();
        full.extend(["--out", d]);
        let code1 = run_cli(&full);
        let first: Vec<Vec<u8>> = files
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap_or_default())
            .collect();
        let code2 = run_cli(&full);
        let second: Vec<Vec<u8>> = files
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap_or_default())
            .collect();
        let same = code1 == code2 && first == second && first.iter().all(|b| !b.is_empty());
        out.check(same, format!("{} byte-identical rerun (exit {code1})", args[0]));
    }

    let moves = |prm: &IntegratorParams| -> Vec<f64> {
        let basis = GreenBasis::build_tabulated(3, prm).unwrap();
        let mut v = vec![reflection_point(&basis.annulus(0.0, 1.0).unwrap()).unwrap()];
        let cfg = solve_limit_config(&basis, 3, &LimitOptions::default()).unwrap();
        v.extend(cfg.interior_junctions());
        v.extend(&cfg.alpha);
        v.push(solve_1layer(3, 100.0, 0.0, 1.0, prm).unwrap().alpha[0]);
        let k2 = solve_klayer(3, 1000.0, 2, prm).unwrap();
        v.extend(&k2.beta[1..2]);
        v.extend(&k2.alpha);
        v
    };
    let base = moves(&params());
    let half = moves(&halved());
    let shift = base.iter().zip(&half).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    out.within("largest root shift under halved tolerances", shift, 1e-7);
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form basis and Wronskian", closed_form_basis),
        ("reflection point of the N=3 ball", reflection),
        ("small-ball law for the reflection point", small_ball),
        ("limit k-layer configurations", limit_layers),
        ("finite-p monotone solutions", monotone_solutions),
        ("1-layer and 2-layer gluing at p=100", gluing),
        ("asymptotic trends over p", trends),
        ("nondegeneracy of the linearization", nondegeneracy),
        ("determinism and tolerance robustness", determinism_and_tolerances),
    ];
    // Solver panics are reported as failures of the criterion, not aborts.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            let mut o = Outcome::new();
            o.check(false, format!("panicked: {msg}"));
            o
        });
        let verdict = if outcome.passed() { "PASS" } else { "FAIL" };
        if !outcome.passed() {
            failed += 1;
        }
        println!("{verdict} criterion {}: {name}", i + 1);
        for (ok, note) in &outcome.notes {
            println!("       {} {note}", if *ok { "ok " } else { "BAD" });
        }
    }
    println!(
        "\nacceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
