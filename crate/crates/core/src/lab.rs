//! Quantitative checks of the large-`p` behaviour of computed solutions:
//! boundary-value blow-up rate, rescaled profile near the maximum, energy
//! level, Pohozaev identities and the spectrum of the linearization.
//!
//! Everything here takes converged solutions as input and returns numbers;
//! the pass/fail logic lives in [`ValidationReport`].

use serde::Serialize;

use crate::basis::{unit_sphere_area, GreenBasis};
use crate::error::{Error, Result};
use crate::finite_p::{shoot_increasing, KLayerSolution, MonotoneSolution};
use crate::limit::{one_layer_value, LimitLayerConfig};
use crate::numeric::{solve_tridiagonal, GaussLobatto};
use crate::ode::{power_and_slope, IntegratorParams, Monotonicity};

/// `u_{∞,+}'(b)` for the normalized limit `ξ_{[a,b]}(r) / ξ_{[a,b]}(b)`.
pub fn limit_slope(basis: &GreenBasis, a: f64, b: f64) -> Result<f64> {
    let ab = basis.annulus(a, b)?;
    let (x, dx) = ab.xi(b);
    Ok(dx / x)
}

fn require_increasing(sol: &MonotoneSolution) -> Result<()> {
    if sol.direction != Monotonicity::Increasing {
        return Err(Error::InvalidInput("an increasing solution is required".into()));
    }
    Ok(())
}

fn require_dimension(sol: &MonotoneSolution, basis: &GreenBasis) -> Result<()> {
    if sol.n != basis.dimension() {
        return Err(Error::InvalidInput(format!(
            "solution has N = {} but the basis has N = {}",
            sol.n,
            basis.dimension()
        )));
    }
    Ok(())
}

/// `[u_p(b)^p / p] / [u_{∞,+}'(b)² / 2]` for an already computed increasing
/// solution.
pub fn u_p_ratio_of(sol: &MonotoneSolution, basis: &GreenBasis) -> Result<f64> {
    require_increasing(sol)?;
    require_dimension(sol, basis)?;
    let slope = limit_slope(basis, sol.a, sol.b)?;
    let num = (sol.p * sol.end_value().ln() - sol.p.ln()).exp();
    Ok(num / (0.5 * slope * slope))
}

/// Solves for the increasing solution on `[a, b]` and returns
/// [`u_p_ratio_of`]; tends to 1 as `p → ∞`.
pub fn lemma_u_p_ratio(n: u32, p: f64, a: f64, b: f64, params: &IntegratorParams) -> Result<f64> {
    let sol = shoot_increasing(n, p, a, b, params)?;
    let basis = GreenBasis::build(n, params)?;
    u_p_ratio_of(&sol, &basis)
}

/// Limit of the rescaled profile: `log(4 e^{√2 r} / (1 + e^{√2 r})²)`.
pub fn z_infinity(r: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * r;
    // log 4 + s - 2 log(1 + e^s), written to stay accurate for either sign of s.
    4f64.ln() - s.abs() - 2.0 * (-s.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupSample {
    pub r: f64,
    pub z_p: f64,
    pub z_inf: f64,
}

/// Rescaling of an increasing solution around its maximum at `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupProfile {
    pub p: f64,
    pub umax: f64,
    /// `p ε_p² = umax^{-(p-1)}`.
    pub eps_p: f64,
    pub p_eps_p: f64,
    pub window: f64,
    pub samples: Vec<BlowupSample>,
    pub sup_error: f64,
}

/// `z_p(r) = (p / umax) (u_p(b + ε_p r) - umax)` on `r ∈ [-R, 0]`.
pub fn blowup_profile(sol: &MonotoneSolution, window: f64, samples: usize) -> Result<BlowupProfile> {
    require_increasing(sol)?;
    if !(window > 0.0) {
        return Err(Error::InvalidInput(format!("window must be positive, got {window}")));
    }
    let p = sol.p;
    let umax = sol.end_value();
    let eps_p = (-0.5 * ((p - 1.0) * umax.ln() + p.ln())).exp();
    let length = sol.b - sol.a;
    if window * eps_p > length {
        return Err(Error::WindowExceedsDomain {
            extent: window * eps_p,
            length,
        });
    }
    let count = samples.max(2);
    let mut out = Vec::with_capacity(count);
    let mut sup_error: f64 = 0.0;
    for i in 0..count {
        let r = -window + window * i as f64 / (count - 1) as f64;
        let u = sol.eval((sol.b + eps_p * r).min(sol.b)).u;
        let z_p = p / umax * (u - umax);
        let z_inf = z_infinity(r);
        sup_error = sup_error.max((z_p - z_inf).abs());
        out.push(BlowupSample { r, z_p, z_inf });
    }
    Ok(BlowupProfile {
        p,
        umax,
        eps_p,
        p_eps_p: p * eps_p,
        window,
        samples: out,
        sup_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevel {
    /// `Q_p(u_p) = ‖u_p‖²_{H¹} / ‖u_p‖²_{p+1}`.
    pub c_p: f64,
    /// `|∂B_b| u_{∞,+}'(b)`.
    pub reference: f64,
    /// `‖u_p‖_{p+1}^{p-1}`, equal to `c_p` for an exact solution.
    pub norm_power: f64,
    /// `|c_p - norm_power| / c_p`.
    pub identity_gap: f64,
}

pub fn energy_level(sol: &MonotoneSolution, basis: &GreenBasis) -> Result<EnergyLevel> {
    energy_level_with(sol, basis, &GaussLobatto::default(), 1)
}

/// [`energy_level`] with an explicit quadrature rule and sub-panel count.
pub fn energy_level_with(
    sol: &MonotoneSolution,
    basis: &GreenBasis,
    rule: &GaussLobatto,
    subdivisions: usize,
) -> Result<EnergyLevel> {
    require_increasing(sol)?;
    require_dimension(sol, basis)?;
    let norms = sol.norms_with(rule, subdivisions);
    let c_p = norms.h1_sq / (norms.lp1 * norms.lp1);
    let norm_power = norms.lp1.powf(sol.p - 1.0);
    let area_b = basis.sphere_area() * sol.b.powi(sol.n as i32 - 1);
    let reference = area_b * limit_slope(basis, sol.a, sol.b)?;
    Ok(EnergyLevel {
        c_p,
        reference,
        norm_power,
        identity_gap: (c_p - norm_power).abs() / c_p,
    })
}

/// Both sides of the radial Pohozaev identity
///
/// `(N-2)/2 ∫ r^{N-1} u'² + Σ [r^N u'²/2] = N ∫ r^{N-1} F(u) - Σ [r^N F(u)]`,
///
/// the sums running over the end points of every smooth segment (so kinks
/// of a limit profile contribute their slope jumps). `F(u) = u^{p+1}/(p+1)
/// - u²/2` for finite `p` and `-u²/2` in the limit. Both sides carry the
/// factor `|∂B₁|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pohozaev {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|, 1)`.
    pub residual: f64,
}

/// A smooth stretch of a profile with its quadrature break points.
pub struct Segment<'a> {
    pub breaks: Vec<f64>,
    pub eval: Box<dyn Fn(f64) -> (f64, f64) + 'a>,
}

fn primitive(u: f64, p: Option<f64>) -> f64 {
    match p {
        Some(p) => power_and_slope(u, p).0 * u / (p + 1.0) - 0.5 * u * u,
        None => -0.5 * u * u,
    }
}

/// Pohozaev sides for profile segments; `p = None` is the limit equation
/// `L u = 0`.
pub fn pohozaev_segments(n: u32, p: Option<f64>, segments: &[Segment<'_>]) -> Pohozaev {
    let rule = GaussLobatto::default();
    let nf = n as f64;
    let nm1 = n as i32 - 1;
    let (mut grad, mut bulk, mut boundary_grad, mut boundary_f) = (0.0, 0.0, 0.0, 0.0);
    for seg in segments {
        for w in seg.breaks.windows(2) {
            grad += rule.integrate(
                |r| {
                    let (_, du) = (seg.eval)(r);
                    r.powi(nm1) * du * du
                },
                w[0],
                w[1],
            );
            bulk += rule.integrate(|r| r.powi(nm1) * primitive((seg.eval)(r).0, p), w[0], w[1]);
        }
        let (lo, hi) = (seg.breaks[0], seg.breaks[seg.breaks.len() - 1]);
        let (ul, dul) = (seg.eval)(lo);
        let (uh, duh) = (seg.eval)(hi);
        boundary_grad += 0.5 * (hi.powi(n as i32) * duh * duh - lo.powi(n as i32) * dul * dul);
        boundary_f += hi.powi(n as i32) * primitive(uh, p) - lo.powi(n as i32) * primitive(ul, p);
    }
    let area = unit_sphere_area(n);
    let lhs = area * (0.5 * (nf - 2.0) * grad + boundary_grad);
    let rhs = area * (nf * bulk - boundary_f);
    Pohozaev {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0),
    }
}

fn solution_segment(sol: &MonotoneSolution) -> Segment<'_> {
    let mut breaks = sol.profile.breakpoints();
    if breaks[0] > sol.a {
        // Ball pieces start at the series hand-off radius.
        breaks.insert(0, sol.a);
    }
    Segment {
        breaks,
        eval: Box::new(move |r| {
            let s = sol.eval(r);
            (s.u, s.du)
        }),
    }
}

pub fn pohozaev_residual(sol: &MonotoneSolution) -> Pohozaev {
    pohozaev_segments(sol.n, Some(sol.p), &[solution_segment(sol)])
}

pub fn pohozaev_klayer(sol: &KLayerSolution) -> Pohozaev {
    let segs: Vec<Segment<'_>> = sol.pieces.iter().map(solution_segment).collect();
    pohozaev_segments(sol.n, Some(sol.p), &segs)
}

/// The constant solution `u ≡ 1` on `[a, b]`.
pub fn pohozaev_constant(n: u32, p: f64, a: f64, b: f64) -> Pohozaev {
    let seg = Segment {
        breaks: vec![a, b],
        eval: Box::new(|_| (1.0, 0.0)),
    };
    pohozaev_segments(n, Some(p), &[seg])
}

/// Limit identity for the piecewise Green-quotient profile of `config`;
/// every smooth piece is split into `panels` equal quadrature panels.
pub fn pohozaev_limit(basis: &GreenBasis, config: &LimitLayerConfig, panels: usize) -> Result<Pohozaev> {
    let panels = panels.max(1);
    let mut segs = Vec::with_capacity(2 * config.k);
    for j in 0..config.k {
        let ab = basis.annulus(config.beta[j], config.beta[j + 1])?;
        let alpha = config.alpha[j];
        for (lo, hi) in [(config.beta[j], alpha), (alpha, config.beta[j + 1])] {
            let breaks = (0..=panels)
                .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
                .collect();
            let ab = ab.clone();
            // The piece is chosen by the segment, not by `r`, so the one-sided
            // slope at the kink is the right one.
            let left = lo < alpha;
            segs.push(Segment {
                breaks,
                eval: Box::new(move |r| {
                    let r = if left { r.min(alpha) } else { r.max(alpha) };
                    if r == alpha {
                        let (x, dx) = ab.xi(alpha);
                        let (z, dz) = ab.zeta(alpha);
                        return if left { (1.0, dx / x) } else { (1.0, dz / z) };
                    }
                    one_layer_value(&ab, alpha, r)
                }),
            });
        }
    }
    Ok(pohozaev_segments(basis.dimension(), None, &segs))
}

/// Eigenvalue information for `-v'' - (N-1)/r v' + q(r) v` with Neumann
/// conditions on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    pub n_nodes: usize,
    /// Eigenvalue of smallest magnitude (signed).
    pub nearest: f64,
    pub min_abs_eig: f64,
    /// Number of negative eigenvalues.
    pub negative_count: usize,
}

/// Symmetric tridiagonal matrix `W^{-1/2} A W^{-1/2}` of the finite-volume
/// discretization: fluxes `r_{i±1/2}^{N-1} (v_{i±1} - v_i) / h`, cell weights
/// `∫ r^{N-1}` over the dual cell, no flux through `a` or `b`.
fn discretize<Q: Fn(f64) -> f64>(n: u32, a: f64, b: f64, n_nodes: usize, q: Q) -> (Vec<f64>, Vec<f64>) {
    let m = n_nodes;
    let h = (b - a) / (m - 1) as f64;
    let nm1 = n as i32 - 1;
    let nf = n as f64;
    let node = |i: usize| a + h * i as f64;
    let flux: Vec<f64> = (0..m - 1).map(|i| (node(i) + 0.5 * h).powi(nm1) / h).collect();
    let weight: Vec<f64> = (0..m)
        .map(|i| {
            let lo = (node(i) - 0.5 * h).max(a);
            let hi = (node(i) + 0.5 * h).min(b);
            (hi.powi(n as i32) - lo.powi(n as i32)) / nf
        })
        .collect();
    let diag = (0..m)
        .map(|i| {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            let right = if i + 1 < m { flux[i] } else { 0.0 };
            (left + right) / weight[i] + q(node(i))
        })
        .collect();
    let off = (0..m - 1)
        .map(|i| -flux[i] / (weight[i] * weight[i + 1]).sqrt())
        .collect();
    (diag, off)
}

/// Number of eigenvalues below `x` (Sturm sequence of the LDLᵀ pivots).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
            d = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `j`-th smallest eigenvalue by bisection on the Sturm count.
fn eigenvalue(diag: &[f64], off: &[f64], j: usize, lo: f64, hi: f64, rel: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > rel * lo.abs().max(hi.abs()).max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if count_below(diag, off, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Shifted inverse iteration; returns the Rayleigh quotient.
fn inverse_iteration(diag: &[f64], off: &[f64], shift: f64, steps: usize) -> f64 {
    let m = diag.len();
    let shifted: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut lower = vec![0.0; m];
    lower[1..].copy_from_slice(off);
    let mut upper = vec![0.0; m];
    upper[..m - 1].copy_from_slice(off);
    let mut x: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    let mut rayleigh = shift;
    for _ in 0..steps {
        let Some(y) = solve_tridiagonal(&lower, &shifted, &upper, &x) else {
            // The shift is an eigenvalue to working precision.
            return shift;
        };
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
        let mut ax = 0.0;
        for i in 0..m {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                s += off[i] * x[i + 1];
            }
            ax += s * x[i];
        }
        rayleigh = ax;
    }
    rayleigh
}

/// Spectrum of `-Δ_rad + q` on `[a, b]` with Neumann conditions.
///
/// The Sturm count locates the eigenvalue closest to zero, which is then
/// polished by shifted inverse iteration.
pub fn linearized_spectrum<Q: Fn(f64) -> f64>(n: u32, a: f64, b: f64, n_nodes: usize, q: Q) -> Result<Spectrum> {
    if n_nodes < 3 {
        return Err(Error::InvalidInput("need at least 3 nodes".into()));
    }
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidInput(format!("need 0 <= a < b, got [{a}, {b}]")));
    }
    let (diag, off) = discretize(n, a, b, n_nodes, q);
    let m = diag.len();
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < m { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let negative_count = count_below(&diag, &off, 0.0);
    let mut candidates = Vec::with_capacity(2);
    if negative_count > 0 {
        candidates.push(eigenvalue(&diag, &off, negative_count - 1, lo, 0.0, 1e-10));
    }
    if negative_count < m {
        candidates.push(eigenvalue(&diag, &off, negative_count, 0.0, hi, 1e-10));
    }
    let coarse = candidates
        .into_iter()
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        .expect("matrix has at least one eigenvalue");
    let nearest = inverse_iteration(&diag, &off, coarse * (1.0 + 1e-9), 3);
    Ok(Spectrum {
        n_nodes,
        nearest,
        min_abs_eig: nearest.abs(),
        negative_count,
    })
}

/// Spectrum of the linearization `-Δ + 1 - p u_p^{p-1}` at `sol`.
pub fn nondegeneracy_spectrum(sol: &MonotoneSolution, n_nodes: usize) -> Result<Spectrum> {
    linearized_spectrum(sol.n, sol.a, sol.b, n_nodes, |r| {
        1.0 - power_and_slope(sol.eval(r).u, sol.p).1
    })
}

/// Names accepted by [`ValidationOptions::checks`].
pub const CHECK_NAMES: [&str; 6] = ["ratio", "energy", "blowup", "pohozaev", "nondegeneracy", "scaling"];

#[derive(Debug, Clone, Serialize)]
pub struct ValidationOptions {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    /// Ascending list of exponents.
    pub sweep: Vec<f64>,
    /// Subset of [`CHECK_NAMES`]; empty runs all.
    pub checks: Vec<String>,
    /// Blow-up window `R`.
    pub window: f64,
    /// Grid sizes for the spectrum refinement check.
    pub spectrum_nodes: (usize, usize),
    pub params: IntegratorParams,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            n: 3,
            a: 0.0,
            b: 1.0,
            sweep: vec![50.0, 100.0, 200.0, 400.0],
            checks: Vec::new(),
            window: 5.0,
            spectrum_nodes: (2000, 4000),
            params: IntegratorParams::default(),
        }
    }
}

impl ValidationOptions {
    fn wants(&self, name: &str) -> bool {
        self.checks.is_empty() || self.checks.iter().any(|c| c == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::InvalidInput("the p sweep is empty".into()));
        }
        if !self.sweep.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("the p sweep must be strictly ascending".into()));
        }
        if let Some(bad) = self.checks.iter().find(|c| !CHECK_NAMES.contains(&c.as_str())) {
            return Err(Error::InvalidInput(format!(
                "unknown check '{bad}' (expected one of {})",
                CHECK_NAMES.join(", ")
            )));
        }
        self.params.validate()
    }
}

/// Measurements at one exponent of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub p: f64,
    pub c: f64,
    pub umax: f64,
    pub ratio: f64,
    pub energy: EnergyLevel,
    pub blowup_sup_error: Option<f64>,
    /// `p ε_p u_{∞,+}'(b) / √2`.
    pub scaling: f64,
    pub pohozaev: f64,
    pub spectrum: Option<(Spectrum, Spectrum)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Where the reference value and the tolerance come from.
    pub basis: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub limit_slope: f64,
    pub trend: Vec<TrendRow>,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Plain-text table of the checks and the trend rows.
    pub fn to_table(&self) -> String {
        let mut out = format!("N = {}, interval [{}, {}]\n\n", self.n, self.a, self.b);
        out.push_str(&format!(
            "{:>8} {:>12} {:>14} {:>12} {:>12} {:>12} {:>12}\n",
            "p", "u(b)", "ratio", "c_p", "z sup err", "pohozaev", "min|eig|"
        ));
        for row in &self.trend {
            out.push_str(&format!(
                "{:>8} {:>12.8} {:>14.10} {:>12.8} {:>12.4e} {:>12.3e} {:>12.6}\n",
                row.p,
                row.umax,
                row.ratio,
                row.energy.c_p,
                row.blowup_sup_error.unwrap_or(f64::NAN),
                row.pohozaev,
                row.spectrum.map_or(f64::NAN, |s| s.1.min_abs_eig),
            ));
        }
        out.push('\n');
        for c in &self.checks {
            out.push_str(&format!(
                "[{}] {:<40} value {:<14.6e} reference {:<14.6e} tol {:.1e}  ({})\n",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.reference,
                c.tolerance,
                c.basis
            ));
        }
        out
    }
}

fn measure(opts: &ValidationOptions, basis: &GreenBasis, slope: f64, p: f64) -> Result<TrendRow> {
    let sol = shoot_increasing(opts.n, p, opts.a, opts.b, &opts.params)?;
    let ratio = u_p_ratio_of(&sol, basis)?;
    let energy = energy_level(&sol, basis)?;
    let blowup = match blowup_profile(&sol, opts.window, 201) {
        Ok(b) => Some(b),
        Err(Error::WindowExceedsDomain { .. }) => None,
        Err(e) => return Err(e),
    };
    let eps_p = (-0.5 * ((p - 1.0) * sol.end_value().ln() + p.ln())).exp();
    let spectrum = if opts.wants("nondegeneracy") {
        let (n1, n2) = opts.spectrum_nodes;
        Some((nondegeneracy_spectrum(&sol, n1)?, nondegeneracy_spectrum(&sol, n2)?))
    } else {
        None
    };
    Ok(TrendRow {
        p,
        c: sol.c,
        umax: sol.end_value(),
        ratio,
        energy,
        blowup_sup_error: blowup.map(|b| b.sup_error),
        scaling: p * eps_p * slope / std::f64::consts::SQRT_2,
        pohozaev: pohozaev_residual(&sol).residual,
        spectrum,
    })
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Largest ratio `e_{i+1} / e_i` along the sweep; below 1 means strictly
/// decreasing.
fn worst_step(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn push_trend(checks: &mut Vec<Check>, name: &str, errors: &[f64], basis: &str) {
    if errors.len() < 2 {
        return;
    }
    checks.push(Check {
        name: format!("{name} decreases with p"),
        value: worst_step(errors),
        reference: 1.0,
        tolerance: 0.0,
        passed: strictly_decreasing(errors),
        basis: basis.into(),
    });
}

/// Run the sweep and evaluate the selected checks.
pub fn run_validation(opts: &ValidationOptions) -> Result<ValidationReport> {
    opts.validate()?;
    let basis = GreenBasis::build(opts.n, &opts.params)?;
    let slope = limit_slope(&basis, opts.a, opts.b)?;

    #[cfg(feature = "parallel")]
    let rows: Vec<TrendRow> = {
        use rayon::prelude::*;
        opts.sweep
            .par_iter()
            .map(|&p| measure(opts, &basis, slope, p))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<TrendRow> = opts
        .sweep
        .iter()
        .map(|&p| measure(opts, &basis, slope, p))
        .collect::<Result<_>>()?;

    let mut checks = Vec::new();
    let last = rows.last().expect("sweep is non-empty");
    if opts.wants("ratio") {
        let errs: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
        push_trend(
            &mut checks,
            "|u_p(b)^p/p / (u'_inf(b)^2/2) - 1|",
            &errs,
            "limit law, monotone approach",
        );
        checks.push(Check {
            name: format!("u_p ratio at p = {}", last.p),
            value: last.ratio,
            reference: 1.0,
            tolerance: 0.2,
            passed: (last.ratio - 1.0).abs() < 0.2,
            basis: "empirical band around the limit value 1".into(),
        });
    }
    if opts.wants("energy") {
        let errs: Vec<f64> = rows.iter().map(|r| (r.energy.c_p - r.energy.reference).abs()).collect();
        push_trend(
            &mut checks,
            "|c_p - |dB_b| u'_inf(b)|",
            &errs,
            "limit law, monotone approach",
        );
        for r in &rows {
            checks.push(Check {
                name: format!("c_p = ||u||_(p+1)^(p-1) at p = {}", r.p),
                value: r.energy.identity_gap,
                reference: 0.0,
                tolerance: 1e-8,
                passed: r.energy.identity_gap < 1e-8,
                basis: "Nehari identity of an exact solution".into(),
            });
        }
    }
    if opts.wants("blowup") {
        let errs: Vec<f64> = rows.iter().filter_map(|r| r.blowup_sup_error).collect();
        if errs.len() < rows.len() {
            checks.push(Check {
                name: format!("blow-up window R = {} fits the interval", opts.window),
                value: (rows.len() - errs.len()) as f64,
                reference: 0.0,
                tolerance: 0.0,
                passed: false,
                basis: "window must satisfy R eps_p <= b - a".into(),
            });
        }
        push_trend(
            &mut checks,
            "sup |z_p - z_inf| on [-R, 0]",
            &errs,
            "rescaled profile converges",
        );
    }
    if opts.wants("scaling") {
        let errs: Vec<f64> = rows.iter().map(|r| (r.scaling - 1.0).abs()).collect();
        push_trend(
            &mut checks,
            "|p eps_p u'_inf(b)/sqrt 2 - 1|",
            &errs,
            "blow-up scale, monotone approach",
        );
    }
    if opts.wants("pohozaev") {
        for r in &rows {
            checks.push(Check {
                name: format!("Pohozaev residual at p = {}", r.p),
                value: r.pohozaev,
                reference: 0.0,
                tolerance: 1e-7,
                passed: r.pohozaev < 1e-7,
                basis: "quadrature of the converged profile".into(),
            });
        }
    }
    if opts.wants("nondegeneracy") {
        for r in &rows {
            let Some((coarse, fine)) = r.spectrum else { continue };
            let variation = (fine.min_abs_eig - coarse.min_abs_eig).abs();
            let rel = variation / fine.min_abs_eig;
            checks.push(Check {
                name: format!("min |eig| stable under refinement at p = {}", r.p),
                value: rel,
                reference: 0.0,
                tolerance: 0.1,
                passed: rel < 0.1 && fine.min_abs_eig > 10.0 * variation,
                basis: "grid doubling; bounded away from 0 by 10x the variation".into(),
            });
        }
    }
    Ok(ValidationReport {
        n: opts.n,
        a: opts.a,
        b: opts.b,
        limit_slope: slope,
        trend: rows,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_infinity_vanishes_at_origin_and_is_even() {
        assert!(z_infinity(0.0).abs() < 1e-15);
        for r in [0.3, 1.0, 4.0, 30.0] {
            assert!((z_infinity(r) - z_infinity(-r)).abs() < 1e-14);
            let s = std::f64::consts::SQRT_2 * r;
            let direct = (4.0 * s.exp() / (1.0 + s.exp()).powi(2)).ln();
            assert!((z_infinity(r) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn constant_solution_balances() {
        for (n, a, b) in [(3, 0.2, 0.9), (4, 0.0, 1.0), (5, 0.5, 0.7)] {
            let ph = pohozaev_constant(n, 7.0, a, b);
            assert!(ph.residual < 1e-12, "{ph:?}");
        }
    }

    #[test]
    fn free_laplacian_spectrum_on_segment() {
        // N = 1, q = 0 on [0, π]: eigenvalues j², nearest to zero is 0.
        let s = linearized_spectrum(1, 0.0, std::f64::consts::PI, 400, |_| -2.1).unwrap();
        // Shifted: j² - 2.1, nearest is 1 - 2.1 = -1.1 up to O(h²).
        assert!((s.nearest + 1.1).abs() < 1e-4, "{s:?}");
        assert_eq!(s.negative_count, 2);
    }

    #[test]
    fn sturm_count_matches_diagonal() {
        let diag = [1.0, 2.0, 3.0];
        let off = [0.0, 0.0];
        assert_eq!(count_below(&diag, &off, 2.5), 2);
        assert!((eigenvalue(&diag, &off, 1, 0.0, 4.0, 1e-14) - 2.0).abs() < 1e-12);
    }
}
