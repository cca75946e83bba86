//! Finite-`p` solutions: monotone Neumann pieces by shooting, 1-layer
//! solutions by matching an increasing and a decreasing piece at their
//! common maximum, and k-layer solutions by zeroing the junction mismatch
//! `M_p` of adjacent 1-layer solutions.
//!
//! Dimension `n = 1` is accepted everywhere as a drift-free test mode
//! (`u'' = u - u^p`); it has no origin singularity and no limit basis.

use std::cell::RefCell;

use serde::Serialize;

use crate::basis::{unit_sphere_area, GreenBasis};
use crate::error::{Error, Result};
use crate::limit::{self, LimitOptions, ProfilePoint};
use crate::numeric::{brent, trajectory_integral, GaussLobatto};
use crate::ode::{
    integrate, neumann_lambda2_with, power_and_slope, BlowupGuard, IntegratorParams, Monotonicity, RadialEquation,
    RadialState, TerminationTag, Trajectory,
};

/// Number of log-spaced shooting values in the bracket scan.
pub const SCAN_POINTS: usize = 64;
/// Largest accepted `|u'(b)|` for a shooting root.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Decreasing scans reach `u(a) = 1 + DECREASING_REACH (B - 1)`.
pub const DECREASING_REACH: f64 = 3.0;

/// A strictly monotone radial Neumann solution on `[a, b]`.
#[derive(Debug, Clone)]
pub struct MonotoneSolution {
    pub n: u32,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub direction: Monotonicity,
    /// `u(a)`.
    pub c: f64,
    pub profile: Trajectory,
    pub umax: f64,
    /// `|u'(b)|`.
    pub boundary_residual: f64,
    /// Rayleigh quotient `‖u‖²_{H¹} / ‖u‖²_{p+1}`.
    pub rayleigh: f64,
    /// Number of distinct monotone shooting roots found by the scan.
    pub roots_found: usize,
    pub lambda2: f64,
}

/// Weighted integrals of a radial profile, with weight `|∂B₁| r^{N-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    /// `‖u‖²_{H¹}`.
    pub h1_sq: f64,
    /// `∫ u^{p+1}`.
    pub lp1_pow: f64,
    /// `‖u‖_{p+1}`.
    pub lp1: f64,
}

impl MonotoneSolution {
    fn equation(&self) -> RadialEquation {
        RadialEquation::nonlinear(self.n, self.p)
    }

    /// Value on `[a, b]`; below the series hand-off radius of a ball piece the
    /// Taylor expansion about the origin is used.
    pub fn eval(&self, r: f64) -> RadialState {
        let first = self.profile.first();
        if r < first.r && self.a == 0.0 && self.n > 1 {
            if r <= 0.0 {
                return RadialState::new(0.0, self.c, 0.0);
            }
            return self.equation().series_start(self.c, r);
        }
        self.profile.eval(r)
    }

    pub fn end_value(&self) -> f64 {
        self.profile.last().u
    }

    pub fn max_abs_slope(&self) -> f64 {
        self.profile.samples().map(|s| s.du.abs()).fold(0.0, f64::max)
    }

    /// `σ u' > 0` at every sample strictly inside `(a, b)`.
    pub fn is_strictly_monotone(&self) -> bool {
        let s = self.direction.sign();
        let n = self.profile.len();
        self.profile
            .samples()
            .enumerate()
            .filter(|(i, _)| *i > 0 && *i + 1 < n)
            .all(|(_, st)| s * st.du > 0.0)
    }

    pub fn norms(&self) -> Norms {
        self.norms_with(&GaussLobatto::default(), 1)
    }

    /// Norms with a given rule and number of sub-panels per integrator step.
    pub fn norms_with(&self, rule: &GaussLobatto, subdivisions: usize) -> Norms {
        let w = unit_sphere_area(self.n);
        let nm1 = self.n as i32 - 1;
        let p = self.p;
        let h1 = trajectory_integral(&self.profile, rule, subdivisions, |r, u, du| {
            r.powi(nm1) * (du * du + u * u)
        });
        let lp = trajectory_integral(&self.profile, rule, subdivisions, |r, u, _| {
            r.powi(nm1) * power_and_slope(u, p).0 * u
        });
        let lp1_pow = w * lp;
        Norms {
            h1_sq: w * h1,
            lp1_pow,
            lp1: lp1_pow.powf(1.0 / (p + 1.0)),
        }
    }

    /// Uniformly spaced samples on `[a, b]`.
    pub fn sample(&self, count: usize) -> Vec<RadialState> {
        limit::uniform_grid(self.a, self.b, count)
            .into_iter()
            .map(|r| self.eval(r))
            .collect()
    }
}

fn validate(n: u32, p: f64, a: f64, b: f64) -> Result<()> {
    if n == 0 || n == 2 {
        return Err(Error::InvalidInput(format!(
            "dimension N = {n} not supported (N >= 3, or 1 for the drift-free mode)"
        )));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("exponent p = {p} must exceed 1")));
    }
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidInput(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    Ok(())
}

struct Shooter<'a> {
    n: u32,
    p: f64,
    eq: RadialEquation,
    a: f64,
    b: f64,
    direction: Monotonicity,
    params: &'a IntegratorParams,
    guard: BlowupGuard,
    origin: bool,
}

struct Shot {
    score: f64,
    /// `None` when the integrator gave up (step underflow or overflow),
    /// which only happens on trajectories that are escaping.
    run: Option<(Trajectory, TerminationTag)>,
}

impl Shooter<'_> {
    fn start(&self, c: f64) -> RadialState {
        if self.origin {
            self.eq.series_start(c, self.params.origin_offset)
        } else {
            RadialState::new(self.a, c, 0.0)
        }
    }

    /// Signed distance to a monotone Neumann solution: negative when the
    /// trajectory turns back before `b`, positive when it is still moving
    /// monotonically at `b` (value `σ u'(b)`) or escapes the admissible band.
    fn shoot(&self, c: f64) -> Result<Shot> {
        let (traj, tag) = match integrate(&self.eq, self.start(c), self.b, self.params, Some(&self.guard)) {
            Ok(run) => run,
            Err(Error::StepUnderflow { r, .. } | Error::NonFiniteState { r }) => {
                return Ok(Shot {
                    score: self.b - r,
                    run: None,
                })
            }
            Err(e) => return Err(e),
        };
        let score = match tag {
            TerminationTag::ReachedEnd => self.direction.sign() * traj.last().du,
            TerminationTag::DerivativeSignFlip { r } => -(self.b - r),
            TerminationTag::ValueExceededBound { r } => self.b - r,
        };
        Ok(Shot {
            score,
            run: Some((traj, tag)),
        })
    }
}

/// Shooting values `u(a) = 1 ∓ d` with `d` log-spaced. Increasing pieces
/// start below 1. Decreasing pieces start above 1; the drift makes the energy
/// decay outwards, so their start value is not capped by the sup bound `B` of
/// increasing pieces, and the scan runs up to `1 + 3 (B - 1)`.
fn scan_values(direction: Monotonicity, bound: f64) -> Vec<f64> {
    let d_min: f64 = 1e-6;
    let d_max: f64 = match direction {
        Monotonicity::Increasing => 1.0 - 1e-6,
        Monotonicity::Decreasing => DECREASING_REACH * (bound - 1.0),
    };
    let ratio = (d_max / d_min).ln();
    (0..SCAN_POINTS)
        .map(|i| {
            let d = d_min * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp();
            match direction {
                Monotonicity::Increasing => 1.0 - d,
                Monotonicity::Decreasing => 1.0 + d,
            }
        })
        .collect()
}

/// Shooting solve for a monotone Neumann solution on `[a, b]`.
///
/// `hint`, when given, is a nearby shooting value used to look for a local
/// bracket before falling back to the full scan.
pub fn shoot_monotone(
    n: u32,
    p: f64,
    a: f64,
    b: f64,
    direction: Monotonicity,
    params: &IntegratorParams,
    hint: Option<f64>,
) -> Result<MonotoneSolution> {
    shoot_monotone_impl(n, p, a, b, direction, params, hint, true)
}

/// `gated = false` skips the `p > λ₂` precondition. Gluing needs this: the
/// decreasing branch on `[α, b]` continues a little past the point where
/// `λ₂([α, b])` reaches `p`, and the matching root can sit there.
#[allow(clippy::too_many_arguments)]
fn shoot_monotone_impl(
    n: u32,
    p: f64,
    a: f64,
    b: f64,
    direction: Monotonicity,
    params: &IntegratorParams,
    hint: Option<f64>,
    gated: bool,
) -> Result<MonotoneSolution> {
    validate(n, p, a, b)?;
    params.validate()?;
    if direction == Monotonicity::Decreasing && a == 0.0 && n > 1 {
        return Err(Error::BallNotAllowed);
    }
    let lambda2 = neumann_lambda2_with(n, a, b, params)?;
    if gated && p <= lambda2 {
        return Err(Error::BelowEigenvalueThreshold { p, lambda2, a, b });
    }
    let guard = BlowupGuard::for_exponent(p, Some(direction));
    let shooter = Shooter {
        n,
        p,
        eq: RadialEquation::nonlinear(n, p),
        a,
        b,
        direction,
        params,
        guard,
        origin: a == 0.0 && n > 1,
    };
    if let Some(c0) = hint {
        if let Some(sol) = local_solve(&shooter, c0, lambda2)? {
            return Ok(sol);
        }
    }

    let cs = scan_values(direction, BlowupGuard::energy_bound(p));
    let scores = scan_scores(&shooter, &cs)?;
    let mut candidates: Vec<MonotoneSolution> = Vec::new();
    for i in 0..cs.len() - 1 {
        let (s0, s1) = (scores[i], scores[i + 1]);
        if s0 == 0.0 || s0.signum() == s1.signum() {
            continue;
        }
        if let Some(sol) = refine(&shooter, cs[i], cs[i + 1], s0, s1, lambda2)? {
            if candidates.iter().all(|c| (c.c - sol.c).abs() > 1e-9) {
                candidates.push(sol);
            }
        }
    }
    if candidates.is_empty() {
        let signs: String = scores.iter().map(|s| if *s > 0.0 { '+' } else { '-' }).collect();
        return Err(Error::NoBracket {
            p,
            a,
            b,
            detail: format!(
                "scan signs over u(a) = {:.3e}..{:.3e}: {signs}",
                cs[0],
                cs[cs.len() - 1]
            ),
        });
    }
    let count = candidates.len();
    let monotone: Vec<MonotoneSolution> = candidates.into_iter().filter(|s| s.is_strictly_monotone()).collect();
    let mut best = monotone
        .into_iter()
        .min_by(|x, y| x.rayleigh.total_cmp(&y.rayleigh))
        .ok_or(Error::NonMonotoneOnly { a, b })?;
    best.roots_found = count;
    Ok(best)
}

fn scan_scores(shooter: &Shooter<'_>, cs: &[f64]) -> Result<Vec<f64>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cs.par_iter().map(|&c| shooter.shoot(c).map(|s| s.score)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cs.iter().map(|&c| shooter.shoot(c).map(|s| s.score)).collect()
    }
}

fn local_solve(shooter: &Shooter<'_>, c0: f64, lambda2: f64) -> Result<Option<MonotoneSolution>> {
    let s0 = shooter.shoot(c0)?.score;
    if s0 == 0.0 {
        return finish(shooter, c0, lambda2);
    }
    let span = (c0 - 1.0).abs().max(1e-6);
    let mut delta = 1e-4 * span;
    for _ in 0..10 {
        for c1 in [c0 - delta, c0 + delta] {
            let valid = match shooter.direction {
                Monotonicity::Increasing => c1 > 0.0 && c1 < 1.0,
                Monotonicity::Decreasing => c1 > 1.0 && c1 < shooter.guard.upper,
            };
            if !valid {
                continue;
            }
            let s1 = shooter.shoot(c1)?.score;
            if s1.signum() != s0.signum() {
                let (lo, hi, flo, fhi) = if c1 < c0 { (c1, c0, s1, s0) } else { (c0, c1, s0, s1) };
                return refine(shooter, lo, hi, flo, fhi, lambda2);
            }
        }
        delta *= 4.0;
    }
    Ok(None)
}

fn refine(shooter: &Shooter<'_>, c0: f64, c1: f64, s0: f64, s1: f64, lambda2: f64) -> Result<Option<MonotoneSolution>> {
    let err = RefCell::new(None);
    let res = brent(
        |c| match shooter.shoot(c) {
            Ok(s) => s.score,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        c0,
        c1,
        s0,
        s1,
        0.0,
        200,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    finish(shooter, res.positive_side(), lambda2)
}

fn finish(shooter: &Shooter<'_>, c: f64, lambda2: f64) -> Result<Option<MonotoneSolution>> {
    let Some((traj, tag)) = shooter.shoot(c)?.run else {
        return Ok(None);
    };
    // A slope sign change located exactly at the far end is the Neumann
    // condition itself, not a failed shot.
    let end_slack = 1e-12 * (shooter.b - shooter.a);
    let at_end = match tag {
        TerminationTag::ReachedEnd => true,
        TerminationTag::DerivativeSignFlip { r } => shooter.b - r <= end_slack,
        TerminationTag::ValueExceededBound { .. } => false,
    };
    if !at_end || traj.last().r < shooter.b - end_slack {
        return Ok(None);
    }
    let residual = traj.last().du.abs();
    if residual > BOUNDARY_TOL {
        return Ok(None);
    }
    let umax = traj.samples().map(|s| s.u).fold(f64::MIN, f64::max);
    let mut sol = MonotoneSolution {
        n: shooter.n,
        p: shooter.p,
        a: shooter.a,
        b: shooter.b,
        direction: shooter.direction,
        c,
        profile: traj,
        umax,
        boundary_residual: residual,
        rayleigh: f64::NAN,
        roots_found: 1,
        lambda2,
    };
    let norms = sol.norms();
    sol.rayleigh = norms.h1_sq / norms.lp1_pow.powf(2.0 / (sol.p + 1.0));
    Ok(Some(sol))
}

/// Increasing Neumann solution on `[a, b]` (`a = 0` is the ball).
pub fn shoot_increasing(n: u32, p: f64, a: f64, b: f64, params: &IntegratorParams) -> Result<MonotoneSolution> {
    shoot_monotone(n, p, a, b, Monotonicity::Increasing, params, None)
}

/// Decreasing Neumann solution on the annulus `[a, b]`, `a > 0`.
pub fn shoot_decreasing(n: u32, p: f64, a: f64, b: f64, params: &IntegratorParams) -> Result<MonotoneSolution> {
    shoot_monotone(n, p, a, b, Monotonicity::Decreasing, params, None)
}

/// `(u₊^p - u₋^p)/p` evaluated as `u₋^p · expm1(p (ln u₊ - ln u₋)) / p`.
pub fn power_difference(u_plus: f64, u_minus: f64, p: f64) -> f64 {
    let (lp, lm) = (u_plus.ln(), u_minus.ln());
    (p * lm).exp() * (p * (lp - lm)).exp_m1() / p
}

/// Matching function `L_p(α) = (u_{p,+}(α; β_l, α)^p - u_{p,-}(α; α, β_r)^p)/p`.
pub fn matching_l(
    n: u32,
    p: f64,
    alpha: f64,
    beta_left: f64,
    beta_right: f64,
    params: &IntegratorParams,
) -> Result<f64> {
    if !(beta_left < alpha && alpha < beta_right) {
        return Err(Error::InvalidInput(format!(
            "need beta_left < alpha < beta_right, got {beta_left} < {alpha} < {beta_right}"
        )));
    }
    let inc = shoot_increasing(n, p, beta_left, alpha, params)?;
    let dec = shoot_decreasing(n, p, alpha, beta_right, params)?;
    Ok(power_difference(inc.end_value(), dec.c, p))
}

/// A monotone piece, or the constant solution `u ≡ 1` when no monotone
/// piece exists on that interval.
#[derive(Debug, Clone)]
enum Piece {
    Solved(MonotoneSolution),
    Constant(Error),
}

impl Piece {
    fn solution(&self) -> Option<&MonotoneSolution> {
        match self {
            Piece::Solved(s) => Some(s),
            Piece::Constant(_) => None,
        }
    }
}

fn solve_piece(
    n: u32,
    p: f64,
    a: f64,
    b: f64,
    direction: Monotonicity,
    params: &IntegratorParams,
    hint: Option<f64>,
) -> Result<Piece> {
    match shoot_monotone_impl(n, p, a, b, direction, params, hint, false) {
        Ok(s) => Ok(Piece::Solved(s)),
        Err(e @ (Error::BelowEigenvalueThreshold { .. } | Error::NoBracket { .. } | Error::NonMonotoneOnly { .. })) => {
            Ok(Piece::Constant(e))
        }
        Err(e) => Err(e),
    }
}

struct MatchEval {
    value: f64,
    inc: Piece,
    dec: Piece,
}

impl MatchEval {
    fn both_solved(&self) -> bool {
        self.inc.solution().is_some() && self.dec.solution().is_some()
    }

    fn neither_solved(&self) -> bool {
        self.inc.solution().is_none() && self.dec.solution().is_none()
    }
}

/// `L_p` with a missing piece replaced by the constant branch `u ≡ 1`, which
/// is the branch the monotone piece bifurcates from at its threshold.
fn match_eval(
    n: u32,
    p: f64,
    alpha: f64,
    a: f64,
    b: f64,
    params: &IntegratorParams,
    hints: (Option<f64>, Option<f64>),
) -> Result<MatchEval> {
    let inc = solve_piece(n, p, a, alpha, Monotonicity::Increasing, params, hints.0)?;
    let dec = solve_piece(n, p, alpha, b, Monotonicity::Decreasing, params, hints.1)?;
    let up = inc.solution().map_or(1.0, MonotoneSolution::end_value);
    let um = dec.solution().map_or(1.0, |s| s.c);
    Ok(MatchEval {
        value: power_difference(up, um, p),
        inc,
        dec,
    })
}

/// 1-layer solution on `[a, b]`: increasing piece on `[a, α]`, decreasing
/// piece on `[α, b]`, glued where their values agree.
#[derive(Debug, Clone)]
pub struct OneLayer {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub inc: MonotoneSolution,
    pub dec: MonotoneSolution,
    /// `L_p` at the returned `α`.
    pub matching: f64,
}

impl OneLayer {
    /// Value at the left end `a`.
    pub fn left_value(&self) -> f64 {
        self.inc.c
    }

    /// Value at the right end `b`.
    pub fn right_value(&self) -> f64 {
        self.dec.end_value()
    }
}

fn layer_seed(n: u32, a: f64, b: f64, params: &IntegratorParams) -> Result<f64> {
    if n >= 3 {
        let basis = GreenBasis::build(n, params)?;
        limit::reflection_point(&basis.annulus(a, b)?)
    } else {
        Ok(0.5 * (a + b))
    }
}

fn no_bracket(p: f64, a: f64, b: f64, detail: String) -> Error {
    Error::NoBracket { p, a, b, detail }
}

fn solve_one_layer(
    n: u32,
    p: f64,
    a: f64,
    b: f64,
    params: &IntegratorParams,
    hint: Option<&OneLayer>,
) -> Result<OneLayer> {
    validate(n, p, a, b)?;
    let len = b - a;
    let (alpha0, mut delta, hints) = match hint {
        Some(h) if h.alpha > a && h.alpha < b => (h.alpha, 1e-4 * len, (Some(h.inc.c), Some(h.dec.c))),
        _ => (layer_seed(n, a, b, params)?, 0.02 * len, (None, None)),
    };
    let last_c = RefCell::new(hints);
    let eval = |alpha: f64| -> Result<MatchEval> {
        let h = *last_c.borrow();
        let e = match_eval(n, p, alpha, a, b, params, h)?;
        let mut lc = last_c.borrow_mut();
        if let Some(s) = e.inc.solution() {
            lc.0 = Some(s.c);
        }
        if let Some(s) = e.dec.solution() {
            lc.1 = Some(s.c);
        }
        Ok(e)
    };

    let lo_limit = a + 1e-6 * len;
    let hi_limit = b - 1e-6 * len;
    let mut x0 = alpha0.clamp(lo_limit, hi_limit);
    let mut e0 = eval(x0)?;
    if e0.value == 0.0 && e0.both_solved() {
        return assemble_layer(a, b, x0, e0);
    }
    let step_dir = if e0.value > 0.0 { -1.0 } else { 1.0 };
    let mut bracket = None;
    for _ in 0..60 {
        if e0.neither_solved() {
            return Err(no_bracket(
                p,
                a,
                b,
                format!("no monotone piece on either side of alpha = {x0}"),
            ));
        }
        let x1 = (x0 + step_dir * delta).clamp(lo_limit, hi_limit);
        if x1 == x0 {
            break;
        }
        let e1 = eval(x1)?;
        if e1.value == 0.0 && e1.both_solved() {
            return assemble_layer(a, b, x1, e1);
        }
        if e1.value != 0.0 && e1.value.signum() != e0.value.signum() {
            bracket = Some((x0, e0.value, x1, e1.value));
            break;
        }
        x0 = x1;
        e0 = e1;
        delta *= 1.6;
    }
    let Some((xa, fa, xb, fb)) = bracket else {
        return Err(no_bracket(
            p,
            a,
            b,
            format!(
                "L_p keeps sign {} up to alpha = {x0}",
                if e0.value > 0.0 { '+' } else { '-' }
            ),
        ));
    };
    let (xa, xb, fa, fb) = if xa < xb { (xa, xb, fa, fb) } else { (xb, xa, fb, fa) };
    let err = RefCell::new(None);
    let res = brent(
        |x| match eval(x) {
            Ok(e) => e.value,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        xa,
        xb,
        fa,
        fb,
        1e-15,
        200,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let e = eval(res.root)?;
    if !e.both_solved() {
        return Err(no_bracket(
            p,
            a,
            b,
            format!(
                "matching root alpha = {} has no monotone {} piece",
                res.root,
                if e.inc.solution().is_none() {
                    "increasing"
                } else {
                    "decreasing"
                }
            ),
        ));
    }
    assemble_layer(a, b, res.root, e)
}

fn assemble_layer(a: f64, b: f64, alpha: f64, e: MatchEval) -> Result<OneLayer> {
    match (e.inc, e.dec) {
        (Piece::Solved(inc), Piece::Solved(dec)) => Ok(OneLayer {
            a,
            b,
            alpha,
            inc,
            dec,
            matching: e.value,
        }),
        (Piece::Constant(err), _) | (_, Piece::Constant(err)) => Err(err),
    }
}

/// Finite-`p` solution built from monotone pieces.
#[derive(Debug, Clone)]
pub struct KLayerSolution {
    pub n: u32,
    pub p: f64,
    pub k: usize,
    /// `β_0 = 0 < β_1 < … < β_k = 1`.
    pub beta: Vec<f64>,
    /// Maximum points.
    pub alpha: Vec<f64>,
    /// `2k` pieces ordered from the origin outwards, alternately
    /// increasing and decreasing.
    pub pieces: Vec<MonotoneSolution>,
    /// Largest value mismatch at an interior junction.
    pub junction_jump: f64,
    /// Largest value mismatch between the two pieces meeting at a maximum.
    pub peak_jump: f64,
    /// Largest one-sided `|u'|` at any junction, maximum or boundary point.
    pub junction_slope: f64,
}

impl KLayerSolution {
    fn from_layers(n: u32, p: f64, layers: Vec<OneLayer>) -> Self {
        let k = layers.len();
        let mut beta = vec![layers[0].a];
        beta.extend(layers.iter().map(|l| l.b));
        let alpha = layers.iter().map(|l| l.alpha).collect();
        let junction_jump = layers
            .windows(2)
            .map(|w| (w[1].left_value() - w[0].right_value()).abs())
            .fold(0.0, f64::max);
        let peak_jump = layers
            .iter()
            .map(|l| (l.inc.end_value() - l.dec.c).abs())
            .fold(0.0, f64::max);
        let mut pieces = Vec::with_capacity(2 * k);
        for l in layers {
            pieces.push(l.inc);
            pieces.push(l.dec);
        }
        let junction_slope = pieces
            .iter()
            .map(|s| s.eval(s.a).du.abs().max(s.eval(s.b).du.abs()))
            .fold(0.0, f64::max);
        Self {
            n,
            p,
            k,
            beta,
            alpha,
            pieces,
            junction_jump,
            peak_jump,
            junction_slope,
        }
    }

    /// Index of the piece containing `r` (left piece at shared end points).
    pub fn piece_index(&self, r: f64) -> usize {
        self.pieces.partition_point(|s| s.b < r).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, r: f64) -> RadialState {
        self.pieces[self.piece_index(r)].eval(r)
    }

    /// `per_piece` equispaced samples on every piece (shared end points
    /// listed once, attributed to the left piece).
    pub fn profile(&self, per_piece: usize) -> Vec<ProfilePoint> {
        let mut out = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let grid = limit::uniform_grid(piece.a, piece.b, per_piece.max(2));
            let skip = usize::from(i > 0);
            for r in grid.into_iter().skip(skip) {
                let s = piece.eval(r);
                out.push(ProfilePoint {
                    r,
                    u: s.u,
                    du: s.du,
                    piece: i,
                });
            }
        }
        out
    }

    /// Strict interior local maxima of the sampled profile.
    pub fn count_interior_maxima(&self, per_piece: usize) -> usize {
        let prof = self.profile(per_piece);
        prof.windows(3).filter(|w| w[1].u > w[0].u && w[1].u > w[2].u).count()
    }

    pub fn umax(&self) -> f64 {
        self.pieces.iter().map(|s| s.umax).fold(f64::MIN, f64::max)
    }
}

/// 1-layer solution on `[a, b]`, seeded at the limit reflection point.
pub fn solve_1layer(n: u32, p: f64, a: f64, b: f64, params: &IntegratorParams) -> Result<KLayerSolution> {
    let layer = solve_one_layer(n, p, a, b, params, None)?;
    Ok(KLayerSolution::from_layers(n, p, vec![layer]))
}

fn layers_at(
    n: u32,
    p: f64,
    interior: &[f64],
    params: &IntegratorParams,
    cache: Option<&RefCell<Vec<Option<OneLayer>>>>,
) -> Result<Vec<OneLayer>> {
    let full = limit::full_junctions(interior);
    full.windows(2)
        .enumerate()
        .map(|(j, w)| {
            let hint = cache.and_then(|c| c.borrow()[j].clone());
            let layer = solve_one_layer(n, p, w[0], w[1], params, hint.as_ref())?;
            if let Some(c) = cache {
                c.borrow_mut()[j] = Some(layer.clone());
            }
            Ok(layer)
        })
        .collect()
}

fn mismatch(layers: &[OneLayer]) -> Vec<f64> {
    layers
        .windows(2)
        .map(|w| w[1].left_value() - w[0].right_value())
        .collect()
}

fn check_interior(interior: &[f64]) -> Result<()> {
    let ok = interior.iter().all(|b| *b > 0.0 && *b < 1.0) && interior.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "junctions must satisfy 0 < beta_1 < ... < 1, got {interior:?}"
        )))
    }
}

/// `M_p(β)`: value of the 1-layer solution on `[β_j, β_{j+1}]` at `β_j`
/// minus that of the 1-layer solution on `[β_{j-1}, β_j]` at `β_j`.
pub fn m_p(n: u32, p: f64, interior: &[f64], params: &IntegratorParams) -> Result<Vec<f64>> {
    check_interior(interior)?;
    Ok(mismatch(&layers_at(n, p, interior, params, None)?))
}

/// Newton controls for the finite-`p` junction solve.
pub fn klayer_options() -> LimitOptions {
    LimitOptions {
        tol: 1e-10,
        max_newton: 40,
        fd_step: 1e-6,
        ..LimitOptions::default()
    }
}

/// k-layer solution on the unit ball, seeded at the limit configuration.
pub fn solve_klayer(n: u32, p: f64, k: usize, params: &IntegratorParams) -> Result<KLayerSolution> {
    if k == 0 {
        return Err(Error::InvalidInput("layer count k must be at least 1".into()));
    }
    if k == 1 {
        return solve_1layer(n, p, 0.0, 1.0, params);
    }
    validate(n, p, 0.0, 1.0)?;
    let seed: Vec<f64> = if n >= 3 {
        let basis = GreenBasis::build(n, params)?;
        let cfg = limit::solve_limit_config(&basis, k, &LimitOptions::default())?;
        cfg.interior_junctions().to_vec()
    } else {
        (1..k).map(|j| j as f64 / k as f64).collect()
    };
    let cache = RefCell::new(vec![None; k]);
    let f = |beta: &[f64]| -> Result<Vec<f64>> {
        check_interior(beta)?;
        Ok(mismatch(&layers_at(n, p, beta, params, Some(&cache))?))
    };
    let opts = klayer_options();
    let beta = match limit::newton(f, &seed, &opts) {
        Ok((b, _)) => b,
        Err((last, best, reason)) => {
            return Err(Error::NoConvergence {
                reason,
                best_residual: best,
                last_iterate: last,
            })
        }
    };
    let layers = layers_at(n, p, &beta, params, Some(&cache))?;
    Ok(KLayerSolution::from_layers(n, p, layers))
}
