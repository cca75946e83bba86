//! Adaptive integration of radial second-order equations of the form
//!
//! ```text
//! u'' + (N-1)/r u' = m u - u^p
//! ```
//!
//! which covers the linear operator `L u = -u'' - (N-1)/r u' + u` (`m = 1`,
//! no power), the shifted eigenvalue problem (`m = 1 - λ`) and the nonlinear
//! Neumann problem (`m = 1`, power `p`). Steps are taken with the
//! Dormand–Prince 5(4) pair under PI step control; accepted steps are stored
//! with `u, u', u'', u'''` so that dense output is a quintic Hermite
//! interpolant for both `u` and `u'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(r, u, u')` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

impl RadialState {
    pub fn new(r: f64, u: f64, du: f64) -> Self {
        Self { r, u, du }
    }

    fn is_finite(&self) -> bool {
        self.r.is_finite() && self.u.is_finite() && self.du.is_finite()
    }
}

/// Tolerances and step controls for the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorParams {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Radius at which the Taylor expansion about the origin hands over to
    /// the integrator.
    pub origin_offset: f64,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            h_init: 1e-4,
            h_min: 1e-14,
            max_steps: 2_000_000,
            origin_offset: 1e-6,
        }
    }
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.max_steps > 0
            && self.origin_offset > 0.0
            && self.origin_offset <= 1e-3;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "integrator parameters out of range: {self:?}"
            )))
        }
    }

    /// Same controls with both tolerances halved.
    pub fn halved(&self) -> Self {
        Self {
            rel_tol: 0.5 * self.rel_tol,
            abs_tol: 0.5 * self.abs_tol,
            ..*self
        }
    }

    pub fn with_tolerances(self, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..self
        }
    }
}

/// Direction of monotonicity of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    pub fn sign(self) -> f64 {
        match self {
            Monotonicity::Increasing => 1.0,
            Monotonicity::Decreasing => -1.0,
        }
    }
}

/// `u'' = -(N-1)/r u' + m u - u^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEquation {
    drift: f64,
    mass: f64,
    power: Option<f64>,
}

impl RadialEquation {
    /// `L u = 0` in dimension `n`.
    pub fn linear(n: u32) -> Self {
        Self {
            drift: f64::from(n) - 1.0,
            mass: 1.0,
            power: None,
        }
    }

    /// `-u'' - (N-1)/r u' + u = λ u`.
    pub fn eigen(n: u32, lambda: f64) -> Self {
        Self {
            drift: f64::from(n) - 1.0,
            mass: 1.0 - lambda,
            power: None,
        }
    }

    /// `-u'' - (N-1)/r u' + u = u^p`. `n = 1` gives the drift-free equation.
    pub fn nonlinear(n: u32, p: f64) -> Self {
        Self {
            drift: f64::from(n) - 1.0,
            mass: 1.0,
            power: Some(p),
        }
    }

    pub fn has_drift(&self) -> bool {
        self.drift != 0.0
    }

    /// Right-hand side `g(u) = m u - u^p` and its derivative in `u`.
    fn source(&self, u: f64) -> (f64, f64) {
        match self.power {
            None => (self.mass * u, self.mass),
            Some(p) => {
                let (up, dup) = power_and_slope(u, p);
                (self.mass * u - up, self.mass - dup)
            }
        }
    }

    pub fn accel(&self, r: f64, u: f64, du: f64) -> f64 {
        let drift = if self.drift == 0.0 { 0.0 } else { self.drift / r * du };
        self.source(u).0 - drift
    }

    /// Derivative of `u''` along a solution.
    pub fn jerk(&self, r: f64, u: f64, du: f64, ddu: f64) -> f64 {
        let slope = self.source(u).1;
        if self.drift == 0.0 {
            slope * du
        } else {
            self.drift * du / (r * r) + slope * du - self.drift / r * ddu
        }
    }

    /// Fourth-order Taylor start at `h0` for a solution regular at the
    /// origin with `u(0) = u0`. With `g(u) = m u - u^p` the expansion is
    /// `u = u0 + g(u0) r²/(2N) + g(u0) g'(u0) r⁴/(8N(N+2))`.
    pub fn series_start(&self, u0: f64, h0: f64) -> RadialState {
        let n = self.drift + 1.0;
        let (g, dg) = self.source(u0);
        let c2 = g / (2.0 * n);
        let c4 = g * dg / (8.0 * n * (n + 2.0));
        let h2 = h0 * h0;
        RadialState {
            r: h0,
            u: u0 + c2 * h2 + c4 * h2 * h2,
            du: 2.0 * c2 * h0 + 4.0 * c4 * h2 * h0,
        }
    }
}

/// `(u^p, p u^(p-1))` for `u > 0`, zero otherwise. Evaluated through
/// logarithms so that large exponents do not overflow prematurely.
pub fn power_and_slope(u: f64, p: f64) -> (f64, f64) {
    if u > 0.0 {
        let lu = u.ln();
        let up = (p * lu).exp();
        (up, p * ((p - 1.0) * lu).exp())
    } else {
        (0.0, 0.0)
    }
}

/// Taylor start at `h0` for the linear (`p = None`) or nonlinear equation.
pub fn origin_series_start(n: u32, p: Option<f64>, u0: f64, h0: f64) -> RadialState {
    let eq = match p {
        Some(p) => RadialEquation::nonlinear(n, p),
        None => RadialEquation::linear(n),
    };
    eq.series_start(u0, h0)
}

/// Events that end a guarded integration early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupGuard {
    /// Abort once `u` exceeds this value.
    pub upper: f64,
    /// Abort once `u` drops to or below this value.
    pub lower: f64,
    /// Abort once `u'` changes sign against this direction.
    pub monotone: Option<Monotonicity>,
}

impl BlowupGuard {
    /// `((p+1)/2)^(1/(p-1))`, the sup bound of a positive Neumann solution.
    pub fn energy_bound(p: f64) -> f64 {
        ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0))
    }

    pub fn for_exponent(p: f64, monotone: Option<Monotonicity>) -> Self {
        Self {
            upper: Self::energy_bound(p) + 0.5,
            lower: 0.0,
            monotone,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminationTag {
    ReachedEnd,
    /// `u` left the band `(lower, upper]` at radius `r`.
    ValueExceededBound {
        r: f64,
    },
    /// `u'` changed sign against the guarded direction at radius `r`.
    DerivativeSignFlip {
        r: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    r: f64,
    u: f64,
    du: f64,
    ddu: f64,
    dddu: f64,
}

impl Node {
    fn new(eq: &RadialEquation, r: f64, u: f64, du: f64) -> Self {
        let ddu = eq.accel(r, u, du);
        Self {
            r,
            u,
            du,
            ddu,
            dddu: eq.jerk(r, u, du, ddu),
        }
    }

    fn state(&self) -> RadialState {
        RadialState::new(self.r, self.u, self.du)
    }
}

/// Accepted steps of an integration with quintic Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    nodes: Vec<Node>,
}

fn hermite_weights(t: f64) -> [f64; 6] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
        0.5 * (t3 - 2.0 * t4 + t5),
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ]
}

fn hermite(n0: &Node, n1: &Node, r: f64) -> (f64, f64) {
    let h = n1.r - n0.r;
    let w = hermite_weights((r - n0.r) / h);
    let h2 = h * h;
    let u = n0.u * w[0] + h * n0.du * w[1] + h2 * n0.ddu * w[2] + h2 * n1.ddu * w[3] + h * n1.du * w[4] + n1.u * w[5];
    let du =
        n0.du * w[0] + h * n0.ddu * w[1] + h2 * n0.dddu * w[2] + h2 * n1.dddu * w[3] + h * n1.ddu * w[4] + n1.du * w[5];
    (u, du)
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> RadialState {
        self.nodes[0].state()
    }

    pub fn last(&self) -> RadialState {
        self.nodes[self.nodes.len() - 1].state()
    }

    pub fn is_forward(&self) -> bool {
        self.nodes.len() < 2 || self.nodes[1].r > self.nodes[0].r
    }

    /// `(min r, max r)` covered by the samples.
    pub fn range(&self) -> (f64, f64) {
        let a = self.nodes[0].r;
        let b = self.nodes[self.nodes.len() - 1].r;
        (a.min(b), a.max(b))
    }

    pub fn samples(&self) -> impl Iterator<Item = RadialState> + '_ {
        self.nodes.iter().map(Node::state)
    }

    /// Step end points in increasing order of `r`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.nodes.iter().map(|n| n.r).collect();
        if !self.is_forward() {
            r.reverse();
        }
        r
    }

    fn segment(&self, r: f64) -> usize {
        let last = self.nodes.len() - 1;
        if last == 0 {
            return 0;
        }
        let s = if self.is_forward() { 1.0 } else { -1.0 };
        let idx = self.nodes.partition_point(|n| s * n.r <= s * r);
        idx.clamp(1, last) - 1
    }

    /// Dense evaluation; radii outside the covered range are clamped to it.
    pub fn eval(&self, r: f64) -> RadialState {
        let (lo, hi) = self.range();
        let r = r.clamp(lo, hi);
        if self.nodes.len() == 1 {
            return self.nodes[0].state();
        }
        let i = self.segment(r);
        let (u, du) = hermite(&self.nodes[i], &self.nodes[i + 1], r);
        RadialState::new(r, u, du)
    }

    /// Value at `r`, with the Taylor expansion about the origin used below
    /// the first sample when the trajectory starts at the series hand-off.
    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).u
    }
}

/// Dormand–Prince 5(4) coefficients.
mod dp {
    pub const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    pub const A2: [f64; 1] = [0.2];
    pub const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    pub const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    pub const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
    pub const A6: [f64; 5] = [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ];
    pub const B: [f64; 6] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ];
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;

type Vec2 = [f64; 2];

fn field(eq: &RadialEquation, r: f64, y: Vec2) -> Vec2 {
    [y[1], eq.accel(r, y[0], y[1])]
}

fn combine(y: Vec2, h: f64, ks: &[Vec2], coeffs: &[f64]) -> Vec2 {
    let mut out = y;
    for (k, &c) in ks.iter().zip(coeffs) {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn bisect_event(n0: &Node, n1: &Node, f: impl Fn(f64, f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (n0.r, n1.r);
    let f_lo = {
        let (u, du) = (n0.u, n0.du);
        f(u, du)
    };
    let lo_sign = f_lo > 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let (u, du) = hermite(n0, n1, mid);
        if (f(u, du) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Integrate `eq` from `init` to `r_end`, stopping early on guard events.
pub fn integrate(
    eq: &RadialEquation,
    init: RadialState,
    r_end: f64,
    params: &IntegratorParams,
    guard: Option<&BlowupGuard>,
) -> Result<(Trajectory, TerminationTag)> {
    params.validate()?;
    if !init.is_finite() || !r_end.is_finite() {
        return Err(Error::InvalidInput("non-finite initial data".into()));
    }
    if init.r == r_end {
        return Err(Error::InvalidInput("empty integration interval".into()));
    }
    if eq.has_drift() && (init.r <= 0.0 || r_end <= 0.0) {
        return Err(Error::InvalidInput(
            "the radial drift is singular at r = 0; start from origin_series_start".into(),
        ));
    }

    let dir = (r_end - init.r).signum();
    let span = (r_end - init.r).abs();
    let mut r = init.r;
    let mut y = [init.u, init.du];
    let mut k1 = field(eq, r, y);
    let mut h = params.h_init.min(span) * dir;
    let mut nodes = vec![Node::new(eq, r, y[0], y[1])];
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;
    let mut steps = 0usize;
    let end_slack = 4.0 * f64::EPSILON * r_end.abs().max(1.0);

    loop {
        let remaining = r_end - r;
        if remaining.abs() <= end_slack {
            // Snap the final node onto the requested end point.
            if let Some(last) = nodes.last_mut() {
                if last.r != r_end {
                    *last = Node::new(eq, r_end, last.u, last.du);
                }
            }
            break;
        }
        if steps >= params.max_steps {
            return Err(Error::StepBudgetExceeded {
                max_steps: params.max_steps,
                r,
            });
        }
        let mut last_step = false;
        if h.abs() >= remaining.abs() {
            h = remaining;
            last_step = true;
        }
        if h.abs() < params.h_min && !last_step {
            return Err(Error::StepUnderflow { r, h: h.abs() });
        }
        steps += 1;

        let k2 = field(eq, r + dp::C[1] * h, combine(y, h, &[k1], &dp::A2));
        let k3 = field(eq, r + dp::C[2] * h, combine(y, h, &[k1, k2], &dp::A3));
        let k4 = field(eq, r + dp::C[3] * h, combine(y, h, &[k1, k2, k3], &dp::A4));
        let k5 = field(eq, r + dp::C[4] * h, combine(y, h, &[k1, k2, k3, k4], &dp::A5));
        let k6 = field(eq, r + h, combine(y, h, &[k1, k2, k3, k4, k5], &dp::A6));
        let y_new = combine(y, h, &[k1, k2, k3, k4, k5, k6], &dp::B);
        let r_new = if last_step { r_end } else { r + h };
        let k7 = field(eq, r_new, y_new);

        let ks = [k1, k2, k3, k4, k5, k6, k7];
        let mut err_sq = 0.0;
        for c in 0..2 {
            let e: f64 = ks.iter().zip(dp::E.iter()).map(|(k, &w)| w * k[c]).sum::<f64>() * h;
            let sc = params.abs_tol + params.rel_tol * y[c].abs().max(y_new[c].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (0.5 * err_sq).sqrt();
        if !err.is_finite() {
            if h.abs() <= params.h_min {
                return Err(Error::NonFiniteState { r });
            }
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - PI_BETA * 0.75);
        if err <= 1.0 {
            if !(y_new[0].is_finite() && y_new[1].is_finite()) {
                return Err(Error::NonFiniteState { r: r_new });
            }
            let fac = (fac11 / fac_old.powf(PI_BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            fac_old = err.max(1e-4);
            if last_rejected {
                h_new = h_new.abs().min(h.abs()) * dir;
            }
            last_rejected = false;

            r = r_new;
            y = y_new;
            k1 = k7;
            let node = Node {
                r,
                u: y[0],
                du: y[1],
                ddu: k7[1],
                dddu: eq.jerk(r, y[0], y[1], k7[1]),
            };
            let prev = nodes[nodes.len() - 1];
            nodes.push(node);

            if let Some(g) = guard {
                if let Some((r_ev, tag)) = check_guard(g, &prev, &node) {
                    let (u, du) = hermite(&prev, &node, r_ev);
                    let last = nodes.len() - 1;
                    nodes[last] = Node::new(eq, r_ev, u, du);
                    if nodes[last].r == prev.r {
                        nodes.pop();
                    }
                    return Ok((Trajectory { nodes }, tag));
                }
            }
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    Ok((Trajectory { nodes }, TerminationTag::ReachedEnd))
}

fn check_guard(g: &BlowupGuard, prev: &Node, node: &Node) -> Option<(f64, TerminationTag)> {
    let mut events: Vec<(f64, TerminationTag)> = Vec::new();
    if node.u > g.upper {
        let r = bisect_event(prev, node, |u, _| u - g.upper);
        events.push((r, TerminationTag::ValueExceededBound { r }));
    }
    if node.u <= g.lower {
        let r = bisect_event(prev, node, |u, _| u - g.lower);
        events.push((r, TerminationTag::ValueExceededBound { r }));
    }
    if let Some(m) = g.monotone {
        let s = m.sign();
        if s * node.du < 0.0 {
            let r = if s * prev.du < 0.0 {
                prev.r
            } else {
                bisect_event(prev, node, |_, du| s * du)
            };
            events.push((r, TerminationTag::DerivativeSignFlip { r }));
        }
    }
    let dir = (node.r - prev.r).signum();
    events.into_iter().min_by(|a, b| (dir * a.0).total_cmp(&(dir * b.0)))
}

fn check_dimension(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    Ok(())
}

/// Solve `L u = 0` on `interval` (either direction) from `init`.
pub fn integrate_linear(
    n: u32,
    interval: (f64, f64),
    init: RadialState,
    params: &IntegratorParams,
) -> Result<Trajectory> {
    check_dimension(n)?;
    if init.r != interval.0 {
        return Err(Error::InvalidInput(
            "initial state must sit at the interval start".into(),
        ));
    }
    integrate(&RadialEquation::linear(n), init, interval.1, params, None).map(|(t, _)| t)
}

/// Solve `-u'' - (N-1)/r u' + u = u^p` on `interval` from `init`.
pub fn integrate_nonlinear(
    n: u32,
    p: f64,
    interval: (f64, f64),
    init: RadialState,
    params: &IntegratorParams,
    guard: &BlowupGuard,
) -> Result<(Trajectory, TerminationTag)> {
    check_dimension(n)?;
    if p <= 1.0 {
        return Err(Error::InvalidInput(format!("exponent p = {p} must exceed 1")));
    }
    if init.u < 0.0 {
        return Err(Error::InvalidInput("initial value must be non-negative".into()));
    }
    if init.r != interval.0 {
        return Err(Error::InvalidInput(
            "initial state must sit at the interval start".into(),
        ));
    }
    integrate(&RadialEquation::nonlinear(n, p), init, interval.1, params, Some(guard))
}

/// Start state at the left end: the interval end itself for annuli, the
/// series hand-off for the ball.
pub(crate) fn left_start(eq: &RadialEquation, a: f64, u0: f64, params: &IntegratorParams) -> RadialState {
    if a == 0.0 && eq.has_drift() {
        eq.series_start(u0, params.origin_offset)
    } else {
        RadialState::new(a, u0, 0.0)
    }
}

/// `v'(b)` for the eigenfunction with `v(a) = 1, v'(a) = 0` at trial `λ`.
fn eigen_end_slope(n: u32, a: f64, b: f64, lambda: f64, params: &IntegratorParams) -> Result<f64> {
    let eq = RadialEquation::eigen(n, lambda);
    let start = left_start(&eq, a, 1.0, params);
    let (traj, _) = integrate(&eq, start, b, params, None)?;
    Ok(traj.last().du)
}

/// Second radial Neumann eigenvalue of `-Δ + 1` on `a < |x| < b`.
///
/// The constant eigenfunction gives `λ = 1`; the first sign change of
/// `v'(b; λ)` above it is bracketed on a grid in `sqrt(λ - 1) (b - a)` and
/// refined by bisection.
pub fn neumann_lambda2(n: u32, a: f64, b: f64) -> Result<f64> {
    neumann_lambda2_with(n, a, b, &IntegratorParams::default())
}

pub fn neumann_lambda2_with(n: u32, a: f64, b: f64, params: &IntegratorParams) -> Result<f64> {
    check_dimension(n)?;
    if !(0.0 <= a && a < b && b.is_finite()) {
        return Err(Error::InvalidInput(format!("need 0 <= a < b, got [{a}, {b}]")));
    }
    let len = b - a;
    let lambda_at = |x: f64| 1.0 + (x / len).powi(2);
    const DX: f64 = 0.25;
    const X_MAX: f64 = 400.0;

    let mut x_lo = DX;
    let mut s_lo = eigen_end_slope(n, a, b, lambda_at(x_lo), params)?;
    let mut bracket = None;
    while x_lo < X_MAX {
        let x_hi = x_lo + DX;
        let s_hi = eigen_end_slope(n, a, b, lambda_at(x_hi), params)?;
        if s_lo == 0.0 {
            return Ok(lambda_at(x_lo));
        }
        if s_lo.signum() != s_hi.signum() {
            bracket = Some((lambda_at(x_lo), s_lo, lambda_at(x_hi)));
            break;
        }
        x_lo = x_hi;
        s_lo = s_hi;
    }
    let (mut lo, s_lo, mut hi) = bracket.ok_or(Error::BracketNotFound {
        ceiling: lambda_at(X_MAX),
    })?;
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        let s = eigen_end_slope(n, a, b, mid, params)?;
        if s == 0.0 {
            return Ok(mid);
        }
        if s.signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
