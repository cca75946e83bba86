//! Small numerical kernels shared by the solvers: Brent's root finder,
//! Gauss–Lobatto quadrature and a tridiagonal solver.

use crate::ode::Trajectory;

/// Brent's method on a bracket with `f(a)`, `f(b)` of opposite sign.
/// Returns the final bracket end on the same side as `b`'s sign together
/// with the last iterate, so callers can choose the side they need.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    max_iter: usize,
) -> BrentResult {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    debug_assert!(fa.signum() != fb.signum());
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            break;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    BrentResult {
        root: b,
        f_root: fb,
        other: c,
        f_other: fc,
        iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentResult {
    /// Best iterate.
    pub root: f64,
    pub f_root: f64,
    /// Opposite end of the final bracket.
    pub other: f64,
    pub f_other: f64,
    pub iterations: usize,
}

impl BrentResult {
    /// The end of the final bracket at which `f` is positive.
    pub fn positive_side(&self) -> f64 {
        if self.f_root >= 0.0 {
            self.root
        } else {
            self.other
        }
    }
}

/// Gauss–Lobatto rule on `[-1, 1]` including both end points.
#[derive(Debug, Clone)]
pub struct GaussLobatto {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLobatto {
    /// `m ≥ 2` nodes; exact for polynomials of degree `2m - 3`.
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "Gauss-Lobatto needs at least two nodes");
        let n = m - 1;
        let nf = n as f64;
        let mut nodes = vec![0.0; m];
        nodes[0] = -1.0;
        nodes[n] = 1.0;
        for (i, node) in nodes.iter_mut().enumerate().take(n).skip(1) {
            // Interior nodes are the zeros of P_n'; start from Chebyshev points.
            let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let ddp = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
                let dx = dp / ddp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *node = x;
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let (p, _) = legendre(n, x);
                2.0 / (nf * (nf + 1.0) * p * p)
            })
            .collect();
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

impl Default for GaussLobatto {
    fn default() -> Self {
        Self::new(7)
    }
}

/// `∫ f(r, u, u') dr` over the span of `traj`, one rule per accepted step
/// (each step split into `subdivisions` equal parts).
pub fn trajectory_integral<F>(traj: &Trajectory, rule: &GaussLobatto, subdivisions: usize, mut f: F) -> f64
where
    F: FnMut(f64, f64, f64) -> f64,
{
    let br = traj.breakpoints();
    let m = subdivisions.max(1);
    let mut total = 0.0;
    for w in br.windows(2) {
        let h = (w[1] - w[0]) / m as f64;
        for i in 0..m {
            let lo = w[0] + h * i as f64;
            total += rule.integrate(
                |r| {
                    let s = traj.eval(r);
                    f(r, s.u, s.du)
                },
                lo,
                lo + h,
            );
        }
    }
    total
}

/// Solve a tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// by the Thomas algorithm. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return None;
    }
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}
