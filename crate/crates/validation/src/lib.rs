//! Independent reference computations used by the test suites of
//! `neumann-layers`. Nothing here depends on that crate: closed-form roots,
//! a dense eigensolve, fixed-step RK4 and a finite-difference collocation
//! solver are all written out from scratch.

use nalgebra::{DMatrix, SymmetricEigen};

/// Bisection root of `f` on a sign-change bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of `coth s + 1 - 2/s` on (0, 1): the N = 3 ball reflection point.
pub fn reflection_point_n3() -> f64 {
    bisect(|s: f64| 1.0 / s.tanh() + 1.0 - 2.0 / s, 0.3, 0.99)
}

/// N = 3 ball: λ₂ = 1 + μ² with μ the first positive root of tan μ = μ.
pub fn lambda2_ball_n3() -> f64 {
    let mu = bisect(|m: f64| m.sin() - m * m.cos(), 4.0, 4.6);
    1.0 + mu * mu
}

/// N = 3 annulus: radial Neumann eigenfunctions are `(A sin μr + B cos μr)/r`.
/// Returns `1 + μ²` for the first `μ > 0` at which the 2×2 boundary system
/// is singular.
pub fn lambda2_annulus_n3(a: f64, b: f64) -> f64 {
    // d/dr [sin(μr)/r] = (μ r cos μr - sin μr)/r², same for cos.
    let det = |m: f64| {
        let ds = |r: f64| m * r * (m * r).cos() - (m * r).sin();
        let dc = |r: f64| -m * r * (m * r).sin() - (m * r).cos();
        ds(a) * dc(b) - dc(a) * ds(b)
    };
    let mut lo = 1e-3;
    let step = 1e-3;
    while det(lo) * det(lo + step) > 0.0 {
        lo += step;
        assert!(lo < 200.0, "no root");
    }
    let mu = bisect(det, lo, lo + step);
    1.0 + mu * mu
}

/// Radial Neumann eigenvalues of `-Δ + 1` from a dense symmetric eigensolve
/// of the cell-centred discretization with `m` cells; the `count` smallest.
pub fn dense_radial_eigenvalues(n: u32, a: f64, b: f64, m: usize, q: &dyn Fn(f64) -> f64, count: usize) -> Vec<f64> {
    let h = (b - a) / m as f64;
    let nm1 = n as i32 - 1;
    let centre = |i: usize| a + (i as f64 + 0.5) * h;
    let face = |i: usize| a + i as f64 * h;
    // Cell volumes ∫ r^{N-1}, exact.
    let vol: Vec<f64> = (0..m)
        .map(|i| (face(i + 1).powi(n as i32) - face(i).powi(n as i32)) / n as f64)
        .collect();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        mat[(i, i)] += q(centre(i));
        if i + 1 < m {
            let k = face(i + 1).powi(nm1) / h;
            let s = (vol[i] * vol[i + 1]).sqrt();
            mat[(i, i)] += k / vol[i];
            mat[(i + 1, i + 1)] += k / vol[i + 1];
            mat[(i, i + 1)] -= k / s;
            mat[(i + 1, i)] -= k / s;
        }
    }
    let eig = SymmetricEigen::new(mat);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(count);
    vals
}

/// Richardson-extrapolated dense eigenvalues (second-order scheme).
pub fn richardson_eigenvalues(n: u32, a: f64, b: f64, m: usize, q: &dyn Fn(f64) -> f64, count: usize) -> Vec<f64> {
    let coarse = dense_radial_eigenvalues(n, a, b, m, q, count);
    let fine = dense_radial_eigenvalues(n, a, b, 2 * m, q, count);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

/// Fixed-step classical RK4 for `u'' = -(N-1)/r u' + u - u^p`.
pub fn rk4_nonlinear(n: u32, p: f64, r0: f64, u0: f64, du0: f64, r1: f64, steps: usize) -> (f64, f64) {
    let f = |r: f64, u: f64, v: f64| -> (f64, f64) {
        let drift = if n == 1 { 0.0 } else { (n as f64 - 1.0) / r * v };
        (v, -drift + u - u.max(0.0).powf(p))
    };
    let h = (r1 - r0) / steps as f64;
    let (mut r, mut u, mut v) = (r0, u0, du0);
    for _ in 0..steps {
        let k1 = f(r, u, v);
        let k2 = f(r + 0.5 * h, u + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
        let k3 = f(r + 0.5 * h, u + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
        let k4 = f(r + h, u + h * k3.0, v + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        r += h;
    }
    (u, v)
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Centred finite differences for `-u'' - (N-1)/r u' + u = u^p` on `m + 1`
/// equispaced nodes of `[a, b]` with ghost-node Neumann rows (and the
/// `N u''(0)` limit at the origin), solved by Newton from `seed`.
/// Returns the nodal values.
pub fn collocation(n: u32, p: f64, a: f64, b: f64, m: usize, seed: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let h = (b - a) / m as f64;
    let r: Vec<f64> = (0..=m).map(|i| a + h * i as f64).collect();
    let mut u: Vec<f64> = r.iter().map(|&x| seed(x)).collect();
    let nn = m + 1;
    let h2 = h * h;
    for _ in 0..50 {
        let mut lower = vec![0.0; nn];
        let mut diag = vec![0.0; nn];
        let mut upper = vec![0.0; nn];
        let mut res = vec![0.0; nn];
        for i in 0..nn {
            let up = u[i].max(0.0).powf(p);
            let dup = p * u[i].max(0.0).powf(p - 1.0);
            let (l, c, rr);
            if i == 0 || i == m {
                // Ghost node mirrors the neighbour; the drift vanishes with u'.
                let nb = if i == 0 { 1 } else { m - 1 };
                let factor = if i == 0 && a == 0.0 { n as f64 } else { 1.0 };
                c = 2.0 * factor / h2;
                let off = -2.0 * factor / h2;
                res[i] = c * u[i] + off * u[nb] + u[i] - up;
                diag[i] = c + 1.0 - dup;
                if i == 0 {
                    upper[i] = off;
                } else {
                    lower[i] = off;
                }
                continue;
            }
            let drift = if n == 1 { 0.0 } else { (n as f64 - 1.0) / r[i] };
            l = -1.0 / h2 + drift / (2.0 * h);
            rr = -1.0 / h2 - drift / (2.0 * h);
            c = 2.0 / h2;
            res[i] = l * u[i - 1] + c * u[i] + rr * u[i + 1] + u[i] - up;
            lower[i] = l;
            diag[i] = c + 1.0 - dup;
            upper[i] = rr;
        }
        let du = thomas(&lower, &diag, &upper, &res);
        let mut step: f64 = 0.0;
        for i in 0..nn {
            u[i] -= du[i];
            step = step.max(du[i].abs());
        }
        if step < 1e-14 {
            break;
        }
    }
    u
}

/// Richardson combination of the `m`- and `2m`-cell collocation solutions
/// at the nodes of the coarse grid: `(r_i, u_i)`.
pub fn collocation_richardson(n: u32, p: f64, a: f64, b: f64, m: usize, seed: &dyn Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let coarse = collocation(n, p, a, b, m, seed);
    let fine = collocation(n, p, a, b, 2 * m, seed);
    let h = (b - a) / m as f64;
    coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (a + h * i as f64, (4.0 * fine[2 * i] - c) / 3.0))
        .collect()
}
