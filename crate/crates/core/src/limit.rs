//! The `p = ∞` problem: reflection points, 1-layer limit profiles, the
//! junction-mismatch map `M∞`, k-layer configurations and their amplitudes.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{AnnulusBasis, GreenBasis};
use crate::error::{Error, Result};

/// Interval width at which the reflection-point bisection stops.
pub const REFLECTION_WIDTH: f64 = 1e-13;

/// Zero of `ξ_{[a,b]}'/ξ_{[a,b]} + ζ_{[a,b]}'/ζ_{[a,b]}` in `(a, b)`.
pub fn reflection_point(ab: &AnnulusBasis) -> Result<f64> {
    let (a, b) = (ab.a(), ab.b());
    let f_a = if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        ab.reflection_law(a)
    };
    let f_b = ab.reflection_law(b);
    if !(f_a < 0.0 && f_b > 0.0) {
        return Err(Error::BracketFailure { a, b });
    }
    let (mut lo, mut hi) = (a, b);
    while hi - lo > REFLECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = ab.reflection_law(mid);
        if f.is_nan() {
            return Err(Error::BracketFailure { a, b });
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `G_{[a,b]}(r, α)/G_{[a,b]}(α, α)` and its derivative: `ξ_{[a,b]}(r)/ξ_{[a,b]}(α)`
/// left of `α`, `ζ_{[a,b]}(r)/ζ_{[a,b]}(α)` right of it.
pub fn one_layer_value(ab: &AnnulusBasis, alpha: f64, r: f64) -> (f64, f64) {
    if r <= alpha {
        let (x, dx) = ab.xi(r);
        let x0 = ab.xi(alpha).0;
        (x / x0, dx / x0)
    } else {
        let (z, dz) = ab.zeta(r);
        let z0 = ab.zeta(alpha).0;
        (z / z0, dz / z0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub piece: usize,
}

/// Reflection point and 1-layer limit profile on `grid`.
pub fn limit_1layer(ab: &AnnulusBasis, grid: &[f64]) -> Result<(f64, Vec<ProfilePoint>)> {
    let alpha = reflection_point(ab)?;
    let mut out = Vec::with_capacity(grid.len());
    for &r in grid {
        if r < ab.a() || r > ab.b() {
            return Err(Error::OutOfInterval {
                x: r,
                a: ab.a(),
                b: ab.b(),
            });
        }
        let (u, du) = one_layer_value(ab, alpha, r);
        out.push(ProfilePoint {
            r,
            u,
            du,
            piece: usize::from(r > alpha),
        });
    }
    Ok((alpha, out))
}

fn check_junctions(beta: &[f64]) -> Result<()> {
    let ordered = beta.iter().all(|b| *b > 0.0 && *b < 1.0) && beta.windows(2).all(|w| w[0] < w[1]);
    if ordered {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "junctions must satisfy 0 < beta_1 < ... < 1, got {beta:?}"
        )))
    }
}

/// `[0, β_1, …, β_{k-1}, 1]`.
pub fn full_junctions(interior: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(0.0);
    v.extend_from_slice(interior);
    v.push(1.0);
    v
}

/// Reflection points of the intervals between consecutive junctions.
pub fn layer_points(basis: &GreenBasis, interior: &[f64]) -> Result<Vec<f64>> {
    check_junctions(interior)?;
    let full = full_junctions(interior);
    full.windows(2)
        .map(|w| reflection_point(&basis.annulus(w[0], w[1])?))
        .collect()
}

/// `M∞(β)`: jump of adjacent 1-layer limit profiles at each interior
/// junction, written through `ξ, ζ` only:
///
/// `M^{(j)} = β_j^{1-N} [ 1/(ξ'(β_j)ζ(α_{j+1}) - ξ(α_{j+1})ζ'(β_j))
///                      - 1/(ξ'(β_j)ζ(α_j) - ξ(α_j)ζ'(β_j)) ]`.
pub fn m_infty(basis: &GreenBasis, interior: &[f64]) -> Result<Vec<f64>> {
    let alpha = layer_points(basis, interior)?;
    Ok(m_infty_at(basis, interior, &alpha))
}

fn m_infty_at(basis: &GreenBasis, interior: &[f64], alpha: &[f64]) -> Vec<f64> {
    let n = basis.dimension() as i32;
    interior
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let (_, dxb) = basis.xi(b);
            let (_, dzb) = basis.zeta(b);
            let cross = |s: f64| {
                let (x, _) = basis.xi(s);
                let (z, _) = basis.zeta(s);
                dxb * z - x * dzb
            };
            b.powi(1 - n) * (1.0 / cross(alpha[j + 1]) - 1.0 / cross(alpha[j]))
        })
        .collect()
}

/// `M∞(β)` evaluated as the difference of the normalized adapted pairs,
/// `ξ_{[β_j, β_{j+1}]}(β_j)/ξ_{[β_j, β_{j+1}]}(α_{j+1}) - ζ_{[β_{j-1}, β_j]}(β_j)/ζ_{[β_{j-1}, β_j]}(α_j)`.
pub fn m_infty_quotient(basis: &GreenBasis, interior: &[f64]) -> Result<Vec<f64>> {
    check_junctions(interior)?;
    let full = full_junctions(interior);
    let pieces: Vec<AnnulusBasis> = full
        .windows(2)
        .map(|w| basis.annulus(w[0], w[1]))
        .collect::<Result<_>>()?;
    let alpha: Vec<f64> = pieces.iter().map(reflection_point).collect::<Result<_>>()?;
    Ok((0..interior.len())
        .map(|j| {
            let b = interior[j];
            let right = one_layer_value(&pieces[j + 1], alpha[j + 1], b).0;
            let left = one_layer_value(&pieces[j], alpha[j], b).0;
            right - left
        })
        .collect())
}

/// Continuity condition on the junctions,
/// `ξ'(β_j)/ζ'(β_j) - (ξ(α_{j+1}) - ξ(α_j))/(ζ(α_{j+1}) - ζ(α_j))`.
pub fn junction_residual(basis: &GreenBasis, interior: &[f64], alpha: &[f64]) -> Vec<f64> {
    interior
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let (x0, _) = basis.xi(alpha[j]);
            let (z0, _) = basis.zeta(alpha[j]);
            let (x1, _) = basis.xi(alpha[j + 1]);
            let (z1, _) = basis.zeta(alpha[j + 1]);
            basis.xi(b).1 / basis.zeta(b).1 - (x1 - x0) / (z1 - z0)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Amplitudes {
    pub values: Vec<f64>,
    /// `‖G A - 1‖∞`.
    pub residual: f64,
    /// Ratio of extreme singular values of the system matrix.
    pub condition: f64,
}

/// Largest accepted condition number of the amplitude system.
pub const MAX_CONDITION: f64 = 1e12;

/// Solve `Σ_j A_j G(α_i, α_j) = 1` with `G` on the unit ball.
pub fn amplitudes(basis: &GreenBasis, alpha: &[f64]) -> Result<Amplitudes> {
    amplitudes_scaled(basis, alpha, 1.0)
}

/// Same system with the Green matrix multiplied by `scale`.
pub fn amplitudes_scaled(basis: &GreenBasis, alpha: &[f64], scale: f64) -> Result<Amplitudes> {
    if alpha.is_empty() || !alpha.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("layer points must be increasing".into()));
    }
    let ab = basis.annulus(0.0, 1.0)?;
    let k = alpha.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = scale * ab.green(alpha[i], alpha[j])?;
        }
    }
    let sv = g.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSystem { condition });
    }
    let ones = DVector::from_element(k, 1.0);
    let sol = g.clone().lu().solve(&ones).ok_or(Error::SingularSystem { condition })?;
    let residual = (&g * &sol - ones).amax();
    Ok(Amplitudes {
        values: sol.iter().copied().collect(),
        residual,
        condition,
    })
}

/// `φ(s_1, …, s_k) = |∂B₁| Σ_j A_j s_j^{N-1}` where `Σ_j A_j G(s_i, s_j) = 1`.
pub fn phi_multi(basis: &GreenBasis, s: &[f64]) -> Result<f64> {
    let amp = amplitudes(basis, s)?;
    let n = basis.dimension() as i32;
    Ok(basis.sphere_area() * amp.values.iter().zip(s).map(|(a, s)| a * s.powi(n - 1)).sum::<f64>())
}

/// Centered finite-difference gradient of [`phi_multi`].
pub fn phi_gradient(basis: &GreenBasis, s: &[f64], h: f64) -> Result<Vec<f64>> {
    (0..s.len())
        .map(|i| {
            let mut plus = s.to_vec();
            let mut minus = s.to_vec();
            plus[i] += h;
            minus[i] -= h;
            Ok((phi_multi(basis, &plus)? - phi_multi(basis, &minus)?) / (2.0 * h))
        })
        .collect()
}

/// Left-hand sides of the criticality conditions of `φ` at `α`: for
/// `k = 1` the reflection law on the unit ball, otherwise the first-layer,
/// interior-layer and last-layer forms written through `ξ, ζ`.
pub fn phi_criticality_residual(basis: &GreenBasis, alpha: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let v: Vec<_> = alpha.iter().map(|&s| basis.eval(s)).collect();
    // Coupling of layer x to neighbour y.
    let coupling = |x: usize, y: usize| {
        let (a, b) = (&v[x], &v[y]);
        let num = a.dzeta * (b.xi - a.xi) - a.dxi * (b.zeta - a.zeta);
        let den = b.xi * a.zeta - b.zeta * a.xi;
        num / den
    };
    (0..k)
        .map(|j| {
            let left = if j == 0 { v[0].dxi / v[0].xi } else { coupling(j, j - 1) };
            let right = if j + 1 == k {
                v[j].dzeta / v[j].zeta
            } else {
                coupling(j, j + 1)
            };
            left + right
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitOptions {
    /// Target for `‖M∞‖∞`.
    pub tol: f64,
    pub max_newton: usize,
    /// Relative step of the finite-difference Jacobian.
    pub fd_step: f64,
    pub max_halvings: usize,
    pub homotopy_steps: usize,
    /// When positive, also run Newton from every ordered seed drawn from a
    /// lattice with this many points per axis and report distinct roots.
    pub scan_lattice: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_newton: 60,
            fd_step: 1e-7,
            max_halvings: 30,
            homotopy_steps: 50,
            scan_lattice: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitLayerConfig {
    pub n: u32,
    pub k: usize,
    /// `β_0 = 0 < β_1 < … < β_k = 1`.
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub residual_m: f64,
    pub residual_phi: f64,
    pub residual_junction: f64,
    pub residual_amplitude: f64,
    pub used_homotopy: bool,
    /// Further distinct junction vectors found by the lattice scan.
    pub other_roots: Vec<Vec<f64>>,
}

impl LimitLayerConfig {
    pub fn interior_junctions(&self) -> &[f64] {
        &self.beta[1..self.k]
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn is_ordered(beta: &[f64]) -> bool {
    check_junctions(beta).is_ok()
}

/// `Ok((root, residual))`, or `Err((best iterate, best residual, reason))`.
pub(crate) type NewtonOutcome = std::result::Result<(Vec<f64>, f64), (Vec<f64>, f64, String)>;

/// Damped Newton on `F(β) = 0` with a centered finite-difference Jacobian.
pub(crate) fn newton<F>(f: F, seed: &[f64], opts: &LimitOptions) -> NewtonOutcome
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = seed.len();
    let mut x = seed.to_vec();
    let mut fx = match f(&x) {
        Ok(v) => v,
        Err(e) => return Err((x, f64::INFINITY, e.to_string())),
    };
    let mut norm = sup(&fx);
    for _ in 0..opts.max_newton {
        if norm < opts.tol {
            return Ok((x, norm));
        }
        let mut jac = DMatrix::zeros(m, m);
        for c in 0..m {
            let h = opts.fd_step * x[c].abs().max(1e-3);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = match (f(&xp), f(&xm)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Err((x, norm, "Jacobian probe left the admissible set".into())),
            };
            for r in 0..m {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(m, fx.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err((x, norm, "singular Jacobian".into()));
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(ft) = f(&trial) {
                let nt = sup(&ft);
                if nt < norm {
                    x = trial;
                    fx = ft;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stalled at the evaluation noise floor or in a bad basin.
            return if norm < 1e3 * opts.tol {
                Ok((x, norm))
            } else {
                Err((x, norm, "line search failed".into()))
            };
        }
    }
    if norm < opts.tol {
        Ok((x, norm))
    } else {
        Err((x, norm, "Newton iteration budget exhausted".into()))
    }
}

/// Junction mismatch as a fallible map; outside the ordered simplex it fails.
fn m_map(basis: &GreenBasis) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    move |beta: &[f64]| {
        if !is_ordered(beta) {
            return Err(Error::InvalidInput("unordered junctions".into()));
        }
        m_infty(basis, beta)
    }
}

/// Follow `H(t, β) = t M∞(β) + (1 - t)(β - P)` from `t = 0` (root `P`) to `t = 1`.
fn homotopy(basis: &GreenBasis, seed: &[f64], opts: &LimitOptions) -> NewtonOutcome {
    let mut x = seed.to_vec();
    let m_of = m_map(basis);
    let inner = LimitOptions { tol: opts.tol, ..*opts };
    for step in 1..=opts.homotopy_steps {
        let t = step as f64 / opts.homotopy_steps as f64;
        let h = |b: &[f64]| -> Result<Vec<f64>> {
            let m = m_of(b)?;
            Ok(m.iter()
                .zip(b.iter().zip(seed))
                .map(|(mv, (bv, pv))| t * mv + (1.0 - t) * (bv - pv))
                .collect())
        };
        match newton(h, &x, &inner) {
            Ok((next, _)) => x = next,
            Err(e) => return Err(e),
        }
    }
    newton(m_of, &x, opts)
}

fn lattice_seeds(dim: usize, points: usize) -> Vec<Vec<f64>> {
    let values: Vec<f64> = (1..=points).map(|i| i as f64 / (points + 1) as f64).collect();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    if dim == 0 || dim > points {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| values[i]).collect());
        // next strictly increasing index tuple
        let mut pos = dim;
        while pos > 0 {
            pos -= 1;
            if idx[pos] < points - dim + pos {
                idx[pos] += 1;
                for q in pos + 1..dim {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
    }
}

/// Junctions, layer points and amplitudes of a k-layer limit solution.
pub fn solve_limit_config(basis: &GreenBasis, k: usize, opts: &LimitOptions) -> Result<LimitLayerConfig> {
    if k == 0 {
        return Err(Error::InvalidInput("layer count k must be at least 1".into()));
    }
    let seed: Vec<f64> = (1..k).map(|j| j as f64 / k as f64).collect();
    let (interior, used_homotopy) = if k == 1 {
        (Vec::new(), false)
    } else {
        match newton(m_map(basis), &seed, opts) {
            Ok((b, _)) => (b, false),
            Err(_) => match homotopy(basis, &seed, opts) {
                Ok((b, _)) => (b, true),
                Err((last, best, reason)) => {
                    return Err(Error::NoConvergence {
                        reason,
                        best_residual: best,
                        last_iterate: last,
                    })
                }
            },
        }
    };

    let mut other_roots: Vec<Vec<f64>> = Vec::new();
    if k > 1 && opts.scan_lattice > 0 {
        let seeds = lattice_seeds(k - 1, opts.scan_lattice);
        let solve = |s: &Vec<f64>| newton(m_map(basis), s, opts).ok().map(|(b, _)| b);
        #[cfg(feature = "parallel")]
        let found: Vec<Vec<f64>> = {
            use rayon::prelude::*;
            seeds.par_iter().filter_map(solve).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let found: Vec<Vec<f64>> = seeds.iter().filter_map(solve).collect();
        for root in found {
            let distinct = |other: &Vec<f64>| root.iter().zip(other).any(|(a, b)| (a - b).abs() > 1e-6);
            if distinct(&interior) && other_roots.iter().all(distinct) {
                other_roots.push(root);
            }
        }
    }

    config_from_junctions(basis, &interior, used_homotopy, other_roots)
}

/// Assemble and certify a configuration at given interior junctions.
pub fn config_from_junctions(
    basis: &GreenBasis,
    interior: &[f64],
    used_homotopy: bool,
    other_roots: Vec<Vec<f64>>,
) -> Result<LimitLayerConfig> {
    let alpha = layer_points(basis, interior)?;
    let m = m_infty_at(basis, interior, &alpha);
    let amp = amplitudes(basis, &alpha)?;
    let crit = phi_criticality_residual(basis, &alpha);
    let jr = junction_residual(basis, interior, &alpha);
    Ok(LimitLayerConfig {
        n: basis.dimension(),
        k: alpha.len(),
        beta: full_junctions(interior),
        alpha,
        amplitude: amp.values,
        residual_m: sup(&m),
        residual_phi: sup(&crit),
        residual_junction: sup(&jr),
        residual_amplitude: amp.residual,
        used_homotopy,
        other_roots,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitProfile {
    pub points: Vec<ProfilePoint>,
    /// `Σ_j A_j G(r, α_j)` on the same grid.
    pub amplitude_sum: Vec<f64>,
    /// `sup |piecewise - amplitude sum|`.
    pub representation_gap: f64,
}

/// Piecewise normalized Green quotients and the amplitude sum on `grid`.
pub fn assemble_limit_profile(basis: &GreenBasis, config: &LimitLayerConfig, grid: &[f64]) -> Result<LimitProfile> {
    let pieces: Vec<AnnulusBasis> = config
        .beta
        .windows(2)
        .map(|w| basis.annulus(w[0], w[1]))
        .collect::<Result<_>>()?;
    let ball = basis.annulus(0.0, 1.0)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut sum = Vec::with_capacity(grid.len());
    let mut gap: f64 = 0.0;
    for &r in grid {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfInterval { x: r, a: 0.0, b: 1.0 });
        }
        let j = config.beta[1..config.k].partition_point(|b| *b < r);
        let (u, du) = one_layer_value(&pieces[j], config.alpha[j], r);
        let mut s = 0.0;
        for (a, al) in config.amplitude.iter().zip(&config.alpha) {
            s += a * ball.green(r, *al)?;
        }
        gap = gap.max((u - s).abs());
        points.push(ProfilePoint { r, u, du, piece: j });
        sum.push(s);
    }
    Ok(LimitProfile {
        points,
        amplitude_sum: sum,
        representation_gap: gap,
    })
}

/// `n` equispaced radii on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
