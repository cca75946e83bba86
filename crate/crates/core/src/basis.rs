//! The fundamental pair `(ξ, ζ)` of `L u = -u'' - (N-1)/r u' + u = 0`, the
//! Neumann-adapted pairs on sub-intervals, their Green functions and the
//! one-point Robin energy `φ`.
//!
//! `ξ` is the solution regular at the origin with `ξ(0) = 1/(N-2)`, `ζ` the
//! solution with `ζ'(1) = 0`, and the pair is scaled so that
//! `r^{N-1} (ξ' ζ - ξ ζ') = 1`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate, IntegratorParams, RadialEquation, RadialState, Trajectory};

/// Below this radius `ζ` is continued analytically instead of integrated.
pub const ZETA_MIN_RADIUS: f64 = 1e-4;

/// Shortest interval accepted by [`GreenBasis::annulus`].
pub const MIN_INTERVAL: f64 = 1e-8;

/// Surface area of the unit sphere in `R^N`, `2 π^{N/2} / Γ(N/2)`.
pub fn unit_sphere_area(n: u32) -> f64 {
    // Γ(N/2) by the recursion Γ(x+1) = x Γ(x) from Γ(1) = 1 or Γ(1/2) = √π.
    let (mut x, mut gamma) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = f64::from(n) / 2.0;
    while x < target {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(target) / gamma
}

/// `(value, derivative)` of one basis function at one radius.
pub type Eval = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisValue {
    pub r: f64,
    pub xi: f64,
    pub dxi: f64,
    pub zeta: f64,
    pub dzeta: f64,
}

#[derive(Debug, Clone)]
pub enum Representation {
    ClosedFormN3,
    Tabulated {
        xi: Trajectory,
        /// Solution with value 1 and slope 0 at `r = 1`; `ζ = zeta_raw / scale`.
        zeta_raw: Trajectory,
        scale: f64,
    },
}

#[derive(Debug)]
struct Inner {
    n: u32,
    sphere: f64,
    repr: Representation,
    params: IntegratorParams,
}

/// Fundamental pair `(ξ, ζ)` in dimension `N`. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct GreenBasis {
    inner: Arc<Inner>,
}

impl GreenBasis {
    /// Closed forms for `N = 3`, integrated tables otherwise.
    pub fn build(n: u32, params: &IntegratorParams) -> Result<Self> {
        if n == 3 {
            check_dimension(n)?;
            params.validate()?;
            Ok(Self::wrap(n, Representation::ClosedFormN3, *params))
        } else {
            Self::build_tabulated(n, params)
        }
    }

    /// Integrated tables in any dimension `N ≥ 3` (also for `N = 3`).
    pub fn build_tabulated(n: u32, params: &IntegratorParams) -> Result<Self> {
        check_dimension(n)?;
        params.validate()?;
        let eq = RadialEquation::linear(n);
        let xi0 = 1.0 / (f64::from(n) - 2.0);
        let start = eq.series_start(xi0, params.origin_offset);
        let (xi, _) = integrate(&eq, start, 1.0, params, None)?;
        let (zeta_raw, _) = integrate(&eq, RadialState::new(1.0, 1.0, 0.0), ZETA_MIN_RADIUS, params, None)?;
        // At r = 1 the raw Wronskian reduces to ξ'(1) since ζ̃(1) = 1, ζ̃'(1) = 0.
        let scale = xi.last().du;
        Ok(Self::wrap(
            n,
            Representation::Tabulated { xi, zeta_raw, scale },
            *params,
        ))
    }

    fn wrap(n: u32, repr: Representation, params: IntegratorParams) -> Self {
        Self {
            inner: Arc::new(Inner {
                n,
                sphere: unit_sphere_area(n),
                repr,
                params,
            }),
        }
    }

    pub fn dimension(&self) -> u32 {
        self.inner.n
    }

    /// `|∂B₁|`.
    pub fn sphere_area(&self) -> f64 {
        self.inner.sphere
    }

    pub fn params(&self) -> &IntegratorParams {
        &self.inner.params
    }

    pub fn representation(&self) -> &Representation {
        &self.inner.repr
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.inner.repr, Representation::ClosedFormN3)
    }

    fn nf(&self) -> f64 {
        f64::from(self.inner.n)
    }

    /// `(ξ(r), ξ'(r))` for `r ∈ [0, 1]`.
    pub fn xi(&self, r: f64) -> Eval {
        match &self.inner.repr {
            Representation::ClosedFormN3 => xi_n3(r),
            Representation::Tabulated { xi, .. } => {
                let h0 = xi.first().r;
                if r < h0 {
                    let eq = RadialEquation::linear(self.inner.n);
                    let xi0 = 1.0 / (self.nf() - 2.0);
                    if r <= 0.0 {
                        return (xi0, 0.0);
                    }
                    let s = eq.series_start(xi0, r);
                    (s.u, s.du)
                } else {
                    let s = xi.eval(r);
                    (s.u, s.du)
                }
            }
        }
    }

    /// `(ζ(r), ζ'(r))` for `r ∈ (0, 1]`; `(+∞, -∞)` at the origin.
    pub fn zeta(&self, r: f64) -> Eval {
        if r <= 0.0 {
            return (f64::INFINITY, f64::NEG_INFINITY);
        }
        match &self.inner.repr {
            Representation::ClosedFormN3 => zeta_n3(r),
            Representation::Tabulated { zeta_raw, scale, .. } => {
                if r >= ZETA_MIN_RADIUS {
                    let s = zeta_raw.eval(r);
                    (s.u / scale, s.du / scale)
                } else {
                    self.zeta_near_origin(r)
                }
            }
        }
    }

    /// Continuation of `ζ` below [`ZETA_MIN_RADIUS`] through the Wronskian:
    /// `(ζ/ξ)' = -1/(r^{N-1} ξ²)`, with `ξ^{-2} = ξ(0)^{-2}(1 - r²/N + O(r⁴))`.
    fn zeta_near_origin(&self, r: f64) -> Eval {
        let n = self.nf();
        let rm = ZETA_MIN_RADIUS;
        let (xi_m, _) = self.xi(rm);
        let (zeta_m, _) = self.zeta(rm);
        let xi0 = 1.0 / (n - 2.0);
        let antiderivative = |t: f64| {
            let lead = t.powf(2.0 - n) / (2.0 - n);
            let next = if self.inner.n == 4 {
                -t.ln() / n
            } else {
                -t.powf(4.0 - n) / (n * (4.0 - n))
            };
            (lead + next) / (xi0 * xi0)
        };
        let (xi_r, dxi_r) = self.xi(r);
        let ratio = zeta_m / xi_m + antiderivative(rm) - antiderivative(r);
        let zeta = xi_r * ratio;
        let dzeta = dxi_r * ratio - 1.0 / (r.powf(n - 1.0) * xi_r);
        (zeta, dzeta)
    }

    pub fn eval(&self, r: f64) -> BasisValue {
        let (xi, dxi) = self.xi(r);
        let (zeta, dzeta) = self.zeta(r);
        BasisValue {
            r,
            xi,
            dxi,
            zeta,
            dzeta,
        }
    }

    /// `r^{N-1} (ξ' ζ - ξ ζ')`, identically 1.
    pub fn wronskian(&self, r: f64) -> f64 {
        let v = self.eval(r);
        r.powi(self.inner.n as i32 - 1) * (v.dxi * v.zeta - v.xi * v.dzeta)
    }

    /// Neumann-adapted pair on `[a, b]`.
    pub fn annulus(&self, a: f64, b: f64) -> Result<AnnulusBasis> {
        AnnulusBasis::new(self, a, b)
    }

    /// Table of `(r, ξ, ξ', ζ, ζ')` on `n` equispaced radii of
    /// `[r_min, 1]`.
    pub fn table(&self, r_min: f64, n: usize) -> Vec<BasisValue> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let r = r_min + (1.0 - r_min) * i as f64 / (n - 1) as f64;
                self.eval(r)
            })
            .collect()
    }

    /// Numerical audit of the structural properties of the pair.
    pub fn audit(&self, n_samples: usize) -> BasisAudit {
        let table = self.table(ZETA_MIN_RADIUS, n_samples);
        let wronskian_max_dev = table
            .iter()
            .map(|v| (self.wronskian(v.r) - 1.0).abs())
            .fold(0.0, f64::max);
        let xi_increasing = table.windows(2).all(|w| w[1].xi > w[0].xi);
        let zeta_decreasing = table.windows(2).all(|w| w[1].zeta < w[0].zeta);
        let n = self.nf();
        let xi0 = 1.0 / (n - 2.0);
        let xi_origin_dev = (self.xi(0.0).0 - xi0).abs() + self.xi(0.0).1.abs();
        let r = 0.01;
        let (z, dz) = self.zeta(r);
        let zeta_origin_dev = (r.powf(n - 2.0) * z - 1.0).abs();
        let dzeta_origin_dev = (r.powf(n - 1.0) * dz + (n - 2.0)).abs();
        BasisAudit {
            n: self.inner.n,
            samples: table.len(),
            wronskian_max_dev,
            xi_increasing,
            zeta_decreasing,
            xi_origin_dev,
            dzeta_at_one: self.zeta(1.0).1,
            zeta_origin_dev,
            dzeta_origin_dev,
        }
    }
}

/// Result of [`GreenBasis::audit`]. The origin deviations are measured at
/// `r = 0.01` and carry the `O(r²)` corrections of the asymptotic forms.
#[derive(Debug, Clone, Serialize)]
pub struct BasisAudit {
    pub n: u32,
    pub samples: usize,
    pub wronskian_max_dev: f64,
    pub xi_increasing: bool,
    pub zeta_decreasing: bool,
    pub xi_origin_dev: f64,
    pub dzeta_at_one: f64,
    pub zeta_origin_dev: f64,
    pub dzeta_origin_dev: f64,
}

impl BasisAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.wronskian_max_dev < tol
            && self.xi_increasing
            && self.zeta_decreasing
            && self.xi_origin_dev < tol
            && self.dzeta_at_one.abs() < tol
            && self.zeta_origin_dev < 5e-2
            && self.dzeta_origin_dev < 5e-1
    }
}

fn check_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "dimension N = {n} not supported, N >= 3 required"
        )));
    }
    Ok(())
}

fn xi_n3(r: f64) -> Eval {
    let r = r.abs();
    if r < 1e-2 {
        let r2 = r * r;
        let v = 1.0 + r2 / 6.0 * (1.0 + r2 / 20.0 * (1.0 + r2 / 42.0 * (1.0 + r2 / 72.0)));
        let d = r / 3.0 * (1.0 + r2 / 10.0 * (1.0 + r2 / 28.0 * (1.0 + r2 / 54.0)));
        (v, d)
    } else {
        let (s, c) = (r.sinh(), r.cosh());
        (s / r, (r * c - s) / (r * r))
    }
}

fn zeta_n3(r: f64) -> Eval {
    let e = r.exp();
    (e / r, e * (r - 1.0) / (r * r))
}

/// `(ξ_{[a,b]}, ζ_{[a,b]})` as combinations of `(ξ, ζ)`:
/// `ξ_{[a,b]} = c[0][0] ξ + c[0][1] ζ`, `ζ_{[a,b]} = c[1][0] ξ + c[1][1] ζ`.
///
/// `ξ_{[a,b]}'(a) = 0` (regular at the origin when `a = 0`),
/// `ζ_{[a,b]}'(b) = 0`, and the Wronskian normalization is preserved.
#[derive(Debug, Clone)]
pub struct AnnulusBasis {
    basis: GreenBasis,
    a: f64,
    b: f64,
    coeffs: [[f64; 2]; 2],
}

impl AnnulusBasis {
    pub fn new(basis: &GreenBasis, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b <= 1.0 && a < b) {
            return Err(Error::InvalidInput(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
        }
        if b - a < MIN_INTERVAL {
            return Err(Error::DegenerateInterval { a, b });
        }
        let coeffs = match (a == 0.0, b == 1.0) {
            (true, true) => [[1.0, 0.0], [0.0, 1.0]],
            (true, false) => {
                let (_, dxb) = basis.xi(b);
                let (_, dzb) = basis.zeta(b);
                [[1.0 / dxb, 0.0], [-dzb, dxb]]
            }
            (false, true) => {
                let (_, dxa) = basis.xi(a);
                let (_, dza) = basis.zeta(a);
                [[-dza, dxa], [0.0, -1.0 / dza]]
            }
            (false, false) => {
                let (_, dxa) = basis.xi(a);
                let (_, dza) = basis.zeta(a);
                let (_, dxb) = basis.xi(b);
                let (_, dzb) = basis.zeta(b);
                let det = dxa * dzb - dxb * dza;
                if !(det > 0.0) {
                    return Err(Error::DegenerateInterval { a, b });
                }
                let s = det.sqrt();
                [[-dza / s, dxa / s], [-dzb / s, dxb / s]]
            }
        };
        Ok(Self {
            basis: basis.clone(),
            a,
            b,
            coeffs,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn coefficients(&self) -> [[f64; 2]; 2] {
        self.coeffs
    }

    pub fn basis(&self) -> &GreenBasis {
        &self.basis
    }

    pub fn dimension(&self) -> u32 {
        self.basis.dimension()
    }

    fn combine(&self, row: usize, r: f64) -> Eval {
        let [c0, c1] = self.coeffs[row];
        let mut out = (0.0, 0.0);
        if c0 != 0.0 {
            let (v, d) = self.basis.xi(r);
            out = (c0 * v, c0 * d);
        }
        if c1 != 0.0 {
            let (v, d) = self.basis.zeta(r);
            out = (out.0 + c1 * v, out.1 + c1 * d);
        }
        out
    }

    /// `(ξ_{[a,b]}(r), ξ_{[a,b]}'(r))`.
    pub fn xi(&self, r: f64) -> Eval {
        self.combine(0, r)
    }

    /// `(ζ_{[a,b]}(r), ζ_{[a,b]}'(r))`.
    pub fn zeta(&self, r: f64) -> Eval {
        self.combine(1, r)
    }

    fn check(&self, x: f64) -> Result<()> {
        if x >= self.a && x <= self.b {
            Ok(())
        } else {
            Err(Error::OutOfInterval {
                x,
                a: self.a,
                b: self.b,
            })
        }
    }

    fn weight(&self, s: f64) -> f64 {
        s.powi(self.dimension() as i32 - 1)
    }

    /// `G_{[a,b]}(r, s) = s^{N-1} ξ_{[a,b]}(min) ζ_{[a,b]}(max)`.
    pub fn green(&self, r: f64, s: f64) -> Result<f64> {
        self.check(r)?;
        self.check(s)?;
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        Ok(self.weight(s) * self.xi(lo).0 * self.zeta(hi).0)
    }

    /// `∂_r G_{[a,b]}(r, s)`; at `r = s` the left derivative is returned.
    pub fn green_dr(&self, r: f64, s: f64) -> Result<f64> {
        self.check(r)?;
        self.check(s)?;
        let w = self.weight(s);
        Ok(if r <= s {
            w * self.xi(r).1 * self.zeta(s).0
        } else {
            w * self.xi(s).0 * self.zeta(r).1
        })
    }

    /// `ξ_{[a,b]}'/ξ_{[a,b]} + ζ_{[a,b]}'/ζ_{[a,b]}`, strictly increasing on
    /// `(a, b)`; its zero is the reflection point.
    pub fn reflection_law(&self, s: f64) -> f64 {
        let (x, dx) = self.xi(s);
        let (z, dz) = self.zeta(s);
        dx / x + dz / z
    }

    /// `(φ_{[a,b]}(s), φ_{[a,b]}'(s))`.
    pub fn phi(&self, s: f64) -> Result<Eval> {
        self.check(s)?;
        let sphere = self.basis.sphere_area();
        let (x, dx) = self.xi(s);
        let (z, dz) = self.zeta(s);
        let phi = sphere / (x * z);
        let dphi = -sphere * self.weight(s) * ((dx / x).powi(2) - (dz / z).powi(2));
        Ok((phi, dphi))
    }
}
