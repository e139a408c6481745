//! Jacobi theta functions with quasi-periods (π, kπω), even elliptic polynomials and
//! the elliptic Vandermonde and Cauchy determinants.
//!
//! Series are summed in combined-exponent form `exp((n+½)²iπτ ± i(2n+1)z)` so that neither
//! `q^{n²}` nor `cos((2n+1)z)` is formed on its own; this keeps large Im ω and large Im z
//! finite. Arguments are first reduced to the fundamental cell.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Det, C, I, ONE, ZERO};

/// Default minimal lattice distance for two points to count as distinct.
pub const GENERICITY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticContext {
    pub omega: C,
    pub truncation: usize,
    pub tol: f64,
}

impl Default for EllipticContext {
    fn default() -> Self {
        Self {
            omega: C::new(0.0, 0.8),
            truncation: 30,
            tol: 1e-13,
        }
    }
}

/// Term count and estimated truncation error of one series evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesDiagnostics {
    pub terms: usize,
    pub last_term_rel: f64,
    pub converged: bool,
}

impl EllipticContext {
    pub fn new(omega: C, truncation: usize, tol: f64) -> Result<Self> {
        if omega.im <= 0.0 {
            return Err(Error::Config(format!(
                "quasi-period must have positive imaginary part, got {omega}"
            )));
        }
        if truncation < 4 {
            return Err(Error::Config("theta truncation below 4 terms".into()));
        }
        Ok(Self {
            omega,
            truncation,
            tol,
        })
    }

    pub fn with_omega(omega: C) -> Result<Self> {
        let d = Self::default();
        Self::new(omega, d.truncation, d.tol)
    }

    /// q = exp(iπkω).
    pub fn nome(&self, k: u8) -> C {
        (I * PI * f64::from(k) * self.omega).exp()
    }

    fn tau(&self, k: u8) -> C {
        self.omega * f64::from(k)
    }

    /// θ_j(λ | kω).
    pub fn theta(&self, j: u8, z: C, k: u8) -> C {
        self.theta_full(j, z, k).0
    }

    /// θ'_j(λ | kω).
    pub fn theta_deriv(&self, j: u8, z: C, k: u8) -> C {
        self.theta_full(j, z, k).1
    }

    /// Value and derivative of θ_j(λ | kω), with series diagnostics for the reduced argument.
    pub fn theta_full(&self, j: u8, z: C, k: u8) -> (C, C, SeriesDiagnostics) {
        assert!((1..=4).contains(&j), "theta index {j} out of range");
        assert!(k == 1 || k == 2, "quasi-period multiplier {k} out of range");
        let tau = self.tau(k);
        let (z0, n, m) = reduce(z, tau);
        let (v, dv, diag) = self.series(j, z0, I * PI * tau);
        // θ_j(z0 + nπτ) = s^n q^{-n²} e^{-2inz0} θ_j(z0), s = -1 for j = 1, 4
        let nf = n as f64;
        let mut factor = (-I * PI * tau * nf * nf - 2.0 * I * nf * z0).exp();
        if (j == 1 || j == 4) && n.rem_euclid(2) == 1 {
            factor = -factor;
        }
        if (j == 1 || j == 2) && m.rem_euclid(2) == 1 {
            factor = -factor;
        }
        let shift = -2.0 * I * nf;
        (factor * v, factor * (dv + shift * v), diag)
    }

    fn series(&self, j: u8, z: C, a: C) -> (C, C, SeriesDiagnostics) {
        let mut s = ZERO;
        let mut ds = ZERO;
        let mut last = 0.0;
        let mut terms = 0;
        let mut converged = false;
        match j {
            1 | 2 => {
                for n in 0..self.truncation {
                    let kf = (2 * n + 1) as f64;
                    let cexp = (n as f64 + 0.5).powi(2) * a;
                    let e1 = (cexp + I * kf * z).exp();
                    let e2 = (cexp - I * kf * z).exp();
                    let sign = if n % 2 == 1 && j == 1 { -1.0 } else { 1.0 };
                    let (t, dt) = if j == 1 {
                        ((e1 - e2) / (2.0 * I), (e1 + e2) * (kf / 2.0))
                    } else {
                        ((e1 + e2) / 2.0, (e1 - e2) * (I * kf / 2.0))
                    };
                    s += t * sign;
                    ds += dt * sign;
                    terms = n + 1;
                    last = (e1.norm() + e2.norm()) / s.norm().max(f64::MIN_POSITIVE);
                    if n > 2 && last < 1e-18 {
                        converged = true;
                        break;
                    }
                }
                s *= 2.0;
                ds *= 2.0;
            }
            _ => {
                s = ONE;
                for n in 1..self.truncation {
                    let nf = n as f64;
                    let cexp = nf * nf * a;
                    let e1 = (cexp + 2.0 * I * nf * z).exp();
                    let e2 = (cexp - 2.0 * I * nf * z).exp();
                    let sign = if j == 4 && n % 2 == 1 { -1.0 } else { 1.0 };
                    s += (e1 + e2) * sign;
                    ds += (e1 - e2) * (2.0 * I * nf * sign);
                    terms = n + 1;
                    last = (e1.norm() + e2.norm()) / s.norm().max(f64::MIN_POSITIVE);
                    if n > 2 && last < 1e-18 {
                        converged = true;
                        break;
                    }
                }
            }
        }
        converged = converged || last < self.tol;
        (
            s,
            ds,
            SeriesDiagnostics {
                terms,
                last_term_rel: last,
                converged,
            },
        )
    }

    /// θ'_j/θ_j at λ.
    pub fn log_deriv(&self, j: u8, z: C, k: u8) -> Result<C> {
        let tau = self.tau(k);
        let (z0, n, _) = reduce(z, tau);
        let (v, dv, _) = self.series(j, z0, I * PI * tau);
        let scale = self.theta_scale(j, k);
        if v.norm() < 1e-14 * scale {
            return Err(Error::Pole(format!("theta_{j} vanishes at {z}")));
        }
        Ok(dv / v - 2.0 * I * n as f64)
    }

    fn theta_scale(&self, j: u8, k: u8) -> f64 {
        // typical magnitude in the fundamental cell
        match j {
            1 => self.theta(2, ZERO, k).norm(),
            _ => self.theta(j, ZERO, k).norm(),
        }
    }

    /// θ(λ) ≡ θ_1(λ | ω).
    pub fn th(&self, z: C) -> C {
        self.theta(1, z, 1)
    }

    /// θ'_1(0 | ω).
    pub fn th_prime0(&self) -> C {
        self.theta_deriv(1, ZERO, 1)
    }

    /// θ'/θ with θ ≡ θ_1(· | ω).
    pub fn lth(&self, z: C) -> Result<C> {
        self.log_deriv(1, z, 1)
    }

    /// θ(λ−μ)θ(λ+μ).
    pub fn thsym(&self, l: C, m: C) -> C {
        self.th(l - m) * self.th(l + m)
    }

    /// t(λ) = θ'/θ(λ−η/2) − θ'/θ(λ+η/2) and K(λ) = t(λ+η/2) + t(λ−η/2).
    pub fn t_and_k(&self, l: C, eta: C) -> Result<(C, C)> {
        let t = self.t_fn(l, eta)?;
        let k = self.lth(l - eta)? - self.lth(l + eta)?;
        Ok((t, k))
    }

    pub fn t_fn(&self, l: C, eta: C) -> Result<C> {
        Ok(self.lth(l - eta / 2.0)? - self.lth(l + eta / 2.0)?)
    }

    pub fn k_fn(&self, l: C, eta: C) -> Result<C> {
        Ok(self.lth(l - eta)? - self.lth(l + eta)?)
    }

    /// Representative of z modulo the lattice Zπ + Zπω in the fundamental cell.
    pub fn reduce_cell(&self, z: C) -> C {
        reduce(z, self.omega).0
    }

    /// Distance from `z` to the nearest point of the lattice Zπ + Zπω.
    pub fn lattice_dist(&self, z: C) -> f64 {
        let tau = self.omega;
        let (z0, _, _) = reduce(z, tau);
        let mut best = f64::INFINITY;
        for dn in -1..=1 {
            for dm in -1..=1 {
                let w = z0 - PI * tau * f64::from(dn) - PI * f64::from(dm);
                best = best.min(w.norm());
            }
        }
        best
    }

    /// Whether ±a and b are apart modulo the lattice by at least `margin`.
    pub fn distinct(&self, a: C, b: C, margin: f64) -> bool {
        self.lattice_dist(a - b) >= margin && self.lattice_dist(a + b) >= margin
    }

    /// Checks that the points ±z_i are pairwise distinct modulo the lattice.
    pub fn check_pairwise_distinct(&self, pts: &[C], margin: f64, what: &str) -> Result<()> {
        for i in 0..pts.len() {
            if self.lattice_dist(2.0 * pts[i]) < margin {
                return Err(Error::Genericity(format!(
                    "{what}: point {i} ({}) coincides with its negative",
                    pts[i]
                )));
            }
            for j in (i + 1)..pts.len() {
                if !self.distinct(pts[i], pts[j], margin) {
                    return Err(Error::Genericity(format!(
                        "{what}: points {i} and {j} coincide modulo the lattice"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Splits z = z0 + nπτ + mπ with z0 in the fundamental cell.
fn reduce(z: C, tau: C) -> (C, i64, i64) {
    let ptau = PI * tau;
    let n = (z.im / ptau.im).round();
    let z1 = z - ptau * n;
    let m = (z1.re / PI).round();
    (z1 - PI * m, n as i64, m as i64)
}

/// C · ∏_j θ(λ−λ_j)θ(λ+λ_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvenEllipticPoly {
    pub leading: C,
    pub roots: Vec<C>,
}

impl EvenEllipticPoly {
    pub fn from_roots(roots: Vec<C>) -> Self {
        Self {
            leading: ONE,
            roots,
        }
    }

    pub fn one() -> Self {
        Self::from_roots(vec![])
    }

    pub fn order_half(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, ctx: &EllipticContext, l: C) -> C {
        self.roots
            .iter()
            .fold(self.leading, |acc, r| acc * ctx.thsym(l, *r))
    }

    /// The same polynomial with root `i` removed.
    pub fn without(&self, i: usize) -> Self {
        let mut roots = self.roots.clone();
        roots.remove(i);
        Self {
            leading: self.leading,
            roots,
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut roots = self.roots.clone();
        roots.extend_from_slice(&other.roots);
        Self {
            leading: self.leading * other.leading,
            roots,
        }
    }

    /// d/dλ log P(λ).
    pub fn log_deriv(&self, ctx: &EllipticContext, l: C) -> Result<C> {
        let mut s = ZERO;
        for r in &self.roots {
            s += ctx.lth(l - r)? + ctx.lth(l + r)?;
        }
        Ok(s)
    }
}

/// V(ζ) = ∏_{i<j} thsym(ζ_j, ζ_i).
pub fn vandermonde(ctx: &EllipticContext, z: &[C]) -> C {
    let mut out = ONE;
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            out *= ctx.thsym(z[j], z[i]);
        }
    }
    out
}

/// Closed form and numeric determinant of [1/thsym(ξ_i, w_j)].
#[derive(Debug, Clone, Copy)]
pub struct CauchyDet {
    pub closed: C,
    pub numeric: Det,
}

pub fn cauchy_matrix(ctx: &EllipticContext, xi: &[C], w: &[C]) -> Result<CMat> {
    let n = xi.len();
    let mut m = CMat::zeros(n, w.len());
    for i in 0..n {
        for j in 0..w.len() {
            if !ctx.distinct(xi[i], w[j], GENERICITY_MARGIN) {
                return Err(Error::Genericity(format!(
                    "Cauchy pair ({i},{j}) is singular modulo the lattice"
                )));
            }
            m[(i, j)] = ONE / ctx.thsym(xi[i], w[j]);
        }
    }
    Ok(m)
}

pub fn cauchy_det(ctx: &EllipticContext, xi: &[C], w: &[C]) -> Result<CauchyDet> {
    let m = cauchy_matrix(ctx, xi, w)?;
    let rev: Vec<C> = xi.iter().rev().copied().collect();
    let mut den = ONE;
    for x in xi {
        for y in w {
            den *= ctx.thsym(*x, *y);
        }
    }
    Ok(CauchyDet {
        closed: vandermonde(ctx, w) * vandermonde(ctx, &rev) / den,
        numeric: linalg::det_cond(&m),
    })
}

/// Relative residual of the derivative identity
/// θ'/θ(u−v) − θ'/θ(u−v±η) − θ'/θ(u+v) + θ'/θ(u+v±η)
///   = θ(2u±η)θ(2v)θ(±η)θ'(0) / (thsym(u,v) thsym(u±η,v)).
pub fn id_der_theta_residual(ctx: &EllipticContext, u: C, v: C, eta: C, sign: f64) -> Result<f64> {
    let e = eta * sign;
    let lhs = ctx.lth(u - v)? - ctx.lth(u - v + e)? - ctx.lth(u + v)? + ctx.lth(u + v + e)?;
    let rhs = ctx.th(2.0 * u + e) * ctx.th(2.0 * v) * ctx.th(e) * ctx.th_prime0()
        / (ctx.thsym(u, v) * ctx.thsym(u + e, v));
    Ok(linalg::rel_diff_c(lhs, rhs))
}

/// Both sides of the four-parameter exchange identity, valid when Σ a_ℓ = η.
pub fn id_n4_sides(ctx: &EllipticContext, u: C, v: C, a: &[C; 4], eta: C) -> (C, C) {
    let mut lhs = ZERO;
    let mut rhs = ZERO;
    for s in [1.0, -1.0] {
        let pu: C = a.iter().map(|al| ctx.th(u + s * al)).product();
        lhs += s * pu / ctx.thsym(u + s * eta / 2.0, v);
        let pv: C = a.iter().map(|al| ctx.th(v + s * (eta / 2.0 - al))).product();
        rhs += s * pv / ctx.thsym(v + s * eta / 2.0, u);
    }
    (lhs / ctx.th(2.0 * u), rhs / ctx.th(2.0 * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn ctx() -> EllipticContext {
        EllipticContext::default()
    }

    #[test]
    fn theta1_is_odd_and_vanishes_at_zero() {
        let x = ctx();
        assert_eq!(x.th(ZERO).norm(), 0.0);
        let z = c(0.31, -0.17);
        assert!((x.th(-z) + x.th(z)).norm() < 1e-15);
    }

    #[test]
    fn reduction_is_transparent() {
        let x = ctx();
        let z = c(0.2, 0.1);
        let tau = x.omega;
        for j in 1..=4u8 {
            let s = if j == 1 || j == 4 { -1.0 } else { 1.0 };
            let q = x.nome(1);
            let want = s / q * (-2.0 * I * z).exp() * x.theta(j, z, 1);
            let got = x.theta(j, z + PI * tau, 1);
            assert!(linalg::rel_diff_c(got, want) < 1e-13, "j={j}");
        }
    }

    #[test]
    fn log_deriv_at_half_period() {
        let x = ctx();
        assert!(x.log_deriv(1, c(PI / 2.0, 0.0), 1).unwrap().norm() < 1e-14);
    }

    #[test]
    fn log_deriv_pole_is_reported() {
        assert!(matches!(ctx().lth(c(PI, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(EllipticContext::with_omega(c(0.0, -1.0)).is_err());
    }

    #[test]
    fn cauchy_one_by_one() {
        let x = ctx();
        let cd = cauchy_det(&x, &[c(0.1, 0.2)], &[c(-0.3, 0.05)]).unwrap();
        let want = ONE / x.thsym(c(0.1, 0.2), c(-0.3, 0.05));
        assert!(linalg::rel_diff_c(cd.closed, want) < 1e-15);
        assert!(linalg::rel_diff_c(cd.numeric.value, want) < 1e-15);
    }

    #[test]
    fn cauchy_singular_pair() {
        let x = ctx();
        let r = cauchy_det(&x, &[c(0.1, 0.2)], &[c(-0.1, -0.2) + PI]);
        assert!(matches!(r, Err(Error::Genericity(_))));
    }

    #[test]
    fn vandermonde_small_cases() {
        let x = ctx();
        assert_eq!(vandermonde(&x, &[c(0.3, 0.1)]), ONE);
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        assert_eq!(vandermonde(&x, &z), x.thsym(z[1], z[0]));
    }

    #[test]
    fn lattice_distance() {
        let x = ctx();
        let w = x.omega * PI;
        assert!(x.lattice_dist(w + PI + c(1e-3, 0.0)) < 1.1e-3);
        assert!(!x.distinct(c(0.2, 0.1), c(-0.2, -0.1) + w, 1e-6));
        assert!(x.distinct(c(0.2, 0.1), c(0.25, 0.1), 1e-6));
    }
}
