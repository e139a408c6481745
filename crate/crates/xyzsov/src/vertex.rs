//! Eight-vertex R-matrix, boundary K-matrices, monodromies, the transfer matrix and the
//! open XYZ Hamiltonian as dense operators on (C²)^{⊗N}.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::elliptic::{EllipticContext, GENERICITY_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{self, apply_site_right, CMat, C, I, ONE, ZERO};

/// Largest chain length accepted by operator constructions.
pub const MAX_SITES: usize = 10;

pub type Mat2 = [[C; 2]; 2];

/// A 2×2 matrix in auxiliary space with operator entries.
pub type AuxOp = [[CMat; 2]; 2];

pub const SX: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const SY: Mat2 = [[ZERO, C::new(0.0, -1.0)], [C::new(0.0, 1.0), ZERO]];
pub const SZ: Mat2 = [[ONE, ZERO], [ZERO, C::new(-1.0, 0.0)]];
pub const ID2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub eta: C,
    pub xi: Vec<C>,
    pub alpha_plus: [C; 3],
    pub alpha_minus: [C; 3],
    pub ctx: EllipticContext,
}

impl ModelParams {
    pub fn new(
        eta: C,
        xi: Vec<C>,
        alpha_plus: [C; 3],
        alpha_minus: [C; 3],
        ctx: EllipticContext,
    ) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Config("chain needs at least one site".into()));
        }
        if xi.len() > MAX_SITES {
            return Err(Error::Resource(format!(
                "N = {} exceeds the cap of {MAX_SITES} sites",
                xi.len()
            )));
        }
        Ok(Self {
            n: xi.len(),
            eta,
            xi,
            alpha_plus,
            alpha_minus,
            ctx,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Boundary parameters ordered (α_1^+, α_2^+, α_3^+, α_1^−, α_2^−, α_3^−).
    pub fn alphas(&self) -> [C; 6] {
        let (p, m) = (self.alpha_plus, self.alpha_minus);
        [p[0], p[1], p[2], m[0], m[1], m[2]]
    }

    pub fn with_alphas(&self, al: [C; 6]) -> Self {
        let mut out = self.clone();
        out.alpha_plus = [al[0], al[1], al[2]];
        out.alpha_minus = [al[3], al[4], al[5]];
        out
    }

    /// ξ_n^{(h)} = ξ_n + η/2 − hη.
    pub fn xi_shift(&self, n: usize, h: u8) -> C {
        self.xi[n] + self.eta / 2.0 - f64::from(h) * self.eta
    }

    /// ξ_{-j}^{(0)} for j = 0..3.
    pub fn special_point(&self, j: usize) -> C {
        let w = PI * self.ctx.omega;
        let h = self.eta / 2.0;
        match j {
            0 => h,
            1 => h + PI / 2.0,
            2 => h + w / 2.0,
            3 => h + (w + PI) / 2.0,
            _ => panic!("special point index {j} out of range"),
        }
    }

    /// Interpolation nodes ξ_k^{(0)} for k = −3..N, ordered (ξ_{−3}, …, ξ_0, ξ_1, …, ξ_N).
    pub fn nodes(&self) -> Vec<C> {
        let mut v: Vec<C> = (0..4).rev().map(|j| self.special_point(j)).collect();
        v.extend((0..self.n).map(|k| self.xi_shift(k, 0)));
        v
    }

    /// Genericity of the shifted inhomogeneities and special points, and non-scalar K.
    pub fn check_generic(&self, margin: f64) -> Result<()> {
        let mut pts = self.nodes();
        pts.extend((0..self.n).map(|k| self.xi_shift(k, 1)));
        self.ctx
            .check_pairwise_distinct(&pts, margin, "shifted inhomogeneities")?;
        for k in 1..=self.n as i32 {
            if self.ctx.lattice_dist(self.eta * f64::from(k)) < margin {
                return Err(Error::Genericity(format!(
                    "{k}η lies on the lattice"
                )));
            }
        }
        let scalar = |al: &[C; 3]| {
            let (cx, cy, cz) = k_coeffs(&self.ctx, al);
            cx.norm().max(cy.norm()).max(cz.norm()) < margin
        };
        if scalar(&self.alpha_plus) && scalar(&self.alpha_minus) {
            return Err(Error::Genericity(
                "both boundary matrices are proportional to the identity".into(),
            ));
        }
        Ok(())
    }

    pub fn check_default(&self) -> Result<()> {
        self.check_generic(GENERICITY_MARGIN)
    }

    pub fn homogeneous(&self) -> Self {
        let mut out = self.clone();
        out.xi = vec![ZERO; self.n];
        out
    }
}

/// R-matrix weights (a, b, c, d).
pub fn abcd(ctx: &EllipticContext, l: C, eta: C) -> [C; 4] {
    let t = |j, z| ctx.theta(j, z, 2);
    let den = ctx.theta(2, ZERO, 1) * t(4, ZERO);
    let a = 2.0 * t(4, eta) * t(1, l + eta) * t(4, l) / den;
    let b = 2.0 * t(4, eta) * t(1, l) * t(4, l + eta) / den;
    let c = 2.0 * t(1, eta) * t(4, l) * t(4, l + eta) / den;
    let d = 2.0 * t(1, eta) * t(1, l + eta) * t(1, l) / den;
    [a, b, c, d]
}

pub fn r_matrix(ctx: &EllipticContext, l: C, eta: C) -> CMat {
    let [a, b, c, d] = abcd(ctx, l, eta);
    linalg::from_rows(&[
        vec![a, ZERO, ZERO, d],
        vec![ZERO, b, c, ZERO],
        vec![ZERO, c, b, ZERO],
        vec![d, ZERO, ZERO, a],
    ])
}

/// (c^x, c^y, c^z) from three boundary parameters.
pub fn k_coeffs(ctx: &EllipticContext, al: &[C; 3]) -> (C, C, C) {
    let mut cx = ONE;
    let mut cy = -ONE;
    let mut cz = ONE;
    for &a in al {
        let t1 = ctx.theta(1, a, 1);
        cx *= ctx.theta(4, a, 1) / t1;
        cy *= ctx.theta(3, a, 1) / t1;
        cz *= ctx.theta(2, a, 1) / t1;
    }
    (cx, cy, cz)
}

/// K(λ; α), evaluated in the entire form
/// [θ_2θ_3θ_4(λ) I + θ_1(λ)(c^x θ_2θ_3 σ^x + i c^y θ_2θ_4 σ^y + c^z θ_3θ_4 σ^z)] / θ_2θ_3θ_4(0).
pub fn k_matrix(ctx: &EllipticContext, l: C, al: &[C; 3]) -> Mat2 {
    let (cx, cy, cz) = k_coeffs(ctx, al);
    let t = |j| ctx.theta(j, l, 1);
    let (t1, t2, t3, t4) = (t(1), t(2), t(3), t(4));
    let n0 = ctx.theta(2, ZERO, 1) * ctx.theta(3, ZERO, 1) * ctx.theta(4, ZERO, 1);
    let id = t2 * t3 * t4;
    let x = t1 * cx * t2 * t3;
    let y = t1 * I * cy * t2 * t4;
    let z = t1 * cz * t3 * t4;
    let mut k = [[ZERO; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            k[r][s] = (id * ID2[r][s] + x * SX[r][s] + y * SY[r][s] + z * SZ[r][s]) / n0;
        }
    }
    k
}

pub fn k_minus(p: &ModelParams, l: C) -> Mat2 {
    k_matrix(&p.ctx, l - p.eta / 2.0, &p.alpha_minus)
}

pub fn k_plus(p: &ModelParams, l: C) -> Mat2 {
    k_matrix(&p.ctx, l + p.eta / 2.0, &p.alpha_plus)
}

pub fn mat2_to_cmat(m: &Mat2) -> CMat {
    linalg::from_rows(&[vec![m[0][0], m[0][1]], vec![m[1][0], m[1][1]]])
}

/// Site-local Lax blocks: L[a][c][s][t] = R[(a,s),(c,t)].
fn lax_blocks(r: &CMat) -> [[Mat2; 2]; 2] {
    let mut out = [[[[ZERO; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for c in 0..2 {
            for s in 0..2 {
                for t in 0..2 {
                    out[a][c][s][t] = r[(2 * a + s, 2 * c + t)];
                }
            }
        }
    }
    out
}

fn aux_identity(dim: usize) -> AuxOp {
    [
        [linalg::identity(dim), CMat::zeros(dim, dim)],
        [CMat::zeros(dim, dim), linalg::identity(dim)],
    ]
}

fn aux_times_local(x: &AuxOp, r: &CMat, site: usize, n: usize) -> AuxOp {
    let l = lax_blocks(r);
    let blk = |a: usize, c: usize| {
        apply_site_right(&x[a][0], &l[0][c], site, n) + apply_site_right(&x[a][1], &l[1][c], site, n)
    };
    [[blk(0, 0), blk(0, 1)], [blk(1, 0), blk(1, 1)]]
}

fn aux_times_scalar(x: &AuxOp, k: &Mat2) -> AuxOp {
    let blk = |a: usize, c: usize| &x[a][0] * k[0][c] + &x[a][1] * k[1][c];
    [[blk(0, 0), blk(0, 1)], [blk(1, 0), blk(1, 1)]]
}

/// T(λ) = R_{01}(λ−ξ_1−η/2) … R_{0N}(λ−ξ_N−η/2).
pub fn monodromy(p: &ModelParams, l: C) -> AuxOp {
    let mut x = aux_identity(p.dim());
    for s in 0..p.n {
        let r = r_matrix(&p.ctx, l - p.xi[s] - p.eta / 2.0, p.eta);
        x = aux_times_local(&x, &r, s, p.n);
    }
    x
}

fn times_hat(p: &ModelParams, mut x: AuxOp, l: C) -> AuxOp {
    for s in (0..p.n).rev() {
        let r = r_matrix(&p.ctx, l + p.xi[s] - p.eta / 2.0, p.eta);
        x = aux_times_local(&x, &r, s, p.n);
    }
    x
}

/// T̂(λ) = R_{0N}(λ+ξ_N−η/2) … R_{01}(λ+ξ_1−η/2).
pub fn monodromy_hat(p: &ModelParams, l: C) -> AuxOp {
    times_hat(p, aux_identity(p.dim()), l)
}

/// U_−(λ) = T(λ) K_−(λ) T̂(λ), entries (𝒜_−, ℬ_−; 𝒞_−, 𝒟_−).
pub fn boundary_monodromy(p: &ModelParams, l: C) -> AuxOp {
    let tk = aux_times_scalar(&monodromy(p, l), &k_minus(p, l));
    times_hat(p, tk, l)
}

/// 𝒯(λ) = tr_0[K_+(λ) U_−(λ)].
pub fn transfer(p: &ModelParams, l: C) -> CMat {
    let u = boundary_monodromy(p, l);
    let k = k_plus(p, l);
    let mut out = CMat::zeros(p.dim(), p.dim());
    for a in 0..2 {
        for b in 0..2 {
            out += &u[b][a] * k[a][b];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Couplings {
    pub j: [C; 3],
    pub h_plus: [C; 3],
    pub h_minus: [C; 3],
}

pub fn couplings(p: &ModelParams) -> Couplings {
    let ctx = &p.ctx;
    let t0 = |j| ctx.theta(j, ZERO, 1);
    let te = |j| ctx.theta(j, p.eta, 1);
    let j = [te(4) / t0(4), te(3) / t0(3), te(2) / t0(2)];
    let fields = |al: &[C; 3]| {
        let (cx, cy, cz) = k_coeffs(ctx, al);
        let t1 = te(1);
        [cx * t1 / t0(4), I * cy * t1 / t0(3), cz * t1 / t0(2)]
    };
    Couplings {
        j,
        h_plus: fields(&p.alpha_plus),
        h_minus: fields(&p.alpha_minus),
    }
}

/// H = Σ_a [Σ_{n=1}^{N−1} J_a σ_n^a σ_{n+1}^a + h_+^a σ_1^a + h_−^a σ_N^a].
pub fn hamiltonian(p: &ModelParams) -> CMat {
    hamiltonian_from(&couplings(p), p.n)
}

pub fn hamiltonian_from(cp: &Couplings, n: usize) -> CMat {
    let dim = 1 << n;
    let paulis = [SX, SY, SZ];
    let mut h = CMat::zeros(dim, dim);
    for (a, s) in paulis.iter().enumerate() {
        for site in 0..n.saturating_sub(1) {
            let op = apply_site_right(&linalg::embed_site(s, site, n), s, site + 1, n);
            h += op * cp.j[a];
        }
        h += linalg::embed_site(s, 0, n) * cp.h_plus[a];
        h += linalg::embed_site(s, n - 1, n) * cp.h_minus[a];
    }
    h
}

/// a(λ) = ∏ θ(λ−ξ_n+η/2).
pub fn a_fn(p: &ModelParams, l: C) -> C {
    p.xi
        .iter()
        .map(|x| p.ctx.th(l - x + p.eta / 2.0))
        .product()
}

/// d(λ) = a(λ−η).
pub fn d_fn(p: &ModelParams, l: C) -> C {
    a_fn(p, l - p.eta)
}

pub fn detq_t(p: &ModelParams, l: C) -> C {
    a_fn(p, l + p.eta / 2.0) * d_fn(p, l - p.eta / 2.0)
}

/// det_q K_±(λ); `sign` = +1 for K_+.
pub fn detq_k(p: &ModelParams, l: C, sign: f64) -> C {
    let al = if sign > 0.0 {
        &p.alpha_plus
    } else {
        &p.alpha_minus
    };
    let ctx = &p.ctx;
    let mut v = ctx.th(2.0 * p.eta + 2.0 * sign * l);
    for &a in al {
        v *= ctx.thsym(l, a) / ctx.th(a).powu(2);
    }
    v
}

pub fn detq_u(p: &ModelParams, l: C) -> C {
    detq_t(p, l) * detq_t(p, -l) * detq_k(p, l, -1.0)
}

/// det_q K_+(λ) det_q U_−(λ) / (θ(η+2λ)θ(η−2λ)).
pub fn detq_rhs(p: &ModelParams, l: C) -> C {
    let ctx = &p.ctx;
    detq_k(p, l, 1.0) * detq_u(p, l) / (ctx.th(p.eta + 2.0 * l) * ctx.th(p.eta - 2.0 * l))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuantumDeterminants {
    pub detq_t: C,
    pub detq_k_plus: C,
    pub detq_k_minus: C,
    pub detq_u: C,
    pub a: C,
    pub d: C,
}

pub fn quantum_determinants(p: &ModelParams, l: C) -> QuantumDeterminants {
    QuantumDeterminants {
        detq_t: detq_t(p, l),
        detq_k_plus: detq_k(p, l, 1.0),
        detq_k_minus: detq_k(p, l, -1.0),
        detq_u: detq_u(p, l),
        a: a_fn(p, l),
        d: d_fn(p, l),
    }
}

/// Closed-form central values (τ_0, τ_{−1}, τ_{−2}, τ_{−3}).
pub fn central_closed_forms(p: &ModelParams) -> [C; 4] {
    let ctx = &p.ctx;
    let eta = p.eta;
    let w = PI * ctx.omega;
    let ratio = ctx.th(2.0 * eta) / ctx.th(eta);
    let (cxp, cyp, czp) = k_coeffs(ctx, &p.alpha_plus);
    let (cxm, cym, czm) = k_coeffs(ctx, &p.alpha_minus);
    let sum_xi: C = p.xi.iter().sum();
    let e = (I * (2.0 * sum_xi - (p.n as f64 + 3.0) * eta - 1.5 * w)).exp();
    let sign = if p.n % 2 == 0 { 1.0 } else { -1.0 };
    [
        sign * ratio * detq_t(p, ZERO),
        czm * czp * ratio * detq_t(p, C::new(PI / 2.0, 0.0)),
        -e * cxm * cxp * ratio * detq_t(p, -w / 2.0),
        e * cym * cyp * ratio * detq_t(p, -(w + PI) / 2.0),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CentralValue {
    pub index: i32,
    pub point: C,
    pub measured: C,
    pub closed_form: C,
    /// Off-diagonal and non-uniform diagonal part relative to ‖𝒯‖.
    pub centrality: f64,
    pub rel_dev: f64,
}

pub fn central_values(p: &ModelParams) -> Vec<CentralValue> {
    let closed = central_closed_forms(p);
    (0..4)
        .map(|j| {
            let x = p.special_point(j);
            let t = transfer(p, x);
            let tau = t.trace() / p.dim() as f64;
            let dev = &t - linalg::identity(p.dim()) * tau;
            CentralValue {
                index: -(j as i32),
                point: x,
                measured: tau,
                closed_form: closed[j],
                centrality: linalg::fro(&dev) / linalg::fro(&t).max(f64::MIN_POSITIVE),
                rel_dev: linalg::rel_diff_c(tau, closed[j]),
            }
        })
        .collect()
}

/// r_k(λ) for every node k = −3..N, ordered as `ModelParams::nodes`.
pub fn interpolation_weights(p: &ModelParams, l: C) -> Vec<C> {
    let nodes = p.nodes();
    let ctx = &p.ctx;
    (0..nodes.len())
        .map(|i| {
            let mut r = ONE;
            for (k, &nk) in nodes.iter().enumerate() {
                if k != i {
                    r *= ctx.thsym(l, nk) / ctx.thsym(nodes[i], nk);
                }
            }
            r
        })
        .collect()
}

/// ‖𝒯(λ) − 𝖳_0(λ) I − Σ r_n(λ) 𝒯(ξ_n^{(0)})‖ / ‖𝒯(λ)‖.
pub fn interpolation_residual(p: &ModelParams, l: C) -> Result<f64> {
    p.ctx
        .check_pairwise_distinct(&p.nodes(), GENERICITY_MARGIN, "interpolation nodes")?;
    let r = interpolation_weights(p, l);
    let taus = central_closed_forms(p);
    let mut rhs = CMat::zeros(p.dim(), p.dim());
    let mut t0 = ZERO;
    for j in 0..4 {
        t0 += r[3 - j] * taus[j];
    }
    rhs += linalg::identity(p.dim()) * t0;
    for k in 0..p.n {
        rhs += transfer(p, p.xi_shift(k, 0)) * r[4 + k];
    }
    let lhs = transfer(p, l);
    Ok(linalg::fro(&(&lhs - &rhs)) / linalg::fro(&lhs).max(f64::MIN_POSITIVE))
}

/// Embeds a two-site operator `r` (4×4, first factor on `i`) acting on spaces i, j of an
/// n-fold product of C².
pub fn embed_pair(r: &CMat, i: usize, j: usize, n: usize) -> CMat {
    let dim = 1 << n;
    let bi = n - 1 - i;
    let bj = n - 1 - j;
    CMat::from_fn(dim, dim, |row, col| {
        let rest_mask = !((1 << bi) | (1 << bj));
        if row & rest_mask != col & rest_mask {
            return ZERO;
        }
        let ri = (row >> bi) & 1;
        let rj = (row >> bj) & 1;
        let ci = (col >> bi) & 1;
        let cj = (col >> bj) & 1;
        r[(2 * ri + rj, 2 * ci + cj)]
    })
}

/// Serialisable dump of an operator as row-major [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorDump {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMat> for OperatorDump {
    fn from(m: &CMat) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                entries.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Self {
            dim: m.nrows(),
            entries,
        }
    }
}

pub mod checks {
    //! Relative residuals of the algebraic identities.

    use super::*;
    use crate::linalg::{fro, kron, rel_diff};

    fn swap() -> CMat {
        let mut p = CMat::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                p[(2 * a + b, 2 * b + a)] = ONE;
            }
        }
        p
    }

    pub fn yang_baxter(ctx: &EllipticContext, eta: C, l1: C, l2: C, l3: C) -> f64 {
        let r12 = embed_pair(&r_matrix(ctx, l1 - l2, eta), 0, 1, 3);
        let r13 = embed_pair(&r_matrix(ctx, l1 - l3, eta), 0, 2, 3);
        let r23 = embed_pair(&r_matrix(ctx, l2 - l3, eta), 1, 2, 3);
        rel_diff(&(&r12 * &r13 * &r23), &(&r23 * &r13 * &r12))
    }

    pub fn unitarity(ctx: &EllipticContext, eta: C, l: C) -> f64 {
        let p = swap();
        let r21 = &p * r_matrix(ctx, -l, eta) * &p;
        let lhs = r21 * r_matrix(ctx, l, eta);
        rel_diff(&lhs, &(linalg::identity(4) * -ctx.thsym(l, eta)))
    }

    pub fn crossing(ctx: &EllipticContext, eta: C, l: C) -> f64 {
        let r = r_matrix(ctx, l - eta, eta);
        // partial transpose on the first factor
        let mut rt1 = CMat::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        rt1[(2 * c + b, 2 * a + d)] = r[(2 * a + b, 2 * c + d)];
                    }
                }
            }
        }
        let sy1 = kron(&mat2_to_cmat(&SY), &linalg::identity(2));
        let lhs = r_matrix(ctx, l, eta) * &sy1 * rt1 * &sy1;
        rel_diff(&lhs, &(linalg::identity(4) * ctx.thsym(l, eta)))
    }

    /// Worst of the two R quasi-periodicity relations.
    pub fn r_quasi_periodicity(ctx: &EllipticContext, eta: C, l: C) -> f64 {
        let i2 = linalg::identity(2);
        let z1 = kron(&mat2_to_cmat(&SZ), &i2);
        let x1 = kron(&mat2_to_cmat(&SX), &i2);
        let r = r_matrix(ctx, l, eta);
        let w = PI * ctx.omega;
        let a = rel_diff(&r_matrix(ctx, l + PI, eta), &(-(&z1 * &r * &z1)));
        let f = -(-I * (2.0 * l + w + eta)).exp();
        let b = rel_diff(&r_matrix(ctx, l + w, eta), &((&x1 * &r * &x1) * f));
        a.max(b)
    }

    pub fn k_inversion(ctx: &EllipticContext, al: &[C; 3], l: C) -> f64 {
        let k = mat2_to_cmat(&k_matrix(ctx, l, al));
        let km = mat2_to_cmat(&k_matrix(ctx, -l, al));
        let mut s = ONE;
        for &a in al {
            s *= ctx.thsym(a, l) / ctx.th(a).powu(2);
        }
        rel_diff(&(k * km), &(linalg::identity(2) * s))
    }

    pub fn k_quasi_periodicity(ctx: &EllipticContext, al: &[C; 3], l: C) -> f64 {
        let k = mat2_to_cmat(&k_matrix(ctx, l, al));
        let z = mat2_to_cmat(&SZ);
        let x = mat2_to_cmat(&SX);
        let w = PI * ctx.omega;
        let a = rel_diff(&mat2_to_cmat(&k_matrix(ctx, l + PI, al)), &(-(&z * &k * &z)));
        let f = (-(-2.0 * I * l - I * w).exp()).powu(3);
        let b = rel_diff(&mat2_to_cmat(&k_matrix(ctx, l + w, al)), &((&x * &k * &x) * f));
        a.max(b)
    }

    pub fn k_reflection(ctx: &EllipticContext, eta: C, al: &[C; 3], l: C, m: C) -> f64 {
        let p = swap();
        let i2 = linalg::identity(2);
        let k1 = kron(&mat2_to_cmat(&k_matrix(ctx, l, al)), &i2);
        let k2 = kron(&i2, &mat2_to_cmat(&k_matrix(ctx, m, al)));
        let r12 = |x| r_matrix(ctx, x, eta);
        let r21 = |x| &p * r_matrix(ctx, x, eta) * &p;
        let lhs = r21(l - m) * &k1 * r12(l + m) * &k2;
        let rhs = &k2 * r21(l + m) * &k1 * r12(l - m);
        rel_diff(&lhs, &rhs)
    }

    fn aux_to_full_first(u: &AuxOp) -> CMat {
        // aux space 1 ⊗ aux space 2 ⊗ quantum, U acting on aux 1
        let dim = u[0][0].nrows();
        let mut out = CMat::zeros(4 * dim, 4 * dim);
        for a in 0..2 {
            for b in 0..2 {
                for s in 0..2 {
                    let row = (2 * a + s) * dim;
                    let col = (2 * b + s) * dim;
                    out.view_mut((row, col), (dim, dim)).copy_from(&u[a][b]);
                }
            }
        }
        out
    }

    fn aux_to_full_second(u: &AuxOp) -> CMat {
        let dim = u[0][0].nrows();
        let mut out = CMat::zeros(4 * dim, 4 * dim);
        for a in 0..2 {
            for b in 0..2 {
                for s in 0..2 {
                    let row = (2 * s + a) * dim;
                    let col = (2 * s + b) * dim;
                    out.view_mut((row, col), (dim, dim)).copy_from(&u[a][b]);
                }
            }
        }
        out
    }

    /// Reflection equation for U_− on H_1 ⊗ H_2 ⊗ H.
    pub fn u_reflection(p: &ModelParams, l: C, m: C) -> f64 {
        let ctx = &p.ctx;
        let eta = p.eta;
        let dim = p.dim();
        let sw = swap();
        let big = |r: CMat| kron(&r, &linalg::identity(dim));
        let r12 = |x| big(r_matrix(ctx, x, eta));
        let r21 = |x| big(&sw * r_matrix(ctx, x, eta) * &sw);
        let u1 = aux_to_full_first(&boundary_monodromy(p, l));
        let u2 = aux_to_full_second(&boundary_monodromy(p, m));
        let lhs = r21(l - m) * &u1 * r12(l + m - eta) * &u2;
        let rhs = &u2 * r21(l + m - eta) * &u1 * r12(l - m);
        rel_diff(&lhs, &rhs)
    }

    fn aux_mul(x: &AuxOp, y: &AuxOp) -> AuxOp {
        let blk = |a: usize, c: usize| &x[a][0] * &y[0][c] + &x[a][1] * &y[1][c];
        [[blk(0, 0), blk(0, 1)], [blk(1, 0), blk(1, 1)]]
    }

    fn aux_fro(x: &AuxOp) -> f64 {
        x.iter()
            .flatten()
            .map(|m| fro(m).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// U_−(−λ+η/2) U_−(λ+η/2) = det_q U_−(λ)/θ(2λ−2η) · I.
    pub fn u_inversion(p: &ModelParams, l: C) -> f64 {
        let h = p.eta / 2.0;
        let prod = aux_mul(&boundary_monodromy(p, -l + h), &boundary_monodromy(p, l + h));
        let s = detq_u(p, l) / p.ctx.th(2.0 * l - 2.0 * p.eta);
        let id = linalg::identity(p.dim()) * s;
        let z = CMat::zeros(p.dim(), p.dim());
        let diff = [
            [&prod[0][0] - &id, prod[0][1].clone() - &z],
            [prod[1][0].clone() - &z, &prod[1][1] - &id],
        ];
        aux_fro(&diff) / (aux_fro(&prod).max(f64::MIN_POSITIVE))
    }

    /// Ũ_−(λ−η/2) against θ(2λ−2η) U_−(−λ+η/2).
    pub fn u_adjunct(p: &ModelParams, l: C) -> f64 {
        let mu = l - p.eta / 2.0;
        let u = boundary_monodromy(p, mu);
        let [a, b, c, d] = abcd(&p.ctx, 2.0 * mu, p.eta);
        let adj = [
            [&u[0][0] * -c + &u[1][1] * b, &u[0][1] * -a + &u[1][0] * d],
            [&u[1][0] * -a + &u[0][1] * d, &u[1][1] * -c + &u[0][0] * b],
        ];
        let s = p.ctx.th(2.0 * l - 2.0 * p.eta);
        let v = boundary_monodromy(p, -l + p.eta / 2.0);
        let diff = [
            [&adj[0][0] - &v[0][0] * s, &adj[0][1] - &v[0][1] * s],
            [&adj[1][0] - &v[1][0] * s, &adj[1][1] - &v[1][1] * s],
        ];
        aux_fro(&diff) / aux_fro(&adj).max(f64::MIN_POSITIVE)
    }

    /// (−1)^N σ^y T^{t_0}(−λ) σ^y against the reversed product T̂(λ).
    pub fn that_identity(p: &ModelParams, l: C) -> f64 {
        let t = monodromy(p, -l);
        let th = monodromy_hat(p, l);
        // σ^y X^t σ^y in auxiliary space: entries (d, −b; −c, a)
        let sign = C::from(if p.n % 2 == 0 { 1.0 } else { -1.0 });
        let want = [
            [&t[1][1] * sign, &t[0][1] * -sign],
            [&t[1][0] * -sign, &t[0][0] * sign],
        ];
        let diff = [
            [&th[0][0] - &want[0][0], &th[0][1] - &want[0][1]],
            [&th[1][0] - &want[1][0], &th[1][1] - &want[1][1]],
        ];
        aux_fro(&diff) / aux_fro(&th).max(f64::MIN_POSITIVE)
    }

    pub fn transfer_commutation(p: &ModelParams, l: C, m: C) -> f64 {
        linalg::commutator_rel(&transfer(p, l), &transfer(p, m))
    }

    /// Worst of evenness, π-periodicity and the πω multiplier of order 2N+6.
    pub fn transfer_periodicity(p: &ModelParams, l: C) -> f64 {
        let t = transfer(p, l);
        let w = PI * p.ctx.omega;
        let f = (-(-2.0 * I * l - I * w).exp()).powu(2 * p.n as u32 + 6);
        rel_diff(&transfer(p, -l), &t)
            .max(rel_diff(&transfer(p, l + PI), &t))
            .max(rel_diff(&transfer(p, l + w), &(t * f)))
    }

    /// 𝒯(ξ_n+η/2)𝒯(ξ_n−η/2) against the quantum-determinant scalar.
    pub fn detq_transfer(p: &ModelParams, n: usize) -> f64 {
        let x = p.xi[n];
        let h = p.eta / 2.0;
        let prod = transfer(p, x + h) * transfer(p, x - h);
        rel_diff(&prod, &(linalg::identity(p.dim()) * detq_rhs(p, x)))
    }

    /// Residual of fitting the central-difference derivative of 𝒯 at η/2 (homogeneous
    /// chain) by a·H + b·I; returns (residual, a, b).
    pub fn hamiltonian_fit(p: &ModelParams) -> (f64, C, C) {
        let hp = p.homogeneous();
        let h = 1e-3;
        let x = p.eta / 2.0;
        let ev = |s: f64| transfer(&hp, x + C::new(s * h, 0.0));
        let deriv = (ev(-2.0) - ev(2.0) + (ev(1.0) - ev(-1.0)) * C::from(8.0)) / C::from(12.0 * h);
        let ham = hamiltonian(&hp);
        let dim = hp.dim();
        let mut a = CMat::zeros(dim * dim, 2);
        let mut b = linalg::CVec::zeros(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let k = r * dim + c;
                a[(k, 0)] = ham[(r, c)];
                a[(k, 1)] = if r == c { ONE } else { ZERO };
                b[k] = deriv[(r, c)];
            }
        }
        let svd = a.clone().svd(true, true);
        let coef = svd.solve(&b, 1e-14).expect("least squares");
        let res = (&a * &coef - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
        (res, coef[0], coef[1])
    }

    pub fn hamiltonian_commutation(p: &ModelParams, l: C) -> f64 {
        let hp = p.homogeneous();
        linalg::commutator_rel(&hamiltonian(&hp), &transfer(&hp, l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn params(n: usize) -> ModelParams {
        let xi = [c(0.11, -0.07), c(-0.23, 0.05), c(0.31, 0.13), c(-0.05, -0.19)];
        ModelParams::new(
            c(0.35, 0.12),
            xi[..n].to_vec(),
            [c(0.52, 0.14), c(-0.41, 0.2), c(0.17, 0.6)],
            [c(0.3, -0.22), c(-0.12, 0.33), c(0.05, 0.81)],
            EllipticContext::default(),
        )
        .unwrap()
    }

    #[test]
    fn r_at_zero_has_permutation_structure() {
        let ctx = EllipticContext::default();
        let [a, b, c, d] = abcd(&ctx, ZERO, c(0.35, 0.12));
        assert!(b.norm() < 1e-15 && d.norm() < 1e-15);
        assert!(linalg::rel_diff_c(a, c) < 1e-14);
    }

    #[test]
    fn embed_pair_matches_kron() {
        let ctx = EllipticContext::default();
        let r = r_matrix(&ctx, c(0.2, 0.1), c(0.35, 0.12));
        let full = linalg::kron(&r, &linalg::identity(2));
        assert!(linalg::rel_diff(&embed_pair(&r, 0, 1, 3), &full) < 1e-15);
    }

    #[test]
    fn hamiltonian_two_sites_by_hand() {
        let p = params(2);
        let cp = couplings(&p);
        let s = [SX, SY, SZ].map(|m| mat2_to_cmat(&m));
        let i2 = linalg::identity(2);
        let mut want = CMat::zeros(4, 4);
        for a in 0..3 {
            want += linalg::kron(&s[a], &s[a]) * cp.j[a];
            want += linalg::kron(&s[a], &i2) * cp.h_plus[a];
            want += linalg::kron(&i2, &s[a]) * cp.h_minus[a];
        }
        assert!(linalg::rel_diff(&hamiltonian(&p), &want) < 1e-15);
    }

    #[test]
    fn d_is_shifted_a() {
        let p = params(3);
        let l = c(0.27, -0.31);
        assert!(linalg::rel_diff_c(d_fn(&p, l), a_fn(&p, l - p.eta)) < 1e-15);
    }

    #[test]
    fn interpolation_exact_at_nodes() {
        let p = params(3);
        let w = interpolation_weights(&p, p.xi_shift(1, 0));
        for (k, r) in w.iter().enumerate() {
            let want = if k == 5 { ONE } else { ZERO };
            assert!((r - want).norm() < 1e-12);
        }
        assert!(interpolation_residual(&p, p.xi_shift(1, 0)).unwrap() < 1e-12);
        assert!(interpolation_residual(&p, p.special_point(1)).unwrap() < 1e-11);
    }

    #[test]
    fn resource_cap() {
        let r = ModelParams::new(
            c(0.3, 0.1),
            vec![ZERO; MAX_SITES + 1],
            [ONE; 3],
            [ONE; 3],
            EllipticContext::default(),
        );
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn scalar_boundaries_rejected() {
        let mut p = params(2);
        // α = π/2 makes θ_2 vanish, so c^z = 0; use θ_4, θ_3 zeros for c^x, c^y
        let w = PI * p.ctx.omega;
        let al = [c(PI / 2.0, 0.0), w / 2.0, (w + PI) / 2.0];
        p.alpha_plus = al;
        p.alpha_minus = al;
        assert!(matches!(p.check_default(), Err(Error::Genericity(_))));
    }

    #[test]
    fn identity_residuals_are_small() {
        use checks::*;
        let p = params(2);
        let ctx = &p.ctx;
        let (eta, l, m) = (p.eta, c(0.27, -0.11), c(-0.19, 0.23));
        let al = p.alpha_minus;
        let res = [
            ("yb", yang_baxter(ctx, eta, l, m, c(0.05, 0.31))),
            ("unitarity", unitarity(ctx, eta, l)),
            ("crossing", crossing(ctx, eta, l)),
            ("r-qp", r_quasi_periodicity(ctx, eta, l)),
            ("k-inv", k_inversion(ctx, &al, l)),
            ("k-qp", k_quasi_periodicity(ctx, &al, l)),
            ("k-refl", k_reflection(ctx, eta, &al, l, m)),
            ("u-refl", u_reflection(&p, l, m)),
            ("u-inv", u_inversion(&p, l)),
            ("u-adj", u_adjunct(&p, l)),
            ("that", that_identity(&p, l)),
            ("comm", transfer_commutation(&p, l, m)),
            ("period", transfer_periodicity(&p, l)),
            ("detq", detq_transfer(&p, 1)),
            ("ham-fit", hamiltonian_fit(&p).0),
            ("ham-comm", hamiltonian_commutation(&p, l)),
        ];
        for (name, r) in res {
            assert!(r < 1e-9, "{name}: {r:e}");
        }
        for cv in central_values(&params(3)) {
            assert!(cv.centrality < 1e-11 && cv.rel_dev < 1e-11, "{cv:?}");
        }
    }
}
