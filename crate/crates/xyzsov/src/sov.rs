//! SoV bases built from transfer-matrix actions on a generic covector, separate states
//! and eigenstates from Q-functions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::elliptic::{vandermonde, EvenEllipticPoly};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C, ONE, ZERO};
use crate::vertex::{self, ModelParams};

/// Sign vector ordered (ε_1^+, ε_2^+, ε_3^+, ε_1^−, ε_2^−, ε_3^−).
pub type Eps = [i8; 6];

pub const MAX_COND: f64 = 1e8;

pub fn eps_product(eps: &Eps) -> i32 {
    eps.iter().map(|&e| i32::from(e)).product()
}

pub fn neg_eps(eps: &Eps) -> Eps {
    eps.map(|e| -e)
}

pub fn validate_eps(eps: &Eps) -> Result<()> {
    if eps.iter().any(|&e| e != 1 && e != -1) {
        return Err(Error::Config(format!("sign vector {eps:?} has entries other than ±1")));
    }
    Ok(())
}

/// a_ε(λ) = ∏_{σ,i} θ(α_i^σ + ε_i^σ(η/2 − λ)) / θ(α_i^σ).
pub fn a_eps(p: &ModelParams, l: C, eps: &Eps) -> C {
    let al = p.alphas();
    let ctx = &p.ctx;
    (0..6)
        .map(|i| {
            let e = f64::from(eps[i]);
            ctx.th(al[i] + e * (p.eta / 2.0 - l)) / ctx.th(al[i])
        })
        .product()
}

/// A_ε(λ) = (−1)^N θ(2λ+η)/θ(2λ) a_ε(λ) a(λ) d(−λ).
pub fn big_a_eps(p: &ModelParams, l: C, eps: &Eps) -> C {
    let ctx = &p.ctx;
    let sign = if p.n % 2 == 0 { 1.0 } else { -1.0 };
    sign * ctx.th(2.0 * l + p.eta) / ctx.th(2.0 * l)
        * a_eps(p, l, eps)
        * vertex::a_fn(p, l)
        * vertex::d_fn(p, -l)
}

/// Relative residual of a_ε(λ+η/2)a_ε(−λ+η/2) = det_q K_+ det_q K_− / (θ(2η+2λ)θ(2η−2λ)).
pub fn cond_a_k_residual(p: &ModelParams, l: C, eps: &Eps) -> f64 {
    let h = p.eta / 2.0;
    let ctx = &p.ctx;
    let lhs = a_eps(p, l + h, eps) * a_eps(p, -l + h, eps);
    let rhs = vertex::detq_k(p, l, 1.0) * vertex::detq_k(p, l, -1.0)
        / (ctx.th(2.0 * p.eta + 2.0 * l) * ctx.th(2.0 * p.eta - 2.0 * l));
    linalg::rel_diff_c(lhs, rhs)
}

/// Relative residual of A(λ+η/2)A(−λ+η/2) against the quantum-determinant scalar.
pub fn def_a_residual(p: &ModelParams, l: C, eps: &Eps) -> f64 {
    let h = p.eta / 2.0;
    let lhs = big_a_eps(p, l + h, eps) * big_a_eps(p, -l + h, eps);
    linalg::rel_diff_c(lhs, vertex::detq_rhs(p, l))
}

/// h-tuples in lexicographic order, site 1 first.
pub fn h_tuples(n: usize) -> Vec<Vec<u8>> {
    (0..1usize << n)
        .map(|k| (0..n).map(|s| ((k >> (n - 1 - s)) & 1) as u8).collect())
        .collect()
}

/// (ξ_1^{(h_1)}, …, ξ_N^{(h_N)}).
pub fn shifted(p: &ModelParams, h: &[u8]) -> Vec<C> {
    h.iter().enumerate().map(|(n, &hn)| p.xi_shift(n, hn)).collect()
}

fn complement(h: &[u8]) -> Vec<u8> {
    h.iter().map(|&x| 1 - x).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SoVConfig {
    pub covector_s: Vec<C>,
    pub norm_n0: C,
    pub eps: Eps,
}

impl SoVConfig {
    pub fn random<R: Rng>(rng: &mut R, dim: usize, eps: Eps) -> Self {
        let covector_s = (0..dim)
            .map(|_| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self {
            covector_s,
            norm_n0: ONE,
            eps,
        }
    }
}

/// Left covectors ⟨h| and right vectors |h⟩ indexed as `h_tuples`.
#[derive(Debug, Clone)]
pub struct SoVBasis {
    pub n: usize,
    pub eps: Eps,
    pub norm_n0: C,
    pub left: Vec<CVec>,
    /// ∏_{h_n=1} θ(2ξ_n−2η)/θ(2ξ_n+2η) 𝒯(ξ_n+η/2) |R⟩, before division by A.
    raw_right: Vec<CVec>,
    pub r_state: CVec,
    pub cond: f64,
}

impl SoVBasis {
    /// |h⟩ for the basis sign vector.
    pub fn right(&self, p: &ModelParams, k: usize) -> CVec {
        self.right_eps(p, k, &self.eps)
    }

    /// |h⟩_{ε′}: the right state built with A_{ε′} on the same |R⟩.
    pub fn right_eps(&self, p: &ModelParams, k: usize, eps: &Eps) -> CVec {
        let h = &h_tuples(self.n)[k];
        let mut s = ONE;
        for (n, &hn) in h.iter().enumerate() {
            if hn == 1 {
                s /= big_a_eps(p, p.eta / 2.0 - p.xi[n], eps);
            }
        }
        &self.raw_right[k] * s
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn to_dump(&self, p: &ModelParams) -> SoVBasisDump {
        let hs = h_tuples(self.n);
        SoVBasisDump {
            eps: self.eps,
            cond: self.cond,
            left: hs
                .iter()
                .zip(&self.left)
                .map(|(h, v)| (h.clone(), v.iter().copied().collect()))
                .collect(),
            right: hs
                .iter()
                .enumerate()
                .map(|(k, h)| (h.clone(), self.right(p, k).iter().copied().collect()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SoVBasisDump {
    pub eps: Eps,
    pub cond: f64,
    pub left: Vec<(Vec<u8>, Vec<C>)>,
    pub right: Vec<(Vec<u8>, Vec<C>)>,
}

fn row_times(v: &CVec, m: &CMat) -> CVec {
    m.transpose() * v
}

pub fn build_sov_bases(p: &ModelParams, cfg: &SoVConfig) -> Result<SoVBasis> {
    validate_eps(&cfg.eps)?;
    let n = p.n;
    let dim = p.dim();
    if cfg.covector_s.len() != dim {
        return Err(Error::Config(format!(
            "covector has {} coordinates, expected {dim}",
            cfg.covector_s.len()
        )));
    }
    let ctx = &p.ctx;
    let h = p.eta / 2.0;
    let mut tm = Vec::with_capacity(n);
    let mut tp = Vec::with_capacity(n);
    for &x in &p.xi {
        let a = big_a_eps(p, h - x, &cfg.eps);
        tm.push(vertex::transfer(p, x - h) / a);
        let f = ctx.th(2.0 * x - 2.0 * p.eta) / ctx.th(2.0 * x + 2.0 * p.eta);
        tp.push(vertex::transfer(p, x + h) * f);
    }
    let hs = h_tuples(n);
    let s = CVec::from_vec(cfg.covector_s.clone());
    let left: Vec<CVec> = hs
        .iter()
        .map(|hh| {
            let mut v = s.clone();
            for (k, &hn) in hh.iter().enumerate() {
                if hn == 0 {
                    v = row_times(&v, &tm[k]);
                }
            }
            v
        })
        .collect();
    let lmat = CMat::from_fn(dim, dim, |r, c| left[r][c]);
    let cond = linalg::cond(&lmat);
    if !cond.is_finite() || cond > MAX_COND {
        return Err(Error::Singular(format!(
            "left SoV coordinate matrix has condition number {cond:e}"
        )));
    }
    let xi0 = shifted(p, &vec![0; n]);
    let mut rhs = CVec::zeros(dim);
    rhs[0] = cfg.norm_n0 / (vandermonde(ctx, &xi0) * vandermonde(ctx, &p.xi));
    let r_state = linalg::solve(&lmat, &rhs)?;
    let raw_right = hs
        .iter()
        .map(|hh| {
            let mut v = r_state.clone();
            for (k, &hn) in hh.iter().enumerate() {
                if hn == 1 {
                    v = &tp[k] * v;
                }
            }
            v
        })
        .collect();
    Ok(SoVBasis {
        n,
        eps: cfg.eps,
        norm_n0: cfg.norm_n0,
        left,
        raw_right,
        r_state,
        cond,
    })
}

/// Draws ⟨S| from a complex Gaussian until the basis is well conditioned.
pub fn build_sov_seeded<R: Rng>(
    p: &ModelParams,
    eps: Eps,
    rng: &mut R,
    retries: usize,
) -> Result<(SoVBasis, SoVConfig)> {
    let mut last = None;
    for _ in 0..retries.max(1) {
        let cfg = SoVConfig::random(rng, p.dim(), eps);
        match build_sov_bases(p, &cfg) {
            Ok(b) => return Ok((b, cfg)),
            Err(e @ Error::Singular(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Singular("no covector drawn".into())))
}

/// 𝒩_0 / (V(ξ^{(h)}) V(ξ)).
pub fn expected_gram_diag(p: &ModelParams, h: &[u8], n0: C) -> C {
    n0 / (vandermonde(&p.ctx, &shifted(p, h)) * vandermonde(&p.ctx, &p.xi))
}

pub fn gram(p: &ModelParams, b: &SoVBasis) -> CMat {
    let dim = b.dim();
    let right: Vec<CVec> = (0..dim).map(|k| b.right(p, k)).collect();
    CMat::from_fn(dim, dim, |r, c| b.left[r].dot(&right[c]))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GramReport {
    /// max |G_hk| / sqrt(|G_hh||G_kk|) over h ≠ k.
    pub off_diag: f64,
    /// max relative deviation of G_hh from 𝒩_0/(V(ξ^{(h)})V(ξ)).
    pub diag_dev: f64,
    pub cond: f64,
}

pub fn gram_report(p: &ModelParams, b: &SoVBasis) -> GramReport {
    let g = gram(p, b);
    let hs = h_tuples(b.n);
    let mut off: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for r in 0..g.nrows() {
        dev = dev.max(linalg::rel_diff_c(g[(r, r)], expected_gram_diag(p, &hs[r], b.norm_n0)));
        for c in 0..g.ncols() {
            if r != c {
                let s = (g[(r, r)].norm() * g[(c, c)].norm()).sqrt();
                off = off.max(g[(r, c)].norm() / s.max(f64::MIN_POSITIVE));
            }
        }
    }
    GramReport {
        off_diag: off,
        diag_dev: dev,
        cond: b.cond,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparateState {
    pub side: Side,
    pub poly: EvenEllipticPoly,
    pub eps: Eps,
    /// SoV coefficients indexed as `h_tuples`.
    pub coeffs: Vec<C>,
    pub coords: Vec<C>,
}

impl SeparateState {
    pub fn vector(&self) -> CVec {
        CVec::from_vec(self.coords.clone())
    }
}

fn assemble(vectors: impl Iterator<Item = (C, CVec)>, dim: usize) -> CVec {
    let mut out = CVec::zeros(dim);
    for (c, v) in vectors {
        out += v * c;
    }
    out
}

/// Left-state SoV coefficient ∏[(−a_ε(η/2+ξ_n)/a_ε(η/2−ξ_n))^{h_n} P(ξ_n^{(h_n)})] V(ξ^{(1−h)}) / 𝒩_0.
pub fn left_coeff(p: &ModelParams, h: &[u8], f: &dyn Fn(C) -> C, eps: &Eps, n0: C) -> C {
    let mut c = ONE;
    for (n, &hn) in h.iter().enumerate() {
        let x = p.xi[n];
        if hn == 1 {
            c *= -a_eps(p, p.eta / 2.0 + x, eps) / a_eps(p, p.eta / 2.0 - x, eps);
        }
        c *= f(p.xi_shift(n, hn));
    }
    c * vandermonde(&p.ctx, &shifted(p, &complement(h))) / n0
}

/// Right-state SoV coefficient on the ε-basis for a state of type ε′:
/// ∏[(a_ε(η/2−ξ_n)/a_ε′(η/2−ξ_n))^{h_n} Q(ξ_n^{(h_n)})] V(ξ^{(h)}).
pub fn right_coeff(p: &ModelParams, h: &[u8], f: &dyn Fn(C) -> C, eps: &Eps, eps_state: &Eps) -> C {
    let mut c = ONE;
    for (n, &hn) in h.iter().enumerate() {
        let x = p.eta / 2.0 - p.xi[n];
        if hn == 1 && eps != eps_state {
            c *= a_eps(p, x, eps) / a_eps(p, x, eps_state);
        }
        c *= f(p.xi_shift(n, hn));
    }
    c * vandermonde(&p.ctx, &shifted(p, h))
}

pub fn left_separate(p: &ModelParams, b: &SoVBasis, poly: &EvenEllipticPoly) -> SeparateState {
    let f = |l| poly.eval(&p.ctx, l);
    let coeffs: Vec<C> = h_tuples(b.n)
        .iter()
        .map(|h| left_coeff(p, h, &f, &b.eps, b.norm_n0))
        .collect();
    let v = assemble(coeffs.iter().copied().zip(b.left.iter().cloned()), b.dim());
    SeparateState {
        side: Side::Left,
        poly: poly.clone(),
        eps: b.eps,
        coeffs,
        coords: v.iter().copied().collect(),
    }
}

/// |Q⟩_{ε′} expanded on the ε-basis with the re-weighting of the h-coefficients.
pub fn right_separate(
    p: &ModelParams,
    b: &SoVBasis,
    poly: &EvenEllipticPoly,
    eps_state: &Eps,
) -> SeparateState {
    let f = |l| poly.eval(&p.ctx, l);
    let coeffs: Vec<C> = h_tuples(b.n)
        .iter()
        .map(|h| right_coeff(p, h, &f, &b.eps, eps_state))
        .collect();
    let v = assemble(
        coeffs.iter().enumerate().map(|(k, &c)| (c, b.right(p, k))),
        b.dim(),
    );
    SeparateState {
        side: Side::Right,
        poly: poly.clone(),
        eps: *eps_state,
        coeffs,
        coords: v.iter().copied().collect(),
    }
}

/// |Q⟩_{ε′} summed directly over the ε′-states |h⟩_{ε′}.
pub fn right_separate_direct(
    p: &ModelParams,
    b: &SoVBasis,
    poly: &EvenEllipticPoly,
    eps_state: &Eps,
) -> CVec {
    let f = |l| poly.eval(&p.ctx, l);
    assemble(
        h_tuples(b.n).iter().enumerate().map(|(k, h)| {
            (
                right_coeff(p, h, &f, eps_state, eps_state),
                b.right_eps(p, k, eps_state),
            )
        }),
        b.dim(),
    )
}

/// Worst relative deviation, over h, of
/// ∏(−θ(2ξ−η)/θ(2ξ+η) · a(ξ+η/2)d(−ξ−η/2)/(a(−ξ+η/2)d(ξ−η/2)))^{h_n} V(ξ^{(h)})
/// from V(ξ^{(0)})/V(ξ^{(1)}) · V(ξ^{(1−h)}).
pub fn basis_change_residual(p: &ModelParams) -> f64 {
    let ctx = &p.ctx;
    let h2 = p.eta / 2.0;
    let v0 = vandermonde(ctx, &shifted(p, &vec![0; p.n]));
    let v1 = vandermonde(ctx, &shifted(p, &vec![1; p.n]));
    let mut worst: f64 = 0.0;
    for h in h_tuples(p.n) {
        let mut lhs = vandermonde(ctx, &shifted(p, &h));
        for (n, &hn) in h.iter().enumerate() {
            if hn == 1 {
                let x = p.xi[n];
                lhs *= -ctx.th(2.0 * x - p.eta) / ctx.th(2.0 * x + p.eta)
                    * vertex::a_fn(p, x + h2)
                    * vertex::d_fn(p, -x - h2)
                    / (vertex::a_fn(p, -x + h2) * vertex::d_fn(p, x - h2));
            }
        }
        let rhs = v0 / v1 * vandermonde(ctx, &shifted(p, &complement(&h)));
        worst = worst.max(linalg::rel_diff_c(lhs, rhs));
    }
    worst
}

/// Relative spread between |h⟩ built with the right factors applied in increasing and
/// in decreasing site order.
pub fn right_order_residual(p: &ModelParams, b: &SoVBasis) -> f64 {
    let ctx = &p.ctx;
    let h = p.eta / 2.0;
    let factors: Vec<CMat> = p
        .xi
        .iter()
        .map(|&x| {
            let f = ctx.th(2.0 * x - 2.0 * p.eta) / ctx.th(2.0 * x + 2.0 * p.eta)
                / big_a_eps(p, h - x, &b.eps);
            vertex::transfer(p, x + h) * f
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (k, hh) in h_tuples(p.n).iter().enumerate() {
        let mut v = b.r_state.clone();
        for n in (0..p.n).rev() {
            if hh[n] == 1 {
                v = &factors[n] * v;
            }
        }
        let w = b.right(p, k);
        worst = worst.max((&v - &w).norm() / v.norm().max(w.norm()).max(f64::MIN_POSITIVE));
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenstate {
    pub right: Vec<C>,
    pub left: Vec<C>,
    pub check_point: C,
    pub tq_dis_residual: f64,
    pub right_residual: f64,
    pub left_residual: f64,
}

/// Worst relative residual of Q(ξ^{(1)})/Q(ξ^{(0)}) = τ(ξ+η/2)/A(η/2+ξ) = A(η/2−ξ)/τ(ξ−η/2).
pub fn tq_dis_residual(p: &ModelParams, q: &dyn Fn(C) -> C, tau: &dyn Fn(C) -> C, eps: &Eps) -> f64 {
    let h = p.eta / 2.0;
    let mut worst: f64 = 0.0;
    for n in 0..p.n {
        let x = p.xi[n];
        let ratio = q(p.xi_shift(n, 1)) / q(p.xi_shift(n, 0));
        let r1 = tau(x + h) / big_a_eps(p, h + x, eps);
        let r2 = big_a_eps(p, h - x, eps) / tau(x - h);
        worst = worst
            .max(linalg::rel_diff_c(ratio, r1))
            .max(linalg::rel_diff_c(ratio, r2));
    }
    worst
}

/// Right and left eigenvectors from a Q-function satisfying the discrete TQ relations;
/// returns `NotEigenpair` if those are violated above `tol`.
pub fn eigenstate_from_q(
    p: &ModelParams,
    b: &SoVBasis,
    q: &EvenEllipticPoly,
    tau: &dyn Fn(C) -> C,
    check_point: C,
    tol: f64,
) -> Result<Eigenstate> {
    let ctx = &p.ctx;
    let f = |l| q.eval(ctx, l);
    let dis = tq_dis_residual(p, &f, tau, &b.eps);
    if !(dis <= tol) {
        return Err(Error::NotEigenpair(dis));
    }
    let h2 = p.eta / 2.0;
    let hs = h_tuples(b.n);
    let right = assemble(
        hs.iter()
            .enumerate()
            .map(|(k, h)| (right_coeff(p, h, &f, &b.eps, &b.eps), b.right(p, k))),
        b.dim(),
    );
    let left = assemble(
        hs.iter().zip(&b.left).map(|(h, v)| {
            let mut c = vandermonde(ctx, &shifted(p, h));
            for (n, &hn) in h.iter().enumerate() {
                let x = p.xi[n];
                if hn == 1 {
                    c *= ctx.th(2.0 * x - 2.0 * p.eta) * big_a_eps(p, h2 + x, &b.eps)
                        / (ctx.th(2.0 * x + 2.0 * p.eta) * big_a_eps(p, h2 - x, &b.eps));
                }
                c *= f(p.xi_shift(n, hn));
            }
            (c, v.clone())
        }),
        b.dim(),
    );
    let t = vertex::transfer(p, check_point);
    let tv = tau(check_point);
    let rr = (&t * &right - &right * tv).norm() / (right.norm() * linalg::fro(&t));
    let lr = (t.transpose() * &left - &left * tv).norm() / (left.norm() * linalg::fro(&t));
    Ok(Eigenstate {
        right: right.iter().copied().collect(),
        left: left.iter().copied().collect(),
        check_point,
        tq_dis_residual: dis,
        right_residual: rr,
        left_residual: lr,
    })
}

/// Coordinate inner product ⟨P|Q⟩ of two expanded states (no conjugation).
pub fn inner(left: &SeparateState, right: &SeparateState) -> C {
    left.coords
        .iter()
        .zip(&right.coords)
        .fold(ZERO, |acc, (a, b)| acc + a * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::EllipticContext;
    use crate::linalg::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EPS: Eps = [1, -1, 1, 1, -1, 1];

    fn params(n: usize) -> ModelParams {
        let xi = [c(0.11, -0.07), c(-0.23, 0.05), c(0.31, 0.13)];
        ModelParams::new(
            c(0.35, 0.12),
            xi[..n].to_vec(),
            [c(0.52, 0.14), c(-0.41, 0.2), c(0.17, 0.6)],
            [c(0.3, -0.22), c(-0.12, 0.33), c(0.05, 0.81)],
            EllipticContext::default(),
        )
        .unwrap()
    }

    fn basis(p: &ModelParams) -> SoVBasis {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        build_sov_seeded(p, EPS, &mut rng, 5).unwrap().0
    }

    #[test]
    fn a_eps_is_one_at_half_eta() {
        let p = params(2);
        assert!((a_eps(&p, p.eta / 2.0, &EPS) - ONE).norm() < 1e-14);
    }

    #[test]
    fn functional_equations() {
        let p = params(3);
        let l = c(0.21, -0.17);
        assert!(cond_a_k_residual(&p, l, &EPS) < 1e-11);
        assert!(def_a_residual(&p, l, &EPS) < 1e-10);
    }

    #[test]
    fn h_tuple_order() {
        assert_eq!(h_tuples(2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn gram_is_diagonal() {
        let p = params(3);
        let b = basis(&p);
        let g = gram_report(&p, &b);
        assert!(g.off_diag < 1e-8 && g.diag_dev < 1e-8, "{g:?}");
        assert!(right_order_residual(&p, &b) < 1e-10);
        assert!(basis_change_residual(&p) < 1e-10);
    }

    #[test]
    fn reweighting_paths_agree() {
        let p = params(3);
        let b = basis(&p);
        let q = EvenEllipticPoly::from_roots(vec![c(0.17, 0.29)]);
        let other = neg_eps(&EPS);
        let v = right_separate(&p, &b, &q, &other).vector();
        let w = right_separate_direct(&p, &b, &q, &other);
        assert!((&v - &w).norm() / v.norm() < 1e-10);
    }

    #[test]
    fn degenerate_covector_rejected() {
        let p = params(2);
        let cfg = SoVConfig {
            covector_s: vec![ZERO; 4],
            norm_n0: ONE,
            eps: EPS,
        };
        assert!(matches!(build_sov_bases(&p, &cfg), Err(Error::Singular(_))));
    }
}
