//! Scalar products of separate states: the SoV sum, its determinant form, the Filali and
//! residue-block pipelines, and the Slavnov/Gaudin representation.

pub mod filali;
pub mod slavnov;

use serde::Serialize;

use crate::basis::{self, basis_matrix, BasisSpec, XiBasis};
use crate::elliptic::{vandermonde, EllipticContext, EvenEllipticPoly};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C, ONE, ZERO};
use crate::registry::{Named, Registry};
use crate::sov::{a_eps, h_tuples, neg_eps, shifted, Eps};
use crate::vertex::ModelParams;

/// Determinant condition number above which a comparison is reported as inconclusive.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct ScalarProductResult {
    pub value: C,
    pub method: String,
    /// Largest condition number among the determinants used (1 when none).
    pub cond: f64,
}

/// a_ε(η/2+ξ_n) / a_ε′(η/2−ξ_n).
pub fn boundary_ratio(p: &ModelParams, n: usize, eps: &Eps, eps_prime: &Eps) -> C {
    let h = p.eta / 2.0;
    a_eps(p, h + p.xi[n], eps) / a_eps(p, h - p.xi[n], eps_prime)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SumValue {
    pub value: C,
    /// Σ|summand|, the natural scale for cancellations.
    pub abs_sum: f64,
}

/// The explicit 2^N-term SoV sum for ⟨P|Q⟩ with states of types ε and ε′.
pub fn sp_bruteforce(
    p: &ModelParams,
    eps: &Eps,
    eps_prime: &Eps,
    pp: &dyn Fn(C) -> C,
    qq: &dyn Fn(C) -> C,
) -> SumValue {
    let ctx = &p.ctx;
    let pq = |x: C| pp(x) * qq(x);
    let pref: C = (0..p.n).map(|n| pq(p.xi_shift(n, 0))).product();
    let vxi = vandermonde(ctx, &p.xi);
    let ratios: Vec<C> = (0..p.n)
        .map(|n| {
            -boundary_ratio(p, n, eps, eps_prime) * pq(p.xi_shift(n, 1)) / pq(p.xi_shift(n, 0))
        })
        .collect();
    let mut total = ZERO;
    let mut abs_sum = 0.0;
    for h in h_tuples(p.n) {
        let mut t = ONE;
        for (n, &hn) in h.iter().enumerate() {
            if hn == 1 {
                t *= ratios[n];
            }
        }
        let comp: Vec<u8> = h.iter().map(|&x| 1 - x).collect();
        t *= vandermonde(ctx, &shifted(p, &comp)) / vxi;
        let term = pref * t;
        total += term;
        abs_sum += term.norm();
    }
    SumValue {
        value: total,
        abs_sum,
    }
}

pub fn poly_fn<'a>(ctx: &'a EllipticContext, poly: &'a EvenEllipticPoly) -> impl Fn(C) -> C + 'a {
    move |l| poly.eval(ctx, l)
}

/// det[PQ(ξ^{(0)})Θ_j(ξ^{(1)}) − r_i PQ(ξ^{(1)})Θ_j(ξ^{(0)})] / det[Θ_j(ξ)].
pub fn sp_determinant(
    p: &ModelParams,
    eps: &Eps,
    eps_prime: &Eps,
    pp: &dyn Fn(C) -> C,
    qq: &dyn Fn(C) -> C,
    b: &dyn XiBasis,
) -> Result<ScalarProductResult> {
    let ctx = &p.ctx;
    let n = p.n;
    if b.size() != n {
        return Err(Error::Config(format!(
            "basis of size {} used for a chain of {n} sites",
            b.size()
        )));
    }
    let pq = |x: C| pp(x) * qq(x);
    let num = CMat::from_fn(n, n, |i, j| {
        let x0 = p.xi_shift(i, 0);
        let x1 = p.xi_shift(i, 1);
        let r = boundary_ratio(p, i, eps, eps_prime);
        pq(x0) * b.eval(ctx, j, x1) - r * pq(x1) * b.eval(ctx, j, x0)
    });
    let den = basis_matrix(b, ctx, &p.xi);
    let dd = linalg::det_cond(&den);
    if dd.value.norm() == 0.0 || !dd.cond.is_finite() {
        return Err(Error::Singular("basis matrix at the inhomogeneities is singular".into()));
    }
    let dn = linalg::det_cond(&num);
    Ok(ScalarProductResult {
        value: dn.value / dd.value,
        method: "sov-det".into(),
        cond: dn.cond.max(dd.cond),
    })
}

/// Everything a scalar-product method may need.
#[derive(Debug, Clone)]
pub struct SpCase {
    pub params: ModelParams,
    pub eps: Eps,
    pub eps_prime: Eps,
    pub p: EvenEllipticPoly,
    pub q: EvenEllipticPoly,
    pub basis: BasisSpec,
    /// Return ⟨P|Q⟩/⟨Q|Q⟩ instead of ⟨P|Q⟩.
    pub normalise: bool,
}

pub trait ScalarProductMethod: Named + Send + Sync {
    fn compute(&self, case: &SpCase) -> Result<ScalarProductResult>;
}

struct Bruteforce;
struct SovDet;
struct SlavnovRatio;

impl Named for Bruteforce {
    fn name(&self) -> &'static str {
        "bruteforce"
    }
}
impl Named for SovDet {
    fn name(&self) -> &'static str {
        "sov-det"
    }
}
impl Named for SlavnovRatio {
    fn name(&self) -> &'static str {
        "slavnov-ratio"
    }
}

impl ScalarProductMethod for Bruteforce {
    fn compute(&self, c: &SpCase) -> Result<ScalarProductResult> {
        let ctx = &c.params.ctx;
        let q = poly_fn(ctx, &c.q);
        let v = sp_bruteforce(&c.params, &c.eps, &c.eps_prime, &poly_fn(ctx, &c.p), &q).value;
        let value = if c.normalise {
            v / sp_bruteforce(&c.params, &c.eps, &c.eps_prime, &q, &q).value
        } else {
            v
        };
        Ok(ScalarProductResult {
            value,
            method: self.name().into(),
            cond: 1.0,
        })
    }
}

impl ScalarProductMethod for SovDet {
    fn compute(&self, c: &SpCase) -> Result<ScalarProductResult> {
        let ctx = &c.params.ctx;
        let b = basis::build(&c.basis, ctx)?;
        let q = poly_fn(ctx, &c.q);
        let r = sp_determinant(&c.params, &c.eps, &c.eps_prime, &poly_fn(ctx, &c.p), &q, b.as_ref())?;
        if !c.normalise {
            return Ok(r);
        }
        let n = sp_determinant(&c.params, &c.eps, &c.eps_prime, &q, &q, b.as_ref())?;
        Ok(ScalarProductResult {
            value: r.value / n.value,
            method: self.name().into(),
            cond: r.cond.max(n.cond),
        })
    }
}

impl ScalarProductMethod for SlavnovRatio {
    fn compute(&self, c: &SpCase) -> Result<ScalarProductResult> {
        if !c.normalise {
            return Err(Error::Config(
                "slavnov-ratio only yields the normalised scalar product".into(),
            ));
        }
        if c.eps != c.eps_prime {
            return Err(Error::Hypothesis(
                "slavnov-ratio needs equal sign vectors for both states".into(),
            ));
        }
        let r = slavnov::sp_slavnov_ratio(&c.params, &c.eps, &c.p.roots, &c.q.roots, 1e-8)?;
        Ok(ScalarProductResult {
            value: r.value,
            method: self.name().into(),
            cond: r.cond,
        })
    }
}

pub fn registry() -> Registry<dyn ScalarProductMethod> {
    let mut r: Registry<dyn ScalarProductMethod> = Registry::new("scalar-product method");
    r.register(Box::new(Bruteforce))
        .register(Box::new(SovDet))
        .register(Box::new(SlavnovRatio));
    r
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    pub value: C,
    pub abs_sum: f64,
    /// |value| / Σ|summands|.
    pub relative: f64,
    /// Largest |entry| of the last numerator column in the W = PQ·thsym(·, w_N) basis,
    /// relative to the largest entry of the matrix.
    pub last_column: f64,
    /// The same scalar product through the W-basis determinant, relative to Σ|summands|.
    pub determinant_relative: f64,
}

/// ⟨P|Q⟩ for ε′ = −ε and M + M′ = N − 1, with the W-basis proof mechanism.
pub fn orthogonality_check(
    p: &ModelParams,
    eps: &Eps,
    pp: &EvenEllipticPoly,
    qq: &EvenEllipticPoly,
    w_n: C,
) -> Result<OrthogonalityReport> {
    let m = pp.order_half();
    let mp = qq.order_half();
    if m + mp + 1 != p.n {
        return Err(Error::Hypothesis(format!(
            "sector sizes M = {m}, M′ = {mp} do not add up to N − 1 = {}",
            p.n - 1
        )));
    }
    let ctx = &p.ctx;
    let eps_prime = neg_eps(eps);
    let fp = poly_fn(ctx, pp);
    let fq = poly_fn(ctx, qq);
    let s = sp_bruteforce(p, eps, &eps_prime, &fp, &fq);
    let mut w: Vec<C> = pp.roots.clone();
    w.extend_from_slice(&qq.roots);
    w.push(w_n);
    let n = p.n;
    let num = CMat::from_fn(n, n, |i, j| {
        let x1 = p.xi_shift(i, 1);
        let x0 = p.xi_shift(i, 0);
        ctx.thsym(x1, w_n) / ctx.thsym(x1, w[j]) - ctx.thsym(x0, w_n) / ctx.thsym(x0, w[j])
    });
    let scale = num.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let last = (0..n).map(|i| num[(i, n - 1)].norm()).fold(0.0, f64::max) / scale;
    let b = basis::build(&BasisSpec::root_product(w), ctx)?;
    let d = sp_determinant(p, eps, &eps_prime, &fp, &fq, b.as_ref())?;
    Ok(OrthogonalityReport {
        value: s.value,
        abs_sum: s.abs_sum,
        relative: s.value.norm() / s.abs_sum.max(f64::MIN_POSITIVE),
        last_column: last,
        determinant_relative: d.value.norm() / s.abs_sum.max(f64::MIN_POSITIVE),
    })
}

/// det[Θ_j(x_i)] / V(x) for a basis of Ξ_N.
pub fn vdm_constant(ctx: &EllipticContext, b: &dyn XiBasis, xs: &[C]) -> C {
    linalg::det(&basis_matrix(b, ctx, xs)) / vandermonde(ctx, xs)
}

/// Both sides of the basis-size extension identity for a function F, L points x, ε = ±1
/// and ℓ = r.len() extension parameters, evaluated with monomial bases.
pub fn extension_lemma_sides(
    ctx: &EllipticContext,
    eta: C,
    xs: &[C],
    f: &dyn Fn(C) -> C,
    eps: f64,
    r: &[C],
) -> (C, C) {
    let ratio = |xs: &[C], f: &dyn Fn(C) -> C| {
        let n = xs.len();
        let b = basis::Monomial::new(n);
        let num = CMat::from_fn(n, n, |i, j| {
            b.eval(ctx, j, xs[i] - eta / 2.0) - f(xs[i]) * b.eval(ctx, j, xs[i] + eta / 2.0)
        });
        let den = CMat::from_fn(n, n, |i, j| b.eval(ctx, j, xs[i] - eta / 2.0));
        linalg::det(&num) / linalg::det(&den)
    };
    let lhs = ratio(xs, f);
    let fl = |l: C| {
        r.iter().fold(f(l), |acc, &rj| {
            acc * ctx.thsym(l - eta / 2.0, rj) / ctx.thsym(l + eta / 2.0, rj)
        })
    };
    let mut ext = xs.to_vec();
    ext.extend(r.iter().map(|&rj| eta / 2.0 + eps * rj));
    (lhs, ratio(&ext, &fl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    const EPS: Eps = [1, -1, 1, 1, -1, 1];

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
    fn determinant_matches_sum_in_two_bases() {
        let p = params(4);
        let ctx = &p.ctx;
        let pp = EvenEllipticPoly::from_roots(vec![c(0.21, 0.17), c(0.02, -0.28)]);
        let qq = EvenEllipticPoly::from_roots(vec![c(-0.33, 0.08), c(0.14, 0.39)]);
        let (fp, fq) = (poly_fn(ctx, &pp), poly_fn(ctx, &qq));
        for other in [EPS, neg_eps(&EPS)] {
            let s = sp_bruteforce(&p, &EPS, &other, &fp, &fq);
            assert!(s.value.norm() > 1e-6 * s.abs_sum);
            let mono = basis::build(&BasisSpec::monomial(4), ctx).unwrap();
            let w = vec![c(0.4, 0.1), c(-0.1, 0.3), c(0.2, -0.25), c(-0.37, -0.12)];
            let rp = basis::build(&BasisSpec::root_product(w), ctx).unwrap();
            let d1 = sp_determinant(&p, &EPS, &other, &fp, &fq, mono.as_ref()).unwrap();
            let d2 = sp_determinant(&p, &EPS, &other, &fp, &fq, rp.as_ref()).unwrap();
            assert!(linalg::rel_diff_c(s.value, d1.value) < 1e-9);
            assert!(linalg::rel_diff_c(d1.value, d2.value) < 1e-9);
        }
    }

    #[test]
    fn sum_is_symmetric() {
        let p = params(4);
        let ctx = &p.ctx;
        let pp = EvenEllipticPoly::from_roots(vec![c(0.21, 0.17), c(0.02, -0.28)]);
        let qq = EvenEllipticPoly::from_roots(vec![c(-0.33, 0.08), c(0.14, 0.39)]);
        let (fp, fq) = (poly_fn(ctx, &pp), poly_fn(ctx, &qq));
        let a = sp_bruteforce(&p, &EPS, &EPS, &fp, &fq);
        let b = sp_bruteforce(&p, &EPS, &EPS, &fq, &fp);
        assert!(a.value.norm() > 1e-6 * a.abs_sum);
        assert!(linalg::rel_diff_c(a.value, b.value) < 1e-10);
    }

    #[test]
    fn sectors_are_orthogonal() {
        let p = params(3);
        let pp = EvenEllipticPoly::from_roots(vec![c(0.21, 0.17)]);
        let qq = EvenEllipticPoly::from_roots(vec![c(-0.33, 0.08)]);
        let r = orthogonality_check(&p, &EPS, &pp, &qq, c(0.05, 0.44)).unwrap();
        assert!(r.relative < 1e-10, "{r:?}");
        assert!(r.last_column < 1e-12);
        assert!(r.determinant_relative < 1e-10);
        let bad = orthogonality_check(&p, &EPS, &pp, &EvenEllipticPoly::one(), c(0.05, 0.44));
        assert!(matches!(bad, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn vandermonde_ratio_is_constant() {
        let ctx = EllipticContext::default();
        let b = basis::Monomial::new(4);
        let x1 = [c(0.1, 0.2), c(-0.3, 0.1), c(0.25, -0.15), c(0.4, 0.3)];
        let x2 = [c(-0.2, 0.05), c(0.33, 0.21), c(0.12, -0.31), c(-0.41, 0.17)];
        let a = vdm_constant(&ctx, &b, &x1);
        let bb = vdm_constant(&ctx, &b, &x2);
        assert!(linalg::rel_diff_c(a, bb) < 1e-9);
    }

    #[test]
    fn extension_lemma() {
        let ctx = EllipticContext::default();
        let eta = c(0.35, 0.12);
        let xs = [c(0.1, 0.2), c(-0.3, 0.1)];
        let f = |l: C| ctx.th(l + c(0.2, 0.1)) / ctx.th(l - c(0.3, -0.2));
        for eps in [1.0, -1.0] {
            let (l, r) = extension_lemma_sides(&ctx, eta, &xs, &f, eps, &[c(0.17, 0.3), c(-0.22, 0.11)]);
            assert!(linalg::rel_diff_c(l, r) < 1e-9, "{l} {r}");
        }
    }

    #[test]
    fn registry_lists_methods() {
        assert_eq!(registry().names(), vec!["bruteforce", "sov-det", "slavnov-ratio"]);
    }
}
