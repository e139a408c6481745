//! Bases of Ξ_N, the space of even elliptic polynomials of order 2(N−1).

use serde::{Deserialize, Serialize};

use crate::elliptic::{EllipticContext, EvenEllipticPoly, GENERICITY_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C};
use crate::registry::{Named, Registry};

pub trait XiBasis: Send + Sync {
    fn size(&self) -> usize;
    /// The j-th basis function (0-based) at λ.
    fn eval(&self, ctx: &EllipticContext, j: usize, l: C) -> C;
}

/// Matrix [Θ^{(j)}(x_i)].
pub fn basis_matrix(b: &dyn XiBasis, ctx: &EllipticContext, xs: &[C]) -> CMat {
    CMat::from_fn(xs.len(), b.size(), |i, j| b.eval(ctx, j, xs[i]))
}

/// Parameters for constructing a basis; each kind reads the fields it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kind: String,
    pub size: usize,
    #[serde(default)]
    pub w: Vec<C>,
    #[serde(default)]
    pub q: Vec<C>,
    #[serde(default)]
    pub gamma: Option<C>,
    #[serde(default)]
    pub r: Vec<C>,
    #[serde(default)]
    pub eta: Option<C>,
}

impl BasisSpec {
    pub fn monomial(size: usize) -> Self {
        Self {
            kind: "monomial".into(),
            size,
            ..Default::default()
        }
    }

    pub fn root_product(w: Vec<C>) -> Self {
        Self {
            kind: "root-product".into(),
            size: w.len(),
            w,
            ..Default::default()
        }
    }

    pub fn q_gamma(q: Vec<C>, gamma: C, r: Vec<C>, eta: C) -> Self {
        Self {
            kind: "q-gamma".into(),
            size: 2 * q.len() + r.len(),
            q,
            gamma: Some(gamma),
            r,
            eta: Some(eta),
            ..Default::default()
        }
    }
}

pub trait BasisFactory: Named + Send + Sync {
    fn build(&self, spec: &BasisSpec, ctx: &EllipticContext) -> Result<Box<dyn XiBasis>>;
}

/// Θ^{(j)} = θ_1^{2(j−1)} θ_4^{2(N−j)} / θ_4^{N−1}(0).
pub struct Monomial {
    n: usize,
}

impl Monomial {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl XiBasis for Monomial {
    fn size(&self) -> usize {
        self.n
    }

    fn eval(&self, ctx: &EllipticContext, j: usize, l: C) -> C {
        let t1 = ctx.theta(1, l, 1);
        let t4 = ctx.theta(4, l, 1);
        let t40 = ctx.theta(4, C::new(0.0, 0.0), 1);
        t1.powu(2 * j as u32) * t4.powu(2 * (self.n - 1 - j) as u32)
            / t40.powu((self.n - 1) as u32)
    }
}

/// Θ^{(j)} = ∏_{k≠j} thsym(λ, w_k).
pub struct RootProduct {
    w: Vec<C>,
}

impl XiBasis for RootProduct {
    fn size(&self) -> usize {
        self.w.len()
    }

    fn eval(&self, ctx: &EllipticContext, j: usize, l: C) -> C {
        self.w
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, wk)| ctx.thsym(l, *wk))
            .product()
    }
}

/// Θ̄^{(j)} = Q(λ+η/2)Q(λ−η/2)R(λ)thsym(λ,γ) / (thsym(λ,z_j)thsym(λ,z̃_j)) with
/// (z_j, z̃_j) = (q_j+η/2, q_j−η/2) for j ≤ M, (q_{j−M}+η/2, γ) for M < j ≤ 2M and
/// (r_{j−2M}, γ) beyond, R(λ) = ∏ thsym(λ, r_k).
pub struct QGamma {
    q: EvenEllipticPoly,
    r: EvenEllipticPoly,
    gamma: C,
    eta: C,
    z: Vec<(C, C)>,
}

impl QGamma {
    pub fn new(q: Vec<C>, gamma: C, r: Vec<C>, eta: C) -> Self {
        let m = q.len();
        let mut z = Vec::with_capacity(2 * m + r.len());
        for qj in &q {
            z.push((qj + eta / 2.0, qj - eta / 2.0));
        }
        for qj in &q {
            z.push((qj + eta / 2.0, gamma));
        }
        for rj in &r {
            z.push((*rj, gamma));
        }
        Self {
            q: EvenEllipticPoly::from_roots(q),
            r: EvenEllipticPoly::from_roots(r),
            gamma,
            eta,
            z,
        }
    }

    pub fn pairs(&self) -> &[(C, C)] {
        &self.z
    }
}

impl XiBasis for QGamma {
    fn size(&self) -> usize {
        self.z.len()
    }

    fn eval(&self, ctx: &EllipticContext, j: usize, l: C) -> C {
        let h = self.eta / 2.0;
        let (z, zt) = self.z[j];
        let num = self.q.eval(ctx, l + h)
            * self.q.eval(ctx, l - h)
            * self.r.eval(ctx, l)
            * ctx.thsym(l, self.gamma);
        let den = ctx.thsym(l, z) * ctx.thsym(l, zt);
        if den.norm() > 1e-300 {
            return num / den;
        }
        // removable singularity: evaluate off the point
        let d = C::new(1e-7, 1e-7);
        (self.eval(ctx, j, l + d) + self.eval(ctx, j, l - d)) / 2.0
    }
}

struct MonomialFactory;
struct RootProductFactory;
struct QGammaFactory;

impl Named for MonomialFactory {
    fn name(&self) -> &'static str {
        "monomial"
    }
}
impl Named for RootProductFactory {
    fn name(&self) -> &'static str {
        "root-product"
    }
}
impl Named for QGammaFactory {
    fn name(&self) -> &'static str {
        "q-gamma"
    }
}

impl BasisFactory for MonomialFactory {
    fn build(&self, spec: &BasisSpec, _ctx: &EllipticContext) -> Result<Box<dyn XiBasis>> {
        if spec.size == 0 {
            return Err(Error::Config("monomial basis of size 0".into()));
        }
        Ok(Box::new(Monomial { n: spec.size }))
    }
}

impl BasisFactory for RootProductFactory {
    fn build(&self, spec: &BasisSpec, ctx: &EllipticContext) -> Result<Box<dyn XiBasis>> {
        if spec.w.len() != spec.size {
            return Err(Error::Config(format!(
                "root-product basis needs {} roots, got {}",
                spec.size,
                spec.w.len()
            )));
        }
        ctx.check_pairwise_distinct(&spec.w, GENERICITY_MARGIN, "root-product basis")?;
        Ok(Box::new(RootProduct { w: spec.w.clone() }))
    }
}

impl BasisFactory for QGammaFactory {
    fn build(&self, spec: &BasisSpec, ctx: &EllipticContext) -> Result<Box<dyn XiBasis>> {
        let gamma = spec
            .gamma
            .ok_or_else(|| Error::Config("q-gamma basis needs gamma".into()))?;
        let eta = spec
            .eta
            .ok_or_else(|| Error::Config("q-gamma basis needs eta".into()))?;
        let b = QGamma::new(spec.q.clone(), gamma, spec.r.clone(), eta);
        if b.size() != spec.size {
            return Err(Error::Config(format!(
                "q-gamma basis size {} does not match requested {}",
                b.size(),
                spec.size
            )));
        }
        let mut pts: Vec<C> = spec.q.iter().map(|q| q + eta / 2.0).collect();
        pts.extend(spec.r.iter().copied());
        pts.push(gamma);
        ctx.check_pairwise_distinct(&pts, GENERICITY_MARGIN, "q-gamma basis")?;
        Ok(Box::new(b))
    }
}

pub fn registry() -> Registry<dyn BasisFactory> {
    let mut r: Registry<dyn BasisFactory> = Registry::new("basis");
    r.register(Box::new(MonomialFactory))
        .register(Box::new(RootProductFactory))
        .register(Box::new(QGammaFactory));
    r
}

pub fn build(spec: &BasisSpec, ctx: &EllipticContext) -> Result<Box<dyn XiBasis>> {
    registry().get(&spec.kind)?.build(spec, ctx)
}

/// Checks that a function of λ lies in Ξ_L: even, π-periodic and with the
/// πω-multiplier of order 2(L−1). Returns the worst relative deviation at `pts`.
pub fn xi_membership_residual(
    ctx: &EllipticContext,
    f: &dyn Fn(C) -> C,
    size: usize,
    pts: &[C],
) -> f64 {
    use crate::linalg::rel_diff_c;
    use std::f64::consts::PI;
    let w = ctx.omega * PI;
    let mut worst: f64 = 0.0;
    for &l in pts {
        let v = f(l);
        worst = worst.max(rel_diff_c(f(-l), v));
        worst = worst.max(rel_diff_c(f(l + PI), v));
        let mult = (-(C::new(0.0, 2.0) * l) - C::new(0.0, 1.0) * w)
            .exp()
            .powu(2 * (size as u32 - 1));
        worst = worst.max(rel_diff_c(f(l + w), mult * v));
    }
    worst
}
