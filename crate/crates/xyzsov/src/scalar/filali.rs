//! Filali-type determinant 𝖬 and the residue-block transformation 𝒳·𝖬 for the three
//! sector variants 2M = N, 2M > N (extended inhomogeneities) and 2M < N (extra roots r).

use serde::Serialize;
use std::f64::consts::PI;

use crate::basis::{QGamma, XiBasis};
use crate::elliptic::{vandermonde, EllipticContext, EvenEllipticPoly};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C, I, ONE, ZERO};
use crate::sov::Eps;
use crate::vertex::ModelParams;

/// a_i = −ε_i α_i in the order (α+1, α+2, α+3, α−1, α−2, α−3).
pub fn a_params(p: &ModelParams, eps: &Eps) -> [C; 6] {
    let al = p.alphas();
    std::array::from_fn(|i| -(eps[i] as f64) * al[i])
}

/// 𝖬_a(u, v) = Σ_± ± ∏θ(u ± a_n) / thsym(u ± η/2, v).
pub fn filali_fn(ctx: &EllipticContext, eta: C, u: C, v: C, a: &[C]) -> C {
    [1.0, -1.0]
        .iter()
        .map(|&s| {
            let num: C = a.iter().map(|&an| ctx.th(u + s * an)).product();
            s * num / ctx.thsym(u + s * eta / 2.0, v)
        })
        .sum()
}

pub fn filali_matrix(ctx: &EllipticContext, eta: C, xs: &[C], w: &[C], a: &[C]) -> Result<CMat> {
    let m = CMat::from_fn(xs.len(), w.len(), |i, j| filali_fn(ctx, eta, xs[i], w[j], a));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Genericity(
            "a point ξ ± η/2 coincides with a root w up to sign".into(),
        ));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// 2M = N
    Balanced,
    /// 2M > N
    Excess,
    /// 2M < N
    Deficit,
}

impl Variant {
    pub fn of(n: usize, m: usize) -> Self {
        match (2 * m).cmp(&n) {
            std::cmp::Ordering::Equal => Variant::Balanced,
            std::cmp::Ordering::Greater => Variant::Excess,
            std::cmp::Ordering::Less => Variant::Deficit,
        }
    }
}

/// a′ with a′_s = a_s + (N − 2M)η, so that Σa′ = η whenever Σa = (2M+1−N)η.
pub fn shifted_params(a: &[C; 6], s: usize, n: usize, m: usize, eta: C) -> [C; 6] {
    let mut ap = *a;
    ap[s] += (n as f64 - 2.0 * m as f64) * eta;
    ap
}

/// Extended inhomogeneities ξ ∪ {kη − a_s, k = 1..2M−N}.
pub fn extended_xi(p: &ModelParams, a: &[C; 6], s: usize, m: usize) -> Vec<C> {
    let mut xs = p.xi.clone();
    xs.extend((1..=(2 * m - p.n)).map(|k| k as f64 * p.eta - a[s]));
    xs
}

/// Extra roots w_{2M+j} = a_s + jη − η/2, j = 1..N−2M.
pub fn deficit_roots(p: &ModelParams, a: &[C; 6], s: usize, m: usize) -> Vec<C> {
    (1..=(p.n - 2 * m))
        .map(|j| a[s] + j as f64 * p.eta - p.eta / 2.0)
        .collect()
}

fn sym_dist(ctx: &EllipticContext, x: C, y: C) -> f64 {
    ctx.lattice_dist(x - y).min(ctx.lattice_dist(x + y))
}

/// Index s whose extension points stay farthest (in lattice distance, up to sign) from
/// the existing poles. None for 2M = N.
pub fn choose_shift(p: &ModelParams, eps: &Eps, m: usize) -> Option<usize> {
    let ctx = &p.ctx;
    let a = a_params(p, eps);
    let h = p.eta / 2.0;
    let score = |s: usize| -> f64 {
        let mut best = f64::INFINITY;
        match Variant::of(p.n, m) {
            Variant::Balanced => {}
            Variant::Excess => {
                let xs = extended_xi(p, &a, s, m);
                for i in 0..xs.len() {
                    for j in 0..i {
                        best = best.min(sym_dist(ctx, xs[i], xs[j]));
                    }
                    best = best.min(ctx.lattice_dist(2.0 * xs[i]));
                }
            }
            Variant::Deficit => {
                for w in deficit_roots(p, &a, s, m) {
                    for &x in &p.xi {
                        best = best.min(sym_dist(ctx, x + h, w)).min(sym_dist(ctx, x - h, w));
                    }
                }
                for k in 0..(p.n - 2 * m) {
                    let r = a[s] + k as f64 * p.eta;
                    for &x in &p.xi {
                        best = best.min(sym_dist(ctx, r, x));
                    }
                }
            }
        }
        best
    };
    match Variant::of(p.n, m) {
        Variant::Balanced => None,
        _ => (0..6).max_by(|&x, &y| score(x).total_cmp(&score(y))),
    }
}

/// A γ far from the poles `avoid` (up to sign) and from the half periods.
pub fn choose_gamma(ctx: &EllipticContext, avoid: &[C]) -> C {
    let w = ctx.omega * PI;
    let mut pts = avoid.to_vec();
    pts.extend([ZERO, C::from(PI / 2.0), w / 2.0, (w + PI) / 2.0]);
    let mut best = (f64::NEG_INFINITY, ZERO);
    for k in 0..97 {
        let t = k as f64 / 97.0;
        let g = C::from(PI * ((0.37 * k as f64).fract() - 0.5)) + w * (t - 0.5) * 0.9;
        let d = pts
            .iter()
            .map(|&x| sym_dist(ctx, g, x))
            .fold(f64::INFINITY, f64::min);
        if d > best.0 {
            best = (d, g);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IzeValue {
    pub value: C,
    pub cond: f64,
}

fn need_sector(pp: &EvenEllipticPoly, qq: &EvenEllipticPoly) -> Result<usize> {
    let m = qq.order_half();
    if pp.order_half() != m {
        return Err(Error::Hypothesis(format!(
            "states with {} and {m} roots are in different sectors",
            pp.order_half()
        )));
    }
    Ok(m)
}

/// ⟨P|Q⟩ through the 𝖬 determinant, 2M = N.
pub fn sp_ize(
    p: &ModelParams,
    eps: &Eps,
    pp: &EvenEllipticPoly,
    qq: &EvenEllipticPoly,
) -> Result<IzeValue> {
    let m = need_sector(pp, qq)?;
    if Variant::of(p.n, m) != Variant::Balanced {
        return Err(Error::Hypothesis("sp_ize needs 2M = N".into()));
    }
    let ctx = &p.ctx;
    let a = a_params(p, eps);
    let h = p.eta / 2.0;
    let mut w = pp.roots.clone();
    w.extend_from_slice(&qq.roots);
    let mm = filali_matrix(ctx, p.eta, &p.xi, &w, &a)?;
    let pq = |x: C| pp.eval(ctx, x) * qq.eval(ctx, x);
    let pref: C = p
        .xi
        .iter()
        .map(|&x| pq(x - h) * pq(x + h) / a.iter().map(|&ai| ctx.th(x - ai)).product::<C>())
        .product();
    let sign = if p.n % 2 == 0 { 1.0 } else { -1.0 };
    let xr: Vec<C> = p.xi.iter().rev().copied().collect();
    let d = linalg::det_cond(&mm);
    Ok(IzeValue {
        value: sign * pref * d.value / (vandermonde(ctx, &w) * vandermonde(ctx, &xr)),
        cond: d.cond,
    })
}

/// ⟨P|Q⟩/⟨P̃|Q⟩ for 2M > N through the extended 𝖬 and Cauchy determinants.
pub fn sp_excess_ratio(
    p: &ModelParams,
    eps: &Eps,
    pp: &EvenEllipticPoly,
    pt: &EvenEllipticPoly,
    qq: &EvenEllipticPoly,
    s: usize,
) -> Result<IzeValue> {
    let m = need_sector(pp, qq)?;
    need_sector(pt, qq)?;
    if Variant::of(p.n, m) != Variant::Excess {
        return Err(Error::Hypothesis("sp_excess_ratio needs 2M > N".into()));
    }
    let ctx = &p.ctx;
    let h = p.eta / 2.0;
    let a = a_params(p, eps);
    let ap = shifted_params(&a, s, p.n, m, p.eta);
    let xe = extended_xi(p, &a, s, m);
    let with_q = |r: &[C]| {
        let mut w = r.to_vec();
        w.extend_from_slice(&qq.roots);
        w
    };
    let (w, wt) = (with_q(&pp.roots), with_q(&pt.roots));
    let cauchy = |w: &[C]| {
        linalg::det_cond(&CMat::from_fn(2 * m, 2 * m, |i, j| {
            ONE / ctx.thsym(xe[i] - h, w[j])
        }))
    };
    let (c, ct) = (cauchy(&w), cauchy(&wt));
    let md = linalg::det_cond(&filali_matrix(ctx, p.eta, &xe, &w, &ap)?);
    let mdt = linalg::det_cond(&filali_matrix(ctx, p.eta, &xe, &wt, &ap)?);
    let pref: C = p
        .xi
        .iter()
        .map(|&x| pp.eval(ctx, x + h) / pt.eval(ctx, x + h))
        .product();
    Ok(IzeValue {
        value: pref * ct.value / c.value * md.value / mdt.value,
        cond: [c.cond, ct.cond, md.cond, mdt.cond].into_iter().fold(1.0, f64::max),
    })
}

/// ⟨P|Q⟩ for 2M < N with the roots completed by a_s + jη − η/2.
pub fn sp_deficit(
    p: &ModelParams,
    eps: &Eps,
    pp: &EvenEllipticPoly,
    qq: &EvenEllipticPoly,
    s: usize,
) -> Result<IzeValue> {
    let m = need_sector(pp, qq)?;
    if Variant::of(p.n, m) != Variant::Deficit {
        return Err(Error::Hypothesis("sp_deficit needs 2M < N".into()));
    }
    let ctx = &p.ctx;
    let h = p.eta / 2.0;
    let a = a_params(p, eps);
    let ap = shifted_params(&a, s, p.n, m, p.eta);
    let mut w = pp.roots.clone();
    w.extend_from_slice(&qq.roots);
    w.extend(deficit_roots(p, &a, s, m));
    let wp = EvenEllipticPoly::from_roots(w.clone());
    let mm = filali_matrix(ctx, p.eta, &p.xi, &w, &ap)?;
    let pref: C = p
        .xi
        .iter()
        .map(|&x| {
            pp.eval(ctx, x + h) * qq.eval(ctx, x + h) * wp.eval(ctx, x - h)
                / -ap.iter().map(|&al| ctx.th(al - x)).product::<C>()
        })
        .product();
    let xr: Vec<C> = p.xi.iter().rev().copied().collect();
    let d = linalg::det_cond(&mm);
    Ok(IzeValue {
        value: pref * d.value / (vandermonde(ctx, &w) * vandermonde(ctx, &xr)),
        cond: d.cond,
    })
}

/// Data shared by 𝒳, 𝖬, 𝖥 and the closed-form blocks of one variant.
#[derive(Debug, Clone)]
pub struct BlockSetup {
    pub variant: Variant,
    pub shift: Option<usize>,
    pub eta: C,
    /// Inhomogeneities entering 𝒳 (extended for 2M > N).
    pub xs: Vec<C>,
    /// Parameters in 𝖬 (a′ for the unbalanced variants).
    pub a_m: [C; 6],
    /// Parameters in the closed-form residue products.
    pub a_res: [C; 6],
    pub p: Vec<C>,
    pub q: Vec<C>,
    /// Extra roots w_{2M+j} (2M < N only).
    pub w_extra: Vec<C>,
    pub r: Vec<C>,
    pub gamma: C,
}

impl BlockSetup {
    pub fn new(
        params: &ModelParams,
        eps: &Eps,
        p: &[C],
        q: &[C],
        gamma: Option<C>,
        shift: Option<usize>,
    ) -> Result<Self> {
        let m = q.len();
        if p.len() != m {
            return Err(Error::Hypothesis("p and q must have the same length".into()));
        }
        let ctx = &params.ctx;
        let variant = Variant::of(params.n, m);
        let a = a_params(params, eps);
        let shift = match variant {
            Variant::Balanced => None,
            _ => Some(shift.or_else(|| choose_shift(params, eps, m)).unwrap_or(0)),
        };
        let (xs, a_m, a_res, w_extra, r) = match variant {
            Variant::Balanced => (params.xi.clone(), a, a, vec![], vec![]),
            Variant::Excess => {
                let s = shift.unwrap_or(0);
                let ap = shifted_params(&a, s, params.n, m, params.eta);
                (extended_xi(params, &a, s, m), ap, ap, vec![], vec![])
            }
            Variant::Deficit => {
                let s = shift.unwrap_or(0);
                let ap = shifted_params(&a, s, params.n, m, params.eta);
                let r = (0..(params.n - 2 * m))
                    .map(|k| a[s] + k as f64 * params.eta)
                    .collect();
                (params.xi.clone(), ap, a, deficit_roots(params, &a, s, m), r)
            }
        };
        let gamma = gamma.unwrap_or_else(|| {
            let h = params.eta / 2.0;
            let mut avoid: Vec<C> = xs.clone();
            avoid.extend(xs.iter().map(|x| x + h));
            avoid.extend(xs.iter().map(|x| x - h));
            for &v in p.iter().chain(q).chain(&w_extra) {
                avoid.extend([v, v + h, v - h]);
            }
            avoid.extend(r.iter().copied());
            choose_gamma(ctx, &avoid)
        });
        Ok(Self {
            variant,
            shift,
            eta: params.eta,
            xs,
            a_m,
            a_res,
            p: p.to_vec(),
            q: q.to_vec(),
            w_extra,
            r,
            gamma,
        })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn size(&self) -> usize {
        self.xs.len()
    }

    pub fn w(&self) -> Vec<C> {
        let mut w = self.p.clone();
        w.extend_from_slice(&self.q);
        w.extend_from_slice(&self.w_extra);
        w
    }

    fn theta_bar(&self) -> QGamma {
        QGamma::new(self.q.clone(), self.gamma, self.r.clone(), self.eta)
    }

    /// 𝒳_{ik} = Θ̄_i(x_k) / (thsym(x_k,γ) θ(2x_k) ∏_{n≠k} thsym(x_k,x_n)).
    pub fn x_matrix(&self, ctx: &EllipticContext) -> CMat {
        let tb = self.theta_bar();
        let xs = &self.xs;
        let n = xs.len();
        CMat::from_fn(n, n, |i, k| {
            let den: C = (0..n)
                .filter(|&l| l != k)
                .map(|l| ctx.thsym(xs[k], xs[l]))
                .product();
            tb.eval(ctx, i, xs[k]) / (ctx.thsym(xs[k], self.gamma) * ctx.th(2.0 * xs[k]) * den)
        })
    }

    pub fn m_matrix(&self, ctx: &EllipticContext) -> Result<CMat> {
        filali_matrix(ctx, self.eta, &self.xs, &self.w(), &self.a_m)
    }

    /// The odd elliptic function whose residues at x_k sum to [𝒳·𝖬]_{ij}.
    pub fn f_fn(&self, ctx: &EllipticContext, i: usize, j: usize, l: C) -> C {
        let tb = self.theta_bar();
        let den: C = self.xs.iter().map(|&x| ctx.thsym(l, x)).product();
        ctx.th_prime0() * tb.eval(ctx, i, l) / (ctx.thsym(l, self.gamma) * den)
            * filali_fn(ctx, self.eta, l, self.w()[j], &self.a_m)
    }

    fn ad(&self, ctx: &EllipticContext, l: C) -> C {
        let h = self.eta / 2.0;
        let a: C = self.xs.iter().map(|&x| ctx.th(l - x + h)).product();
        let d: C = self.xs.iter().map(|&x| ctx.th(-l - self.eta - x + h)).product();
        a * d
    }

    /// Closed-form blocks assembled into one matrix of size N (or 2M).
    pub fn closed_form(&self, ctx: &EllipticContext) -> CMat {
        let eta = self.eta;
        let h = eta / 2.0;
        let m = self.m();
        let ll = self.r.len();
        let gamma = self.gamma;
        let sign = if self.xs.len() % 2 == 0 { 1.0 } else { -1.0 };
        let qp = EvenEllipticPoly::from_roots(self.q.clone());
        let rp = EvenEllipticPoly::from_roots(self.r.clone());
        let wr = EvenEllipticPoly::from_roots(self.w_extra.clone());
        let qi: Vec<EvenEllipticPoly> = (0..m).map(|i| qp.without(i)).collect();
        let xprod = |l: C| -> C { self.xs.iter().map(|&x| ctx.thsym(l, x)).product() };
        let xg = |l: C| {
            qp.eval(ctx, gamma + h) * qp.eval(ctx, gamma - h) * rp.eval(ctx, gamma)
                / (ctx.thsym(gamma, l) * ctx.th(2.0 * gamma) * xprod(gamma))
        };
        let mf = |v: C| filali_fn(ctx, eta, gamma, v, &self.a_m);
        let res_prod = |x: C, s: f64| -> C {
            self.a_res.iter().map(|&an| ctx.th(s * x + h - an)).product()
        };
        // Σ_± ± f(±) Q_•(x ± η) ∏θ(±x + η/2 − a) / (sign·ad(±x)), times extra factor g(x ± η/2)
        let side_sum = |qf: &EvenEllipticPoly, x: C, g: &dyn Fn(C) -> C| -> C {
            [1.0, -1.0]
                .iter()
                .map(|&s| {
                    s * qf.eval(ctx, x + s * eta) * res_prod(x, s) * g(x + s * h)
                        / (sign * self.ad(ctx, s * x))
                })
                .sum()
        };
        let one = |_: C| ONE;
        let n = 2 * m + ll;
        let mut g = CMat::zeros(n, n);
        for i in 0..m {
            for j in 0..m {
                let pj = self.p[j];
                let pre = wr.eval(ctx, pj) / ctx.th(2.0 * pj);
                g[(i, j)] = qi[i].eval(ctx, pj) * pre * side_sum(&qi[i], pj, &one);
                let qz = self.q[i] + h;
                let f21 = |y: C| ONE / (ctx.thsym(y, qz) * ctx.thsym(y, gamma));
                g[(m + i, j)] = qp.eval(ctx, pj) * pre * side_sum(&qp, pj, &f21) - xg(qz) * mf(pj);
                let qj = self.q[j];
                let diag22 = if i == j {
                    let qq = self.q[i];
                    qi[i].eval(ctx, qq + eta) * qi[i].eval(ctx, qq) * wr.eval(ctx, qq)
                        / (sign * self.ad(ctx, qq))
                        * ctx.th(eta)
                        * res_prod(qq, 1.0)
                        / ctx.thsym(qq + h, gamma)
                } else {
                    ZERO
                };
                g[(m + i, m + j)] = diag22 - xg(qz) * mf(qj);
            }
            let qq = self.q[i];
            g[(i, m + i)] = qi[i].eval(ctx, qq) * wr.eval(ctx, qq) / ctx.th(2.0 * qq)
                * side_sum(&qi[i], qq, &one);
            for j in 0..ll {
                g[(m + i, 2 * m + j)] = -xg(qq + h) * mf(self.w_extra[j]);
            }
        }
        for i in 0..ll {
            let ri = self.r[i];
            for j in 0..m {
                let pj = self.p[j];
                let f31 = |y: C| ONE / (ctx.thsym(y, ri) * ctx.thsym(y, gamma));
                g[(2 * m + i, j)] = qp.eval(ctx, pj) * wr.eval(ctx, pj) / ctx.th(2.0 * pj)
                    * side_sum(&qp, pj, &f31)
                    - xg(ri) * mf(pj);
                g[(2 * m + i, m + j)] = -xg(ri) * mf(self.q[j]);
            }
            let rip = rp.without(i);
            let pre = qp.eval(ctx, ri + h) * qp.eval(ctx, ri - h) * rip.eval(ctx, ri)
                / (xprod(ri) * ctx.thsym(ri, gamma));
            for j in 0..ll {
                let wj = self.w_extra[j];
                let mut v = ZERO;
                if i == j + 1 {
                    v += self.a_m.iter().map(|&an| ctx.th(ri - an)).product::<C>();
                }
                if i == j {
                    v -= self.a_m.iter().map(|&an| ctx.th(ri + an)).product::<C>();
                }
                g[(2 * m + i, 2 * m + j)] = pre / ctx.th(2.0 * wj) * v - xg(ri) * mf(wj);
            }
        }
        g
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockDev {
    pub block: String,
    /// Relative to the block scale, or to the whole 𝒳·𝖬 scale when the block vanishes.
    pub rel_dev: f64,
    pub vanishing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub variant: Variant,
    pub shift: Option<usize>,
    pub gamma: C,
    pub blocks: Vec<BlockDev>,
    pub max_rel_dev: f64,
    /// max |[𝒳·𝖬]^{(1,2)}| / max |𝒳·𝖬|; zero for Bethe roots q.
    pub g12_scale: f64,
    /// max |[𝒳·𝖬]^{(1,3)}| / max |𝒳·𝖬| (2M < N only).
    pub g13_scale: Option<f64>,
    pub cond_x: f64,
    pub cond_m: f64,
}

pub fn residue_blocks(p: &ModelParams, setup: &BlockSetup) -> Result<BlockReport> {
    let ctx = &p.ctx;
    let x = setup.x_matrix(ctx);
    let mm = setup.m_matrix(ctx)?;
    let xm = &x * &mm;
    let g = setup.closed_form(ctx);
    let m = setup.m();
    let ll = setup.r.len();
    let scale = xm.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let ranges = [(0, m), (m, 2 * m), (2 * m, 2 * m + ll)];
    let mut blocks = Vec::new();
    for (bi, &(r0, r1)) in ranges.iter().enumerate() {
        for (bj, &(c0, c1)) in ranges.iter().enumerate() {
            if r1 == r0 || c1 == c0 {
                continue;
            }
            let mut diff: f64 = 0.0;
            let mut bs: f64 = 0.0;
            for i in r0..r1 {
                for j in c0..c1 {
                    diff = diff.max((xm[(i, j)] - g[(i, j)]).norm());
                    bs = bs.max(g[(i, j)].norm()).max(xm[(i, j)].norm());
                }
            }
            let vanishing = bs < 1e-9 * scale;
            blocks.push(BlockDev {
                block: format!("G{}{}", bi + 1, bj + 1),
                rel_dev: if vanishing { diff / scale } else { diff / bs },
                vanishing,
            });
        }
    }
    let block_scale = |r0: usize, r1: usize, c0: usize, c1: usize| {
        let mut v: f64 = 0.0;
        for i in r0..r1 {
            for j in c0..c1 {
                v = v.max(xm[(i, j)].norm());
            }
        }
        v / scale
    };
    Ok(BlockReport {
        variant: setup.variant,
        shift: setup.shift,
        gamma: setup.gamma,
        max_rel_dev: blocks.iter().map(|b| b.rel_dev).fold(0.0, f64::max),
        blocks,
        g12_scale: block_scale(0, m, m, 2 * m),
        g13_scale: (ll > 0).then(|| block_scale(0, m, 2 * m, 2 * m + ll)),
        cond_x: linalg::cond(&x),
        cond_m: linalg::cond(&mm),
    })
}

/// Residue of f at a simple pole x from the first Laurent coefficient on a small circle.
pub fn residue(f: &dyn Fn(C) -> C, x: C, radius: f64) -> C {
    let k = 32;
    (0..k)
        .map(|j| {
            let e = (I * (2.0 * PI * (j as f64 + 0.5) / k as f64)).exp() * radius;
            e * f(x + e)
        })
        .sum::<C>()
        / k as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctReport {
    pub odd: f64,
    pub pi_periodic: f64,
    pub omega_periodic: f64,
    /// max |Res(x) − Res(−x)| / |Res(x)| over the poles x_k.
    pub residue_pairing: f64,
    /// max |Σ_k Res(𝖥_{ij}; x_k) − [𝒳·𝖬]_{ij}| / max|𝒳·𝖬|.
    pub residue_sum: f64,
}

/// Oddness, periodicity and residue properties of 𝖥_{ij} at the sample points `pts`.
pub fn funct_properties(p: &ModelParams, setup: &BlockSetup, pts: &[C]) -> Result<FunctReport> {
    let ctx = &p.ctx;
    let n = setup.size();
    let w = ctx.omega * PI;
    let (mut odd, mut per, mut perw): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut pair: f64 = 0.0;
    let xm = &setup.x_matrix(ctx) * &setup.m_matrix(ctx)?;
    let scale = xm.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let mut rsum: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let f = |l: C| setup.f_fn(ctx, i, j, l);
            for &l in pts {
                let v = f(l);
                odd = odd.max(linalg::rel_diff_c(f(-l), -v));
                per = per.max(linalg::rel_diff_c(f(l + PI), v));
                perw = perw.max(linalg::rel_diff_c(f(l + w), v));
            }
            let mut total = ZERO;
            for &x in &setup.xs {
                let r = residue(&f, x, 1e-3);
                let rm = residue(&f, -x, 1e-3);
                pair = pair.max((r - rm).norm() / r.norm().max(1e-300));
                total += r;
            }
            rsum = rsum.max((total - xm[(i, j)]).norm() / scale);
        }
    }
    Ok(FunctReport {
        odd,
        pi_periodic: per,
        omega_periodic: perw,
        residue_pairing: pair,
        residue_sum: rsum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::scalar::{poly_fn, sp_bruteforce};
    use crate::spectrum::{constrain, direct_spectrum, solve_bethe, BetheOptions};

    const EPS: Eps = [1, -1, 1, 1, -1, 1];

    fn model(n: usize, m: usize) -> ModelParams {
        let xi = [c(0.11, -0.07), c(-0.23, 0.05), c(0.31, 0.13), c(-0.05, -0.19)];
        let p = ModelParams::new(
            c(0.35, 0.12),
            xi[..n].to_vec(),
            [c(0.52, 0.14), c(-0.41, 0.2), c(0.17, 0.6)],
            [c(0.3, -0.22), c(-0.12, 0.33), c(0.05, 0.81)],
            EllipticContext::default(),
        )
        .unwrap();
        constrain(&p, &EPS, m).unwrap()
    }

    fn bethe_q(p: &ModelParams, m: usize) -> Vec<C> {
        let d = direct_spectrum(p, c(0.13, 0.21)).unwrap();
        let sols = solve_bethe(p, m, &EPS, &d, &BetheOptions::default()).unwrap();
        sols[0].roots.clone()
    }

    #[test]
    fn filali_is_odd_under_constraint() {
        let p = model(4, 2);
        let a = a_params(&p, &EPS);
        let s: C = a.iter().sum();
        assert!((s - p.eta).norm() < 1e-12);
        let (u, v) = (c(0.17, 0.09), c(-0.2, 0.31));
        let f1 = filali_fn(&p.ctx, p.eta, u, v, &a);
        let f2 = filali_fn(&p.ctx, p.eta, -u, v, &a);
        assert!(linalg::rel_diff_c(f1, -f2) < 1e-10);
    }

    #[test]
    fn ize_matches_sum() {
        let p = model(4, 2);
        let ctx = &p.ctx;
        let q = bethe_q(&p, 2);
        let pp = EvenEllipticPoly::from_roots(vec![c(0.21, 0.17), c(-0.08, 0.36)]);
        let qq = EvenEllipticPoly::from_roots(q);
        let s = sp_bruteforce(&p, &EPS, &EPS, &poly_fn(ctx, &pp), &poly_fn(ctx, &qq)).value;
        let z = sp_ize(&p, &EPS, &pp, &qq).unwrap();
        assert!(linalg::rel_diff_c(s, z.value) < 1e-8, "{s} {}", z.value);
    }

    #[test]
    fn balanced_blocks() {
        let p = model(4, 2);
        let q = bethe_q(&p, 2);
        let setup = BlockSetup::new(&p, &EPS, &[c(0.21, 0.17), c(-0.08, 0.36)], &q, None, None).unwrap();
        let r = residue_blocks(&p, &setup).unwrap();
        assert!(r.max_rel_dev < 1e-8, "{r:?}");
        assert!(r.g12_scale < 1e-9, "{r:?}");
        let f = funct_properties(&p, &setup, &[c(0.13, 0.27), c(-0.31, 0.12)]).unwrap();
        assert!(f.odd < 1e-10 && f.pi_periodic < 1e-10 && f.omega_periodic < 1e-10, "{f:?}");
        assert!(f.residue_pairing < 1e-7 && f.residue_sum < 1e-7, "{f:?}");
    }

    #[test]
    fn excess_route() {
        let p = model(3, 2);
        let ctx = &p.ctx;
        let q = bethe_q(&p, 2);
        let qq = EvenEllipticPoly::from_roots(q.clone());
        let pp = EvenEllipticPoly::from_roots(vec![c(0.21, 0.17), c(-0.08, 0.36)]);
        let pt = EvenEllipticPoly::from_roots(vec![c(-0.27, 0.05), c(0.12, -0.29)]);
        let bf = sp_bruteforce(&p, &EPS, &EPS, &poly_fn(ctx, &pp), &poly_fn(ctx, &qq)).value
            / sp_bruteforce(&p, &EPS, &EPS, &poly_fn(ctx, &pt), &poly_fn(ctx, &qq)).value;
        for s in 0..6 {
            let r = sp_excess_ratio(&p, &EPS, &pp, &pt, &qq, s).unwrap();
            assert!(linalg::rel_diff_c(r.value, bf) < 1e-8, "s={s}");
        }
        let setup = BlockSetup::new(&p, &EPS, &pp.roots, &q, None, None).unwrap();
        let r = residue_blocks(&p, &setup).unwrap();
        assert!(r.max_rel_dev < 1e-8, "{r:?}");
        assert!(r.g12_scale < 1e-9);
    }

    #[test]
    fn deficit_route() {
        let p = model(4, 1);
        let ctx = &p.ctx;
        let q = bethe_q(&p, 1);
        let qq = EvenEllipticPoly::from_roots(q.clone());
        let pp = EvenEllipticPoly::from_roots(vec![c(0.21, 0.17)]);
        let bf = sp_bruteforce(&p, &EPS, &EPS, &poly_fn(ctx, &pp), &poly_fn(ctx, &qq)).value;
        let s = choose_shift(&p, &EPS, 1).unwrap();
        let v = sp_deficit(&p, &EPS, &pp, &qq, s).unwrap();
        assert!(linalg::rel_diff_c(v.value, bf) < 1e-8, "{} {bf}", v.value);
        let setup = BlockSetup::new(&p, &EPS, &pp.roots, &q, None, None).unwrap();
        let r = residue_blocks(&p, &setup).unwrap();
        assert!(r.max_rel_dev < 1e-8, "{r:?}");
        assert!(r.g12_scale < 1e-9 && r.g13_scale.unwrap() < 1e-9, "{r:?}");
    }
}
