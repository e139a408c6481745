//! Slavnov-type determinant S_Q(p, q), its Gaudin limit and the normalised scalar product.

use serde::Serialize;

use crate::elliptic::{vandermonde, EvenEllipticPoly};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C};
use crate::scalar::filali::{a_params, BlockSetup, Variant};
use crate::scalar::{poly_fn, sp_bruteforce};
use crate::sov::{big_a_eps, Eps};
use crate::spectrum::{bethe_residuals, constraint_holds, eigenvalue_from_q};
use crate::vertex::ModelParams;

/// [S_Q(p,q)]_{ij} = A(p_i)Q(p_i−η)[t(p_i+q_j−η/2) − t(p_i−q_j−η/2)]
///                 − A(−p_i)Q(p_i+η)[t(p_i+q_j+η/2) − t(p_i−q_j+η/2)].
pub fn slavnov_matrix(p: &ModelParams, eps: &Eps, pv: &[C], qv: &[C]) -> Result<CMat> {
    let ctx = &p.ctx;
    let eta = p.eta;
    let h = eta / 2.0;
    let q = EvenEllipticPoly::from_roots(qv.to_vec());
    let m = qv.len();
    let mut s = CMat::zeros(pv.len(), m);
    for (i, &pi) in pv.iter().enumerate() {
        let lhs = big_a_eps(p, pi, eps) * q.eval(ctx, pi - eta);
        let rhs = big_a_eps(p, -pi, eps) * q.eval(ctx, pi + eta);
        for (j, &qj) in qv.iter().enumerate() {
            let t1 = ctx.t_fn(pi + qj - h, eta)? - ctx.t_fn(pi - qj - h, eta)?;
            let t2 = ctx.t_fn(pi + qj + h, eta)? - ctx.t_fn(pi - qj + h, eta)?;
            s[(i, j)] = lhs * t1 - rhs * t2;
        }
    }
    Ok(s)
}

/// d/dμ log A_ε(μ).
pub fn log_deriv_big_a(p: &ModelParams, eps: &Eps, l: C) -> Result<C> {
    let ctx = &p.ctx;
    let eta = p.eta;
    let h = eta / 2.0;
    let al = p.alphas();
    let mut v = 2.0 * ctx.lth(2.0 * l + eta)? - 2.0 * ctx.lth(2.0 * l)?;
    for i in 0..6 {
        let e = f64::from(eps[i]);
        v -= e * ctx.lth(al[i] + e * (h - l))?;
    }
    for &x in &p.xi {
        v += ctx.lth(l - x + h)? - ctx.lth(-l - eta - x + h)?;
    }
    Ok(v)
}

/// d/dμ log[A(μ)Q(μ−η) / (A(−μ)Q(μ+η))].
pub fn log_deriv_bethe(p: &ModelParams, eps: &Eps, q: &EvenEllipticPoly, l: C) -> Result<C> {
    let ctx = &p.ctx;
    Ok(log_deriv_big_a(p, eps, l)? + log_deriv_big_a(p, eps, -l)?
        + q.log_deriv(ctx, l - p.eta)?
        - q.log_deriv(ctx, l + p.eta)?)
}

/// S_Q(q, q) through the analytic Gaudin formula.
pub fn gaudin_matrix(p: &ModelParams, eps: &Eps, qv: &[C]) -> Result<CMat> {
    let ctx = &p.ctx;
    let eta = p.eta;
    let q = EvenEllipticPoly::from_roots(qv.to_vec());
    let m = qv.len();
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        let pre = big_a_eps(p, -qv[i], eps) * q.eval(ctx, qv[i] + eta);
        let diag = log_deriv_bethe(p, eps, &q, qv[i])?;
        for j in 0..m {
            let mut v = ctx.k_fn(qv[i] - qv[j], eta)? - ctx.k_fn(qv[i] + qv[j], eta)?;
            if i == j {
                v -= diag;
            }
            g[(i, j)] = pre * v;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct SlavnovResult {
    pub value: C,
    pub cond: f64,
    pub bethe_residual: f64,
}

/// ⟨P|Q⟩/⟨Q|Q⟩ for Bethe roots q and arbitrary p in the same sector.
pub fn sp_slavnov_ratio(
    p: &ModelParams,
    eps: &Eps,
    pv: &[C],
    qv: &[C],
    bethe_tol: f64,
) -> Result<SlavnovResult> {
    let m = qv.len();
    if pv.len() != m {
        return Err(Error::Hypothesis(format!(
            "P has {} roots but Q has {m}",
            pv.len()
        )));
    }
    if !constraint_holds(p, eps, m, 1e-10)? {
        return Err(Error::Hypothesis(format!(
            "boundary constraint does not hold for M = {m}"
        )));
    }
    let res = bethe_residuals(p, qv, eps)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if res > bethe_tol {
        return Err(Error::Hypothesis(format!(
            "q is not a Bethe solution (residual {res:.2e})"
        )));
    }
    let ctx = &p.ctx;
    let s = linalg::det_cond(&slavnov_matrix(p, eps, pv, qv)?);
    let g = linalg::det_cond(&gaudin_matrix(p, eps, qv)?);
    let thp: C = pv.iter().map(|&x| ctx.thsym(2.0 * x, p.eta)).product();
    let thq: C = qv.iter().map(|&x| ctx.thsym(2.0 * x, p.eta)).product();
    Ok(SlavnovResult {
        value: vandermonde(ctx, qv) / vandermonde(ctx, pv) * thq / thp * s.value / g.value,
        cond: s.cond.max(g.cond),
        bethe_residual: res,
    })
}

/// max |S_ij − Q(p_i)∂τ_Q(p_i)/∂q_j| / max|S|, the derivative by central differences.
pub fn slavnov_derivative_residual(p: &ModelParams, eps: &Eps, pv: &[C], qv: &[C], step: f64) -> Result<f64> {
    let ctx = &p.ctx;
    let s = slavnov_matrix(p, eps, pv, qv)?;
    let q = EvenEllipticPoly::from_roots(qv.to_vec());
    let scale = s.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let mut worst: f64 = 0.0;
    for (i, &pi) in pv.iter().enumerate() {
        for j in 0..qv.len() {
            let tau_at = |d: C| {
                let mut r = qv.to_vec();
                r[j] += d;
                eigenvalue_from_q(p, &EvenEllipticPoly::from_roots(r), eps, pi)
            };
            let d = (tau_at(C::from(step))? - tau_at(C::from(-step))?) / (2.0 * step);
            worst = worst.max((q.eval(ctx, pi) * d - s[(i, j)]).norm() / scale);
        }
    }
    Ok(worst)
}

/// Relative distance between S_Q(q+δ, q) and the Gaudin matrix.
pub fn gaudin_continuity(p: &ModelParams, eps: &Eps, qv: &[C], delta: C) -> Result<f64> {
    let pv: Vec<C> = qv.iter().map(|&x| x + delta).collect();
    let s = slavnov_matrix(p, eps, &pv, qv)?;
    let g = gaudin_matrix(p, eps, qv)?;
    Ok(linalg::rel_diff(&s, &g))
}

/// max_jk |S_jk(q+δ, q) − G_jk| / |G_jk|.
pub fn gaudin_entrywise(p: &ModelParams, eps: &Eps, qv: &[C], delta: C) -> Result<f64> {
    let pv: Vec<C> = qv.iter().map(|&x| x + delta).collect();
    let s = slavnov_matrix(p, eps, &pv, qv)?;
    let g = gaudin_matrix(p, eps, qv)?;
    Ok(s.iter()
        .zip(g.iter())
        .map(|(&a, &b)| linalg::rel_diff_c(a, b))
        .fold(0.0, f64::max))
}

/// Entrywise deviation of [S_Q(q+δ, q) + S_Q(q−δ, q)]/2 from the Gaudin matrix, which is O(δ²).
pub fn gaudin_symmetric(p: &ModelParams, eps: &Eps, qv: &[C], delta: C) -> Result<f64> {
    let at = |d: C| {
        let pv: Vec<C> = qv.iter().map(|&x| x + d).collect();
        slavnov_matrix(p, eps, &pv, qv)
    };
    let s = (at(delta)? + at(-delta)?) / C::from(2.0);
    let g = gaudin_matrix(p, eps, qv)?;
    Ok(s.iter()
        .zip(g.iter())
        .map(|(&a, &b)| linalg::rel_diff_c(a, b))
        .fold(0.0, f64::max))
}

/// c_Q = ⟨P|Q⟩ V(p) ∏thsym(2p_j,η) / det S_Q(p,q), from the explicit sum.
pub fn c_q_from_sum(p: &ModelParams, eps: &Eps, pv: &[C], qv: &[C]) -> Result<C> {
    let ctx = &p.ctx;
    let pp = EvenEllipticPoly::from_roots(pv.to_vec());
    let qq = EvenEllipticPoly::from_roots(qv.to_vec());
    let sp = sp_bruteforce(p, eps, eps, &poly_fn(ctx, &pp), &poly_fn(ctx, &qq)).value;
    let thp: C = pv.iter().map(|&x| ctx.thsym(2.0 * x, p.eta)).product();
    Ok(sp * vandermonde(ctx, pv) * thp / linalg::det(&slavnov_matrix(p, eps, pv, qv)?))
}

/// c_Q from G^{(2,2)} and det 𝒳 at a given γ (2M = N).
pub fn c_q_closed(p: &ModelParams, eps: &Eps, qv: &[C], gamma: C) -> Result<C> {
    let m = qv.len();
    if Variant::of(p.n, m) != Variant::Balanced {
        return Err(Error::Hypothesis("closed c_Q needs 2M = N".into()));
    }
    let ctx = &p.ctx;
    let eta = p.eta;
    let h = eta / 2.0;
    let a = a_params(p, eps);
    // p only enters the blocks we discard
    let setup = BlockSetup::new(p, eps, qv, qv, Some(gamma), None)?;
    let g = setup.closed_form(ctx);
    let g22 = g.view((m, m), (m, m)).clone_owned();
    let q = EvenEllipticPoly::from_roots(qv.to_vec());
    let prod_a: C = a.iter().map(|&x| ctx.th(x)).product();
    let f1: C = p
        .xi
        .iter()
        .map(|&x| {
            q.eval(ctx, x - h) * q.eval(ctx, x + h) / a.iter().map(|&ai| ctx.th(x - ai)).product::<C>()
        })
        .product();
    let f2: C = qv
        .iter()
        .map(|&qj| prod_a / (ctx.th_prime0() * ctx.th(eta) * ctx.th(2.0 * qj)))
        .product();
    Ok(f1 * f2 * linalg::det(&g22)
        / (vandermonde(ctx, qv) * vandermonde(ctx, &p.xi) * linalg::det(&setup.x_matrix(ctx))))
}

#[derive(Debug, Clone, Serialize)]
pub struct CqReport {
    pub from_p1: C,
    pub from_p2: C,
    /// Relative spread between the two P's.
    pub p_spread: f64,
    pub closed_gamma1: Option<C>,
    pub closed_gamma2: Option<C>,
    /// Relative spread between the two γ's (reported only).
    pub gamma_spread: Option<f64>,
}

pub fn c_q_report(
    p: &ModelParams,
    eps: &Eps,
    qv: &[C],
    p1: &[C],
    p2: &[C],
    gammas: (C, C),
) -> Result<CqReport> {
    let a = c_q_from_sum(p, eps, p1, qv)?;
    let b = c_q_from_sum(p, eps, p2, qv)?;
    let (g1, g2) = if Variant::of(p.n, qv.len()) == Variant::Balanced {
        (
            Some(c_q_closed(p, eps, qv, gammas.0)?),
            Some(c_q_closed(p, eps, qv, gammas.1)?),
        )
    } else {
        (None, None)
    };
    Ok(CqReport {
        from_p1: a,
        from_p2: b,
        p_spread: linalg::rel_diff_c(a, b),
        closed_gamma1: g1,
        closed_gamma2: g2,
        gamma_spread: g1.zip(g2).map(|(x, y)| linalg::rel_diff_c(x, y)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::EllipticContext;
    use crate::linalg::c;
    use crate::spectrum::{constrain, direct_spectrum, solve_bethe, BetheOptions};

    const EPS: Eps = [1, -1, 1, 1, -1, 1];

    fn setup(n: usize, m: usize) -> (ModelParams, Vec<C>) {
        let xi = [c(0.11, -0.07), c(-0.23, 0.05), c(0.31, 0.13), c(-0.05, -0.19)];
        let p = ModelParams::new(
            c(0.35, 0.12),
            xi[..n].to_vec(),
            [c(0.52, 0.14), c(-0.41, 0.2), c(0.17, 0.6)],
            [c(0.3, -0.22), c(-0.12, 0.33), c(0.05, 0.81)],
            EllipticContext::default(),
        )
        .unwrap();
        let p = constrain(&p, &EPS, m).unwrap();
        let d = direct_spectrum(&p, c(0.13, 0.21)).unwrap();
        let q = solve_bethe(&p, m, &EPS, &d, &BetheOptions::default()).unwrap()[0].roots.clone();
        (p, q)
    }

    fn brute_ratio(p: &ModelParams, pv: &[C], qv: &[C]) -> C {
        let ctx = &p.ctx;
        let pp = EvenEllipticPoly::from_roots(pv.to_vec());
        let qq = EvenEllipticPoly::from_roots(qv.to_vec());
        let fq = poly_fn(ctx, &qq);
        let fp = poly_fn(ctx, &pp);
        sp_bruteforce(p, &EPS, &EPS, &fp, &fq).value / sp_bruteforce(p, &EPS, &EPS, &fq, &fq).value
    }

    #[test]
    fn log_derivative_matches_differences() {
        let (p, _) = setup(3, 1);
        let l = c(0.19, 0.08);
        let h = 1e-5;
        let fd = ((big_a_eps(&p, l + h, &EPS) / big_a_eps(&p, l - h, &EPS)).ln()) / (2.0 * h);
        let an = log_deriv_big_a(&p, &EPS, l).unwrap();
        assert!(linalg::rel_diff_c(fd, an) < 1e-8, "{fd} {an}");
    }

    #[test]
    fn ratio_matches_sum_in_all_variants() {
        for (n, m) in [(4, 2), (3, 2), (4, 1), (2, 1)] {
            let (p, q) = setup(n, m);
            let pv: Vec<C> = [c(0.21, 0.17), c(-0.08, 0.36)][..m].to_vec();
            let r = sp_slavnov_ratio(&p, &EPS, &pv, &q, 1e-8).unwrap();
            let b = brute_ratio(&p, &pv, &q);
            assert!(linalg::rel_diff_c(r.value, b) < 1e-7, "N={n} M={m}: {} {b}", r.value);
        }
    }

    #[test]
    fn first_line_is_derivative_of_eigenvalue() {
        let (p, q) = setup(4, 2);
        let r = slavnov_derivative_residual(&p, &EPS, &[c(0.21, 0.17), c(-0.08, 0.36)], &q, 1e-5).unwrap();
        assert!(r < 1e-7, "{r}");
    }

    #[test]
    fn gaudin_is_the_limit() {
        let (p, q) = setup(4, 2);
        let d1 = gaudin_continuity(&p, &EPS, &q, c(1e-4, 0.0)).unwrap();
        let d2 = gaudin_continuity(&p, &EPS, &q, c(1e-5, 0.0)).unwrap();
        assert!(d2 < 2e-3 && d2 < d1 / 5.0, "{d1} {d2}");
    }

    #[test]
    fn hypotheses_enforced() {
        let (p, q) = setup(4, 2);
        let off: Vec<C> = q.iter().map(|x| x + 0.01).collect();
        assert!(matches!(sp_slavnov_ratio(&p, &EPS, &q, &off, 1e-8), Err(Error::Hypothesis(_))));
        let unconstrained = p.with_alphas({
            let mut a = p.alphas();
            a[0] += 0.05;
            a
        });
        assert!(matches!(
            sp_slavnov_ratio(&unconstrained, &EPS, &q, &q, 1e-8),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn c_q_is_independent_of_p() {
        let (p, q) = setup(4, 2);
        let r = c_q_report(
            &p,
            &EPS,
            &q,
            &[c(0.21, 0.17), c(-0.08, 0.36)],
            &[c(-0.27, 0.05), c(0.12, -0.29)],
            (c(0.4, 0.3), c(-0.45, 0.22)),
        )
        .unwrap();
        assert!(r.p_spread < 1e-7, "{r:?}");
    }
}
