//! Direct diagonalisation of the transfer matrix, the discrete SoV characterisation of its
//! spectrum, and the constrained TQ / Bethe-equation machinery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{EvenEllipticPoly, GENERICITY_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C, ONE};
use crate::sov::{big_a_eps, eps_product, validate_eps, Eps};
use crate::vertex::{self, ModelParams};

/// An eigenvalue function stored through its values at the interpolation nodes
/// ξ_{−3}^{(0)}, …, ξ_0^{(0)}, ξ_1^{(0)}, …, ξ_N^{(0)}.
#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueFunction {
    pub nodes: Vec<C>,
    pub values: Vec<C>,
    /// Eigenvalue of 𝒯(λ_ref) when obtained from direct diagonalisation.
    pub ref_value: Option<C>,
    #[serde(skip)]
    pub vector: Option<CVec>,
}

impl EigenvalueFunction {
    pub fn eval(&self, p: &ModelParams, l: C) -> C {
        vertex::interpolation_weights(p, l)
            .iter()
            .zip(&self.values)
            .map(|(r, v)| r * v)
            .sum()
    }

    /// τ_n = τ(ξ_n^{(0)}), n = 1..N.
    pub fn tau_n(&self, n: usize) -> C {
        self.values[4 + n]
    }

    pub fn from_fn(p: &ModelParams, f: &dyn Fn(C) -> C) -> Self {
        let nodes = p.nodes();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self {
            nodes,
            values,
            ref_value: None,
            vector: None,
        }
    }

    /// Rayleigh quotient v†𝒯(λ)v / v†v, exact for a common eigenvector.
    pub fn rayleigh(p: &ModelParams, v: &CVec, l: C) -> C {
        rayleigh_with(&vertex::transfer(p, l), v)
    }
}

fn rayleigh_with(t: &CMat, v: &CVec) -> C {
    v.dotc(&(t * v)) / v.dotc(v)
}

/// Eigen-decomposition of 𝒯(λ_ref), each eigenvector promoted to an eigenvalue function.
pub fn direct_spectrum(p: &ModelParams, lref: C) -> Result<Vec<EigenvalueFunction>> {
    let t = vertex::transfer(p, lref);
    let (vals, vecs) = linalg::eig(&t)?;
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            if (vals[i] - vals[j]).norm() < GENERICITY_MARGIN * scale {
                return Err(Error::Genericity(format!(
                    "eigenvalues {i} and {j} of the transfer matrix at the reference point coincide"
                )));
            }
        }
    }
    let nodes = p.nodes();
    let tn: Vec<CMat> = nodes.iter().map(|&x| vertex::transfer(p, x)).collect();
    Ok(vals
        .into_iter()
        .zip(vecs)
        .map(|(val, v)| EigenvalueFunction {
            nodes: nodes.clone(),
            values: tn.iter().map(|m| rayleigh_with(m, &v)).collect(),
            ref_value: Some(val),
            vector: Some(v),
        })
        .collect())
}

/// Smallest pairwise eigenvalue gap relative to the spectral radius.
pub fn min_relative_gap(fs: &[EigenvalueFunction]) -> f64 {
    let vals: Vec<C> = fs.iter().filter_map(|f| f.ref_value).collect();
    let scale = vals.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            gap = gap.min((vals[i] - vals[j]).norm() / scale);
        }
    }
    gap
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResiduals {
    /// τ_n (𝖳_0(ξ_n−η/2) + Σ_k r_k(ξ_n−η/2) τ_k) against the quantum-determinant scalar.
    pub quadratic: Vec<f64>,
    /// τ(ξ_n+η/2) τ(ξ_n−η/2) against the same scalar, τ evaluated through `eval`.
    pub detq: Vec<f64>,
}

impl SpectrumResiduals {
    pub fn max(&self) -> f64 {
        self.quadratic
            .iter()
            .chain(&self.detq)
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn sov_spectrum_residuals(p: &ModelParams, tau: &EigenvalueFunction) -> SpectrumResiduals {
    let h = p.eta / 2.0;
    let mut quadratic = Vec::with_capacity(p.n);
    let mut detq = Vec::with_capacity(p.n);
    for n in 0..p.n {
        let x = p.xi[n];
        let rhs = vertex::detq_rhs(p, x);
        quadratic.push(linalg::rel_diff_c(tau.tau_n(n) * tau.eval(p, x - h), rhs));
        detq.push(linalg::rel_diff_c(tau.eval(p, x + h) * tau.eval(p, x - h), rhs));
    }
    SpectrumResiduals { quadratic, detq }
}

/// Σ ε_i^σ α_i^σ − (N−2M−1)η reduced to the fundamental cell.
pub fn constraint_offset(p: &ModelParams, eps: &Eps, m: usize) -> Result<C> {
    validate_eps(eps)?;
    if eps_product(eps) != 1 {
        return Err(Error::Hypothesis(format!(
            "sign vector {eps:?} has product −1"
        )));
    }
    let al = p.alphas();
    let s: C = (0..6).map(|i| f64::from(eps[i]) * al[i]).sum();
    let off = s - (p.n as f64 - 2.0 * m as f64 - 1.0) * p.eta;
    Ok(p.ctx.reduce_cell(off))
}

/// Whether the constraint holds for (M, ε) within `tol`.
pub fn constraint_holds(p: &ModelParams, eps: &Eps, m: usize, tol: f64) -> Result<bool> {
    let off = constraint_offset(p, eps, m)?;
    Ok(p.ctx.lattice_dist(off) <= tol)
}

/// Copy of `p` with α_3^− fixed so that the constraint holds for (M, ε).
pub fn constrain(p: &ModelParams, eps: &Eps, m: usize) -> Result<ModelParams> {
    validate_eps(eps)?;
    if eps_product(eps) != 1 {
        return Err(Error::Hypothesis(format!("sign vector {eps:?} has product −1")));
    }
    let mut al = p.alphas();
    let s: C = (0..5).map(|i| f64::from(eps[i]) * al[i]).sum();
    al[5] = ((p.n as f64 - 2.0 * m as f64 - 1.0) * p.eta - s) / f64::from(eps[5]);
    Ok(p.with_alphas(al))
}

/// τ(λ) = [A_ε(λ)Q(λ−η) + A_ε(−λ)Q(λ+η)] / Q(λ).
pub fn eigenvalue_from_q(p: &ModelParams, q: &EvenEllipticPoly, eps: &Eps, l: C) -> Result<C> {
    let ctx = &p.ctx;
    let ql = q.eval(ctx, l);
    let scale = q.eval(ctx, l - p.eta).norm().max(q.eval(ctx, l + p.eta).norm());
    if ql.norm() <= 1e-14 * scale {
        return Err(Error::Pole(format!("Q vanishes at λ = {l}")));
    }
    Ok((big_a_eps(p, l, eps) * q.eval(ctx, l - p.eta) + big_a_eps(p, -l, eps) * q.eval(ctx, l + p.eta)) / ql)
}

/// |τ(λ)Q(λ) − A_ε(λ)Q(λ−η) − A_ε(−λ)Q(λ+η)| normalised by the largest term.
pub fn tq_residual(p: &ModelParams, q: &EvenEllipticPoly, tau: C, eps: &Eps, l: C) -> f64 {
    let ctx = &p.ctx;
    let t0 = tau * q.eval(ctx, l);
    let t1 = big_a_eps(p, l, eps) * q.eval(ctx, l - p.eta);
    let t2 = big_a_eps(p, -l, eps) * q.eval(ctx, l + p.eta);
    let scale = t0.norm().max(t1.norm()).max(t2.norm()).max(f64::MIN_POSITIVE);
    (t0 - t1 - t2).norm() / scale
}

pub fn check_roots(p: &ModelParams, q: &[C]) -> Result<()> {
    p.ctx
        .check_pairwise_distinct(q, GENERICITY_MARGIN, "Bethe roots")
        .map_err(|e| match e {
            Error::Genericity(msg) => Error::Genericity(format!("coinciding roots: {msg}")),
            other => other,
        })
}

/// A_ε(q_i)Q(q_i−η) + A_ε(−q_i)Q(q_i+η), normalised by the larger of the two terms.
pub fn bethe_residuals(p: &ModelParams, q: &[C], eps: &Eps) -> Result<Vec<C>> {
    check_roots(p, q)?;
    let poly = EvenEllipticPoly::from_roots(q.to_vec());
    let ctx = &p.ctx;
    Ok(q.iter()
        .map(|&qi| {
            let a = big_a_eps(p, qi, eps) * poly.eval(ctx, qi - p.eta);
            let b = big_a_eps(p, -qi, eps) * poly.eval(ctx, qi + p.eta);
            (a + b) / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
        })
        .collect())
}

/// Analytic form 1 + A(−q_i)Q(q_i+η)/(A(q_i)Q(q_i−η)) used by Newton.
fn bethe_map(p: &ModelParams, q: &[C], eps: &Eps) -> CVec {
    let poly = EvenEllipticPoly::from_roots(q.to_vec());
    let ctx = &p.ctx;
    CVec::from_iterator(
        q.len(),
        q.iter().map(|&qi| {
            ONE + big_a_eps(p, -qi, eps) * poly.eval(ctx, qi + p.eta)
                / (big_a_eps(p, qi, eps) * poly.eval(ctx, qi - p.eta))
        }),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub random_seeds: usize,
    pub seed: u64,
    pub match_tol: f64,
    pub match_points: usize,
}

impl Default for BetheOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            max_halvings: 20,
            random_seeds: 8,
            seed: 0,
            match_tol: 1e-8,
            match_points: 5,
        }
    }
}

/// Damped Newton iteration from `seed`; `None` if the Jacobian is singular or the
/// iteration does not reach `tol`.
pub fn newton_bethe(p: &ModelParams, seed: &[C], eps: &Eps, opts: &BetheOptions) -> Option<Vec<C>> {
    let m = seed.len();
    let mut q = seed.to_vec();
    if check_roots(p, &q).is_err() {
        return None;
    }
    let mut f = bethe_map(p, &q, eps);
    for _ in 0..opts.max_iter {
        let fnorm = f.norm();
        if !fnorm.is_finite() {
            return None;
        }
        if fnorm < 1e-14 {
            break;
        }
        let mut jac = CMat::zeros(m, m);
        for j in 0..m {
            let h = 1e-6 * (1.0 + q[j].norm());
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[j] += h;
            qm[j] -= h;
            let col = (bethe_map(p, &qp, eps) - bethe_map(p, &qm, eps)) / C::from(2.0 * h);
            jac.set_column(j, &col);
        }
        let step = linalg::solve(&jac, &(-&f)).ok()?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<C> = q.iter().zip(step.iter()).map(|(a, d)| a + d * t).collect();
            if check_roots(p, &trial).is_ok() {
                let ft = bethe_map(p, &trial, eps);
                if ft.norm().is_finite() && ft.norm() < fnorm {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let (nq, nf) = accepted?;
        let moved = q.iter().zip(&nq).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        q = nq;
        f = nf;
        if moved < 1e-15 {
            break;
        }
    }
    let res = bethe_residuals(p, &q, eps).ok()?;
    if res.iter().all(|r| r.norm() <= opts.tol) {
        Some(q)
    } else {
        None
    }
}

/// Canonical representative: reduced to the fundamental cell, sign fixed so that the
/// imaginary part is nonnegative (ties by real part), sorted.
pub fn canonical_roots(p: &ModelParams, q: &[C]) -> Vec<C> {
    let mut out: Vec<C> = q
        .iter()
        .map(|&x| {
            let r = p.ctx.reduce_cell(x);
            let flip = r.im < -1e-12 || (r.im.abs() <= 1e-12 && r.re < 0.0);
            let s = if flip { p.ctx.reduce_cell(-r) } else { r };
            s
        })
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Whether two root tuples agree modulo the lattice, sign and permutation.
pub fn same_roots(p: &ModelParams, a: &[C], b: &[C], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for &x in a {
        let hit = (0..b.len()).find(|&j| {
            !used[j]
                && (p.ctx.lattice_dist(x - b[j]) < tol || p.ctx.lattice_dist(x + b[j]) < tol)
        });
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Null vector of the TQ relation sampled at `pts` in the basis θ_1^{2j}θ_4^{2(M−j)}.
pub fn tq_null(
    p: &ModelParams,
    eps: &Eps,
    m: usize,
    tau: &dyn Fn(C) -> C,
    pts: &[C],
) -> (CVec, f64) {
    let ctx = &p.ctx;
    let f = |j: usize, u: C| {
        ctx.theta(1, u, 1).powu(2 * j as u32) * ctx.theta(4, u, 1).powu(2 * (m - j) as u32)
    };
    let mut a = CMat::zeros(pts.len(), m + 1);
    for (r, &l) in pts.iter().enumerate() {
        let (tl, ap, am) = (tau(l), big_a_eps(p, l, eps), big_a_eps(p, -l, eps));
        for j in 0..=m {
            a[(r, j)] = tl * f(j, l) - ap * f(j, l - p.eta) - am * f(j, l + p.eta);
        }
        let nrm = a.row(r).norm();
        if nrm > 0.0 {
            for j in 0..=m {
                a[(r, j)] /= C::from(nrm);
            }
        }
    }
    linalg::null_vector(&a)
}

/// Roots q of Σ_j c_j x^j with x = (θ_1/θ_4)²(q).
pub fn roots_from_coeffs(p: &ModelParams, c: &CVec) -> Result<Vec<C>> {
    let ctx = &p.ctx;
    let xs = linalg::poly_roots(c.as_slice())?;
    let sq = ctx.nome(1).sqrt();
    let ratio = |u: C| (ctx.theta(1, u, 1) / ctx.theta(4, u, 1)).powu(2);
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        let mut u = (x / (4.0 * sq)).sqrt().asin();
        for _ in 0..100 {
            let t1 = ctx.theta(1, u, 1);
            let t4 = ctx.theta(4, u, 1);
            let r = (t1 / t4).powu(2);
            let dr = 2.0 * r * (ctx.theta_deriv(1, u, 1) / t1 - ctx.theta_deriv(4, u, 1) / t4);
            let du = (r - x) / dr;
            if !du.is_finite() {
                break;
            }
            u -= du;
            if du.norm() < 1e-15 {
                break;
            }
        }
        if linalg::rel_diff_c(ratio(u), x) > 1e-8 {
            return Err(Error::Singular(format!("could not invert the root x = {x}")));
        }
        out.push(u);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheSolution {
    pub m: usize,
    pub roots: Vec<C>,
    pub eps: Eps,
    pub residuals: Vec<f64>,
    pub matched_eigenvalue_index: Option<usize>,
    pub match_deviation: f64,
}

impl BetheSolution {
    pub fn q(&self) -> EvenEllipticPoly {
        EvenEllipticPoly::from_roots(self.roots.clone())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn random_point<R: Rng>(rng: &mut R, s: f64) -> C {
    C::new(rng.random_range(-s..s), rng.random_range(-s..s))
}

/// Seeds from the TQ null vector of each direct eigenvalue function.
pub fn spectral_seeds(
    p: &ModelParams,
    eps: &Eps,
    m: usize,
    direct: &[EigenvalueFunction],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<C>> {
    if m == 0 {
        return vec![];
    }
    let k = 4 * (m + 1) + 4;
    let pts: Vec<C> = (0..k).map(|_| random_point(rng, 0.6)).collect();
    direct
        .iter()
        .filter_map(|tf| {
            let tau = |l| tf.eval(p, l);
            let (c, ratio) = tq_null(p, eps, m, &tau, &pts);
            if ratio < 1e-8 {
                roots_from_coeffs(p, &c).ok()
            } else {
                None
            }
        })
        .collect()
}

/// Newton solve from spectral and random seeds, deduplicated, each solution matched against
/// the direct eigenvalue functions at random points.
pub fn solve_bethe(
    p: &ModelParams,
    m: usize,
    eps: &Eps,
    direct: &[EigenvalueFunction],
    opts: &BetheOptions,
) -> Result<Vec<BetheSolution>> {
    if !constraint_holds(p, eps, m, 1e-10)? {
        return Err(Error::Hypothesis(format!(
            "boundary parameters do not satisfy the constraint for M = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let check: Vec<C> = (0..opts.match_points).map(|_| random_point(&mut rng, 0.5)).collect();
    let mut seeds = spectral_seeds(p, eps, m, direct, &mut rng);
    for _ in 0..opts.random_seeds {
        seeds.push((0..m).map(|_| random_point(&mut rng, 0.8)).collect());
    }
    let found: Vec<Vec<C>> = if m == 0 {
        vec![vec![]]
    } else {
        seeds
            .par_iter()
            .filter_map(|s| newton_bethe(p, s, eps, opts))
            .collect()
    };
    let mut unique: Vec<Vec<C>> = Vec::new();
    for q in found {
        if !unique.iter().any(|u| same_roots(p, u, &q, 1e-6)) {
            unique.push(q);
        }
    }
    let mut out = Vec::with_capacity(unique.len());
    for q in unique {
        let roots = canonical_roots(p, &q);
        let poly = EvenEllipticPoly::from_roots(roots.clone());
        let residuals = bethe_residuals(p, &roots, eps)?.iter().map(|r| r.norm()).collect();
        let tq: Vec<C> = check
            .iter()
            .map(|&l| eigenvalue_from_q(p, &poly, eps, l))
            .collect::<Result<_>>()?;
        let mut best = (None, f64::INFINITY);
        for (i, tf) in direct.iter().enumerate() {
            let dev = check
                .iter()
                .zip(&tq)
                .map(|(&l, &t)| linalg::rel_diff_c(t, tf.eval(p, l)))
                .fold(0.0, f64::max);
            if dev < best.1 {
                best = (Some(i), dev);
            }
        }
        out.push(BetheSolution {
            m,
            roots,
            eps: *eps,
            residuals,
            matched_eigenvalue_index: best.0.filter(|_| best.1 <= opts.match_tol),
            match_deviation: best.1,
        });
    }
    out.sort_by(|a, b| {
        let ka: Vec<(f64, f64)> = a.roots.iter().map(|z| (z.re, z.im)).collect();
        let kb: Vec<(f64, f64)> = b.roots.iter().map(|z| (z.re, z.im)).collect();
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Worst relative deviation between node interpolation and the Rayleigh quotient at `pts`.
pub fn interpolation_consistency(p: &ModelParams, tf: &EigenvalueFunction, pts: &[C]) -> f64 {
    let v = match &tf.vector {
        Some(v) => v,
        None => return f64::NAN,
    };
    pts.iter()
        .map(|&l| linalg::rel_diff_c(tf.eval(p, l), EigenvalueFunction::rayleigh(p, v, l)))
        .fold(0.0, f64::max)
}

/// Eigenvector residual ‖𝒯(λ)v − τ(λ)v‖ / (‖𝒯‖‖v‖).
pub fn eigen_residual(p: &ModelParams, tf: &EigenvalueFunction, l: C) -> f64 {
    let v = match &tf.vector {
        Some(v) => v,
        None => return f64::NAN,
    };
    let t = vertex::transfer(p, l);
    (&t * v - v * tf.eval(p, l)).norm() / (linalg::fro(&t) * v.norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorCoverage {
    pub dim: usize,
    pub matched_first: usize,
    pub matched_second: usize,
}

/// Number of distinct direct eigenvalues matched by each sector's solutions.
pub fn sector_coverage(dim: usize, first: &[BetheSolution], second: &[BetheSolution]) -> SectorCoverage {
    let count = |s: &[BetheSolution]| {
        let mut idx: Vec<usize> = s.iter().filter_map(|b| b.matched_eigenvalue_index).collect();
        idx.sort_unstable();
        idx.dedup();
        idx.len()
    };
    SectorCoverage {
        dim,
        matched_first: count(first),
        matched_second: count(second),
    }
}
