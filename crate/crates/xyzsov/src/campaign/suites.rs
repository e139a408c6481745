use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{random_c, rng_for, sub_seed, Check, RunContext, Suite, SuiteOutput};
use crate::basis::{self, BasisSpec};
use crate::elliptic::{EvenEllipticPoly, GENERICITY_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{self, C};
use crate::registry::{Named, Registry};
use crate::scalar::filali::{residue_blocks, BlockSetup};
use crate::scalar::slavnov::{c_q_report, gaudin_entrywise, gaudin_symmetric, slavnov_derivative_residual};
use crate::scalar::{self, orthogonality_check, poly_fn, sp_bruteforce, sp_determinant, SpCase};
use crate::sov::{basis_change_residual, build_sov_seeded, eigenstate_from_q, gram_report, right_order_residual, Eps};
use crate::spectrum::{
    direct_spectrum, interpolation_consistency, min_relative_gap, solve_bethe, sov_spectrum_residuals,
    BetheOptions, BetheSolution, EigenvalueFunction,
};
use crate::trig::{trig_constraint_residual, trig_residuals, TrigSigns};
use crate::vertex::{central_values, checks, interpolation_residual, ModelParams};

fn point(rng: &mut ChaCha8Rng) -> C {
    random_c(rng, (-0.6, 0.6), (-0.3, 0.3))
}

fn roots(rng: &mut ChaCha8Rng, m: usize) -> Vec<C> {
    (0..m).map(|_| random_c(rng, (-0.45, 0.45), (-0.35, 0.35))).collect()
}

fn worst(it: impl Iterator<Item = f64>) -> f64 {
    // NaN propagates so a broken evaluation cannot pass
    it.fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

macro_rules! named {
    ($t:ident, $n:expr) => {
        pub struct $t;
        impl Named for $t {
            fn name(&self) -> &'static str {
                $n
            }
        }
    };
}

named!(Algebra, "algebra");
named!(Transfer, "transfer");
named!(Sov, "sov");
named!(Spectrum, "spectrum");
named!(Bethe, "bethe");
named!(Scalar, "scalar");
named!(Trig, "trig");

pub fn registry() -> Registry<dyn Suite> {
    let mut r: Registry<dyn Suite> = Registry::new("suite");
    r.register(Box::new(Algebra))
        .register(Box::new(Transfer))
        .register(Box::new(Sov))
        .register(Box::new(Spectrum))
        .register(Box::new(Bethe))
        .register(Box::new(Scalar))
        .register(Box::new(Trig));
    r
}

impl Suite for Algebra {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        let s = self.name();
        let tol = rc.tol.identity;
        let n = rc.sizes(&[2])[0];
        let p = match rc.params("algebra", n, None) {
            Ok(p) => p,
            Err(e) => {
                out.push(Check::error(s, "parameters", Some(1), Some(n), &e));
                return out;
            }
        };
        let ctx = &p.ctx;
        let eta = p.eta;
        let mut rng = rng_for(rc.config.seed, "algebra/points");
        let k = rc.config.algebra_points;
        let pts: Vec<[C; 3]> = (0..k).map(|_| [point(&mut rng), point(&mut rng), point(&mut rng)]).collect();
        type Id<'a> = (&'a str, Box<dyn Fn(&[C; 3]) -> f64 + Sync + 'a>);
        let ids: Vec<Id> = vec![
            ("yang-baxter", Box::new(|x| checks::yang_baxter(ctx, eta, x[0], x[1], x[2]))),
            ("unitarity", Box::new(|x| checks::unitarity(ctx, eta, x[0]))),
            ("crossing", Box::new(|x| checks::crossing(ctx, eta, x[0]))),
            ("r-quasi-periodicity", Box::new(|x| checks::r_quasi_periodicity(ctx, eta, x[0]))),
            (
                "k-reflection",
                Box::new(|x| {
                    checks::k_reflection(ctx, eta, &p.alpha_plus, x[0], x[1])
                        .max(checks::k_reflection(ctx, eta, &p.alpha_minus, x[0], x[1]))
                }),
            ),
            (
                "k-inversion",
                Box::new(|x| {
                    checks::k_inversion(ctx, &p.alpha_plus, x[0]).max(checks::k_inversion(ctx, &p.alpha_minus, x[0]))
                }),
            ),
            (
                "k-quasi-periodicity",
                Box::new(|x| {
                    checks::k_quasi_periodicity(ctx, &p.alpha_plus, x[0])
                        .max(checks::k_quasi_periodicity(ctx, &p.alpha_minus, x[0]))
                }),
            ),
            ("u-reflection", Box::new(|x| checks::u_reflection(&p, x[0], x[1]))),
            ("u-inversion", Box::new(|x| checks::u_inversion(&p, x[0]))),
        ];
        for (name, f) in &ids {
            out.push(Check::at_most(s, name, Some(1), Some(n), worst(pts.iter().map(f)), tol));
        }
        let few = &pts[..pts.len().min(10)];
        out.push(Check::at_most(
            s,
            "u-adjunct",
            None,
            Some(n),
            worst(few.iter().map(|x| checks::u_adjunct(&p, x[0]))),
            tol,
        ));
        out.push(Check::at_most(
            s,
            "monodromy-hat",
            None,
            Some(n),
            worst(few.iter().map(|x| checks::that_identity(&p, x[0]))),
            tol,
        ));
        out
    }
}

impl Suite for Transfer {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        let s = self.name();
        let tol = rc.tol.transfer;
        for n in rc.sizes(&[2, 3, 4]) {
            let p = match rc.params(&format!("transfer/N{n}"), n, None) {
                Ok(p) => p,
                Err(e) => {
                    out.push(Check::error(s, "parameters", Some(2), Some(n), &e));
                    continue;
                }
            };
            let mut rng = rng_for(rc.config.seed, &format!("transfer/points/N{n}"));
            let pts: Vec<(C, C)> = (0..5).map(|_| (point(&mut rng), point(&mut rng))).collect();
            out.push(Check::at_most(
                s,
                "commutation",
                Some(2),
                Some(n),
                worst(pts.iter().map(|&(l, m)| checks::transfer_commutation(&p, l, m))),
                tol,
            ));
            out.push(Check::at_most(
                s,
                "periodicity",
                Some(2),
                Some(n),
                worst(pts.iter().map(|&(l, _)| checks::transfer_periodicity(&p, l))),
                tol,
            ));
            out.push(Check::at_most(
                s,
                "quantum-determinant",
                Some(2),
                Some(n),
                worst((0..n).map(|k| checks::detq_transfer(&p, k))),
                tol,
            ));
            let cv = central_values(&p);
            out.push(Check::at_most(
                s,
                "central-values",
                Some(2),
                Some(n),
                worst(cv.iter().map(|c| c.rel_dev.max(c.centrality))),
                tol,
            ));
            let interp: Result<Vec<f64>> = pts.iter().map(|&(l, _)| interpolation_residual(&p, l)).collect();
            out.push(match interp {
                Ok(v) => Check::at_most(s, "interpolation", Some(2), Some(n), worst(v.into_iter()), tol),
                Err(e) => Check::error(s, "interpolation", Some(2), Some(n), &e),
            });
            let (res, a, b) = checks::hamiltonian_fit(&p);
            out.push(
                Check::at_most(s, "hamiltonian-derivative", None, Some(n), res, rc.tol.hamiltonian)
                    .with_detail(format!("dT/dλ = ({a})H + ({b})")),
            );
            out.push(Check::at_most(
                s,
                "hamiltonian-commutation",
                None,
                Some(n),
                checks::hamiltonian_commutation(&p, pts[0].0),
                tol,
            ));
        }
        out
    }
}

impl Suite for Sov {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        let s = self.name();
        let tol = rc.tol.gram;
        for n in rc.sizes(&[2, 3]) {
            let run = || -> Result<Vec<Check>> {
                let p = rc.params(&format!("sov/N{n}"), n, None)?;
                let mut rng = rng_for(rc.config.seed, &format!("sov/covector/N{n}"));
                let (b, _) = build_sov_seeded(&p, rc.config.eps, &mut rng, 10)?;
                let g = gram_report(&p, &b);
                Ok(vec![
                    Check::at_most(s, "gram-off-diagonal", Some(3), Some(n), g.off_diag, tol).with_cond(g.cond),
                    Check::at_most(s, "gram-diagonal", Some(3), Some(n), g.diag_dev, tol).with_cond(g.cond),
                    Check::at_most(s, "basis-change", None, Some(n), basis_change_residual(&p), rc.tol.identity),
                    Check::at_most(s, "right-order", None, Some(n), right_order_residual(&p, &b), tol)
                        .with_cond(g.cond),
                ])
            };
            match run() {
                Ok(c) => out.checks.extend(c),
                Err(e) => out.push(Check::error(s, "gram", Some(3), Some(n), &e)),
            }
        }
        out
    }
}

impl Suite for Spectrum {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        let s = self.name();
        for n in rc.sizes(&[2, 3]) {
            let run = || -> Result<Vec<Check>> {
                let p = rc.params(&format!("spectrum/N{n}"), n, None)?;
                let mut rng = rng_for(rc.config.seed, &format!("spectrum/points/N{n}"));
                let direct = direct_spectrum(&p, point(&mut rng))?;
                let pts: Vec<C> = (0..3).map(|_| point(&mut rng)).collect();
                Ok(vec![
                    Check::at_most(
                        s,
                        "discrete-spectrum",
                        Some(4),
                        Some(n),
                        worst(direct.iter().map(|tf| sov_spectrum_residuals(&p, tf).max())),
                        rc.tol.spectrum,
                    ),
                    Check::at_least(s, "simple-spectrum", Some(4), Some(n), min_relative_gap(&direct), GENERICITY_MARGIN),
                    Check::at_most(
                        s,
                        "interpolation-consistency",
                        None,
                        Some(n),
                        worst(direct.iter().map(|tf| interpolation_consistency(&p, tf, &pts))),
                        rc.tol.transfer,
                    ),
                ])
            };
            match run() {
                Ok(c) => out.checks.extend(c),
                Err(e) => out.push(Check::error(s, "discrete-spectrum", Some(4), Some(n), &e)),
            }
        }
        out
    }
}

/// Constrained parameters, their direct spectrum and the Bethe solutions of sector M.
fn bethe_setup(
    rc: &RunContext,
    label: &str,
    n: usize,
    m: usize,
    eps: Eps,
) -> Result<(ModelParams, Vec<EigenvalueFunction>, Vec<BetheSolution>)> {
    let p = rc.params(label, n, Some((m, eps)))?;
    let mut rng = rng_for(rc.config.seed, &format!("{label}/lref"));
    let direct = direct_spectrum(&p, point(&mut rng))?;
    let opts = BetheOptions {
        seed: sub_seed(rc.config.seed, &format!("{label}/newton")),
        match_tol: rc.tol.bethe_match,
        ..BetheOptions::default()
    };
    let sols = solve_bethe(&p, m, &eps, &direct, &opts)?;
    Ok((p, direct, sols))
}

impl Suite for Bethe {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        let s = self.name();
        let eps = rc.config.eps;
        for n in rc.sizes(&[3]) {
            let m = 1usize.min(n);
            let label = format!("bethe/N{n}");
            let (p, direct, sols) = match bethe_setup(rc, &label, n, m, eps) {
                Ok(x) => x,
                Err(e) => {
                    out.push(Check::error(s, "bethe-solutions", Some(5), Some(n), &e));
                    continue;
                }
            };
            out.push(Check::at_least(s, "bethe-solutions", Some(5), Some(n), sols.len() as f64, 1.0));
            out.push(Check::at_most(
                s,
                "eigenvalue-match",
                Some(5),
                Some(n),
                worst(sols.iter().map(|b| b.match_deviation)),
                rc.tol.bethe_match,
            ));
            let mut rng = rng_for(rc.config.seed, &format!("{label}/covector"));
            let ev = build_sov_seeded(&p, eps, &mut rng, 10).and_then(|(b, _)| {
                let mut worst_res: f64 = 0.0;
                for sol in &sols {
                    let tf = sol
                        .matched_eigenvalue_index
                        .map(|i| &direct[i])
                        .ok_or(Error::NotEigenpair(sol.match_deviation))?;
                    let tau = |l| tf.eval(&p, l);
                    let st = eigenstate_from_q(&p, &b, &sol.q(), &tau, point(&mut rng), 1e-6)?;
                    worst_res = worst_res.max(st.right_residual).max(st.left_residual);
                }
                Ok((worst_res, b.cond))
            });
            out.push(match ev {
                Ok((r, cond)) => Check::at_most(s, "sov-eigenvector", Some(5), Some(n), r, rc.tol.eigenvector).with_cond(cond),
                Err(e) => Check::error(s, "sov-eigenvector", Some(5), Some(n), &e),
            });
            out.extra(&format!("N{n}/solutions"), &sols);
        }
        out
    }
}

fn scalar_cases(rc: &RunContext) -> Vec<(usize, usize)> {
    match &rc.config.sizes {
        None => vec![(4, 2), (3, 2), (4, 1)],
        Some(sizes) => {
            let mut v = Vec::new();
            for &n in sizes {
                for m in [n / 2, n.div_ceil(2), (n.saturating_sub(1)) / 2] {
                    if m >= 1 && !v.contains(&(n, m)) {
                        v.push((n, m));
                    }
                }
            }
            v
        }
    }
}

/// Brute-force and Slavnov-ratio values for one random P, redrawn while ill-conditioned.
fn slavnov_vs_sum(
    p: &ModelParams,
    eps: Eps,
    q: &EvenEllipticPoly,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<C>, f64, f64, f64)> {
    let methods = scalar::registry();
    let mut last = None;
    for _ in 0..3 {
        let pv = roots(rng, q.roots.len());
        let case = SpCase {
            params: p.clone(),
            eps,
            eps_prime: eps,
            p: EvenEllipticPoly::from_roots(pv.clone()),
            q: q.clone(),
            basis: BasisSpec::monomial(p.n),
            normalise: true,
        };
        let brute = methods.get("bruteforce")?.compute(&case)?;
        let slav = methods.get("slavnov-ratio")?.compute(&case)?;
        let det = methods.get("sov-det")?.compute(&case)?;
        let dev = linalg::rel_diff_c(slav.value, brute.value);
        let det_dev = linalg::rel_diff_c(det.value, brute.value);
        if slav.cond <= scalar::COND_LIMIT {
            return Ok((pv, dev, det_dev, slav.cond));
        }
        last = Some((pv, dev, det_dev, slav.cond));
    }
    Ok(last.expect("at least one draw"))
}

impl Scalar {
    fn slavnov_cases(&self, rc: &RunContext, out: &mut SuiteOutput) {
        let s = self.name();
        let eps = rc.config.eps;
        for (n, m) in scalar_cases(rc) {
            let label = format!("scalar/N{n}M{m}");
            let run = || -> Result<(Vec<Check>, Vec<(String, serde_json::Value)>)> {
                let (p, _, sols) = bethe_setup(rc, &label, n, m, eps)?;
                let sol = sols
                    .iter()
                    .min_by(|a, b| a.max_residual().total_cmp(&b.max_residual()))
                    .ok_or_else(|| Error::Hypothesis(format!("no Bethe solution found for N = {n}, M = {m}")))?;
                let q = sol.q();
                let mut rng = rng_for(rc.config.seed, &format!("{label}/p"));
                let mut checks = Vec::new();
                let mut extras = Vec::new();
                let mut ps = Vec::new();
                for k in 0..rc.config.scalar_draws {
                    let (pv, dev, det_dev, cond) = slavnov_vs_sum(&p, eps, &q, &mut rng)?;
                    let nm = format!("slavnov-vs-sum/M{m}/P{k}");
                    checks.push(Check::at_most(s, &nm, Some(6), Some(n), dev, rc.tol.oracle).with_cond(cond));
                    let nm = format!("sov-det-vs-sum/M{m}/P{k}");
                    checks.push(Check::at_most(s, &nm, None, Some(n), det_dev, rc.tol.oracle));
                    ps.push(pv);
                }
                let Some(p0) = ps.first() else {
                    return Ok((checks, extras));
                };
                let d = gaudin_entrywise(&p, &eps, &q.roots, C::from(1e-5))?;
                checks.push(Check::at_most(s, &format!("gaudin-limit/M{m}"), Some(7), Some(n), d, rc.tol.gaudin_limit));
                let d2 = gaudin_symmetric(&p, &eps, &q.roots, C::from(1e-5))?;
                checks.push(Check::at_most(
                    s,
                    &format!("gaudin-limit-symmetric/M{m}"),
                    None,
                    Some(n),
                    d2,
                    rc.tol.gaudin_derivative,
                ));
                let fd = slavnov_derivative_residual(&p, &eps, p0, &q.roots, 1e-5)?;
                checks.push(Check::at_most(
                    s,
                    &format!("slavnov-jacobian/M{m}"),
                    Some(7),
                    Some(n),
                    fd,
                    rc.tol.gaudin_derivative,
                ));
                let setup = BlockSetup::new(&p, &eps, p0, &q.roots, None, None)?;
                let br = residue_blocks(&p, &setup)?;
                let cond = br.cond_x.max(br.cond_m);
                checks.push(
                    Check::at_most(s, &format!("residue-blocks/M{m}"), None, Some(n), br.max_rel_dev, rc.tol.blocks)
                        .with_cond(cond),
                );
                let g1x = br.g12_scale.max(br.g13_scale.unwrap_or(0.0));
                checks.push(
                    Check::at_most(s, &format!("block-vanishing/M{m}"), None, Some(n), g1x, rc.tol.blocks).with_cond(cond),
                );
                extras.push((format!("N{n}M{m}/blocks"), serde_json::to_value(&br)?));
                if let Some(p1) = ps.get(1) {
                    let gam = (random_c(&mut rng, (-0.5, 0.5), (0.1, 0.4)), random_c(&mut rng, (-0.5, 0.5), (0.1, 0.4)));
                    let cq = c_q_report(&p, &eps, &q.roots, p0, p1, gam)?;
                    checks.push(Check::at_most(s, &format!("c-q-independence/M{m}"), None, Some(n), cq.p_spread, rc.tol.oracle));
                    extras.push((format!("N{n}M{m}/c_q"), serde_json::to_value(&cq)?));
                }
                extras.push((format!("N{n}M{m}/q"), serde_json::to_value(&q.roots)?));
                Ok((checks, extras))
            };
            match run() {
                Ok((c, x)) => {
                    out.checks.extend(c);
                    out.extras.extend(x);
                }
                Err(e) => out.push(Check::error(s, &format!("slavnov-vs-sum/M{m}"), Some(6), Some(n), &e)),
            }
        }
    }

    fn orthogonality(&self, rc: &RunContext, out: &mut SuiteOutput) {
        let s = self.name();
        let eps = rc.config.eps;
        let sizes: Vec<usize> = rc.sizes(&[3, 4]).into_iter().filter(|&n| n >= 2).collect();
        let mut rng = rng_for(rc.config.seed, "scalar/orthogonality");
        for k in 0..rc.config.ortho_pairs {
            if sizes.is_empty() {
                break;
            }
            let n = sizes[k % sizes.len()];
            let run = |rng: &mut ChaCha8Rng| -> Result<Vec<Check>> {
                let p = rc.params(&format!("scalar/ortho/N{n}"), n, None)?;
                let m = rng.random_range(0..n);
                let pp = EvenEllipticPoly::from_roots(roots(rng, m));
                let qq = EvenEllipticPoly::from_roots(roots(rng, n - 1 - m));
                let r = orthogonality_check(&p, &eps, &pp, &qq, point(rng))?;
                let tol = rc.tol.orthogonality;
                Ok(vec![
                    Check::at_most(s, &format!("orthogonality/{k}"), Some(8), Some(n), r.relative, tol),
                    Check::at_most(s, &format!("orthogonality-det/{k}"), None, Some(n), r.determinant_relative, tol),
                ])
            };
            match run(&mut rng) {
                Ok(c) => out.checks.extend(c),
                Err(e) => out.push(Check::error(s, &format!("orthogonality/{k}"), Some(8), Some(n), &e)),
            }
        }
    }

    fn basis_independence(&self, rc: &RunContext, out: &mut SuiteOutput) {
        let s = self.name();
        let eps = rc.config.eps;
        let sizes = rc.sizes(&[3, 4]);
        let mut rng = rng_for(rc.config.seed, "scalar/basis");
        for k in 0..rc.config.basis_cases {
            let n = sizes[k % sizes.len()];
            let run = |rng: &mut ChaCha8Rng| -> Result<Vec<Check>> {
                let p = rc.params(&format!("scalar/basis/N{n}"), n, None)?;
                let ctx = &p.ctx;
                let m = rng.random_range(0..=n);
                let mp = rng.random_range((n - m)..=n);
                let pp = EvenEllipticPoly::from_roots(roots(rng, m));
                let qq = EvenEllipticPoly::from_roots(roots(rng, mp));
                let (fp, fq) = (poly_fn(ctx, &pp), poly_fn(ctx, &qq));
                let mono = basis::build(&BasisSpec::monomial(n), ctx)?;
                let rp = basis::build(&BasisSpec::root_product(roots(rng, n)), ctx)?;
                let a = sp_determinant(&p, &eps, &eps, &fp, &fq, mono.as_ref())?;
                let b = sp_determinant(&p, &eps, &eps, &fp, &fq, rp.as_ref())?;
                let sum = sp_bruteforce(&p, &eps, &eps, &fp, &fq);
                let cond = a.cond.max(b.cond);
                Ok(vec![
                    Check::at_most(
                        s,
                        &format!("basis-independence/{k}"),
                        Some(9),
                        Some(n),
                        linalg::rel_diff_c(a.value, b.value),
                        rc.tol.basis,
                    )
                    .with_cond(cond),
                    Check::at_most(
                        s,
                        &format!("det-vs-sum/{k}"),
                        None,
                        Some(n),
                        (a.value - sum.value).norm() / sum.abs_sum.max(f64::MIN_POSITIVE),
                        rc.tol.basis,
                    )
                    .with_cond(cond),
                ])
            };
            match run(&mut rng) {
                Ok(c) => out.checks.extend(c),
                Err(e) => out.push(Check::error(s, &format!("basis-independence/{k}"), Some(9), Some(n), &e)),
            }
        }
    }
}

impl Suite for Scalar {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        self.slavnov_cases(rc, &mut out);
        self.orthogonality(rc, &mut out);
        self.basis_independence(rc, &mut out);
        out
    }
}

impl Suite for Trig {
    fn run(&self, rc: &RunContext) -> SuiteOutput {
        let mut out = SuiteOutput::default();
        let s = self.name();
        let t = &rc.config.trig;
        match trig_residuals(t.u, &t.params, &t.eps, &t.q_roots, &t.q_points, &t.omegas) {
            Ok(r) => {
                out.push(
                    Check::at_least(s, "step-ratio", Some(10), None, r.min_step_ratio, rc.tol.trig_step)
                        .with_detail(format!("worst of {:?} over ω steps", crate::trig::LIMIT_QUANTITIES)),
                );
                out.push(Check::at_least(s, "convergence-slope", None, None, r.min_slope, rc.tol.trig_slope));
                let first = r.steps.first().map(|x| x.c_dev);
                let last = r.steps.last().map(|x| x.c_dev);
                if let (Some(a), Some(b)) = (first, last) {
                    let ratio = (0..3).map(|i| a[i] / b[i]).fold(f64::INFINITY, f64::min);
                    out.push(Check::at_least(s, "boundary-coefficient-decay", None, None, ratio, 1.0));
                }
                out.extra("report", &r);
            }
            Err(e) => out.push(Check::error(s, "step-ratio", Some(10), None, &e)),
        }
        let signs = TrigSigns {
            eps_phi: [1, -1],
            eps_psi: [1, 1],
            eps3_plus: 1,
        };
        let res = worst(t.omegas.iter().map(|&w| trig_constraint_residual(&t.params, &signs, 3, 1, w)));
        out.push(Check::at_most(s, "constraint-map", None, None, res, rc.tol.identity));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{run_campaign, Config, Verdict};

    #[test]
    fn broken_constraint_reports_hypothesis_failures() {
        let cfg = Config {
            suites: vec!["bethe".into()],
            break_constraint: true,
            ..Config::default()
        };
        let r = run_campaign(cfg).unwrap();
        assert_ne!(r.exit_code(), 0);
        assert!(r
            .checks
            .iter()
            .any(|c| c.verdict == Verdict::Fail && c.detail.as_deref().is_some_and(|d| d.contains("constraint"))));
    }

    #[test]
    fn same_seed_same_report() {
        let cfg = Config {
            suites: vec!["spectrum".into()],
            sizes: Some(vec![2]),
            seed: 11,
            ..Config::default()
        };
        let a = run_campaign(cfg.clone()).unwrap().to_json().unwrap();
        let b = run_campaign(cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }
}
