use std::f64::consts::PI;

use proptest::prelude::*;
use xyzsov::basis::{self, BasisSpec};
use xyzsov::campaign::{generate_params, Config};
use xyzsov::elliptic::{cauchy_det, EllipticContext, EvenEllipticPoly};
use xyzsov::linalg::{rel_diff_c, I};
use xyzsov::scalar::{poly_fn, sp_bruteforce, sp_determinant};
use xyzsov::spectrum::constraint_offset;
use xyzsov::vertex::checks;
use xyzsov::C;

const EPS: [i8; 6] = [1, -1, 1, 1, -1, 1];

fn cplx(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(a, b)| C::new(a, b))
}

fn omega() -> impl Strategy<Value = C> {
    (-0.4..0.4f64, 0.6..2.0f64).prop_map(|(a, b)| C::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_quasi_periodicity(w in omega(), z in cplx(1.0)) {
        let ctx = EllipticContext::with_omega(w).unwrap();
        let t = ctx.th(z);
        prop_assert!(rel_diff_c(ctx.th(z + PI), -t) < 1e-12);
        let mult = -(-I * PI * w - 2.0 * I * z).exp();
        prop_assert!(rel_diff_c(ctx.th(z + PI * w), mult * t) < 1e-11);
        prop_assert!(rel_diff_c(ctx.th(-z), -t) < 1e-13);
    }

    #[test]
    fn jacobi_derivative_identity(w in omega()) {
        let ctx = EllipticContext::with_omega(w).unwrap();
        let z = C::new(0.0, 0.0);
        let prod = ctx.theta(2, z, 1) * ctx.theta(3, z, 1) * ctx.theta(4, z, 1);
        prop_assert!(rel_diff_c(ctx.th_prime0(), prod) < 1e-13);
    }

    #[test]
    fn cauchy_closed_form(w in omega(), x in prop::collection::vec(cplx(0.5), 3), y in prop::collection::vec(cplx(0.5), 3)) {
        let ctx = EllipticContext::with_omega(w).unwrap();
        if let Ok(d) = cauchy_det(&ctx, &x, &y) {
            prop_assume!(d.numeric.cond < 1e8);
            prop_assert!(rel_diff_c(d.closed, d.numeric.value) < 1e-8);
        }
    }

    #[test]
    fn yang_baxter_and_unitarity(w in omega(), eta in cplx(0.4), l in prop::array::uniform3(cplx(0.6))) {
        let ctx = EllipticContext::with_omega(w).unwrap();
        prop_assume!(ctx.lattice_dist(eta) > 0.05);
        prop_assert!(checks::yang_baxter(&ctx, eta, l[0], l[1], l[2]) < 1e-10);
        prop_assert!(checks::unitarity(&ctx, eta, l[0]) < 1e-10);
    }

    #[test]
    fn k_reflection_any_alpha(eta in cplx(0.4), al in prop::array::uniform3(cplx(0.7)), l in cplx(0.5), m in cplx(0.5)) {
        let ctx = EllipticContext::default();
        prop_assume!(al.iter().all(|a| ctx.lattice_dist(*a) > 0.05));
        prop_assert!(checks::k_reflection(&ctx, eta, &al, l, m) < 1e-10);
    }

    #[test]
    fn generated_params_are_reproducible(seed in any::<u64>(), n in 2usize..5, m in 0usize..3) {
        let w = C::new(0.0, 0.8);
        let a = generate_params(seed, n, w, Some((m, EPS))).unwrap();
        let b = generate_params(seed, n, w, Some((m, EPS))).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(constraint_offset(&a, &EPS, m).unwrap().norm() < 1e-14);
        prop_assert!(a.check_default().is_ok());
    }

    #[test]
    fn transfer_matrices_commute(seed in any::<u64>(), l in cplx(0.6), m in cplx(0.6)) {
        let p = generate_params(seed, 2, C::new(0.0, 0.8), None).unwrap();
        prop_assert!(checks::transfer_commutation(&p, l, m) < 1e-10);
    }

    #[test]
    fn determinant_is_basis_free(seed in any::<u64>(), pr in prop::collection::vec(cplx(0.4), 2), qr in prop::collection::vec(cplx(0.4), 2), w in prop::collection::vec(cplx(0.5), 3)) {
        let p = generate_params(seed, 3, C::new(0.0, 0.8), None).unwrap();
        let ctx = &p.ctx;
        let (pp, qq) = (EvenEllipticPoly::from_roots(pr), EvenEllipticPoly::from_roots(qr));
        let (fp, fq) = (poly_fn(ctx, &pp), poly_fn(ctx, &qq));
        let rp = basis::build(&BasisSpec::root_product(w), ctx);
        prop_assume!(rp.is_ok());
        let mono = basis::build(&BasisSpec::monomial(3), ctx).unwrap();
        let a = sp_determinant(&p, &EPS, &EPS, &fp, &fq, mono.as_ref()).unwrap();
        let b = sp_determinant(&p, &EPS, &EPS, &fp, &fq, rp.unwrap().as_ref()).unwrap();
        prop_assume!(b.cond < 1e10);
        let sum = sp_bruteforce(&p, &EPS, &EPS, &fp, &fq);
        prop_assert!((a.value - b.value).norm() <= 1e-9 * sum.abs_sum);
        prop_assert!((a.value - sum.value).norm() <= 1e-9 * sum.abs_sum);
    }

    #[test]
    fn config_round_trips_through_toml(seed in any::<u64>(), scale in 0.1..10.0f64) {
        let cfg = Config { seed, tolerance_scale: scale, sizes: Some(vec![2, 3]), ..Config::default() };
        let text = toml::to_string(&cfg).unwrap();
        let back = Config::from_toml_str(&text).unwrap();
        prop_assert_eq!(back.seed, seed);
        prop_assert_eq!(back.tolerance_scale, scale);
        prop_assert_eq!(back.omega, cfg.omega);
        prop_assert_eq!(back.trig.params, cfg.trig.params);
    }
}
