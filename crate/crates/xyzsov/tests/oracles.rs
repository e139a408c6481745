//! Frozen mpmath values (tests/data/gen_oracles.py) against the series implementation.

use serde::Deserialize;
use xyzsov::elliptic::EllipticContext;
use xyzsov::vertex::{abcd, k_coeffs};
use xyzsov::C;

#[derive(Deserialize)]
struct ThetaCase {
    omega: C,
    k: u8,
    j: u8,
    z: C,
    value: C,
    deriv: C,
}

#[derive(Deserialize)]
struct WeightCase {
    omega: C,
    lambda: C,
    eta: C,
    abcd: [C; 4],
}

#[derive(Deserialize)]
struct KCase {
    omega: C,
    alpha: [C; 3],
    c: [C; 3],
}

#[derive(Deserialize)]
struct Oracles {
    theta: Vec<ThetaCase>,
    r_weights: Vec<WeightCase>,
    k_coeffs: Vec<KCase>,
}

fn oracles() -> Oracles {
    serde_json::from_str(include_str!("data/oracles.json")).unwrap()
}

#[test]
fn theta_values_and_derivatives() {
    for t in oracles().theta {
        let ctx = EllipticContext::with_omega(t.omega).unwrap();
        let (v, d, _) = ctx.theta_full(t.j, t.z, t.k);
        // derivatives can vanish to rounding where the value does not
        let scale = t.value.norm().max(t.deriv.norm());
        assert!(
            (v - t.value).norm() <= 1e-12 * scale,
            "θ_{}({}|{}ω) at ω={}: {v} vs {}",
            t.j,
            t.z,
            t.k,
            t.omega,
            t.value
        );
        assert!(
            (d - t.deriv).norm() <= 1e-11 * scale,
            "θ'_{}({}|{}ω) at ω={}: {d} vs {}",
            t.j,
            t.z,
            t.k,
            t.omega,
            t.deriv
        );
    }
}

#[test]
fn r_weights() {
    for w in oracles().r_weights {
        let ctx = EllipticContext::with_omega(w.omega).unwrap();
        let got = abcd(&ctx, w.lambda, w.eta);
        for (g, e) in got.iter().zip(&w.abcd) {
            assert!((g - e).norm() <= 1e-12 * e.norm(), "{g} vs {e}");
        }
    }
}

#[test]
fn boundary_coefficients() {
    for k in oracles().k_coeffs {
        let ctx = EllipticContext::with_omega(k.omega).unwrap();
        let (cx, cy, cz) = k_coeffs(&ctx, &k.alpha);
        for (g, e) in [cx, cy, cz].iter().zip(&k.c) {
            assert!((g - e).norm() <= 1e-12 * e.norm(), "{g} vs {e}");
        }
    }
}
