//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C = Complex64;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

pub const I: C = C::new(0.0, 1.0);
pub const ONE: C = C::new(1.0, 0.0);
pub const ZERO: C = C::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// A determinant together with the 2-norm condition number of its matrix.
#[derive(Debug, Clone, Copy)]
pub struct Det {
    pub value: C,
    pub cond: f64,
}

pub fn det(m: &CMat) -> C {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().lu().determinant()
}

pub fn cond(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = m.clone().singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn det_cond(m: &CMat) -> Det {
    Det {
        value: det(m),
        cond: cond(m),
    }
}

pub fn solve(m: &CMat, b: &CVec) -> Result<CVec> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{}x{} system", m.nrows(), m.ncols())))
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖a − b‖_F / max(‖a‖_F, ‖b‖_F).
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let scale = fro(a).max(fro(b)).max(f64::MIN_POSITIVE);
    fro(&(a - b)) / scale
}

pub fn rel_diff_c(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_rows(rows: &[Vec<C>]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Unit-norm right null vector of `m` and the ratio of the smallest to the largest
/// singular value.
pub fn null_vector(m: &CMat) -> (CVec, f64) {
    let n = m.ncols();
    // pad with zero rows so the SVD keeps a full V
    let rows = m.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let ratio = if s[0] == 0.0 { 0.0 } else { s[n - 1] / s[0] };
    let v = vt.row(n - 1).adjoint();
    (v, ratio)
}

/// Eigenvalues and unit eigenvectors of a general complex matrix via the complex Schur form.
/// Eigenvectors are obtained by back-substitution on the triangular factor.
pub fn eig(m: &CMat) -> Result<(Vec<C>, Vec<CVec>)> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), 1e-15 * fro(m).max(1e-300), 10_000)
        .ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let vals: Vec<C> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = fro(&t).max(f64::MIN_POSITIVE);
    let mut vecs = Vec::with_capacity(n);
    for k in 0..n {
        let lam = vals[k];
        let mut y = CVec::zeros(n);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for l in (j + 1)..=k {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lam;
            if d.norm() < 1e-14 * scale {
                d = C::new(1e-14 * scale, 0.0);
            }
            y[j] = -s / d;
        }
        let v = &q * y;
        let nv = v.norm();
        vecs.push(v / C::new(nv, 0.0));
    }
    Ok((vals, vecs))
}

/// Roots of Σ_j coeffs[j] x^j through the companion matrix.
pub fn poly_roots(coeffs: &[C]) -> Result<Vec<C>> {
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() == 0.0 {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = coeffs[deg];
    let mut comp = CMat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    Ok(eig(&comp)?.0)
}

/// Right-multiplies `x` (acting on N qubits, site 0 the most significant bit) by the
/// operator that applies the 2x2 matrix `op` on `site`.
pub fn apply_site_right(x: &CMat, op: &[[C; 2]; 2], site: usize, n_sites: usize) -> CMat {
    let dim = x.ncols();
    let mask = 1usize << (n_sites - 1 - site);
    let mut out = CMat::zeros(x.nrows(), dim);
    for col in 0..dim {
        if col & mask != 0 {
            continue;
        }
        let c0 = col;
        let c1 = col | mask;
        for r in 0..x.nrows() {
            let x0 = x[(r, c0)];
            let x1 = x[(r, c1)];
            out[(r, c0)] = x0 * op[0][0] + x1 * op[1][0];
            out[(r, c1)] = x0 * op[0][1] + x1 * op[1][1];
        }
    }
    out
}

/// Dense embedding of a single-site operator.
pub fn embed_site(op: &[[C; 2]; 2], site: usize, n_sites: usize) -> CMat {
    apply_site_right(&identity(1 << n_sites), op, site, n_sites)
}

pub fn commutator_rel(a: &CMat, b: &CMat) -> f64 {
    let comm = a * b - b * a;
    fro(&comm) / (fro(a) * fro(b)).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_recovers_diagonalizable_spectrum() {
        let m = from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 1.0), ZERO],
            vec![ZERO, c(-1.0, 0.5), c(0.3, 0.0)],
            vec![c(0.2, 0.0), ZERO, c(0.5, -2.0)],
        ]);
        let (vals, vecs) = eig(&m).unwrap();
        for (l, v) in vals.iter().zip(&vecs) {
            let r = &m * v - v * *l;
            assert!(r.norm() < 1e-12);
        }
        let tr: C = vals.iter().sum();
        assert!((tr - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn poly_roots_of_cubic() {
        // (x-1)(x-2i)(x+3) = x^3 + (2-2i)x^2 + (-3-4i)x + 6i
        let r = poly_roots(&[c(0.0, 6.0), c(-3.0, -4.0), c(2.0, -2.0), ONE]).unwrap();
        for want in [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)] {
            assert!(r.iter().any(|z| (z - want).norm() < 1e-10));
        }
    }

    #[test]
    fn site_application_matches_kron() {
        let op = [[c(1.0, 2.0), c(0.5, 0.0)], [c(-1.0, 0.0), c(0.0, 3.0)]];
        let o = from_rows(&[vec![op[0][0], op[0][1]], vec![op[1][0], op[1][1]]]);
        let i2 = identity(2);
        let full = kron(&kron(&i2, &o), &i2);
        assert!(rel_diff(&embed_site(&op, 1, 3), &full) < 1e-15);
    }

    #[test]
    fn null_vector_of_rank_deficient() {
        let m = from_rows(&[
            vec![ONE, c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
            vec![c(0.0, 1.0), c(0.0, 2.0)],
        ]);
        let (v, r) = null_vector(&m);
        assert!(r < 1e-14);
        assert!((&m * &v).norm() < 1e-14);
    }
}
