//! Dense matrix exponential by Pade approximation with scaling and squaring,
//! plus phi-matrix families built from it by the upward recurrence (with a
//! matrix Taylor branch for small norms, mirroring the scalar kernel).

use ndarray::Array2;

use super::scalar::INV_FACT;
use crate::error::{Error, Result};
use crate::linalg::{matmul, one_norm_mat, Lu};

/// Degree / 1-norm bound ladder for the Pade approximant.
const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn add_scaled_eye(m: &mut Array2<f64>, c: f64) {
    for i in 0..m.nrows() {
        m[[i, i]] += c;
    }
}

/// Evaluates the degree-m Pade numerator/denominator pair (U odd, V even).
fn pade_uv(a: &Array2<f64>, m: usize) -> (Array2<f64>, Array2<f64>) {
    let n = a.nrows();
    let a2 = matmul(a, a);
    let combine = |coeffs: &[f64], powers: &[&Array2<f64>]| {
        // coeffs[0] multiplies I, coeffs[i] multiplies powers[i-1].
        let mut acc = Array2::<f64>::zeros((n, n));
        for (i, p) in powers.iter().enumerate() {
            acc.scaled_add(coeffs[i + 1], p);
        }
        add_scaled_eye(&mut acc, coeffs[0]);
        acc
    };
    match m {
        3 => {
            let u = matmul(a, &combine(&[B3[1], B3[3]], &[&a2]));
            let v = combine(&[B3[0], B3[2]], &[&a2]);
            (u, v)
        }
        5 => {
            let a4 = matmul(&a2, &a2);
            let u = matmul(a, &combine(&[B5[1], B5[3], B5[5]], &[&a2, &a4]));
            let v = combine(&[B5[0], B5[2], B5[4]], &[&a2, &a4]);
            (u, v)
        }
        7 => {
            let a4 = matmul(&a2, &a2);
            let a6 = matmul(&a2, &a4);
            let u = matmul(a, &combine(&[B7[1], B7[3], B7[5], B7[7]], &[&a2, &a4, &a6]));
            let v = combine(&[B7[0], B7[2], B7[4], B7[6]], &[&a2, &a4, &a6]);
            (u, v)
        }
        9 => {
            let a4 = matmul(&a2, &a2);
            let a6 = matmul(&a2, &a4);
            let a8 = matmul(&a4, &a4);
            let u = matmul(
                a,
                &combine(&[B9[1], B9[3], B9[5], B9[7], B9[9]], &[&a2, &a4, &a6, &a8]),
            );
            let v = combine(&[B9[0], B9[2], B9[4], B9[6], B9[8]], &[&a2, &a4, &a6, &a8]);
            (u, v)
        }
        13 => {
            let a4 = matmul(&a2, &a2);
            let a6 = matmul(&a2, &a4);
            // U = A*(A6*(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I).
            let mut hi = Array2::<f64>::zeros((n, n));
            hi.scaled_add(B13[13], &a6);
            hi.scaled_add(B13[11], &a4);
            hi.scaled_add(B13[9], &a2);
            let mut inner = matmul(&a6, &hi);
            inner.scaled_add(B13[7], &a6);
            inner.scaled_add(B13[5], &a4);
            inner.scaled_add(B13[3], &a2);
            add_scaled_eye(&mut inner, B13[1]);
            let u = matmul(a, &inner);

            let mut hi_v = Array2::<f64>::zeros((n, n));
            hi_v.scaled_add(B13[12], &a6);
            hi_v.scaled_add(B13[10], &a4);
            hi_v.scaled_add(B13[8], &a2);
            let mut v = matmul(&a6, &hi_v);
            v.scaled_add(B13[6], &a6);
            v.scaled_add(B13[4], &a4);
            v.scaled_add(B13[2], &a2);
            add_scaled_eye(&mut v, B13[0]);
            (u, v)
        }
        _ => unreachable!("pade degree"),
    }
}

/// e^A for a square matrix with finite entries.
pub fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "expm",
            expected: n,
            got: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("expm"));
    }
    let norm = one_norm_mat(a);
    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            let (u, v) = pade_uv(a, m);
            return pade_solve(u, v);
        }
    }
    let theta13 = THETA[4].1;
    let s = if norm > theta13 {
        ((norm / theta13).log2().ceil()) as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s as i32);
    let (u, v) = pade_uv(&scaled, 13);
    let mut e = pade_solve(u, v)?;
    for _ in 0..s {
        e = matmul(&e, &e);
    }
    Ok(e)
}

/// Solves (V - U) X = (V + U).
fn pade_solve(u: Array2<f64>, v: Array2<f64>) -> Result<Array2<f64>> {
    let p = &v + &u;
    let q = &v - &u;
    let lu = Lu::factor(&q)?;
    Ok(lu.solve_mat(&p))
}

/// phi_0(X)..phi_jmax(X) by matrix Taylor series (valid for small ||X||).
fn phi_taylor_family(x: &Array2<f64>, jmax: usize) -> Vec<Array2<f64>> {
    let n = x.nrows();
    let mut out = Vec::with_capacity(jmax + 1);
    for j in 0..=jmax {
        let mut acc = Array2::<f64>::zeros((n, n));
        add_scaled_eye(&mut acc, INV_FACT[19 + j]);
        for m in (0..19).rev() {
            acc = matmul(x, &acc);
            add_scaled_eye(&mut acc, INV_FACT[m + j]);
        }
        out.push(acc);
    }
    out
}

/// phi_0..phi_jmax of X by scaling and modified squaring: Taylor on
/// X / 2^s with norm at most 1, then s doubling rounds of
/// phi_k(2Z) = 2^-k [ phi_0(Z) phi_k(Z) + sum_{j=1..k} phi_j(Z)/(k-j)! ].
/// On the stable operators used here every term is nonnegative, so the
/// rounds do not cancel. (An X^-1 lift from e^X would amplify the
/// exponential's rounding by ||X^-1|| at every level.)
fn phi_scaled_squaring_family(x: &Array2<f64>, jmax: usize) -> Vec<Array2<f64>> {
    let s = one_norm_mat(x).log2().ceil().max(0.0) as i32;
    let scaled = x / 2f64.powi(s);
    let mut fam = phi_taylor_family(&scaled, jmax);
    for _ in 0..s {
        let mut next = Vec::with_capacity(jmax + 1);
        next.push(matmul(&fam[0], &fam[0]));
        for k in 1..=jmax {
            let mut acc = matmul(&fam[0], &fam[k]);
            for j in 1..=k {
                acc.scaled_add(INV_FACT[k - j], &fam[j]);
            }
            acc /= 2f64.powi(k as i32);
            next.push(acc);
        }
        fam = next;
    }
    fam
}

/// phi_0(tau A)..phi_jmax(tau A), by plain Taylor series when ||tau A|| <= 1
/// and by scaling and modified squaring otherwise.
pub fn phi_family(a: &Array2<f64>, tau: f64, jmax: usize) -> Result<Vec<Array2<f64>>> {
    let x = tau * a;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("phi family"));
    }
    if one_norm_mat(&x) <= 1.0 {
        Ok(phi_taylor_family(&x, jmax))
    } else {
        Ok(phi_scaled_squaring_family(&x, jmax))
    }
}
