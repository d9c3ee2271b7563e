//! Dense and tridiagonal linear algebra used by the propagator backends:
//! row-parallel matrix products, partially pivoted LU with multi-RHS solves,
//! Thomas solves, and the matrix norms the hypothesis audits report.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

/// Row-block size for the parallel product; fixed so results do not depend on
/// the pool size.
#[cfg(feature = "parallel")]
const MM_CHUNK: usize = 64;

/// Sequential matrix product.
pub fn matmul_seq(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    a.dot(b)
}

/// Matrix product, row-parallel above a small-size cutoff.
#[cfg(feature = "parallel")]
pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    use ndarray::linalg::general_mat_mul;
    use rayon::prelude::*;

    let (m, n) = (a.nrows(), b.ncols());
    if m * n < 128 * 128 {
        return a.dot(b);
    }
    let mut c = Array2::zeros((m, n));
    let a_chunks: Vec<_> = a.axis_chunks_iter(Axis(0), MM_CHUNK).collect();
    let c_chunks: Vec<_> = c.axis_chunks_iter_mut(Axis(0), MM_CHUNK).collect();
    crate::par::install(|| {
        a_chunks
            .into_par_iter()
            .zip(c_chunks)
            .for_each(|(ac, mut cc)| general_mat_mul(1.0, &ac, b, 0.0, &mut cc));
    });
    c
}

#[cfg(not(feature = "parallel"))]
pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    matmul_seq(a, b)
}

/// `m^p` by binary powering (`p >= 1`).
pub fn matrix_power(m: &Array2<f64>, p: u32) -> Array2<f64> {
    assert!(p >= 1);
    let mut result: Option<Array2<f64>> = None;
    let mut base = m.clone();
    let mut p = p;
    loop {
        if p & 1 == 1 {
            result = Some(match result {
                Some(r) => matmul(&r, &base),
                None => base.clone(),
            });
        }
        p >>= 1;
        if p == 0 {
            break;
        }
        base = matmul(&base, &base);
    }
    result.unwrap()
}

/// LU factorization with partial pivoting, stored packed (L below, U on and
/// above the diagonal) plus the pivot row at each elimination step.
pub struct Lu {
    lu: Array2<f64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Array2<f64>) -> Result<Lu> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "lu factor",
                expected: n,
                got: a.ncols(),
            });
        }
        let mut lu = a.clone();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut max = lu[[k, k]].abs();
            for i in k + 1..n {
                let v = lu[[i, k]].abs();
                if v > max {
                    max = v;
                    p = i;
                }
            }
            if max == 0.0 || !max.is_finite() {
                return Err(Error::Singular("lu factor"));
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    lu.swap([k, j], [p, j]);
                }
            }
            let pivot = lu[[k, k]];
            // Trailing update, row-parallel: each row is independent.
            let (pivot_row, mut rest) = lu.slice_mut(ndarray::s![k.., ..]).split_at(Axis(0), 1);
            let pivot_row = pivot_row.row(0);
            let update = |mut row: ndarray::ArrayViewMut1<f64>| {
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        row[j] -= l * pivot_row[j];
                    }
                }
            };
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                if n - k > 256 {
                    let rows: Vec<_> = rest.axis_iter_mut(Axis(0)).collect();
                    crate::par::install(|| rows.into_par_iter().for_each(update));
                } else {
                    rest.axis_iter_mut(Axis(0)).for_each(update);
                }
            }
            #[cfg(not(feature = "parallel"))]
            rest.axis_iter_mut(Axis(0)).for_each(update);
        }
        Ok(Lu { lu, piv })
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &Array1<f64>) -> Array1<f64> {
        assert_eq!(self.lu.nrows(), b.len(), "lu solve dimension");
        let mut x = b.to_owned();
        self.solve_slice(x.as_slice_mut().expect("contiguous"));
        x
    }

    fn solve_slice(&self, x: &mut [f64]) {
        let n = self.lu.nrows();
        let lu = &self.lu;
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..n {
                    x[i] -= lu[[i, k]] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= lu[[k, j]] * x[j];
            }
            x[k] = s / lu[[k, k]];
        }
    }

    /// Solves `A X = B` column by column (column-parallel).
    pub fn solve_mat(&self, b: &Array2<f64>) -> Array2<f64> {
        let n = self.lu.nrows();
        let ncols = b.ncols();
        // Work on the transpose so each right-hand side is a contiguous row.
        let bt = b.t().to_owned();
        let mut cols: Vec<Array1<f64>> = bt.outer_iter().map(|r| r.to_owned()).collect();
        let solve_one = |c: &mut Array1<f64>| {
            self.solve_slice(c.as_slice_mut().expect("contiguous"));
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if n * ncols > 64 * 64 {
                crate::par::install(|| cols.par_iter_mut().for_each(solve_one));
            } else {
                cols.iter_mut().for_each(solve_one);
            }
        }
        #[cfg(not(feature = "parallel"))]
        cols.iter_mut().for_each(solve_one);

        let mut x = Array2::zeros((n, ncols));
        for (j, c) in cols.iter().enumerate() {
            x.column_mut(j).assign(c);
        }
        x
    }
}

/// Thomas solve of a tridiagonal system; stable for the (weakly) diagonally
/// dominant operators built here.
pub fn solve_tridiag(sub: &[f64], diag: &[f64], sup: &[f64], b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = diag.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "tridiag solve",
            expected: n,
            got: b.len(),
        });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::Singular("tridiag solve"));
    }
    if n > 1 {
        c[0] = sup[0] / denom;
    }
    d[0] = b[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::Singular("tridiag solve"));
        }
        if i < n - 1 {
            c[i] = sup[i] / denom;
        }
        d[i] = (b[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    let mut x = Array1::zeros(n);
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Max absolute row sum.
pub fn inf_norm_mat(a: &Array2<f64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Max absolute column sum.
pub fn one_norm_mat(a: &Array2<f64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn inf_norm_vec(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
