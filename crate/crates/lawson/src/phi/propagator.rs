//! Application of e^(tau A) and phi_j(tau A) to vectors through three
//! backends: a sine-basis fast transform for the Dirichlet finite-difference
//! Laplacian, a generic orthonormal eigenbasis for symmetric tridiagonal
//! operators, and dense Pade + recurrence for everything else. An augmented
//! block-matrix route serves as an independent test oracle.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::expm::{expm, phi_family};
use super::scalar::{phi_real_raw, INV_FACT, PHI_MAX};
use crate::error::{Error, Result};

/// A phi application request: compute phi_j(tau A) v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiRequest {
    pub tau: f64,
    pub j: usize,
}

type Cache<T> = RwLock<HashMap<(u64, u8), Arc<T>>>;

fn cache_get<T>(c: &Cache<T>, tau: f64, j: usize) -> Option<Arc<T>> {
    c.read().expect("cache lock").get(&(tau.to_bits(), j as u8)).cloned()
}

fn cache_put<T>(c: &Cache<T>, tau: f64, j: usize, v: Arc<T>) {
    c.write().expect("cache lock").insert((tau.to_bits(), j as u8), v);
}

/// DST-I of length n via a complex FFT of the odd extension (length 2(n+1)).
pub(crate) struct Dst {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dst {
    pub(crate) fn new(n: usize) -> Dst {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * (n + 1));
        Dst { n, fft }
    }

    /// y_j = sum_i x_i sin(i j pi / (n+1)), unnormalized (involution up to (n+1)/2).
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let len = 2 * (self.n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..self.n {
            buf[i + 1].re = x[i];
            buf[len - 1 - i].re = -x[i];
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        (0..self.n).map(|j| -0.5 * buf[j + 1].im).collect()
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
/// tridiagonal matrix, by the implicit-shift QL iteration.
pub fn sym_tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = diag.len();
    assert_eq!(off.len(), n - 1, "off-diagonal length");
    let mut d = diag.to_vec();
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = Array2::<f64>::eye(n);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * f;
                    z[[k, i]] = c * z[[k, i]] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigs: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let mut v = Array2::zeros((n, n));
    for (jnew, &jold) in idx.iter().enumerate() {
        v.column_mut(jnew).assign(&z.column(jold));
    }
    Ok((eigs, v))
}

enum SpectralBasis {
    /// Sine eigenbasis of the Dirichlet FD Laplacian; S^-1 = 2h S is folded
    /// into the multipliers.
    SineFd { dst: Dst, two_h: f64 },
    /// Orthonormal eigenbasis: V^-1 = V^T.
    Orthonormal { v: Array2<f64> },
    /// Eigenbasis of A = D^-1 T D with T symmetric and D diagonal:
    /// phi(tau A) x = D^-1 V phi(tau L) V^T D x.
    Scaled {
        v: Array2<f64>,
        d: Array1<f64>,
        d_inv: Array1<f64>,
    },
}

struct Spectral {
    eigs: Vec<f64>,
    basis: SpectralBasis,
    mults: Cache<Vec<f64>>,
}

impl Spectral {
    fn multiplier(&self, tau: f64, j: usize) -> Arc<Vec<f64>> {
        if let Some(m) = cache_get(&self.mults, tau, j) {
            return m;
        }
        let scale = match &self.basis {
            SpectralBasis::SineFd { two_h, .. } => *two_h,
            SpectralBasis::Orthonormal { .. } | SpectralBasis::Scaled { .. } => 1.0,
        };
        let m: Vec<f64> = self
            .eigs
            .iter()
            .map(|&lam| scale * phi_real_raw(tau * lam, j))
            .collect();
        let m = Arc::new(m);
        cache_put(&self.mults, tau, j, m.clone());
        m
    }

    fn apply(&self, tau: f64, j: usize, v: &Array1<f64>) -> Array1<f64> {
        let m = self.multiplier(tau, j);
        match &self.basis {
            SpectralBasis::SineFd { dst, .. } => {
                let mut c = dst.apply(v.as_slice().expect("contiguous"));
                for (ci, mi) in c.iter_mut().zip(m.iter()) {
                    *ci *= mi;
                }
                Array1::from_vec(dst.apply(&c))
            }
            SpectralBasis::Orthonormal { v: basis } => {
                let mut c = basis.t().dot(v);
                for (ci, mi) in c.iter_mut().zip(m.iter()) {
                    *ci *= mi;
                }
                basis.dot(&c)
            }
            SpectralBasis::Scaled { v: basis, d, d_inv } => {
                let mut c = basis.t().dot(&(d * v));
                for (ci, mi) in c.iter_mut().zip(m.iter()) {
                    *ci *= mi;
                }
                d_inv * &basis.dot(&c)
            }
        }
    }
}

struct Dense {
    a: Array2<f64>,
    phis: Cache<Array2<f64>>,
}

impl Dense {
    fn phi_matrix(&self, tau: f64, j: usize) -> Result<Arc<Array2<f64>>> {
        if let Some(p) = cache_get(&self.phis, tau, j) {
            return Ok(p);
        }
        let fam = phi_family(&self.a, tau, j)?;
        let mut wanted = None;
        for (jj, p) in fam.into_iter().enumerate() {
            let p = Arc::new(p);
            if jj == j {
                wanted = Some(p.clone());
            }
            cache_put(&self.phis, tau, jj, p);
        }
        Ok(wanted.expect("family includes j"))
    }

    /// Builds every (tau, 0..=jmax) pair once so the step loop only reads
    /// the cache.
    fn prepare(&self, scales: &[(f64, usize)]) -> Result<()> {
        let mut merged: Vec<(f64, usize)> = Vec::new();
        for &(tau, jmax) in scales {
            if tau == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|(t, _)| *t == tau) {
                Some((_, jm)) => *jm = (*jm).max(jmax),
                None => merged.push((tau, jmax)),
            }
        }
        for (tau, jmax) in merged {
            if (0..=jmax).all(|j| cache_get(&self.phis, tau, j).is_some()) {
                continue;
            }
            for (jj, p) in phi_family(&self.a, tau, jmax)?.into_iter().enumerate() {
                cache_put(&self.phis, tau, jj, Arc::new(p));
            }
        }
        Ok(())
    }
}

enum Backend {
    Spectral(Spectral),
    Dense(Dense),
}

/// Applies phi_j(tau A) to vectors for a fixed operator A, caching per-scale
/// work (multiplier vectors or phi matrices) keyed by (tau, j).
pub struct LinearPropagator {
    n: usize,
    backend: Backend,
}

impl LinearPropagator {
    /// Closed-form sine eigensystem of the N x N Dirichlet FD Laplacian
    /// (tridiag(1,-2,1)/h^2, h = 1/(N+1)), applied by fast DST-I.
    pub fn fd_dirichlet_sine(n: usize) -> LinearPropagator {
        assert!(n >= 1);
        let h = 1.0 / (n + 1) as f64;
        let eigs: Vec<f64> = (1..=n)
            .map(|i| {
                let s = (i as f64 * std::f64::consts::PI * h / 2.0).sin();
                -4.0 / (h * h) * s * s
            })
            .collect();
        LinearPropagator {
            n,
            backend: Backend::Spectral(Spectral {
                eigs,
                basis: SpectralBasis::SineFd {
                    dst: Dst::new(n),
                    two_h: 2.0 * h,
                },
                mults: RwLock::new(HashMap::new()),
            }),
        }
    }

    /// Spectral backend for a general symmetric tridiagonal operator.
    pub fn sym_tridiag(diag: &[f64], off: &[f64]) -> Result<LinearPropagator> {
        let n = diag.len();
        let (eigs, v) = sym_tridiag_eigen(diag, off)?;
        Ok(LinearPropagator {
            n,
            backend: Backend::Spectral(Spectral {
                eigs,
                basis: SpectralBasis::Orthonormal { v },
                mults: RwLock::new(HashMap::new()),
            }),
        })
    }

    /// Spectral backend for a tridiagonal operator that a diagonal
    /// similarity makes symmetric; needs sub[i]*sup[i] > 0 (row i, i+1).
    pub fn symmetrizable_tridiag(
        sub: &[f64],
        diag: &[f64],
        sup: &[f64],
    ) -> Result<LinearPropagator> {
        let n = diag.len();
        if sub.len() != n - 1 || sup.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                context: "symmetrizable tridiag",
                expected: n - 1,
                got: sub.len().min(sup.len()),
            });
        }
        let mut d = Array1::<f64>::ones(n);
        let mut off = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let prod = sub[i] * sup[i];
            if prod <= 0.0 {
                return Err(Error::Unsupported(
                    "tridiagonal operator is not diagonally symmetrizable".into(),
                ));
            }
            off[i] = prod.sqrt();
            // D A D^-1 symmetric <=> d_{i+1} = d_i sqrt(sup_i / sub_i).
            d[i + 1] = d[i] * (sup[i] / sub[i]).sqrt();
            if !(1e-150..=1e150).contains(&d[i + 1].abs()) {
                return Err(Error::Unsupported(
                    "similarity scaling of tridiagonal operator overflows".into(),
                ));
            }
        }
        let (eigs, v) = sym_tridiag_eigen(diag, &off)?;
        let d_inv = d.mapv(f64::recip);
        Ok(LinearPropagator {
            n,
            backend: Backend::Spectral(Spectral {
                eigs,
                basis: SpectralBasis::Scaled { v, d, d_inv },
                mults: RwLock::new(HashMap::new()),
            }),
        })
    }

    /// Dense backend (Pade exponential; phi families by scaled Taylor plus
    /// modified squaring).
    pub fn dense(a: Array2<f64>) -> Result<LinearPropagator> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "dense propagator",
                expected: n,
                got: a.ncols(),
            });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dense propagator"));
        }
        Ok(LinearPropagator {
            n,
            backend: Backend::Dense(Dense {
                a,
                phis: RwLock::new(HashMap::new()),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.backend, Backend::Spectral(_))
    }

    /// Eigenvalues when the backend is spectral.
    pub fn eigenvalues(&self) -> Option<&[f64]> {
        match &self.backend {
            Backend::Spectral(s) => Some(&s.eigs),
            Backend::Dense(_) => None,
        }
    }

    /// Precomputes everything needed for the given (tau, max j) pairs.
    pub fn prepare(&self, scales: &[(f64, usize)]) -> Result<()> {
        for &(_, jmax) in scales {
            if jmax > PHI_MAX {
                return Err(Error::PhiIndex(jmax));
            }
        }
        match &self.backend {
            Backend::Spectral(s) => {
                for &(tau, jmax) in scales {
                    if tau == 0.0 {
                        continue;
                    }
                    for j in 0..=jmax {
                        s.multiplier(tau, j);
                    }
                }
                Ok(())
            }
            Backend::Dense(d) => d.prepare(scales),
        }
    }

    /// phi_j(tau A) v.
    pub fn apply(&self, req: PhiRequest, v: &Array1<f64>) -> Result<Array1<f64>> {
        let PhiRequest { tau, j } = req;
        if j > PHI_MAX {
            return Err(Error::PhiIndex(j));
        }
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "propagator apply",
                expected: self.n,
                got: v.len(),
            });
        }
        if !tau.is_finite() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("propagator apply"));
        }
        if tau == 0.0 {
            return Ok(if j == 0 { v.clone() } else { v * INV_FACT[j] });
        }
        match &self.backend {
            Backend::Spectral(s) => Ok(s.apply(tau, j, v)),
            Backend::Dense(d) => Ok(d.phi_matrix(tau, j)?.dot(v)),
        }
    }

    /// Materializes phi_j(tau A) as a dense matrix (audits and tests).
    pub fn materialize(&self, tau: f64, j: usize) -> Result<Array2<f64>> {
        match &self.backend {
            Backend::Dense(d) => {
                if tau == 0.0 {
                    let mut m = Array2::zeros((self.n, self.n));
                    for i in 0..self.n {
                        m[[i, i]] = INV_FACT[j];
                    }
                    return Ok(m);
                }
                d.phi_matrix(tau, j).map(|p| p.as_ref().clone())
            }
            Backend::Spectral(_) => {
                let mut m = Array2::zeros((self.n, self.n));
                let mut e = Array1::zeros(self.n);
                for i in 0..self.n {
                    e[i] = 1.0;
                    let col = self.apply(PhiRequest { tau, j }, &e)?;
                    m.column_mut(i).assign(&col);
                    e[i] = 0.0;
                }
                Ok(m)
            }
        }
    }
}

/// Convenience free function mirroring `LinearPropagator::apply`.
pub fn propagator_apply(
    p: &LinearPropagator,
    req: PhiRequest,
    v: &Array1<f64>,
) -> Result<Array1<f64>> {
    p.apply(req, v)
}

/// Independent oracle: phi_j(tau M) v extracted from the exponential of the
/// augmented block matrix [[tau M, C], [0, Z]] with C[:,0] = v and Z the
/// nilpotent upper shift. Dimension capped at 200.
pub fn augmented_phi_apply(
    m: &Array2<f64>,
    tau: f64,
    j: usize,
    v: &Array1<f64>,
) -> Result<Array1<f64>> {
    let n = m.nrows();
    if n > 200 {
        return Err(Error::OracleTooLarge(n));
    }
    if j > PHI_MAX {
        return Err(Error::PhiIndex(j));
    }
    if m.ncols() != n || v.len() != n {
        return Err(Error::DimensionMismatch {
            context: "augmented oracle",
            expected: n,
            got: if m.ncols() != n { m.ncols() } else { v.len() },
        });
    }
    if j == 0 {
        return Ok(expm(&(tau * m))?.dot(v));
    }
    let nn = n + j;
    let mut w = Array2::zeros((nn, nn));
    w.slice_mut(s![..n, ..n]).assign(&(tau * m));
    for i in 0..n {
        w[[i, n]] = v[i];
    }
    for i in 0..j.saturating_sub(1) {
        w[[n + i, n + i + 1]] = 1.0;
    }
    let e = expm(&w)?;
    Ok(e.slice(s![..n, nn - 1]).to_owned())
}
