//! Scalar phi-function kernels: phi_0(z) = e^z and the integral family
//! phi_j(z) = int_0^1 e^((1-s)z) s^(j-1)/(j-1)! ds, evaluated by Taylor series
//! near the origin and by the upward recurrence away from it.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported phi index.
pub const PHI_MAX: usize = 5;

/// Below this |z| the upward recurrence phi_{j+1} = (phi_j - 1/j!)/z loses
/// roughly |z|^-1 per lift, so the Taylor series takes over.
const TAYLOR_CUTOFF: f64 = 1.0;

/// Taylor truncation order; the remainder at |z| = 1 is below 1/(20+j)!.
const TAYLOR_TERMS: usize = 19;

/// 1/n! for n = 0..=31.
pub(crate) const INV_FACT: [f64; 32] = {
    let mut f = [0.0f64; 32];
    f[0] = 1.0;
    let mut acc = 1.0f64;
    let mut i = 1;
    while i < 32 {
        acc *= i as f64;
        f[i] = 1.0 / acc;
        i += 1;
    }
    f
};

/// phi_j(z) for real z, 0 <= j <= 5.
pub fn phi_scalar(z: f64, j: usize) -> Result<f64> {
    if j > PHI_MAX {
        return Err(Error::PhiIndex(j));
    }
    Ok(phi_real_raw(z, j))
}

/// phi_j(z) for complex z, 0 <= j <= 5.
pub fn phi_scalar_complex(z: Complex64, j: usize) -> Result<Complex64> {
    if j > PHI_MAX {
        return Err(Error::PhiIndex(j));
    }
    if j == 0 {
        return Ok(z.exp());
    }
    if z.norm() <= TAYLOR_CUTOFF {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in (0..=TAYLOR_TERMS).rev() {
            acc = acc * z + INV_FACT[m + j];
        }
        Ok(acc)
    } else {
        let mut phi = z.exp();
        for m in 0..j {
            phi = (phi - INV_FACT[m]) / z;
        }
        Ok(phi)
    }
}

/// Unchecked real kernel for hot loops (index validated by the caller).
pub(crate) fn phi_real_raw(z: f64, j: usize) -> f64 {
    if j == 0 {
        return z.exp();
    }
    if z.abs() <= TAYLOR_CUTOFF {
        let mut acc = 0.0;
        for m in (0..=TAYLOR_TERMS).rev() {
            acc = acc * z + INV_FACT[m + j];
        }
        acc
    } else {
        let mut phi = z.exp();
        for m in 0..j {
            phi = (phi - INV_FACT[m]) / z;
        }
        phi
    }
}
