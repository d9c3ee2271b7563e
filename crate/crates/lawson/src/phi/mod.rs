//! phi-function kernels: scalar evaluations, dense matrix families, and the
//! propagator backends that apply phi_j(tau A) to vectors.

mod expm;
mod propagator;
mod scalar;

pub use expm::{expm, phi_family};
pub use propagator::{
    augmented_phi_apply, propagator_apply, sym_tridiag_eigen, LinearPropagator, PhiRequest,
};
pub use scalar::{phi_scalar, phi_scalar_complex, PHI_MAX};
