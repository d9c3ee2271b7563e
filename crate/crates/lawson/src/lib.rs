//! Lawson exponential integrators for 1-D reaction-diffusion
//! initial-boundary value problems u_t = u_xx + phi(u) + h(t, x), including
//! the boundary-corrected variants of local orders 2, 3 and 4 that avoid the
//! order reduction classical Lawson schemes suffer under non-vanishing
//! boundary data. Ships fast sine-transform and dense Pade propagator
//! backends, finite-difference and collocation discretizations, manufactured
//! problems, and a convergence-study harness.

pub mod boundary;
pub mod error;
pub mod integrators;
pub mod linalg;
pub mod par;
pub mod phi;
pub mod problems;
pub mod space;
pub mod study;
pub mod tableau;
pub mod trig;

pub use error::{Error, Result};
