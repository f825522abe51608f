//! Numerical toolkit for large-disorder localization in the Anderson model.
//!
//! - [`saw`]: exact self-avoiding walk series on `Z^d`, correlation function,
//!   susceptibility and connective-constant upper bounds.
//! - [`critical`]: fixed-point solvers for the critical disorder thresholds
//!   and the rate functions that enter the fractional moment bound.
//! - [`anderson`]: finite-volume Hamiltonians, seeded disorder, banded LU
//!   Green's functions and checks of the resolvent identities.
//! - [`moments`]: Monte Carlo fractional moments and the bounds they are
//!   tested against.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel work is delegated to an
//! [`Executor`]; the [`Sequential`] one is always available and the `anderson`
//! companion crate provides a thread pool.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod anderson;
pub mod critical;
mod error;
mod exec;
pub mod moments;
pub mod quadrature;
pub mod saw;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
