//! Numerical laboratory for the linear stochastic Volterra equation
//!
//! ```text
//! X(t) = X(0) + \int_0^t a(t - tau) A X(tau) dtau + W(t)
//! ```
//!
//! on a separable Hilbert space, truncated to finitely many eigenmodes of a
//! diagonal negative operator `A`. Everything reduces mode by mode to scalar
//! Volterra equations, which keeps the whole pipeline exact enough to test
//! structural identities rather than just eyeball plots.
//!
//! Components:
//! - [`grid`]: uniform time grids.
//! - [`path`]: scalar and mode-matrix paths attached to a grid.
//! - [`kernel`]: convolution kernels `a`, product quadrature, the linear
//!   Volterra solver, and the complete-positivity certificate.
//! - [`spectral`]: diagonal operators, semigroups, Yosida approximations,
//!   fractional powers.
//! - [`resolvent`]: scalar resolvent families `s_k` with
//!   `s_k + lambda_k (a * s_k) = 1`, and their Yosida convergence.
//! - [`wiener`]: Q-Wiener increments with refinement coupling and covariance
//!   diagnostics.
//! - [`convolution`]: the stochastic convolution by the direct Ito sum and by
//!   the semigroup reformulation through an auxiliary Cauchy problem.
//! - [`regularity`]: path moduli, spatial regularity, interpolation-space and
//!   maximal-regularity norms.
//!
//! The crate is `no_std` (with `alloc`) so the numerics stay free of IO; the
//! companion CLI crate owns configs, CSV export and reports.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod convolution;
pub mod grid;
pub mod kernel;
pub mod path;
pub mod regularity;
pub mod resolvent;
pub mod spectral;
pub mod wiener;

mod error;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use kernel::Kernel;
pub use path::{HilbertPath, ScalarPath};
pub use spectral::{HVector, SpectralOperator};
