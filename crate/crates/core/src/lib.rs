//! Random Vandermonde matrices with unit-circle nodes.
//!
//! The crate builds the classical, d-fold and generalized (exponent
//! sequence) ensembles, computes their spectra with a complex Jacobi
//! eigensolver, and implements the log-domain machinery needed to study the
//! minimum singular value: exact inverses through elementary symmetric
//! polynomials, maxima of random polynomials on the circle, Brownian-bridge
//! functionals, and the partition counts behind the asymptotic moments.
//!
//! [`experiments`] turns these pieces into reproducible Monte Carlo runs that
//! emit CSV tables; the `vanderspec` binary is a thin wrapper around it.

pub mod bridge;
pub mod circlepoly;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod inverse;
pub mod linalg;
pub mod moments;
pub mod par;
pub mod quad;
pub mod seed;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
