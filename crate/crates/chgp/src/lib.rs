//! Spatial Gaussian-process toolkit built around the Confluent Hypergeometric
//! (CH) covariance family.
//!
//! The CH kernel is an inverse-gamma scale mixture of the Matérn kernel over
//! its squared range. It keeps the Matérn origin behavior (smoothness ν) while
//! replacing the exponential tail with a polynomial tail of index 2α, with the
//! two behaviors controlled independently. This crate provides:
//!
//! * the special functions the kernels need ([`specfun`]),
//! * the Matérn, CH, generalized Cauchy and tensor-product kernels with their
//!   spectral densities, tail laws, effective-range calibration, microergodic
//!   parameter and Gaussian-measure equivalence predicates ([`kernels`]),
//! * spatial designs and distances ([`design`]),
//! * exact likelihood / REML evaluation, kriging, and the microergodic
//!   estimator with its confidence interval ([`gp`]),
//! * bounded derivative-free parameter estimation ([`estimate`]),
//! * exact seeded simulation of GP realizations ([`simulate`]),
//! * Monte Carlo study harnesses and a special-function timing benchmark
//!   ([`experiments`]),
//! * the `chgp` command-line front end ([`cli`]).
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod design;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod serialize;
pub mod simulate;
pub mod specfun;

pub use error::{Error, Result};
