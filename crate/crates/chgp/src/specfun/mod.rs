//! Special functions backing the covariance kernels: log-gamma, the modified
//! Bessel function of the second kind, and the confluent hypergeometric
//! function of the second kind.
//!
//! Everything here is a pure function of its arguments and safe to call from
//! any number of threads.

mod bessel;
mod gamma;
mod hyperg;
mod quad;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use gamma::ln_gamma;
pub use hyperg::{hyperg_u, ln_hyperg_u, ln_hyperg_u_with};
pub use quad::{adaptive_gk, QuadratureConfig};

pub(crate) use gamma::ln_gamma_unchecked;
