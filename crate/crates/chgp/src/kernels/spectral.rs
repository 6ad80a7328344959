//! Isotropic spectral densities of the Matérn and CH kernels and the
//! high-frequency tail law of the CH density.
//!
//! Fourier convention: C(h) = ∫_{R^d} e^{i ω·h} f(|ω|) dω, so the radial
//! integral of f over R^d recovers C(0) = σ². This self-consistent
//! normalization carries the factor Γ(ν+d/2)/Γ(ν) that cancels in every
//! spectral ratio the theory uses.

use serde::Serialize;

use super::{ChParams, MaternParams};
use crate::error::{Error, Result};
use crate::specfun::{adaptive_gk, ln_gamma_unchecked, QuadratureConfig};

fn check_dim(d: usize) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::Dimension(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    Ok(d as f64)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("frequency must be nonnegative, got {omega}")));
    }
    Ok(())
}

/// Matérn spectral density
/// f(ω) = σ² Γ(ν+d/2) (2ν)^ν / (Γ(ν) π^{d/2} φ^{2ν}) (2ν/φ² + ω²)^{-(ν+d/2)}.
pub fn matern_spectral(omega: f64, p: &MaternParams, d: usize) -> Result<f64> {
    p.validate()?;
    check_omega(omega)?;
    let df = check_dim(d)?;
    let two_nu = 2.0 * p.nu;
    let ln_f = p.sigma2.ln() + ln_gamma_unchecked(p.nu + df / 2.0) - ln_gamma_unchecked(p.nu)
        + p.nu * two_nu.ln()
        - 2.0 * p.nu * p.phi.ln()
        - (df / 2.0) * std::f64::consts::PI.ln()
        - (p.nu + df / 2.0) * (two_nu / (p.phi * p.phi) + omega * omega).ln();
    Ok(ln_f.exp())
}

/// CH spectral density: the inverse-gamma IG(α, β²/2) mixture of the Matérn
/// density over φ². The substitution u = β²/(2φ²) turns the mixing measure
/// into Gamma(α, 1) and the integral into
///
/// f(ω) = N · E_{U ~ Gamma(ν+α, 1)} [(4νU/β² + ω²)^{-(ν+d/2)}],
/// N = σ² Γ(ν+d/2) 2^{2ν} ν^ν Γ(ν+α) / (Γ(ν) π^{d/2} β^{2ν} Γ(α)),
///
/// which stays well-conditioned for large ω. Finite only for α > d/2.
pub fn ch_spectral(omega: f64, p: &ChParams, d: usize) -> Result<f64> {
    let cfg = QuadratureConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-9,
        max_subdivisions: 400,
    };
    ch_spectral_with(omega, p, d, &cfg)
}

/// CH spectral density with explicit quadrature tolerances.
pub fn ch_spectral_with(omega: f64, p: &ChParams, d: usize, cfg: &QuadratureConfig) -> Result<f64> {
    p.validate()?;
    check_omega(omega)?;
    let df = check_dim(d)?;
    if p.alpha <= df / 2.0 {
        return Err(Error::domain(format!(
            "the CH spectral density is infinite for alpha <= d/2 (alpha = {}, d = {d})",
            p.alpha
        )));
    }
    let m = p.nu + p.alpha; // Gamma(m, 1) weight
    let scale = 4.0 * p.nu / (p.beta * p.beta);
    let power = -(p.nu + df / 2.0);
    // stabilize by the value at the weight's mean
    let u_ref = m;
    let ln_q0 = power * (scale * u_ref + omega * omega).ln();
    let ratio = |u: f64| {
        // (scale u + w^2)^power / (scale u_ref + w^2)^power, in logs
        (power * (scale * u + omega * omega).ln() - ln_q0).exp()
    };
    let ln_gamma_m = ln_gamma_unchecked(m);
    let weight = |u: f64| ((m - 1.0) * u.ln() - u - ln_gamma_m).exp();
    let u_hi = m + 15.0 * (m + 4.0).sqrt() + 45.0;

    let expectation = if m >= 1.0 {
        adaptive_gk(|u| weight(u) * ratio(u), 0.0, 1.0, cfg)?
            + adaptive_gk(|u| weight(u) * ratio(u), 1.0, u_hi, cfg)?
    } else {
        // u = v^{1/m} removes the u^{m-1} endpoint singularity on [0, 1]
        let head = adaptive_gk(
            |v| {
                let u = v.powf(1.0 / m);
                ((-u - ln_gamma_m).exp() / m) * ratio(u)
            },
            0.0,
            1.0,
            cfg,
        )?;
        head + adaptive_gk(|u| weight(u) * ratio(u), 1.0, u_hi, cfg)?
    };

    let ln_n = p.sigma2.ln() + ln_gamma_unchecked(p.nu + df / 2.0) - ln_gamma_unchecked(p.nu)
        + 2.0 * p.nu * std::f64::consts::LN_2
        + p.nu * p.nu.ln()
        + ln_gamma_unchecked(m)
        - (df / 2.0) * std::f64::consts::PI.ln()
        - 2.0 * p.nu * p.beta.ln()
        - ln_gamma_unchecked(p.alpha);
    Ok((ln_n + ln_q0).exp() * expectation)
}

/// Constants of the CH spectral tail law
/// f(ω) ~ amplitude · ω^{-exponent} · L(ω²), L(x) = {x/(x + shift)}^{ν+d/2},
/// in the same normalization as [`ch_spectral`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralTailConstants {
    pub amplitude: f64,
    pub exponent: f64,
    pub slow_vary_shift: f64,
    slowly_varying_power: f64,
}

impl SpectralTailConstants {
    /// The slowly varying factor L(x) = {x/(x + shift)}^{ν+d/2}.
    pub fn slowly_varying(&self, x: f64) -> f64 {
        (-self.slowly_varying_power * (self.slow_vary_shift / x).ln_1p()).exp()
    }

    /// amplitude · ω^{-exponent} · L(ω²).
    pub fn value(&self, omega: f64) -> f64 {
        self.amplitude * omega.powf(-self.exponent) * self.slowly_varying(omega * omega)
    }
}

/// Tail constants of the CH spectral density in d dimensions.
pub fn ch_spectral_tail(p: &ChParams, d: usize) -> Result<SpectralTailConstants> {
    p.validate()?;
    let df = check_dim(d)?;
    if p.alpha <= df / 2.0 {
        return Err(Error::domain(format!(
            "the CH spectral density is infinite for alpha <= d/2 (alpha = {}, d = {d})",
            p.alpha
        )));
    }
    let ln_amp = p.sigma2.ln() + ln_gamma_unchecked(p.nu + df / 2.0) - ln_gamma_unchecked(p.nu)
        + 2.0 * p.nu * std::f64::consts::LN_2
        + p.nu * p.nu.ln()
        + ln_gamma_unchecked(p.nu + p.alpha)
        - (df / 2.0) * std::f64::consts::PI.ln()
        - 2.0 * p.nu * p.beta.ln()
        - ln_gamma_unchecked(p.alpha);
    Ok(SpectralTailConstants {
        amplitude: ln_amp.exp(),
        exponent: 2.0 * p.nu + df,
        slow_vary_shift: p.beta * p.beta / (2.0 * p.nu),
        slowly_varying_power: p.nu + df / 2.0,
    })
}
