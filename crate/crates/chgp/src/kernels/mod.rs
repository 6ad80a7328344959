//! Covariance families: Matérn, Confluent Hypergeometric (CH), generalized
//! Cauchy (GC), and tensor products, plus the quantities the theory attaches
//! to them (microergodic parameter, tail law, equivalence conditions,
//! effective-range calibration, spectral densities).
//!
//! Parameter conventions:
//!
//! * Matérn: σ² 2^{1-ν}/Γ(ν) (√(2ν) h/φ)^ν K_ν(√(2ν) h/φ)
//! * CH:     σ² Γ(ν+α)/Γ(ν) · U(α, 1-ν, ν (h/β)²) — an inverse-gamma
//!   IG(α, β²/2) mixture of Matérn over φ², tail index 2α
//! * GC:     σ² {1 + (h/φ)^δ}^{-λ/δ}
//!
//! Gamma-ratio prefactors are always assembled in the log domain and
//! exponentiated last.

mod er;
pub(crate) mod interp;
mod spectral;

pub use er::{effective_range_scale, ErShape};
pub use spectral::{ch_spectral, ch_spectral_tail, ch_spectral_with, matern_spectral, SpectralTailConstants};

use serde::{Deserialize, Serialize};

use crate::design::Metric;
use crate::error::{Error, Result};
use crate::specfun::{bessel_k_scaled, ln_gamma_unchecked, ln_hyperg_u};

const LN_2: f64 = std::f64::consts::LN_2;

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Matérn parameters (smoothness ν, range φ, variance σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternParams {
    pub nu: f64,
    pub phi: f64,
    pub sigma2: f64,
}

impl MaternParams {
    pub fn new(nu: f64, phi: f64, sigma2: f64) -> Result<Self> {
        let p = MaternParams { nu, phi, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("nu", self.nu)?;
        require_positive("phi", self.phi)?;
        require_positive("sigma2", self.sigma2)
    }
}

/// CH parameters (smoothness ν, tail decay α, scale β, variance σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChParams {
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma2: f64,
}

impl ChParams {
    pub fn new(nu: f64, alpha: f64, beta: f64, sigma2: f64) -> Result<Self> {
        let p = ChParams { nu, alpha, beta, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("nu", self.nu)?;
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        require_positive("sigma2", self.sigma2)
    }
}

/// Generalized Cauchy parameters (smoothness δ ∈ (0,2], tail λ, range φ, variance σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcParams {
    pub delta: f64,
    pub lambda: f64,
    pub phi: f64,
    pub sigma2: f64,
}

impl GcParams {
    pub fn new(delta: f64, lambda: f64, phi: f64, sigma2: f64) -> Result<Self> {
        let p = GcParams { delta, lambda, phi, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 2.0) || !self.delta.is_finite() {
            return Err(Error::domain(format!(
                "delta must lie in (0, 2], got {}",
                self.delta
            )));
        }
        require_positive("lambda", self.lambda)?;
        require_positive("phi", self.phi)?;
        require_positive("sigma2", self.sigma2)
    }

    /// Validity of the GC class is only proven for λ ≤ d; larger values are
    /// accepted but flagged.
    pub fn tail_weight_warning(&self, dim: usize) -> Option<String> {
        if self.lambda > dim as f64 {
            Some(format!(
                "GC lambda = {} exceeds the spatial dimension d = {dim}; positive definiteness is \
                 only guaranteed for lambda <= d",
                self.lambda
            ))
        } else {
            None
        }
    }
}

/// Tensor-product kernel: global σ² times a product of unit-variance
/// isotropic correlations, one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorParams {
    pub components: Vec<KernelSpec>,
    pub sigma2: f64,
}

impl TensorParams {
    pub fn new(components: Vec<KernelSpec>, sigma2: f64) -> Result<Self> {
        let p = TensorParams { components, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sigma2", self.sigma2)?;
        if self.components.is_empty() {
            return Err(Error::domain("tensor kernel needs at least one component"));
        }
        for (i, c) in self.components.iter().enumerate() {
            c.validate()?;
            if matches!(c, KernelSpec::Tensor(_)) {
                return Err(Error::domain("tensor components must be isotropic kernels"));
            }
            if (c.sigma2() - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "tensor component {i} must have unit variance, got sigma2 = {}",
                    c.sigma2()
                )));
            }
        }
        Ok(())
    }
}

/// Tagged union over the supported covariance families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    Matern(MaternParams),
    Ch(ChParams),
    Gc(GcParams),
    Tensor(TensorParams),
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Matern(p) => p.validate(),
            KernelSpec::Ch(p) => p.validate(),
            KernelSpec::Gc(p) => p.validate(),
            KernelSpec::Tensor(p) => p.validate(),
        }
    }

    pub fn sigma2(&self) -> f64 {
        match self {
            KernelSpec::Matern(p) => p.sigma2,
            KernelSpec::Ch(p) => p.sigma2,
            KernelSpec::Gc(p) => p.sigma2,
            KernelSpec::Tensor(p) => p.sigma2,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::Matern(_) => "matern",
            KernelSpec::Ch(_) => "ch",
            KernelSpec::Gc(_) => "gc",
            KernelSpec::Tensor(_) => "tensor",
        }
    }

    /// Covariance at isotropic lag `h`. Errors for tensor kernels, which need
    /// coordinates rather than a scalar distance.
    pub fn cov(&self, h: f64) -> Result<f64> {
        match self {
            KernelSpec::Matern(p) => matern_cov(h, p),
            KernelSpec::Ch(p) => ch_cov(h, p),
            KernelSpec::Gc(p) => gc_cov(h, p),
            KernelSpec::Tensor(_) => Err(Error::Dimension(
                "tensor kernels are evaluated between coordinate pairs, not lags".into(),
            )),
        }
    }

    /// Correlation at lag `h` (covariance divided by σ²).
    pub fn correlation(&self, h: f64) -> Result<f64> {
        Ok(self.cov(h)? / self.sigma2())
    }

    /// Covariance between two points under the given metric.
    pub fn cov_between(&self, s: &[f64], u: &[f64], metric: &Metric) -> Result<f64> {
        if s.len() != u.len() {
            return Err(Error::Dimension(format!(
                "point dimensions differ: {} vs {}",
                s.len(),
                u.len()
            )));
        }
        match self {
            KernelSpec::Tensor(p) => {
                if !matches!(metric, Metric::Euclidean) {
                    return Err(Error::Dimension(
                        "tensor kernels require the euclidean metric".into(),
                    ));
                }
                tensor_cov(s, u, p)
            }
            _ => self.cov(metric.distance(s, u)?),
        }
    }
}

/// Matérn covariance, exact at h = 0.
pub fn matern_cov(h: f64, p: &MaternParams) -> Result<f64> {
    p.validate()?;
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("distance must be nonnegative, got {h}")));
    }
    if h == 0.0 {
        return Ok(p.sigma2);
    }
    let t = (2.0 * p.nu).sqrt() * h / p.phi;
    // t small enough that e^x K_nu(t) would overflow; the correlation is 1 up
    // to a curvature term that only matters for large nu
    if p.nu * (2.0 / t).ln() > 600.0 {
        let corr = if p.nu > 2.0 {
            (1.0 - t * t / (4.0 * (p.nu - 1.0))).max(0.0)
        } else {
            1.0
        };
        return Ok(p.sigma2 * corr);
    }
    let ln_corr = (1.0 - p.nu) * LN_2 - ln_gamma_unchecked(p.nu) + p.nu * t.ln()
        + bessel_k_scaled(p.nu, t)?.ln()
        - t;
    Ok(p.sigma2 * ln_corr.exp().min(1.0))
}

/// CH covariance via the U-function representation, exact at h = 0.
pub fn ch_cov(h: f64, p: &ChParams) -> Result<f64> {
    p.validate()?;
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("distance must be nonnegative, got {h}")));
    }
    if h == 0.0 {
        return Ok(p.sigma2);
    }
    let x = p.nu * (h / p.beta).powi(2);
    if x < 1e-290 {
        // correlation is 1 to machine precision well before x underflows
        return Ok(p.sigma2);
    }
    let ln_corr = ln_gamma_unchecked(p.nu + p.alpha) - ln_gamma_unchecked(p.nu)
        + ln_hyperg_u(p.alpha, 1.0 - p.nu, x)?;
    Ok(p.sigma2 * ln_corr.exp().min(1.0))
}

/// Large-h tail law of the CH covariance:
/// σ² β^{2α} Γ(ν+α)/(ν^α Γ(ν)) · h^{-2α} · L(h²),
/// L(x) = {x/(x + β²/(2ν))}^{ν+α}. Valid as an approximation for large h.
pub fn ch_tail_approx(h: f64, p: &ChParams) -> Result<f64> {
    p.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("tail law requires h > 0, got {h}")));
    }
    let shift = p.beta * p.beta / (2.0 * p.nu);
    // ln L(h^2) = -(nu+alpha) ln(1 + shift/h^2)
    let ln_l = -(p.nu + p.alpha) * (shift / (h * h)).ln_1p();
    let ln_val = p.sigma2.ln() + 2.0 * p.alpha * p.beta.ln() + ln_gamma_unchecked(p.nu + p.alpha)
        - p.alpha * p.nu.ln()
        - ln_gamma_unchecked(p.nu)
        - 2.0 * p.alpha * h.ln()
        + ln_l;
    Ok(ln_val.exp())
}

/// Generalized Cauchy covariance, closed form.
pub fn gc_cov(h: f64, p: &GcParams) -> Result<f64> {
    p.validate()?;
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("distance must be nonnegative, got {h}")));
    }
    if h == 0.0 {
        return Ok(p.sigma2);
    }
    let base = 1.0 + (h / p.phi).powf(p.delta);
    Ok(p.sigma2 * base.powf(-p.lambda / p.delta))
}

/// Tensor-product covariance between coordinate vectors.
pub fn tensor_cov(s: &[f64], u: &[f64], p: &TensorParams) -> Result<f64> {
    p.validate()?;
    if s.len() != p.components.len() || u.len() != p.components.len() {
        return Err(Error::Dimension(format!(
            "tensor kernel of arity {} applied to points of dimension {} and {}",
            p.components.len(),
            s.len(),
            u.len()
        )));
    }
    let mut prod = p.sigma2;
    for (i, c) in p.components.iter().enumerate() {
        prod *= c.cov((s[i] - u[i]).abs())?;
    }
    Ok(prod)
}

/// Log of the microergodic parameter c(θ) = σ² β^{-2ν} Γ(ν+α)/Γ(α).
pub(crate) fn ln_microergodic(p: &ChParams) -> f64 {
    p.sigma2.ln() - 2.0 * p.nu * p.beta.ln() + ln_gamma_unchecked(p.nu + p.alpha)
        - ln_gamma_unchecked(p.alpha)
}

/// Microergodic parameter of the CH kernel, the only consistently estimable
/// combination of (α, β, σ²) under infill asymptotics.
pub fn microergodic(p: &ChParams) -> Result<f64> {
    p.validate()?;
    Ok(ln_microergodic(p).exp())
}

/// Outcome of an equivalence predicate: whether the microergodic quantities
/// agree within `rel_tol`, plus the signed relative residual (q1 - q2)/q2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub residual: f64,
}

fn equivalence_from_logs(ln_q1: f64, ln_q2: f64, rel_tol: f64) -> Result<Equivalence> {
    if !(rel_tol > 0.0) {
        return Err(Error::domain("rel_tol must be positive"));
    }
    let residual = (ln_q1 - ln_q2).exp_m1();
    Ok(Equivalence {
        equivalent: residual.abs() <= rel_tol,
        residual,
    })
}

fn check_same_nu(nu1: f64, nu2: f64) -> Result<()> {
    if nu1 != nu2 {
        return Err(Error::Dimension(format!(
            "equivalence conditions require the same smoothness on both sides, got {nu1} and {nu2}"
        )));
    }
    Ok(())
}

fn check_alpha_dim(alpha: f64, dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Dimension(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    if alpha <= dim as f64 / 2.0 {
        return Err(Error::domain(format!(
            "equivalence theory requires alpha > d/2 = {}, got alpha = {alpha}",
            dim as f64 / 2.0
        )));
    }
    Ok(())
}

/// Equivalence of two CH Gaussian measures on a bounded domain in d dimensions:
/// σ²_1 Γ(ν+α_1)/(β_1^{2ν} Γ(α_1)) = σ²_2 Γ(ν+α_2)/(β_2^{2ν} Γ(α_2)).
pub fn equivalence_ch_ch(p1: &ChParams, p2: &ChParams, dim: usize, rel_tol: f64) -> Result<Equivalence> {
    p1.validate()?;
    p2.validate()?;
    check_same_nu(p1.nu, p2.nu)?;
    check_alpha_dim(p1.alpha, dim)?;
    check_alpha_dim(p2.alpha, dim)?;
    equivalence_from_logs(ln_microergodic(p1), ln_microergodic(p2), rel_tol)
}

/// Equivalence of a CH and a Matérn Gaussian measure:
/// σ²_1 (β²/2)^{-ν} Γ(ν+α)/Γ(α) = σ²_2 φ^{-2ν}.
pub fn equivalence_ch_matern(
    ch: &ChParams,
    m: &MaternParams,
    dim: usize,
    rel_tol: f64,
) -> Result<Equivalence> {
    ch.validate()?;
    m.validate()?;
    check_same_nu(ch.nu, m.nu)?;
    check_alpha_dim(ch.alpha, dim)?;
    let ln_q1 = ch.sigma2.ln() - ch.nu * (ch.beta * ch.beta / 2.0).ln()
        + ln_gamma_unchecked(ch.nu + ch.alpha)
        - ln_gamma_unchecked(ch.alpha);
    let ln_q2 = m.sigma2.ln() - 2.0 * m.nu * m.phi.ln();
    equivalence_from_logs(ln_q1, ln_q2, rel_tol)
}

/// The Matérn variance that matches a CH kernel under the CH–Matérn
/// equivalence condition, for a given Matérn range φ.
pub fn matern_sigma2_matching_ch(ch: &ChParams, phi: f64) -> Result<f64> {
    ch.validate()?;
    require_positive("phi", phi)?;
    let ln_s = ch.sigma2.ln() - ch.nu * (ch.beta * ch.beta / 2.0).ln()
        + ln_gamma_unchecked(ch.nu + ch.alpha)
        - ln_gamma_unchecked(ch.alpha)
        + 2.0 * ch.nu * phi.ln();
    Ok(ln_s.exp())
}

/// CH parameters that converge pointwise to Matérn(ν, γ, σ²) as α → ∞:
/// β = √(2(α+1)) γ concentrates the inverse-gamma mixing density at γ².
pub fn matern_limit_of_ch(gamma: f64, nu: f64, sigma2: f64, alpha: f64) -> Result<ChParams> {
    require_positive("gamma", gamma)?;
    ChParams::new(nu, alpha, (2.0 * (alpha + 1.0)).sqrt() * gamma, sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matern_closed_forms() {
        // nu = 1/2: exp(-h/phi)
        let p = MaternParams::new(0.5, 1.0, 1.0).unwrap();
        let got = matern_cov(1.0, &p).unwrap();
        assert!((got - (-1.0f64).exp()).abs() < 1e-13);

        // nu = 3/2: (1 + sqrt(3) h/phi) exp(-sqrt(3) h/phi)
        let p = MaternParams::new(1.5, 2.0, 1.0).unwrap();
        let t = 3.0f64.sqrt();
        let exact = (1.0 + t) * (-t).exp();
        let got = matern_cov(2.0, &p).unwrap();
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");

        // origin
        let p = MaternParams::new(2.5, 0.7, 3.3).unwrap();
        assert_eq!(matern_cov(0.0, &p).unwrap(), 3.3);
    }

    #[test]
    fn matern_tiny_lag_continuity() {
        // as h shrinks toward 0 the covariance rises monotonically to sigma2,
        // crossing the scaled-Bessel overflow guard without a jump
        for &nu in &[0.4, 1.0, 2.5, 30.0] {
            let p = MaternParams::new(nu, 1.0, 2.0).unwrap();
            let mut prev = 0.0;
            for k in 1..20 {
                let h = 10f64.powi(-(3 * k));
                let v = matern_cov(h, &p).unwrap();
                assert!(v >= prev - 1e-13 && v <= p.sigma2, "nu={nu} h={h} v={v}");
                prev = v;
            }
            assert!((prev - p.sigma2).abs() < 1e-12);
        }
    }

    #[test]
    fn ch_origin_and_positivity() {
        let p = ChParams::new(0.5, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(ch_cov(0.0, &p).unwrap(), 2.0);
        for &h in &[1e-12, 1e-3, 0.5, 10.0, 1e6] {
            let v = ch_cov(h, &p).unwrap();
            assert!(v > 0.0 && v < 2.0, "h={h}: {v}");
        }
    }

    #[test]
    fn gc_trivial_values() {
        let p = GcParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((gc_cov(1.0, &p).unwrap() - 0.5).abs() < 1e-15);
        let p = GcParams::new(2.0, 2.0, 3.0, 4.0).unwrap();
        assert!((gc_cov(3.0, &p).unwrap() - 2.0).abs() < 1e-14);
        assert!(GcParams::new(2.5, 1.0, 1.0, 1.0).is_err());
        assert!(GcParams::new(1.0, 1.0, 1.0, 1.0).unwrap().tail_weight_warning(2).is_none());
        assert!(GcParams::new(1.0, 2.5, 1.0, 1.0).unwrap().tail_weight_warning(2).is_some());
    }

    #[test]
    fn tail_prefactor_trivial_case() {
        // nu = 1, alpha = 1, beta = sqrt(2): prefactor = 2 sigma2, L -> 1
        let p = ChParams::new(1.0, 1.0, 2.0f64.sqrt(), 1.5).unwrap();
        let h = 1e9;
        let got = ch_tail_approx(h, &p).unwrap();
        let expect = 2.0 * 1.5 * h.powf(-2.0);
        assert!(((got - expect) / expect).abs() < 1e-8, "{got} vs {expect}");
    }

    #[test]
    fn tensor_product_of_exponentials() {
        let m = KernelSpec::Matern(MaternParams::new(0.5, 1.0, 1.0).unwrap());
        let p = TensorParams::new(vec![m.clone(), m], 2.0).unwrap();
        let got = tensor_cov(&[0.0, 0.0], &[1.0, 1.0], &p).unwrap();
        assert!((got - 2.0 * (-2.0f64).exp()).abs() < 1e-13);
        // unit-variance enforcement
        let bad = KernelSpec::Matern(MaternParams::new(0.5, 1.0, 2.0).unwrap());
        assert!(TensorParams::new(vec![bad], 1.0).is_err());
    }

    #[test]
    fn microergodic_values() {
        let p = ChParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((microergodic(&p).unwrap() - 1.0).abs() < 1e-14);
        let p = ChParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let exact = std::f64::consts::PI.sqrt() / 2.0; // Gamma(1.5)
        assert!((microergodic(&p).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn equivalence_predicates() {
        let p = ChParams::new(0.5, 2.0, 3.0, 1.7).unwrap();
        let e = equivalence_ch_ch(&p, &p, 2, 1e-12).unwrap();
        assert!(e.equivalent && e.residual == 0.0);

        // matched Matern via the explicit condition
        let phi = 2.2;
        let s2 = matern_sigma2_matching_ch(&p, phi).unwrap();
        let m = MaternParams::new(0.5, phi, s2).unwrap();
        let e = equivalence_ch_matern(&p, &m, 2, 1e-10).unwrap();
        assert!(e.equivalent, "residual {}", e.residual);

        // smoothness mismatch is an error
        let m_bad = MaternParams::new(1.5, phi, s2).unwrap();
        assert!(equivalence_ch_matern(&p, &m_bad, 2, 1e-10).is_err());
        // alpha <= d/2 is an error
        let p_bad = ChParams::new(0.5, 0.9, 3.0, 1.0).unwrap();
        assert!(equivalence_ch_ch(&p_bad, &p, 2, 1e-10).is_err());
    }

    #[test]
    fn beta_perturbation_residual_first_order() {
        // c is proportional to beta^{-2 nu}: a 1% bump in beta gives a
        // residual of about -2 nu % on the perturbed side
        for &nu in &[0.5, 1.5, 2.5] {
            let p1 = ChParams::new(nu, 2.0, 1.01, 1.0).unwrap();
            let p2 = ChParams::new(nu, 2.0, 1.0, 1.0).unwrap();
            let e = equivalence_ch_ch(&p1, &p2, 2, 1e-12).unwrap();
            assert!(!e.equivalent);
            let expect = 1.01f64.powf(-2.0 * nu) - 1.0;
            assert!((e.residual - expect).abs() < 1e-12, "nu={nu}");
            assert!((e.residual + 2.0 * nu * 0.01).abs() < 2e-3 * nu, "first order");
        }
    }

    #[test]
    fn matern_limit_parameterization() {
        let p = matern_limit_of_ch(1.0, 0.5, 1.0, 1e4).unwrap();
        assert!((p.beta - (2.0f64 * (1e4 + 1.0)).sqrt()).abs() < 1e-10);
        assert_eq!(p.nu, 0.5);
    }
}
