//! Effective-range calibration: solve for the scale parameter at which the
//! correlation equals 0.05 at a target distance.

use super::{ch_cov, gc_cov, matern_cov, ChParams, GcParams, MaternParams};
use crate::error::{Error, Result};

const TARGET_CORR: f64 = 0.05;
const CORR_TOL: f64 = 1e-10;

/// Shape parameters of a family, leaving the scale free to solve for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErShape {
    /// Solves for φ.
    Matern { nu: f64 },
    /// Solves for β.
    Ch { nu: f64, alpha: f64 },
    /// Solves for φ.
    Gc { delta: f64, lambda: f64 },
}

impl ErShape {
    fn correlation(&self, scale: f64, h: f64) -> Result<f64> {
        match *self {
            ErShape::Matern { nu } => matern_cov(h, &MaternParams::new(nu, scale, 1.0)?),
            ErShape::Ch { nu, alpha } => ch_cov(h, &ChParams::new(nu, alpha, scale, 1.0)?),
            ErShape::Gc { delta, lambda } => gc_cov(h, &GcParams::new(delta, lambda, scale, 1.0)?),
        }
    }
}

/// Scale parameter (φ for Matérn/GC, β for CH) such that the correlation at
/// `target_er` equals 0.05 to within 1e-10, by bracketed bisection. The
/// bracket starts at [1e-3, 1e3]·target_er and expands geometrically to
/// [1e-8, 1e8]·target_er before giving up.
pub fn effective_range_scale(shape: &ErShape, target_er: f64) -> Result<f64> {
    if !(target_er > 0.0) || !target_er.is_finite() {
        return Err(Error::domain(format!(
            "target effective range must be positive, got {target_er}"
        )));
    }
    // correlation at fixed h is strictly increasing in the scale for all
    // three families, so bisection on f(scale) = corr - 0.05 applies
    let f = |scale: f64| -> Result<f64> { Ok(shape.correlation(scale, target_er)? - TARGET_CORR) };

    let mut lo = 1e-3 * target_er;
    let mut hi = 1e3 * target_er;
    let mut flo = f(lo)?;
    while flo > 0.0 {
        lo /= 10.0;
        if lo < 1e-8 * target_er {
            return Err(Error::Bracket(format!(
                "correlation exceeds 0.05 at {target_er} even for scale {lo:.3e}"
            )));
        }
        flo = f(lo)?;
    }
    let mut fhi = f(hi)?;
    while fhi < 0.0 {
        hi *= 10.0;
        if hi > 1e8 * target_er {
            return Err(Error::Bracket(format!(
                "correlation stays below 0.05 at {target_er} even for scale {hi:.3e}"
            )));
        }
        fhi = f(hi)?;
    }

    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() <= CORR_TOL {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= f64::EPSILON * hi {
            // interval exhausted; accept only if the residual is tolerable
            if fm.abs() <= 1e2 * CORR_TOL {
                return Ok(mid);
            }
            break;
        }
    }
    Err(Error::Convergence(format!(
        "effective-range bisection stalled for {shape:?} at target {target_er}"
    )))
}
