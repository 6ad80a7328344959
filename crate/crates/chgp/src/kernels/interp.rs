//! Piecewise-Chebyshev tabulation of the CH log-correlation in log-lag.
//!
//! Building a correlation matrix evaluates U(α, 1-ν, ν(h/β)²) hundreds of
//! thousands of times at fixed (ν, α, β). ln U is analytic in ln x, so a
//! piecewise Chebyshev fit built from a few hundred exact evaluations serves
//! every matrix entry at ~1e-13 relative accuracy. Used by the fitting and
//! Monte Carlo hot paths; the public kernel functions stay on the exact path.

use super::ChParams;
use crate::error::{Error, Result};
use crate::specfun::{ln_gamma_unchecked, ln_hyperg_u};

const PIECE_SPAN: f64 = 2.0; // log-units of x per Chebyshev piece
const TARGET_ABS: f64 = 2e-14; // on ln-correlation
// lags whose x falls this far below the table range use the exact path
const RANGE_DECADES: f64 = 1e14;

struct Piece {
    mid: f64,
    half: f64,
    coeffs: Vec<f64>,
}

impl Piece {
    fn eval(&self, y: f64) -> f64 {
        // Clenshaw recurrence
        let t = ((y - self.mid) / self.half).clamp(-1.0, 1.0);
        let t2 = 2.0 * t;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = t2 * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}

fn cheb_fit<F: Fn(f64) -> Result<f64>>(f: &F, lo: f64, hi: f64, n: usize) -> Result<Piece> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let vals: Vec<f64> = (0..=n)
        .map(|j| f(mid + half * (std::f64::consts::PI * j as f64 / n as f64).cos()))
        .collect::<Result<_>>()?;
    let mut coeffs = vec![0.0; n + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut s = 0.5 * (vals[0] + if k % 2 == 0 { vals[n] } else { -vals[n] });
        for (j, v) in vals.iter().enumerate().skip(1).take(n - 1) {
            s += v * (std::f64::consts::PI * (j * k) as f64 / n as f64).cos();
        }
        *c = 2.0 * s / n as f64;
    }
    coeffs[0] *= 0.5;
    Ok(Piece { mid, half, coeffs })
}

/// Table of ln corr(h) = ln Γ(ν+α) - ln Γ(ν) + ln U(α, 1-ν, ν(h/β)²) over a
/// lag range, with exact evaluation outside the tabulated x window.
pub(crate) struct ChCorrTable {
    params: ChParams,
    ln_gamma_ratio: f64,
    y_lo: f64,
    y_hi: f64,
    span: f64,
    pieces: Vec<Piece>,
}

impl ChCorrTable {
    /// Build for lags in [h_min_pos, h_max]; h_min_pos must be positive.
    pub(crate) fn build(p: &ChParams, h_min_pos: f64, h_max: f64) -> Result<Self> {
        p.validate()?;
        if !(h_min_pos > 0.0) || !(h_max >= h_min_pos) {
            return Err(Error::domain(
                "correlation table needs 0 < h_min <= h_max",
            ));
        }
        let x_of = |h: f64| p.nu * (h / p.beta) * (h / p.beta);
        let x_hi = x_of(h_max).max(1e-280 * RANGE_DECADES);
        let x_lo = x_of(h_min_pos).max(x_hi / RANGE_DECADES);
        let ln_gamma_ratio = ln_gamma_unchecked(p.nu + p.alpha) - ln_gamma_unchecked(p.nu);
        let f = |y: f64| -> Result<f64> { ln_hyperg_u(p.alpha, 1.0 - p.nu, y.exp()) };

        let y_lo = x_lo.ln() - 1e-9;
        let y_hi = x_hi.ln() + 1e-9;
        let n_pieces = (((y_hi - y_lo) / PIECE_SPAN).ceil() as usize).max(1);
        let span = (y_hi - y_lo) / n_pieces as f64;
        let mut pieces = Vec::with_capacity(n_pieces);
        for i in 0..n_pieces {
            let lo = y_lo + i as f64 * span;
            let hi = lo + span;
            let mut degree = 32;
            let mut kept: Option<(Piece, f64)> = None;
            loop {
                let piece = cheb_fit(&f, lo, hi, degree)?;
                // validate off-node
                let mut worst = 0.0f64;
                for j in 0..6 {
                    let y = lo + (hi - lo) * (j as f64 + 0.43) / 6.0;
                    worst = worst.max((piece.eval(y) - f(y)?).abs());
                }
                let tail = piece.coeffs[degree - 1].abs() + piece.coeffs[degree].abs();
                let err = worst.max(tail);
                // escalate only while it helps: the exact path has ~1e-12
                // jitter across its own regime boundaries, which no degree
                // can fit below
                let stalled = kept.as_ref().is_some_and(|(_, prev)| err > 0.5 * prev);
                if kept.as_ref().is_none_or(|(_, prev)| err < *prev) {
                    kept = Some((piece, err));
                }
                if err < TARGET_ABS || degree >= 128 || stalled {
                    break;
                }
                degree *= 2;
            }
            pieces.push(kept.expect("at least one fit").0);
        }
        Ok(ChCorrTable {
            params: *p,
            ln_gamma_ratio,
            y_lo,
            y_hi,
            span,
            pieces,
        })
    }

    /// Correlation at lag h (unit variance), exact outside the table window.
    pub(crate) fn correlation(&self, h: f64) -> Result<f64> {
        if h == 0.0 {
            return Ok(1.0);
        }
        let x = self.params.nu * (h / self.params.beta) * (h / self.params.beta);
        if x < 1e-290 {
            return Ok(1.0);
        }
        let y = x.ln();
        if y < self.y_lo || y > self.y_hi {
            return super::ch_cov(h, &ChParams { sigma2: 1.0, ..self.params });
        }
        let idx = (((y - self.y_lo) / self.span) as usize).min(self.pieces.len() - 1);
        Ok((self.ln_gamma_ratio + self.pieces[idx].eval(y)).exp().min(1.0))
    }
}
