//! Dense symmetric positive-definite linear algebra: Cholesky factorization
//! with an escalating jitter policy, triangular solves, log-determinants and
//! quadratic forms.
//!
//! One factorization is reused for the determinant, quadratic forms, and
//! prediction weights; nothing here calls an external BLAS.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of A (+ jitter I).
#[derive(Debug, Clone)]
pub struct CholFactor {
    l: Array2<f64>,
    /// Diagonal inflation that was actually applied, 0 when none was needed.
    pub jitter: f64,
}

fn cholesky_in_place(a: &mut Array2<f64>) -> bool {
    let n = a.nrows();
    let m = match a.as_slice_mut() {
        Some(s) => s,
        None => return false, // standard layout is guaranteed by construction
    };
    for j in 0..n {
        let (_, tail) = m.split_at_mut(j * n);
        let (row_j, rest) = tail.split_at_mut(n);
        let mut d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        d = d.sqrt();
        row_j[j] = d;
        let prefix_j = &row_j[..j];
        for row_i in rest.chunks_exact_mut(n) {
            let s = row_i[j] - dot(&row_i[..j], prefix_j);
            row_i[j] = s / d;
        }
    }
    // zero the strict upper triangle so the factor is self-contained
    for i in 0..n {
        for jj in (i + 1)..n {
            m[i * n + jj] = 0.0;
        }
    }
    true
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four partial sums let the compiler vectorize the reduction
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in (4 * chunks)..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Plain Cholesky factorization; fails on any non-positive pivot.
pub fn cholesky(a: &Array2<f64>) -> Result<CholFactor> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut l = a.clone();
    if cholesky_in_place(&mut l) {
        Ok(CholFactor { l, jitter: 0.0 })
    } else {
        Err(Error::Decomposition(
            "matrix is not positive definite".into(),
        ))
    }
}

/// Cholesky with the jitter escalation policy: on failure, add
/// 1e-10·mean(diag) to the diagonal, escalating tenfold up to 1e-6·mean(diag)
/// before reporting a decomposition error.
pub fn cholesky_jittered(a: &Array2<f64>) -> Result<CholFactor> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let mean_diag = (0..n).map(|i| a[[i, i]]).sum::<f64>() / n as f64;
    let mut jitter = 0.0;
    loop {
        let mut l = a.clone();
        if jitter > 0.0 {
            for i in 0..n {
                l[[i, i]] += jitter;
            }
        }
        if cholesky_in_place(&mut l) {
            return Ok(CholFactor { l, jitter });
        }
        jitter = if jitter == 0.0 {
            1e-10 * mean_diag
        } else {
            jitter * 10.0
        };
        if !(jitter > 0.0) || jitter > 1e-6 * mean_diag {
            return Err(Error::Decomposition(format!(
                "matrix is not positive definite even with jitter up to 1e-6 * mean(diag) = {:.3e}",
                1e-6 * mean_diag
            )));
        }
    }
}

impl CholFactor {
    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.l
    }

    /// Solve L y = b.
    pub fn solve_lower(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.n();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[[i, k]] * y[k];
            }
            y[i] = s / self.l[[i, i]];
        }
        y
    }

    /// Solve A x = b via the two triangular solves.
    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.n();
        let mut x = self.solve_lower(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[[k, i]] * x[k];
            }
            x[i] = s / self.l[[i, i]];
        }
        x
    }

    /// log |A| from the factor diagonal.
    pub fn logdet(&self) -> f64 {
        (0..self.n()).map(|i| 2.0 * self.l[[i, i]].ln()).sum()
    }

    /// zᵀ A⁻¹ z as the squared norm of L⁻¹ z.
    pub fn quad_form(&self, z: &Array1<f64>) -> f64 {
        let y = self.solve_lower(z);
        y.iter().map(|v| v * v).sum()
    }

    /// zᵀ A⁻¹ w.
    pub fn bilinear(&self, z: &Array1<f64>, w: &Array1<f64>) -> f64 {
        let yz = self.solve_lower(z);
        let yw = self.solve_lower(w);
        yz.iter().zip(yw.iter()).map(|(a, b)| a * b).sum()
    }
}
