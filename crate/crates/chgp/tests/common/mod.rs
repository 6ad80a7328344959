//! Shared oracles for the integration suites. Everything here is
//! deliberately brute force and independent of the library's evaluation
//! paths: a recursive adaptive Simpson integrator, a Jacobi eigensolver, and
//! a quasi-random lattice for parameter-box sampling.
#![allow(dead_code)]

use ndarray::Array2;

/// Recursive adaptive Simpson on [a, b].
pub fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_step(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse<F: Fn(f64) -> f64 + Copy>(
        f: F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson_step(fa, flm, fm, a, m);
        let right = simpson_step(fm, frm, fb, m, b);
        let err = (left + right - whole).abs();
        // relative floor: below ~3e-15 of the local magnitude only rounding
        // noise remains and further splitting cannot help
        if depth == 0 || err <= 15.0 * tol || err <= 3e-15 * (left.abs() + right.abs()) {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_step(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// ln of ∫ exp(g(θ)) dθ by scanning g on a fine grid to locate its support,
/// then adaptive Simpson on the max-shifted integrand over that window. g is
/// expected to be smooth in θ (log coordinates of the original variable).
pub fn ln_integral_log_coords<G: Fn(f64) -> f64 + Copy>(
    g: G,
    scan_lo: f64,
    scan_hi: f64,
    step: f64,
) -> f64 {
    let n = ((scan_hi - scan_lo) / step).ceil() as usize;
    let mut m = f64::NEG_INFINITY;
    let mut arg_m = scan_lo;
    for i in 0..=n {
        let t = scan_lo + i as f64 * step;
        let v = g(t);
        if v.is_finite() && v > m {
            m = v;
            arg_m = t;
        }
    }
    assert!(m.is_finite(), "oracle scan found no support");
    // contiguous window where g > m - 60
    let mut lo = arg_m;
    while lo - step >= scan_lo && g(lo - step) > m - 60.0 {
        lo -= step;
    }
    let mut hi = arg_m;
    while hi + step <= scan_hi && g(hi + step) > m - 60.0 {
        hi += step;
    }
    lo = (lo - step).max(scan_lo);
    hi = (hi + step).min(scan_hi);
    // a few segments keep the recursion shallow on wide windows
    let segments = 8;
    let mut total = 0.0;
    for k in 0..segments {
        let a = lo + (hi - lo) * k as f64 / segments as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / segments as f64;
        total += simpson(|t| (g(t) - m).exp(), a, b, 1e-14);
    }
    m + total.ln()
}

/// Brute-force oracle for U(a, b, x) = (1/Γ(a)) ∫ t^{a-1}(1+t)^{b-a-1}e^{-xt} dt,
/// integrated in log coordinates (t = e^θ, one power of t from the Jacobian).
/// Returns ln U. Independent of the library's evaluation paths.
pub fn ln_hyperg_u_oracle(a: f64, b: f64, x: f64) -> f64 {
    let g = |theta: f64| {
        let t = theta.exp();
        a * theta + (b - a - 1.0) * t.ln_1p() - x * t
    };
    // support: the left tail dies from a*theta, the right from x e^theta
    let scan_lo = (-800.0 / a.min(1.0)).max(-4000.0);
    let scan_hi = (800.0 / x.min(1.0)).ln().max(5.0) + 5.0;
    ln_integral_log_coords(g, scan_lo, scan_hi, 0.05) - ln_gamma_oracle(a)
}

/// Log-gamma for the oracle: Stirling with Bernoulli correction after
/// argument shifting. Independent of the library's Lanczos route.
pub fn ln_gamma_oracle(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut z = x;
    while z < 20.0 {
        acc -= z.ln();
        z += 1.0;
    }
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let mut corr = 0.0;
    let z2 = z * z;
    let mut zp = z;
    for &b in &B {
        corr += b / zp;
        zp *= z2;
    }
    acc + 0.5 * (2.0 * std::f64::consts::PI).ln() + (z - 0.5) * z.ln() - z + corr
}

/// Oracle for K_nu(x) from the integral representation
/// ∫_0^∞ e^{-x cosh t} cosh(nu t) dt.
pub fn bessel_k_oracle(nu: f64, x: f64) -> f64 {
    // the integrand decays like exp(-x e^t / 2); cut where it underflows
    let t_max = ((1500.0 / x).ln() + 1.0).max(2.0) + nu.max(1.0).ln().max(0.0) + 5.0;
    // integrate the e^x-scaled form so the integrand is O(1) and the
    // absolute tolerance acts as a relative one
    let scaled = simpson(
        |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
        0.0,
        t_max,
        1e-14,
    );
    scaled * (-x).exp()
}

/// CH covariance oracle from the scale-mixture integral
/// σ² β^{2α} Γ(ν+α)/(Γ(ν)Γ(α)) ∫ s^{ν-1}(s+β²)^{-(ν+α)} e^{-ν h²/s} ds,
/// integrated in log coordinates of s.
pub fn ch_cov_mixture_oracle(h: f64, nu: f64, alpha: f64, beta: f64, sigma2: f64) -> f64 {
    if h == 0.0 {
        return sigma2;
    }
    let b2 = beta * beta;
    let g = |lam: f64| {
        let s = lam.exp();
        nu * lam - (nu + alpha) * ln_add(lam, b2.ln()) - nu * h * h / s
    };
    // the left tail dies from e^{-nu h^2 / s}, the right (polynomial, rate
    // alpha in lambda) needs 900/alpha log-units below the peak
    let scan_lo = (nu * h * h / 900.0).max(1e-290).ln().min(b2.ln()) - 10.0;
    let peak_hi = b2.ln().max(2.0 * h.abs().max(1.0).ln());
    let scan_hi = (peak_hi + 900.0 / alpha).min(peak_hi + 40_000.0);
    let ln_integral = ln_integral_log_coords(g, scan_lo, scan_hi, 0.1);
    let ln_pref = sigma2.ln() + 2.0 * alpha * beta.ln() + ln_gamma_oracle(nu + alpha)
        - ln_gamma_oracle(nu)
        - ln_gamma_oracle(alpha);
    (ln_pref + ln_integral).exp()
}

/// ln(e^a + e^b) without overflow.
fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Jacobi eigenvalues of a symmetric matrix (ascending).
pub fn jacobi_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off < 1e-24 * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * m[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Additive-recurrence quasi-random sequence on [0,1)^d (Kronecker lattice
/// with generalized golden ratios), good enough for box sampling.
pub struct QuasiRandom {
    alphas: Vec<f64>,
    state: Vec<f64>,
}

impl QuasiRandom {
    pub fn new(dim: usize) -> Self {
        // generalized golden ratio gamma_d: x^(d+1) = x + 1
        let mut g = 1.5f64;
        for _ in 0..64 {
            g = (1.0 + g).powf(1.0 / (dim as f64 + 1.0));
        }
        let alphas = (1..=dim).map(|k| (1.0 / g.powi(k as i32)) % 1.0).collect();
        QuasiRandom {
            alphas,
            state: vec![0.5; dim],
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        for (s, a) in self.state.iter_mut().zip(&self.alphas) {
            *s = (*s + a) % 1.0;
        }
        self.state.clone()
    }
}

/// Simple deterministic xorshift for test-local randomness.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        (self.range(lo.ln(), hi.ln())).exp()
    }
}
