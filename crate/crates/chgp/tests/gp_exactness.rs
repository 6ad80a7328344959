//! Likelihood, REML, kriging and microergodic-estimator exactness against
//! independent linear-algebra oracles.

mod common;

use chgp::design::{maximin_lhs, Locations, Metric};
use chgp::gp::*;
use chgp::kernels::{ChParams, KernelSpec, MaternParams};
use chgp::simulate::sample_gp;
use common::{jacobi_eigenvalues, TestRng};
use ndarray::{Array1, Array2};

const LN_2PI: f64 = 1.837_877_066_409_345_6;

fn random_model(rng: &mut TestRng) -> GPModel {
    let kernel = KernelSpec::Matern(
        MaternParams::new(rng.log_range(0.3, 2.5), rng.log_range(0.1, 1.0), rng.log_range(0.5, 2.0))
            .unwrap(),
    );
    GPModel::new(kernel, rng.range(-1.0, 1.0), rng.log_range(1e-4, 0.3)).unwrap()
}

fn random_data(rng: &mut TestRng, n: usize, d: usize) -> Dataset {
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.range(0.0, 1.0)).collect())
        .collect();
    let z: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
    Dataset::new(Locations::new(coords, Metric::Euclidean).unwrap(), z).unwrap()
}

/// Eigendecomposition route to the Gaussian log-likelihood: with
/// R = V diag(e) V', solve and log-det come from the spectrum. Uses the
/// Jacobi eigensolver plus explicit eigenvector extraction.
fn loglik_eigen_oracle(model: &GPModel, data: &Dataset) -> f64 {
    let n = data.n();
    let sigma2 = model.kernel.sigma2();
    let eta = model.nugget_tau2 / sigma2;
    let mut r = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let h = data
                .locs
                .metric()
                .distance(data.locs.point(i), data.locs.point(j))
                .unwrap();
            r[[i, j]] = model.kernel.correlation(h).unwrap();
        }
        r[[i, i]] += eta;
    }
    // full Jacobi with vectors
    let (eigvals, vectors) = jacobi_with_vectors(&r);
    let resid: Vec<f64> = data.z.iter().map(|z| z - model.mean_b).collect();
    // y = V' resid
    let mut quad = 0.0;
    let mut logdet = 0.0;
    for (k, &e) in eigvals.iter().enumerate() {
        let mut y = 0.0;
        for i in 0..n {
            y += vectors[[i, k]] * resid[i];
        }
        quad += y * y / e;
        logdet += e.ln();
    }
    let s2_hat = quad / n as f64;
    -0.5 * (n as f64 * (LN_2PI + s2_hat.ln()) + logdet + n as f64)
}

fn jacobi_with_vectors(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::eye(n);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off < 1e-26 * n as f64 {
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
                    let (mkp, mkq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[[i, i]]).collect(), v)
}

#[test]
fn profile_loglik_matches_eigen_oracle() {
    let mut rng = TestRng::new(31);
    for _ in 0..5 {
        let model = random_model(&mut rng);
        let data = random_data(&mut rng, 20, 2);
        let got = loglik(&model, &data, true).unwrap().value;
        let oracle = loglik_eigen_oracle(&model, &data);
        assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
    }
}

#[test]
fn reml_matches_explicit_contrast_oracle() {
    // build an explicit orthonormal (n-1)-dimensional basis of the contrast
    // space and evaluate the contrast likelihood directly
    let mut rng = TestRng::new(47);
    let model = random_model(&mut rng);
    let data = random_data(&mut rng, 30, 2);
    let n = data.n();

    // Helmert-style orthonormal contrasts: rows orthogonal to 1
    let mut a = Array2::zeros((n - 1, n));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for j in 0..k {
            a[[k - 1, j]] = 1.0 / norm;
        }
        a[[k - 1, k]] = -(k as f64) / norm;
    }
    // contrast covariance A R A' and contrast data w = A z
    let sigma2 = model.kernel.sigma2();
    let eta = model.nugget_tau2 / sigma2;
    let mut r = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let h = data
                .locs
                .metric()
                .distance(data.locs.point(i), data.locs.point(j))
                .unwrap();
            r[[i, j]] = model.kernel.correlation(h).unwrap();
        }
        r[[i, i]] += eta;
    }
    let ar = a.dot(&r).dot(&a.t());
    let w = a.dot(&Array1::from_vec(data.z.clone()));
    let (eigvals, vectors) = jacobi_with_vectors(&ar);
    let mut quad = 0.0;
    let mut logdet = 0.0;
    for (k, &e) in eigvals.iter().enumerate() {
        let mut y = 0.0;
        for i in 0..(n - 1) {
            y += vectors[[i, k]] * w[i];
        }
        quad += y * y / e;
        logdet += e.ln();
    }
    let nm1 = (n - 1) as f64;
    let s2_hat = quad / nm1;
    let oracle = -0.5 * (nm1 * (LN_2PI + s2_hat.ln()) + logdet + nm1);

    let got = reml_loglik(&model, &data).unwrap();
    assert!((got.value - oracle).abs() < 1e-8, "{} vs {oracle}", got.value);
    assert!((got.sigma2_hat - s2_hat).abs() < 1e-8 * s2_hat);
}

#[test]
fn kriging_matches_three_point_solve() {
    // hand-sized system solved by explicit 3x3 elimination
    let kernel = KernelSpec::Matern(MaternParams::new(0.5, 0.6, 1.4).unwrap());
    let model = GPModel::new(kernel.clone(), 0.3, 0.0).unwrap();
    let locs = Locations::new(
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.2, 0.8]],
        Metric::Euclidean,
    )
    .unwrap();
    let data = Dataset::new(locs.clone(), vec![1.0, -0.4, 0.9]).unwrap();
    let target = Locations::new(vec![vec![0.4, 0.3]], Metric::Euclidean).unwrap();

    let pred = krige(&model, &data, &target, &KrigeOptions::default()).unwrap();

    // oracle: solve K w = (z - b), mean = b + k0' w; var = sigma2 - k0' K^-1 k0
    let dist = |a: &[f64], b: &[f64]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let pts = [[0.0, 0.0], [1.0, 0.0], [0.2, 0.8]];
    let t = [0.4, 0.3];
    let mut k = [[0.0f64; 3]; 3];
    let mut k0 = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = kernel.cov(dist(&pts[i], &pts[j])).unwrap();
        }
        k0[i] = kernel.cov(dist(&pts[i], &t)).unwrap();
    }
    let inv = invert_3x3(&k);
    let resid = [1.0 - 0.3, -0.4 - 0.3, 0.9 - 0.3];
    let mut mean = 0.3;
    let mut var = 1.4;
    for i in 0..3 {
        for j in 0..3 {
            mean += k0[i] * inv[i][j] * resid[j];
            var -= k0[i] * inv[i][j] * k0[j];
        }
    }
    assert!((pred.mean[0] - mean).abs() < 1e-10, "{} vs {mean}", pred.mean[0]);
    assert!((pred.sd[0] - var.sqrt()).abs() < 1e-10);
}

fn invert_3x3(k: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = k[0][0] * (k[1][1] * k[2][2] - k[1][2] * k[2][1])
        - k[0][1] * (k[1][0] * k[2][2] - k[1][2] * k[2][0])
        + k[0][2] * (k[1][0] * k[2][1] - k[1][1] * k[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b, c, d) = (
                k[(i + 1) % 3][(j + 1) % 3],
                k[(i + 1) % 3][(j + 2) % 3],
                k[(i + 2) % 3][(j + 1) % 3],
                k[(i + 2) % 3][(j + 2) % 3],
            );
            inv[j][i] = (a * d - b * c) / det;
        }
    }
    inv
}

#[test]
fn permutation_invariance() {
    let mut rng = TestRng::new(99);
    let model = GPModel::new(
        KernelSpec::Ch(ChParams::new(0.5, 1.0, 0.4, 1.2).unwrap()),
        0.2,
        0.05,
    )
    .unwrap();
    let data = random_data(&mut rng, 25, 2);
    // rotate the observation order
    let k = 11;
    let coords: Vec<Vec<f64>> = (0..25)
        .map(|i| data.locs.point((i + k) % 25).to_vec())
        .collect();
    let z: Vec<f64> = (0..25).map(|i| data.z[(i + k) % 25]).collect();
    let permuted = Dataset::new(Locations::new(coords, Metric::Euclidean).unwrap(), z).unwrap();

    let a = loglik(&model, &data, true).unwrap().value;
    let b = loglik(&model, &permuted, true).unwrap().value;
    assert!((a - b).abs() < 1e-10, "loglik {a} vs {b}");

    let ca = microergodic_mle(0.5, 1.0, 0.4, &data).unwrap().c_hat;
    let cb = microergodic_mle(0.5, 1.0, 0.4, &permuted).unwrap().c_hat;
    assert!((ca - cb).abs() < 1e-10 * ca.abs());

    let targets = Locations::new(vec![vec![0.5, 0.5], vec![0.1, 0.9]], Metric::Euclidean).unwrap();
    let pa = krige(&model, &data, &targets, &KrigeOptions::default()).unwrap();
    let pb = krige(&model, &permuted, &targets, &KrigeOptions::default()).unwrap();
    for i in 0..2 {
        assert!((pa.mean[i] - pb.mean[i]).abs() < 1e-10);
        assert!((pa.sd[i] - pb.sd[i]).abs() < 1e-10);
    }
}

#[test]
fn profiled_variance_is_the_maximizer() {
    let mut rng = TestRng::new(13);
    for _ in 0..5 {
        let template = random_model(&mut rng);
        let data = random_data(&mut rng, 15, 2);
        let prof = loglik(&template, &data, true).unwrap();
        let s2 = prof.sigma2_hat.unwrap();
        for &bump in &[0.99, 1.01] {
            // evaluate the full likelihood at a perturbed variance, keeping
            // tau2 in the same proportion so the correlation matrix is fixed
            let scaled = scale_model_variance(&template, s2 * bump);
            let full = loglik(&scaled, &data, false).unwrap().value;
            assert!(
                prof.value >= full - 1e-12,
                "bump {bump}: {} < {full}",
                prof.value
            );
        }
    }
}

fn scale_model_variance(template: &GPModel, sigma2: f64) -> GPModel {
    let eta = template.eta();
    let kernel = match &template.kernel {
        KernelSpec::Matern(p) => KernelSpec::Matern(MaternParams { sigma2, ..*p }),
        KernelSpec::Ch(p) => KernelSpec::Ch(ChParams { sigma2, ..*p }),
        other => other.clone(),
    };
    GPModel {
        kernel,
        mean_b: template.mean_b,
        nugget_tau2: eta * sigma2,
    }
}

#[test]
fn microergodic_monotone_in_beta_and_alpha() {
    // c_hat is nonincreasing in beta and nondecreasing in alpha: smaller beta
    // means weaker correlation, a larger quadratic form, and beta^{-2 nu}
    // inflates it further (cf. the beta -> 0 limit where c_hat diverges)
    let mut rng = TestRng::new(2024);
    let nu = 0.5;
    for rep in 0..10 {
        let locs = maximin_lhs(30, &[(0.0, 1.0), (0.0, 1.0)], 400 + rep, 10).unwrap();
        let truth = GPModel::new(
            KernelSpec::Ch(ChParams::new(nu, 1.5, 0.3, 1.0).unwrap()),
            0.0,
            0.0,
        )
        .unwrap();
        let z = sample_gp(&truth, &locs, 1, 500 + rep).unwrap();
        let data = Dataset::new(locs, z.row(0).to_vec()).unwrap();
        let alpha = rng.log_range(1.2, 4.0);
        let betas = [0.05, 0.15, 0.4, 1.0, 3.0];
        let mut prev = f64::INFINITY;
        for &b in &betas {
            let c = microergodic_mle(nu, alpha, b, &data).unwrap().c_hat;
            assert!(c <= prev + 1e-12 * prev.abs(), "beta={b}: {c} > {prev}");
            prev = c;
        }
        let beta = rng.log_range(0.1, 1.0);
        let alphas = [1.1, 1.6, 2.4, 4.0, 7.0];
        let mut prev = f64::NEG_INFINITY;
        for &a in &alphas {
            let c = microergodic_mle(nu, a, beta, &data).unwrap().c_hat;
            assert!(c >= prev - 1e-12 * prev.abs(), "alpha={a}: {c} < {prev}");
            prev = c;
        }
    }
}

#[test]
fn kriging_variance_never_negative() {
    let mut rng = TestRng::new(7);
    for _ in 0..10 {
        let model = random_model(&mut rng);
        let data = random_data(&mut rng, 20, 2);
        let targets = random_data(&mut rng, 15, 2).locs;
        let pred = krige(&model, &data, &targets, &KrigeOptions::default()).unwrap();
        assert!(pred.sd.iter().all(|s| *s >= 0.0));
        for i in 0..15 {
            assert!((pred.upper95[i] - pred.mean[i]) - 1.959963984540054 * pred.sd[i] < 1e-12);
        }
    }
}
