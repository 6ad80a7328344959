//! Special functions against brute-force quadrature oracles.

mod common;

use chgp::specfun::{bessel_k, hyperg_u, ln_hyperg_u};
use common::{bessel_k_oracle, ln_hyperg_u_oracle, QuasiRandom};

#[test]
fn bessel_k_matches_integral_oracle() {
    // the derived example point plus a sweep of orders and arguments
    let cases = [
        (0.3, 0.7),
        (0.5, 1.0),
        (1.7, 0.05),
        (2.5, 3.0),
        (5.3, 10.0),
        (0.9, 25.0),
    ];
    for &(nu, x) in &cases {
        let got = bessel_k(nu, x).unwrap();
        let oracle = bessel_k_oracle(nu, x);
        assert!(
            ((got - oracle) / oracle).abs() < 1e-11,
            "nu={nu} x={x}: {got} vs {oracle}"
        );
    }
}

#[test]
fn hyperg_u_spec_example_points() {
    // U(2, 3, 5) = 1/25 exactly
    assert!((hyperg_u(2.0, 3.0, 5.0).unwrap() - 0.04).abs() < 1e-13);
    // derived points checked against the independent quadrature oracle
    for &(a, b, x) in &[(0.5, 0.5, 1.0), (3.0, -2.0, 0.25)] {
        let got = ln_hyperg_u(a, b, x).unwrap();
        let oracle = common::ln_hyperg_u_oracle(a, b, x);
        assert!(
            (got - oracle).exp_m1().abs() < 1e-10,
            "a={a} b={b} x={x}: {got} vs {oracle}"
        );
    }
}

#[test]
fn hyperg_u_oracle_box_sample() {
    // a quick slice of the validated box; the acceptance suite runs the
    // full 1000-point version
    let mut qr = QuasiRandom::new(3);
    let mut worst = 0.0f64;
    for _ in 0..120 {
        let p = qr.next_point();
        let a = (p[0] * (50.0f64.ln() - 0.05f64.ln()) + 0.05f64.ln()).exp();
        let b = -50.0 + 100.0 * p[1];
        let x = (p[2] * (1e4f64.ln() - 1e-8f64.ln()) + 1e-8f64.ln()).exp();
        let got = ln_hyperg_u(a, b, x).unwrap();
        let oracle = ln_hyperg_u_oracle(a, b, x);
        let rel = (got - oracle).exp_m1().abs();
        worst = worst.max(rel);
        assert!(rel < 1e-9, "a={a} b={b} x={x}: rel={rel:.3e}");
    }
    assert!(worst < 1e-9, "worst {worst:.3e}");
}

#[test]
fn hyperg_u_power_identity_across_regimes() {
    // U(a, a+1, x) * x^a = 1 to 1e-12 everywhere
    let mut qr = QuasiRandom::new(2);
    for _ in 0..200 {
        let p = qr.next_point();
        let a = (p[0] * (30.0f64.ln() - 0.05f64.ln()) + 0.05f64.ln()).exp();
        let x = (p[1] * (1e4f64.ln() - 1e-6f64.ln()) + 1e-6f64.ln()).exp();
        let v = ln_hyperg_u(a, a + 1.0, x).unwrap() + a * x.ln();
        assert!(v.exp_m1().abs() < 1e-12, "a={a} x={x}");
    }
}

#[test]
fn hyperg_u_monotone_decreasing_in_x() {
    for &(a, b) in &[(0.5, 0.5), (2.0, -1.5), (1.0, 0.0), (0.3, 0.9), (7.0, -4.0)] {
        let mut prev = f64::INFINITY;
        for i in 0..=60 {
            let x = 1e-7 * (1e11f64).powf(i as f64 / 60.0);
            let v = ln_hyperg_u(a, b, x).unwrap();
            assert!(v < prev, "a={a} b={b} x={x}: {v} !< {prev}");
            prev = v;
        }
    }
}

#[test]
fn bessel_k_asymptotic_normalization() {
    // e^x sqrt(2x/pi) K_nu(x) -> 1 at x = 1e3
    for &nu in &[0.3, 0.5, 1.0] {
        let v = chgp::specfun::bessel_k_scaled(nu, 1e3).unwrap()
            * (2.0 * 1e3 / std::f64::consts::PI).sqrt();
        assert!((v - 1.0).abs() < 1e-3, "nu={nu}: {v}");
    }
}
