//! Monte Carlo harnesses: prediction comparisons across covariance families,
//! the asymptotic-normality study for the microergodic estimator, 1-D
//! realization export, and the special-function timing benchmark.
//!
//! Every study is a pure function of its spec: replicates draw from indexed
//! RNG substreams and results are assembled in replicate order, so reruns are
//! byte-identical (the timing benchmark excepted) and replicates may execute
//! in parallel.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{maximin_lhs, pairwise_dist, regular_grid, Locations};
use crate::error::{Error, Result};
use crate::estimate::{fit, FitConfig, FreeParam, Objective};
use crate::gp::{krige, microergodic_from_quad, Dataset, GPModel, KrigeOptions, MeanSpec};
use crate::kernels::{ChParams, GcParams, KernelSpec, MaternParams};
use crate::linalg::cholesky_jittered;
use crate::serialize::{fmt_f64, write_json_17};
use crate::simulate::sample_gp;
use crate::specfun::{bessel_k, hyperg_u};

/// Candidate covariance family fitted against the simulated truth. The
/// smoothness is tied to the truth: Matérn/CH share the truth's ν (or δ/2 for
/// a GC truth), GC uses δ = min(2ν, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateFamily {
    Matern,
    Ch,
    Gc,
}

impl CandidateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CandidateFamily::Matern => "matern",
            CandidateFamily::Ch => "ch",
            CandidateFamily::Gc => "gc",
        }
    }
}

/// Training design of a prediction study.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSpec {
    MaximinLhs { n_candidates: usize },
    Grid { counts: Vec<usize> },
}

/// Optimizer settings used inside studies (desk-scale defaults).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyFitSettings {
    pub n_starts: usize,
    pub max_iters: usize,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for StudyFitSettings {
    fn default() -> Self {
        StudyFitSettings {
            n_starts: 2,
            max_iters: 150,
            x_tol: 1e-5,
            f_tol: 1e-8,
        }
    }
}

/// Specification of a prediction study (the Cases 1–3 layout).
#[derive(Debug, Clone, Serialize)]
pub struct StudySpec {
    pub name: String,
    /// Zero-mean truth; its family decides the candidates' smoothness.
    pub truth: GPModel,
    pub candidates: Vec<CandidateFamily>,
    pub domain: Vec<(f64, f64)>,
    pub design: DesignSpec,
    pub n_train: usize,
    /// Regular prediction grid per dimension (10×10 in the studies).
    pub target_counts: Vec<usize>,
    pub n_reps: usize,
    pub seed: u64,
    pub fit: StudyFitSettings,
}

/// Per-replicate, per-candidate prediction metrics.
#[derive(Debug, Clone, Serialize)]
pub struct PredMetricsRow {
    pub rep: usize,
    pub model: String,
    pub rmspe: f64,
    pub cvg95: f64,
    pub alci95: f64,
    pub fitted: KernelSpec,
}

/// Aggregated metrics over completed replicates.
#[derive(Debug, Clone, Serialize)]
pub struct PredAggregate {
    pub model: String,
    pub n_ok: usize,
    pub median_rmspe: f64,
    pub mean_rmspe: f64,
    pub mean_cvg95: f64,
    pub mean_alci95: f64,
}

/// One fitted (or true) correlation curve sample.
#[derive(Debug, Clone, Serialize)]
pub struct CorrCurveRow {
    pub rep: i64,
    pub model: String,
    pub lag: f64,
    pub correlation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredStudyResult {
    pub name: String,
    pub rows: Vec<PredMetricsRow>,
    pub aggregates: Vec<PredAggregate>,
    pub curves: Vec<CorrCurveRow>,
    pub n_fit_failures: usize,
}

/// Smoothness of the truth kernel under the cross-family pairing rules.
fn truth_smoothness(truth: &KernelSpec) -> Result<f64> {
    Ok(match truth {
        KernelSpec::Matern(p) => p.nu,
        KernelSpec::Ch(p) => p.nu,
        KernelSpec::Gc(p) => p.delta / 2.0,
        KernelSpec::Tensor(_) => {
            return Err(Error::invalid("prediction studies use isotropic truths"))
        }
    })
}

/// Template model for a candidate family, with scale initialized from the
/// domain extent; ν (or δ) is fixed by the pairing convention, the rest is
/// free for the optimizer.
fn candidate_template(family: CandidateFamily, nu: f64, extent: f64) -> Result<GPModel> {
    let scale0 = 0.2 * extent;
    let kernel = match family {
        CandidateFamily::Matern => KernelSpec::Matern(MaternParams::new(nu, scale0, 1.0)?),
        CandidateFamily::Ch => KernelSpec::Ch(ChParams::new(nu, 1.0, scale0, 1.0)?),
        CandidateFamily::Gc => {
            // delta = min(2 nu, 2): the GC validity cap keeps delta <= 2
            let delta = (2.0 * nu).min(2.0);
            KernelSpec::Gc(GcParams::new(delta, 1.0, scale0, 1.0)?)
        }
    };
    GPModel::new(kernel, 0.0, 0.0)
}

fn study_fit_config(settings: &StudyFitSettings, seed: u64) -> FitConfig {
    let mut cfg = FitConfig::new(Objective::ProfileMl);
    cfg.n_starts = settings.n_starts;
    cfg.max_iters = settings.max_iters;
    cfg.x_tol = settings.x_tol;
    cfg.f_tol = settings.f_tol;
    // the CH class is valid for all alpha > 0 and the studies use truths with
    // alpha down to 0.5 in d = 2
    cfg.allow_small_alpha = true;
    cfg.seed = seed;
    cfg
}

/// Run a prediction study: per replicate, simulate the truth jointly over
/// the training design and target grid, fit every candidate by profile ML
/// (mean 0 known, no nugget), krige the targets, and score RMSPE / CVG /
/// ALCI against the simulated truth. Failed fits are recorded and skipped.
pub fn run_prediction_study(spec: &StudySpec) -> Result<PredStudyResult> {
    spec.truth.kernel.validate()?;
    if spec.n_reps == 0 {
        return Err(Error::invalid("n_reps must be at least 1"));
    }
    let train = match &spec.design {
        DesignSpec::MaximinLhs { n_candidates } => {
            maximin_lhs(spec.n_train, &spec.domain, spec.seed, *n_candidates)?
        }
        DesignSpec::Grid { counts } => {
            let g = regular_grid(&spec.domain, counts)?;
            if g.n() != spec.n_train {
                return Err(Error::invalid(format!(
                    "grid design has {} points but n_train = {}",
                    g.n(),
                    spec.n_train
                )));
            }
            g
        }
    };
    let targets = regular_grid(&spec.domain, &spec.target_counts)?;
    let joint = train.concat(&targets)?;
    let nu = truth_smoothness(&spec.truth.kernel)?;
    let extent = train.extent();

    // one factorization serves every replicate
    let sims = sample_gp(&spec.truth, &joint, spec.n_reps, spec.seed)?;

    let n_train = spec.n_train;
    let lag_grid: Vec<f64> = (0..=50).map(|i| extent * 0.5 * i as f64 / 50.0).collect();

    let per_rep: Vec<(Vec<PredMetricsRow>, Vec<CorrCurveRow>, usize)> = (0..spec.n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rows = Vec::new();
            let mut curves = Vec::new();
            let mut failures = 0usize;
            let z_train: Vec<f64> = (0..n_train).map(|i| sims[[rep, i]]).collect();
            let z_target: Vec<f64> = (n_train..joint.n()).map(|i| sims[[rep, i]]).collect();
            let data = match Dataset::new(train.clone(), z_train) {
                Ok(d) => d,
                Err(_) => return (rows, curves, 1),
            };
            for (ci, &family) in spec.candidates.iter().enumerate() {
                let template = match candidate_template(family, nu, extent) {
                    Ok(t) => t,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                };
                let cfg = study_fit_config(
                    &spec.fit,
                    spec.seed
                        .wrapping_mul(1_000_003)
                        .wrapping_add((rep * 16 + ci) as u64),
                );
                let fitted = match fit(&template, &data, &cfg) {
                    Ok(f) => f,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                };
                let opts = KrigeOptions {
                    mean: MeanSpec::Known,
                    mean_variance_correction: None,
                };
                let pred = match krige(&fitted.model, &data, &targets, &opts) {
                    Ok(p) => p,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                };
                let m = targets.n();
                let mut sq = 0.0;
                let mut cover = 0usize;
                let mut len = 0.0;
                for j in 0..m {
                    let err = pred.mean[j] - z_target[j];
                    sq += err * err;
                    if pred.lower95[j] <= z_target[j] && z_target[j] <= pred.upper95[j] {
                        cover += 1;
                    }
                    len += pred.upper95[j] - pred.lower95[j];
                }
                for &lag in &lag_grid {
                    if let Ok(c) = fitted.model.kernel.correlation(lag) {
                        curves.push(CorrCurveRow {
                            rep: rep as i64,
                            model: family.name().to_string(),
                            lag,
                            correlation: c,
                        });
                    }
                }
                rows.push(PredMetricsRow {
                    rep,
                    model: family.name().to_string(),
                    rmspe: (sq / m as f64).sqrt(),
                    cvg95: cover as f64 / m as f64,
                    alci95: len / m as f64,
                    fitted: fitted.model.kernel.clone(),
                });
            }
            (rows, curves, failures)
        })
        .collect();

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut n_fit_failures = 0;
    for (r, c, f) in per_rep {
        rows.extend(r);
        curves.extend(c);
        n_fit_failures += f;
    }
    // the truth correlation curve, tagged rep = -1
    for &lag in &lag_grid {
        if let Ok(c) = spec.truth.kernel.correlation(lag) {
            curves.push(CorrCurveRow {
                rep: -1,
                model: "truth".to_string(),
                lag,
                correlation: c,
            });
        }
    }
    let aggregates = aggregate_rows(&rows, &spec.candidates);
    Ok(PredStudyResult {
        name: spec.name.clone(),
        rows,
        aggregates,
        curves,
        n_fit_failures,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn aggregate_rows(rows: &[PredMetricsRow], candidates: &[CandidateFamily]) -> Vec<PredAggregate> {
    candidates
        .iter()
        .map(|family| {
            let name = family.name();
            let mine: Vec<&PredMetricsRow> = rows.iter().filter(|r| r.model == name).collect();
            let n_ok = mine.len();
            let mut rmspes: Vec<f64> = mine.iter().map(|r| r.rmspe).collect();
            rmspes.sort_by(f64::total_cmp);
            let mean = |f: &dyn Fn(&PredMetricsRow) -> f64| {
                if n_ok == 0 {
                    f64::NAN
                } else {
                    mine.iter().map(|r| f(r)).sum::<f64>() / n_ok as f64
                }
            };
            PredAggregate {
                model: name.to_string(),
                n_ok,
                median_rmspe: median(&rmspes),
                mean_rmspe: mean(&|r| r.rmspe),
                mean_cvg95: mean(&|r| r.cvg95),
                mean_alci95: mean(&|r| r.alci95),
            }
        })
        .collect()
}

impl PredStudyResult {
    /// Aggregate metrics for one model, if it completed any replicate.
    pub fn aggregate(&self, model: &str) -> Option<&PredAggregate> {
        self.aggregates.iter().find(|a| a.model == model)
    }

    /// Write metrics.csv, curves.csv and manifest.json into `dir`.
    pub fn write_outputs(&self, dir: &Path, spec: &StudySpec, wall_ms: u128) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::invalid(format!("cannot create {dir:?}: {e}")))?;
        let mut metrics = String::from("rep,model,rmspe,cvg95,alci95\n");
        for r in &self.rows {
            metrics.push_str(&format!(
                "{},{},{},{},{}\n",
                r.rep,
                r.model,
                fmt_f64(r.rmspe),
                fmt_f64(r.cvg95),
                fmt_f64(r.alci95)
            ));
        }
        std::fs::write(dir.join("metrics.csv"), metrics)
            .map_err(|e| Error::invalid(format!("write metrics.csv: {e}")))?;

        let mut curves = String::from("rep,model,lag,correlation\n");
        for c in &self.curves {
            curves.push_str(&format!(
                "{},{},{},{}\n",
                c.rep,
                c.model,
                fmt_f64(c.lag),
                fmt_f64(c.correlation)
            ));
        }
        std::fs::write(dir.join("curves.csv"), curves)
            .map_err(|e| Error::invalid(format!("write curves.csv: {e}")))?;

        let manifest = Manifest::new(spec, spec.seed, wall_ms, self.n_fit_failures);
        write_json_17(&dir.join("manifest.json"), &manifest)
    }
}

/// Study manifest: spec echo, seed, version, wall time.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub wall_ms: u128,
    pub n_fit_failures: usize,
    pub spec: serde_json::Value,
}

impl Manifest {
    pub fn new<T: Serialize>(spec: &T, seed: u64, wall_ms: u128, n_fit_failures: usize) -> Self {
        Manifest {
            tool: "chgp",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            wall_ms,
            n_fit_failures,
            spec: serde_json::to_value(spec).unwrap_or(serde_json::Value::Null),
        }
    }
}

/// Which (α, β) the microergodic estimator is evaluated at in the
/// asymptotic-normality study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThetaMode {
    /// θ = θ0.
    TrueTheta,
    /// θ = (α0, factor · β0), e.g. √0.5 or √2.
    ScaledBeta { factor: f64 },
    /// θ = (α0, β̂n) with β estimated by profile ML.
    FitBeta,
    /// θ = (α̂n, β̂n), both estimated.
    FitAlphaBeta,
}

impl ThetaMode {
    pub fn label(&self) -> String {
        match self {
            ThetaMode::TrueTheta => "theta0".to_string(),
            ThetaMode::ScaledBeta { factor } => format!("beta_x{factor:.4}"),
            ThetaMode::FitBeta => "beta_hat".to_string(),
            ThetaMode::FitAlphaBeta => "alpha_hat_beta_hat".to_string(),
        }
    }
}

/// Specification of the asymptotic-normality study: zero-mean CH truth on a
/// random subsample of a regular grid in the unit square.
#[derive(Debug, Clone, Serialize)]
pub struct AsymStudySpec {
    pub truth: ChParams,
    pub modes: Vec<ThetaMode>,
    pub n_list: Vec<usize>,
    pub n_reps: usize,
    pub seed: u64,
    /// Side of the master grid the locations are drawn from (50 → 2500 points).
    pub grid_side: usize,
    pub fit: StudyFitSettings,
}

/// Per (n, mode) summary: percentiles of ξ = √n (ĉ - c0)/(√2 c0), coverage
/// of the 95% interval, bias and RMSE of ĉ.
#[derive(Debug, Clone, Serialize)]
pub struct AsymRow {
    pub n: usize,
    pub mode: String,
    pub percentiles: [f64; 5],
    pub cvg: f64,
    pub bias: f64,
    pub rmse: f64,
    pub n_fail: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymStudyResult {
    pub rows: Vec<AsymRow>,
    pub c0: f64,
}

/// Type-7 (linear interpolation) percentile of a sorted sample.
fn percentile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Run the asymptotic-normality study. Per replicate: subsample n grid
/// locations, simulate the zero-mean CH truth, evaluate ĉ_n under each mode
/// (fitting free parameters by profile ML where the mode asks for it), and
/// summarize ξ, coverage, bias, RMSE per (n, mode).
pub fn run_asymptotic_study(spec: &AsymStudySpec) -> Result<AsymStudyResult> {
    spec.truth.validate()?;
    if spec.grid_side < 2 {
        return Err(Error::invalid("grid_side must be at least 2"));
    }
    let grid = regular_grid(&[(0.0, 1.0), (0.0, 1.0)], &[spec.grid_side, spec.grid_side])?;
    let c0 = crate::kernels::microergodic(&spec.truth)?;
    let truth_model = GPModel::new(KernelSpec::Ch(spec.truth), 0.0, 0.0)?;

    let mut rows = Vec::new();
    for &n in &spec.n_list {
        if n < 8 || n > grid.n() {
            return Err(Error::invalid(format!(
                "n = {n} out of range for a {}-point master grid",
                grid.n()
            )));
        }
        // (c_hat, covered) per mode per replicate
        let per_rep: Vec<Vec<Option<(f64, bool)>>> = (0..spec.n_reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = ChaCha20Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
                rng.set_stream(((n as u64) << 32) | rep as u64);
                let mut idx: Vec<usize> = (0..grid.n()).collect();
                // partial Fisher-Yates: the first n entries form the subsample
                for i in 0..n {
                    let j = rng.random_range(i..idx.len());
                    idx.swap(i, j);
                }
                let coords: Vec<Vec<f64>> =
                    idx[..n].iter().map(|&i| grid.point(i).to_vec()).collect();
                let locs = match Locations::new(coords, crate::design::Metric::Euclidean) {
                    Ok(l) => l,
                    Err(_) => return vec![None; spec.modes.len()],
                };
                let sim_seed = spec.seed ^ ((n as u64) << 40) ^ (rep as u64);
                let z = match sample_gp(&truth_model, &locs, 1, sim_seed) {
                    Ok(z) => z,
                    Err(_) => return vec![None; spec.modes.len()],
                };
                let data = match Dataset::new(locs, z.row(0).to_vec()) {
                    Ok(d) => d,
                    Err(_) => return vec![None; spec.modes.len()],
                };
                spec.modes
                    .iter()
                    .enumerate()
                    .map(|(mi, mode)| {
                        let (alpha, beta) = match mode {
                            ThetaMode::TrueTheta => (spec.truth.alpha, spec.truth.beta),
                            ThetaMode::ScaledBeta { factor } => {
                                (spec.truth.alpha, factor * spec.truth.beta)
                            }
                            ThetaMode::FitBeta | ThetaMode::FitAlphaBeta => {
                                let template = GPModel::new(
                                    KernelSpec::Ch(ChParams {
                                        sigma2: 1.0,
                                        ..spec.truth
                                    }),
                                    0.0,
                                    0.0,
                                )
                                .ok()?;
                                let mut cfg = study_fit_config(
                                    &spec.fit,
                                    spec.seed.wrapping_add((rep * 31 + mi) as u64),
                                );
                                if matches!(mode, ThetaMode::FitBeta) {
                                    cfg.fixed.insert(FreeParam::Alpha);
                                }
                                let f = fit(&template, &data, &cfg).ok()?;
                                match &f.model.kernel {
                                    KernelSpec::Ch(p) => (p.alpha, p.beta),
                                    _ => return None,
                                }
                            }
                        };
                        let est = eval_c_hat(spec.truth.nu, alpha, beta, &data).ok()?;
                        let covered = est.ci95.0 <= c0 && c0 <= est.ci95.1;
                        Some((est.c_hat, covered))
                    })
                    .collect()
            })
            .collect();

        for (mi, mode) in spec.modes.iter().enumerate() {
            let mut c_hats = Vec::new();
            let mut covered = 0usize;
            let mut n_fail = 0usize;
            for rep_result in &per_rep {
                match rep_result[mi] {
                    Some((c, cov)) => {
                        c_hats.push(c);
                        if cov {
                            covered += 1;
                        }
                    }
                    None => n_fail += 1,
                }
            }
            let m = c_hats.len();
            let mut xi: Vec<f64> = c_hats
                .iter()
                .map(|c| (n as f64).sqrt() * (c - c0) / (2.0f64.sqrt() * c0))
                .collect();
            xi.sort_by(f64::total_cmp);
            let percentiles = [
                percentile_type7(&xi, 0.05),
                percentile_type7(&xi, 0.25),
                percentile_type7(&xi, 0.50),
                percentile_type7(&xi, 0.75),
                percentile_type7(&xi, 0.95),
            ];
            let bias = if m == 0 {
                f64::NAN
            } else {
                c_hats.iter().sum::<f64>() / m as f64 - c0
            };
            let rmse = if m == 0 {
                f64::NAN
            } else {
                (c_hats.iter().map(|c| (c - c0) * (c - c0)).sum::<f64>() / m as f64).sqrt()
            };
            rows.push(AsymRow {
                n,
                mode: mode.label(),
                percentiles,
                cvg: if m == 0 {
                    f64::NAN
                } else {
                    covered as f64 / m as f64
                },
                bias,
                rmse,
                n_fail,
            });
        }
    }
    Ok(AsymStudyResult { rows, c0 })
}

/// ĉ_n at fixed correlation parameters, via the tabulated correlation path.
fn eval_c_hat(
    nu: f64,
    alpha: f64,
    beta: f64,
    data: &Dataset,
) -> Result<crate::gp::MicroergodicEstimate> {
    let kernel = KernelSpec::Ch(ChParams::new(nu, alpha, beta, 1.0)?);
    let dists = pairwise_dist(&data.locs)?;
    let r = crate::gp::corr_matrix_tabulated(&kernel, &dists, 0.0)?;
    let chol = cholesky_jittered(&r)?;
    let quad = chol.quad_form(&data.z_array());
    microergodic_from_quad(nu, alpha, beta, quad, data.n())
}

impl AsymStudyResult {
    pub fn write_outputs(&self, dir: &Path, spec: &AsymStudySpec, wall_ms: u128) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::invalid(format!("cannot create {dir:?}: {e}")))?;
        let mut out = String::from("n,mode,p05,p25,p50,p75,p95,cvg,bias,rmse,n_fail\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.mode,
                fmt_f64(r.percentiles[0]),
                fmt_f64(r.percentiles[1]),
                fmt_f64(r.percentiles[2]),
                fmt_f64(r.percentiles[3]),
                fmt_f64(r.percentiles[4]),
                fmt_f64(r.cvg),
                fmt_f64(r.bias),
                fmt_f64(r.rmse),
                r.n_fail
            ));
        }
        std::fs::write(dir.join("asymptotic.csv"), out)
            .map_err(|e| Error::invalid(format!("write asymptotic.csv: {e}")))?;
        let total_fail: usize = self.rows.iter().map(|r| r.n_fail).sum();
        let manifest = Manifest::new(spec, spec.seed, wall_ms, total_fail);
        write_json_17(&dir.join("manifest.json"), &manifest)
    }
}

/// Timing benchmark report: mean nanoseconds per call over randomized
/// arguments in the kernel-relevant ranges.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimingReport {
    pub n_evals: usize,
    pub bessel_ns: f64,
    pub hyperg_ns: f64,
    /// hyperg_u mean time over bessel_k mean time.
    pub ratio: f64,
}

/// Warmed-up timing of bessel_k and hyperg_u over randomized arguments.
pub fn run_timing_bench(n_evals: usize, seed: u64) -> Result<TimingReport> {
    if n_evals == 0 {
        return Err(Error::invalid("n_evals must be positive"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let bessel_args: Vec<(f64, f64)> = (0..n_evals)
        .map(|_| {
            let nu = 0.3 + 2.7 * rng.random::<f64>();
            let lx: f64 = rng.random::<f64>() * (50.0f64.ln() - 0.01f64.ln()) + 0.01f64.ln();
            (nu, lx.exp())
        })
        .collect();
    let hyperg_args: Vec<(f64, f64, f64)> = (0..n_evals)
        .map(|_| {
            let a = 0.3 + 2.7 * rng.random::<f64>();
            let nu = 0.3 + 2.7 * rng.random::<f64>();
            let lx: f64 = rng.random::<f64>() * (1e4f64.ln() - 1e-6f64.ln()) + 1e-6f64.ln();
            (a, 1.0 - nu, lx.exp())
        })
        .collect();

    let warm = n_evals.div_ceil(10);
    for &(nu, x) in bessel_args.iter().take(warm) {
        std::hint::black_box(bessel_k(nu, x)?);
    }
    for &(a, b, x) in hyperg_args.iter().take(warm) {
        std::hint::black_box(hyperg_u(a, b, x)?);
    }

    let t0 = Instant::now();
    for &(nu, x) in &bessel_args {
        std::hint::black_box(bessel_k(nu, x)?);
    }
    let bessel_ns = t0.elapsed().as_nanos() as f64 / n_evals as f64;

    let t0 = Instant::now();
    for &(a, b, x) in &hyperg_args {
        std::hint::black_box(hyperg_u(a, b, x)?);
    }
    let hyperg_ns = t0.elapsed().as_nanos() as f64 / n_evals as f64;

    Ok(TimingReport {
        n_evals,
        bessel_ns,
        hyperg_ns,
        ratio: hyperg_ns / bessel_ns,
    })
}

/// Export coupled 1-D realizations: one column per kernel configuration over
/// a shared regular grid, all transformed from the same seeded normals so the
/// curves are directly comparable.
pub fn export_realizations_1d(
    kernels: &[(String, GPModel)],
    n_points: usize,
    domain: (f64, f64),
    seed: u64,
) -> Result<(Locations, Vec<Vec<f64>>, String)> {
    if kernels.is_empty() {
        return Err(Error::invalid("need at least one kernel"));
    }
    let grid = regular_grid(&[domain], &[n_points])?;
    let mut columns = Vec::with_capacity(kernels.len());
    for (_, model) in kernels {
        let z = sample_gp(model, &grid, 1, seed)?;
        columns.push(z.row(0).to_vec());
    }
    let mut csv = String::from("x");
    for (name, _) in kernels {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for i in 0..n_points {
        csv.push_str(&fmt_f64(grid.point(i)[0]));
        for col in &columns {
            csv.push(',');
            csv.push_str(&fmt_f64(col[i]));
        }
        csv.push('\n');
    }
    Ok((grid, columns, csv))
}
