//! Command-line front end: simulation, fitting, prediction, spectral
//! diagnostics, Monte Carlo studies, and the timing benchmark.
//!
//! Exit codes: 0 on success, 1 on usage/input errors (bad flags, missing or
//! malformed files), 2 on numerical failures (non-positive-definite systems,
//! convergence failures, domain violations). All randomness flows from a
//! `--seed` flag that is echoed in output manifests; results are
//! byte-reproducible across runs of the same build.

pub mod config;
pub mod csvio;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::design::{maximin_lhs, regular_grid, Locations, Metric, EARTH_RADIUS_KM};
use crate::error::{Error, Result};
use crate::estimate::{fit, FitConfig, FreeParam, Objective};
use crate::experiments::{
    export_realizations_1d, run_asymptotic_study, run_prediction_study, run_timing_bench,
    AsymStudySpec, CandidateFamily, DesignSpec, Manifest, StudyFitSettings, StudySpec, ThetaMode,
};
use crate::gp::{krige, Dataset, GPModel, KrigeOptions, MeanSpec, MicroergodicEstimate};
use crate::kernels::{
    ch_spectral, matern_spectral, ChParams, GcParams, KernelSpec, MaternParams, TensorParams,
};
use crate::serialize::{fmt_f64, to_json_17, write_json_17};
use crate::simulate::sample_gp;
use config::Config;

#[derive(Parser)]
#[command(
    name = "chgp",
    version,
    about = "Gaussian-process toolkit for the Confluent Hypergeometric covariance family"
)]
struct Cli {
    /// Cap internal parallelism (also settable via CHGP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw GP realizations over a configured design; writes a CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate covariance parameters from a data CSV; writes a fit JSON.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Krige targets from a fit JSON; writes a predictions CSV.
    Predict {
        #[arg(long)]
        fit: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the universal-kriging mean-variance correction.
        #[arg(long)]
        mean_correction: Option<bool>,
    },
    /// Evaluate an isotropic spectral density on a frequency grid.
    Spectral {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        omega_min: f64,
        #[arg(long)]
        omega_max: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Log-spaced grid (omega_min must then be positive).
        #[arg(long, default_value_t = false)]
        log: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a configured Monte Carlo study; writes CSV tables and a manifest.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Time bessel_k and hyperg_u over kernel-relevant arguments.
    Bench {
        #[arg(long, default_value_t = 20000)]
        n_evals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Self-contained fit result: everything `predict` needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDocument {
    pub model: GPModel,
    pub objective: Objective,
    pub loglik: f64,
    pub converged: bool,
    pub n_evals: usize,
    pub microergodic: Option<MicroergodicEstimate>,
    /// Whether the constant mean was estimated (REML) rather than known.
    pub mean_estimated: bool,
    pub seed: u64,
    pub data: Dataset,
}

/// Entry point used by the `chgp` binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap help/version print to stdout and exit 0
            if e.use_stderr() {
                eprint!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("CHGP_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invalid(_) | Error::Dimension(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, seed, out } => cmd_simulate(&config, seed, &out),
        Command::Fit {
            data,
            config,
            seed,
            out,
        } => cmd_fit(&data, &config, seed, &out),
        Command::Predict {
            fit,
            targets,
            out,
            mean_correction,
        } => cmd_predict(&fit, &targets, &out, mean_correction),
        Command::Spectral {
            config,
            dim,
            omega_min,
            omega_max,
            n,
            log,
            out,
        } => cmd_spectral(&config, dim, omega_min, omega_max, n, log, &out),
        Command::Experiment {
            config,
            out_dir,
            seed,
        } => cmd_experiment(&config, &out_dir, seed),
        Command::Bench { n_evals, seed } => cmd_bench(n_evals, seed),
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::invalid(format!("cannot create {parent:?}: {e}")))?;
        }
    }
    std::fs::write(path, content).map_err(|e| Error::invalid(format!("cannot write {path:?}: {e}")))
}

// ---- config -> domain objects ----------------------------------------------

fn metric_from(section: &config::Section<'_>) -> Result<Metric> {
    let radius = section.f64_or("radius", EARTH_RADIUS_KM)?;
    match section.get("metric").unwrap_or("euclidean") {
        "euclidean" => Ok(Metric::Euclidean),
        "chordal" => Ok(Metric::Chordal { radius }),
        "great_circle" => Ok(Metric::GreatCircle { radius }),
        other => Err(Error::invalid(format!(
            "metric must be euclidean, chordal or great_circle, got {other:?}"
        ))),
    }
}

fn kernel_from(cfg: &Config, section_name: &str) -> Result<KernelSpec> {
    let s = cfg.section(section_name)?;
    let family = s.str_required("family")?;
    match family {
        "matern" => {
            s.check_keys(&["family", "nu", "phi", "sigma2"])?;
            Ok(KernelSpec::Matern(MaternParams::new(
                s.f64_required("nu")?,
                s.f64_required("phi")?,
                s.f64_or("sigma2", 1.0)?,
            )?))
        }
        "ch" => {
            s.check_keys(&["family", "nu", "alpha", "beta", "sigma2"])?;
            Ok(KernelSpec::Ch(ChParams::new(
                s.f64_required("nu")?,
                s.f64_required("alpha")?,
                s.f64_required("beta")?,
                s.f64_or("sigma2", 1.0)?,
            )?))
        }
        "gc" => {
            s.check_keys(&["family", "delta", "lambda", "phi", "sigma2"])?;
            Ok(KernelSpec::Gc(GcParams::new(
                s.f64_required("delta")?,
                s.f64_required("lambda")?,
                s.f64_required("phi")?,
                s.f64_or("sigma2", 1.0)?,
            )?))
        }
        "tensor" => {
            s.check_keys(&["family", "components", "sigma2"])?;
            let n = s.usize_required("components")?;
            let sigma2 = s.f64_or("sigma2", 1.0)?;
            let comps: Vec<KernelSpec> = (1..=n)
                .map(|k| kernel_from(cfg, &format!("component{k}")))
                .collect::<Result<_>>()?;
            Ok(KernelSpec::Tensor(TensorParams::new(comps, sigma2)?))
        }
        other => Err(Error::invalid(format!(
            "unknown kernel family {other:?}; expected matern, ch, gc or tensor"
        ))),
    }
}

fn tensor_component_sections(cfg: &Config, section: &str) -> Vec<String> {
    match cfg.section(section).ok().and_then(|s| {
        s.get("family")
            .filter(|f| *f == "tensor")
            .and_then(|_| s.get("components"))
            .and_then(|n| n.parse::<usize>().ok())
    }) {
        Some(n) => (1..=n).map(|k| format!("component{k}")).collect(),
        None => Vec::new(),
    }
}

fn design_from(cfg: &Config, seed: u64) -> Result<Locations> {
    let s = cfg.section("design")?;
    let kind = s.str_required("kind")?;
    match kind {
        "grid" => {
            s.check_keys(&["kind", "bounds", "counts", "metric", "radius"])?;
            let bounds = bounds_from(&s)?;
            let counts = s.usize_list_required("counts")?;
            regular_grid(&bounds, &counts)
        }
        "lhs" => {
            s.check_keys(&["kind", "bounds", "n", "n_candidates", "metric", "radius"])?;
            let bounds = bounds_from(&s)?;
            let n = s.usize_required("n")?;
            let n_candidates = s.usize_or("n_candidates", 100)?;
            maximin_lhs(n, &bounds, seed, n_candidates)
        }
        other => Err(Error::invalid(format!(
            "design kind must be grid or lhs, got {other:?}"
        ))),
    }
}

fn bounds_from(s: &config::Section<'_>) -> Result<Vec<(f64, f64)>> {
    let flat = s.f64_list_required("bounds")?;
    if flat.is_empty() || flat.len() % 2 != 0 {
        return Err(Error::invalid(
            "bounds must be lo1,hi1[,lo2,hi2[,lo3,hi3]]",
        ));
    }
    Ok(flat.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn warn_gc_tail(kernel: &KernelSpec, dim: usize) {
    if let KernelSpec::Gc(p) = kernel {
        if let Some(msg) = p.tail_weight_warning(dim) {
            eprintln!("warning: {msg}");
        }
    }
}

// ---- subcommands ------------------------------------------------------------

fn cmd_simulate(config: &Path, seed: u64, out: &Path) -> Result<()> {
    let cfg = Config::load(config)?;
    let mut allowed = vec![
        "kernel".to_string(),
        "model".to_string(),
        "design".to_string(),
        "simulate".to_string(),
    ];
    allowed.extend(tensor_component_sections(&cfg, "kernel"));
    cfg.check_sections(&allowed.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;

    let kernel = kernel_from(&cfg, "kernel")?;
    let (b, tau2) = if cfg.has_section("model") {
        let m = cfg.section("model")?;
        m.check_keys(&["b", "tau2"])?;
        (m.f64_or("b", 0.0)?, m.f64_or("tau2", 0.0)?)
    } else {
        (0.0, 0.0)
    };
    let n_reps = if cfg.has_section("simulate") {
        let s = cfg.section("simulate")?;
        s.check_keys(&["n_reps"])?;
        s.usize_or("n_reps", 1)?
    } else {
        1
    };
    let locs = design_from(&cfg, seed)?;
    warn_gc_tail(&kernel, locs.dim());
    let model = GPModel::new(kernel, b, tau2)?;
    let reps = sample_gp(&model, &locs, n_reps, seed)?;
    write_file(out, &csvio::simulations_to_csv(&locs, &reps))
}

fn fit_config_from(cfg: &Config, seed_override: Option<u64>) -> Result<(FitConfig, bool)> {
    let s = cfg.section("fit")?;
    s.check_keys(&[
        "objective",
        "fit_nugget",
        "fixed",
        "allow_small_alpha",
        "n_starts",
        "max_iters",
        "x_tol",
        "f_tol",
        "seed",
        "alpha_min",
        "alpha_max",
        "beta_min",
        "beta_max",
        "phi_min",
        "phi_max",
        "lambda_min",
        "lambda_max",
        "eta_max",
    ])?;
    let objective = match s.get("objective").unwrap_or("profile_ml") {
        "profile_ml" => Objective::ProfileMl,
        "reml" => Objective::Reml,
        other => {
            return Err(Error::invalid(format!(
                "objective must be profile_ml or reml, got {other:?}"
            )))
        }
    };
    let mut fc = FitConfig::new(objective);
    fc.fit_nugget = s.bool_or("fit_nugget", false)?;
    fc.allow_small_alpha = s.bool_or("allow_small_alpha", false)?;
    fc.n_starts = s.usize_or("n_starts", 5)?;
    fc.max_iters = s.usize_or("max_iters", 2000)?;
    fc.x_tol = s.f64_or("x_tol", 1e-8)?;
    fc.f_tol = s.f64_or("f_tol", 1e-10)?;
    fc.seed = seed_override.unwrap_or(s.u64_or("seed", 0)?);
    if let Some(fixed) = s.get("fixed") {
        for name in fixed.split(',').map(|v| v.trim()).filter(|v| !v.is_empty()) {
            let p = match name {
                "alpha" => FreeParam::Alpha,
                "beta" => FreeParam::Beta,
                "phi" => FreeParam::Phi,
                "lambda" => FreeParam::Lambda,
                other => {
                    return Err(Error::invalid(format!(
                        "unknown fixed parameter {other:?}; expected alpha, beta, phi or lambda"
                    )))
                }
            };
            fc.fixed.insert(p);
        }
    }
    for (param, lo_key, hi_key, dflt_lo, dflt_hi) in [
        (FreeParam::Alpha, "alpha_min", "alpha_max", f64::NAN, f64::NAN),
        (FreeParam::Beta, "beta_min", "beta_max", f64::NAN, f64::NAN),
        (FreeParam::Phi, "phi_min", "phi_max", f64::NAN, f64::NAN),
        (FreeParam::Lambda, "lambda_min", "lambda_max", f64::NAN, f64::NAN),
    ] {
        let lo = s.f64_or(lo_key, dflt_lo)?;
        let hi = s.f64_or(hi_key, dflt_hi)?;
        if lo.is_nan() != hi.is_nan() {
            return Err(Error::invalid(format!(
                "{lo_key} and {hi_key} must be given together"
            )));
        }
        if !lo.is_nan() {
            fc.bounds.insert(param, (lo, hi));
        }
    }
    if let Some(eta_max) = s.get("eta_max") {
        let hi: f64 = eta_max
            .parse()
            .map_err(|_| Error::invalid("eta_max must be a number"))?;
        fc.bounds.insert(FreeParam::Eta, (0.0, hi));
    }
    Ok((fc, objective == Objective::Reml))
}

fn cmd_fit(data_path: &Path, config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let cfg = Config::load(config)?;
    let mut allowed = vec![
        "kernel".to_string(),
        "model".to_string(),
        "fit".to_string(),
        "data".to_string(),
    ];
    allowed.extend(tensor_component_sections(&cfg, "kernel"));
    cfg.check_sections(&allowed.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;

    let metric = if cfg.has_section("data") {
        let s = cfg.section("data")?;
        s.check_keys(&["metric", "radius"])?;
        metric_from(&s)?
    } else {
        Metric::Euclidean
    };
    let data = csvio::read_data_csv(data_path, metric)?;

    let kernel = kernel_from(&cfg, "kernel")?;
    warn_gc_tail(&kernel, data.locs.dim());
    let (b, tau2) = if cfg.has_section("model") {
        let m = cfg.section("model")?;
        m.check_keys(&["b", "tau2"])?;
        (m.f64_or("b", 0.0)?, m.f64_or("tau2", 0.0)?)
    } else {
        (0.0, 0.0)
    };
    let template = GPModel::new(kernel, b, tau2)?;
    let (fc, mean_estimated) = fit_config_from(&cfg, seed)?;
    let result = fit(&template, &data, &fc)?;
    let doc = FitDocument {
        model: result.model,
        objective: fc.objective,
        loglik: result.loglik,
        converged: result.converged,
        n_evals: result.n_evals,
        microergodic: result.microergodic,
        mean_estimated,
        seed: fc.seed,
        data,
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::invalid(format!("cannot create {parent:?}: {e}")))?;
        }
    }
    write_json_17(out, &doc)
}

fn cmd_predict(
    fit_path: &Path,
    targets_path: &Path,
    out: &Path,
    mean_correction: Option<bool>,
) -> Result<()> {
    let text = std::fs::read_to_string(fit_path)
        .map_err(|e| Error::invalid(format!("cannot read {fit_path:?}: {e}")))?;
    let doc: FitDocument = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("invalid fit JSON {fit_path:?}: {e}")))?;
    doc.model.kernel.validate()?;
    let targets = csvio::read_targets_csv(targets_path, *doc.data.locs.metric())?;
    let opts = KrigeOptions {
        mean: if doc.mean_estimated {
            MeanSpec::EstimateGls
        } else {
            MeanSpec::Known
        },
        mean_variance_correction: mean_correction,
    };
    let pred = krige(&doc.model, &doc.data, &targets, &opts)?;
    write_file(out, &csvio::predictions_to_csv(&targets, &pred))
}

fn cmd_spectral(
    config: &Path,
    dim: usize,
    omega_min: f64,
    omega_max: f64,
    n: usize,
    log: bool,
    out: &Path,
) -> Result<()> {
    let cfg = Config::load(config)?;
    cfg.check_sections(&["kernel"])?;
    let kernel = kernel_from(&cfg, "kernel")?;
    if n < 2 {
        return Err(Error::invalid("spectral grid needs at least 2 points"));
    }
    if !(omega_max > omega_min) || (log && !(omega_min > 0.0)) {
        return Err(Error::invalid(
            "need omega_max > omega_min (both positive for a log grid)",
        ));
    }
    let omegas: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if log {
                (omega_min.ln() + t * (omega_max.ln() - omega_min.ln())).exp()
            } else {
                omega_min + t * (omega_max - omega_min)
            }
        })
        .collect();
    let mut csv = String::from("omega,density\n");
    for &w in &omegas {
        let f = match &kernel {
            KernelSpec::Matern(p) => matern_spectral(w, p, dim)?,
            KernelSpec::Ch(p) => ch_spectral(w, p, dim)?,
            _ => {
                return Err(Error::invalid(
                    "spectral densities are implemented for the matern and ch families",
                ))
            }
        };
        csv.push_str(&format!("{},{}\n", fmt_f64(w), fmt_f64(f)));
    }
    write_file(out, &csv)
}

fn cmd_experiment(config: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<()> {
    let cfg = Config::load(config)?;
    let study = cfg.section("study")?;
    let kind = study.str_required("kind")?;
    match kind {
        "prediction" => cmd_experiment_prediction(&cfg, out_dir, seed_override),
        "asymptotic" => cmd_experiment_asymptotic(&cfg, out_dir, seed_override),
        "realizations_1d" => cmd_experiment_realizations(&cfg, out_dir, seed_override),
        other => Err(Error::invalid(format!(
            "study kind must be prediction, asymptotic or realizations_1d, got {other:?}"
        ))),
    }
}

fn study_fit_from(cfg: &Config) -> Result<StudyFitSettings> {
    if !cfg.has_section("fit") {
        return Ok(StudyFitSettings::default());
    }
    let s = cfg.section("fit")?;
    s.check_keys(&["n_starts", "max_iters", "x_tol", "f_tol"])?;
    let d = StudyFitSettings::default();
    Ok(StudyFitSettings {
        n_starts: s.usize_or("n_starts", d.n_starts)?,
        max_iters: s.usize_or("max_iters", d.max_iters)?,
        x_tol: s.f64_or("x_tol", d.x_tol)?,
        f_tol: s.f64_or("f_tol", d.f_tol)?,
    })
}

fn cmd_experiment_prediction(cfg: &Config, out_dir: &Path, seed_override: Option<u64>) -> Result<()> {
    let mut allowed = vec![
        "study".to_string(),
        "truth".to_string(),
        "design".to_string(),
        "fit".to_string(),
    ];
    allowed.extend(tensor_component_sections(cfg, "truth"));
    cfg.check_sections(&allowed.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;
    let s = cfg.section("study")?;
    s.check_keys(&[
        "kind",
        "name",
        "candidates",
        "n_train",
        "n_reps",
        "target_counts",
        "seed",
    ])?;
    let candidates: Vec<CandidateFamily> = s
        .str_list_required("candidates")?
        .iter()
        .map(|c| match c.as_str() {
            "matern" => Ok(CandidateFamily::Matern),
            "ch" => Ok(CandidateFamily::Ch),
            "gc" => Ok(CandidateFamily::Gc),
            other => Err(Error::invalid(format!("unknown candidate family {other:?}"))),
        })
        .collect::<Result<_>>()?;

    let design_section = cfg.section("design")?;
    let bounds = bounds_from(&design_section)?;
    let design = match design_section.str_required("kind")? {
        "lhs" => {
            design_section.check_keys(&["kind", "bounds", "n_candidates"])?;
            DesignSpec::MaximinLhs {
                n_candidates: design_section.usize_or("n_candidates", 100)?,
            }
        }
        "grid" => {
            design_section.check_keys(&["kind", "bounds", "counts"])?;
            DesignSpec::Grid {
                counts: design_section.usize_list_required("counts")?,
            }
        }
        other => {
            return Err(Error::invalid(format!(
                "design kind must be grid or lhs, got {other:?}"
            )))
        }
    };

    let truth_kernel = kernel_from(cfg, "truth")?;
    warn_gc_tail(&truth_kernel, bounds.len());
    let spec = StudySpec {
        name: s.get("name").unwrap_or("study").to_string(),
        truth: GPModel::new(truth_kernel, 0.0, 0.0)?,
        candidates,
        domain: bounds,
        design,
        n_train: s.usize_required("n_train")?,
        target_counts: s.usize_list_required("target_counts")?,
        n_reps: s.usize_required("n_reps")?,
        seed: seed_override.unwrap_or(s.u64_or("seed", 0)?),
        fit: study_fit_from(cfg)?,
    };
    let t0 = Instant::now();
    let result = run_prediction_study(&spec)?;
    result.write_outputs(out_dir, &spec, t0.elapsed().as_millis())?;
    for agg in &result.aggregates {
        println!(
            "{}: model={} n_ok={} median_rmspe={:.6} mean_cvg95={:.4} mean_alci95={:.6}",
            spec.name, agg.model, agg.n_ok, agg.median_rmspe, agg.mean_cvg95, agg.mean_alci95
        );
    }
    Ok(())
}

fn cmd_experiment_asymptotic(cfg: &Config, out_dir: &Path, seed_override: Option<u64>) -> Result<()> {
    cfg.check_sections(&["study", "truth", "fit"])?;
    let s = cfg.section("study")?;
    s.check_keys(&["kind", "modes", "n_list", "n_reps", "grid_side", "seed"])?;
    let truth = match kernel_from(cfg, "truth")? {
        KernelSpec::Ch(p) => p,
        _ => {
            return Err(Error::invalid(
                "the asymptotic study requires a ch truth kernel",
            ))
        }
    };
    let modes: Vec<ThetaMode> = s
        .str_list_required("modes")?
        .iter()
        .map(|m| match m.as_str() {
            "theta0" => Ok(ThetaMode::TrueTheta),
            "beta_hat" => Ok(ThetaMode::FitBeta),
            "alpha_hat_beta_hat" => Ok(ThetaMode::FitAlphaBeta),
            other => match other.strip_prefix("beta_x") {
                Some(f) => f
                    .parse::<f64>()
                    .map(|factor| ThetaMode::ScaledBeta { factor })
                    .map_err(|_| Error::invalid(format!("bad mode {other:?}"))),
                None => Err(Error::invalid(format!(
                    "unknown mode {other:?}; expected theta0, beta_x<f>, beta_hat, alpha_hat_beta_hat"
                ))),
            },
        })
        .collect::<Result<_>>()?;
    let spec = AsymStudySpec {
        truth,
        modes,
        n_list: s.usize_list_required("n_list")?,
        n_reps: s.usize_required("n_reps")?,
        seed: seed_override.unwrap_or(s.u64_or("seed", 0)?),
        grid_side: s.usize_or("grid_side", 50)?,
        fit: study_fit_from(cfg)?,
    };
    let t0 = Instant::now();
    let result = run_asymptotic_study(&spec)?;
    result.write_outputs(out_dir, &spec, t0.elapsed().as_millis())?;
    for r in &result.rows {
        println!(
            "n={} mode={}: median_xi={:.4} cvg={:.4} bias={:.4e} rmse={:.4e} fail={}",
            r.n, r.mode, r.percentiles[2], r.cvg, r.bias, r.rmse, r.n_fail
        );
    }
    Ok(())
}

fn cmd_experiment_realizations(
    cfg: &Config,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<()> {
    let s = cfg.section("study")?;
    s.check_keys(&["kind", "n_points", "domain", "kernels", "seed"])?;
    let names = s.str_list_required("kernels")?;
    let mut allowed: Vec<String> = vec!["study".to_string()];
    allowed.extend(names.iter().cloned());
    cfg.check_sections(&allowed.iter().map(|x| x.as_str()).collect::<Vec<_>>())?;
    let domain = {
        let d = s.f64_list_required("domain")?;
        if d.len() != 2 || !(d[0] < d[1]) {
            return Err(Error::invalid("domain must be lo,hi"));
        }
        (d[0], d[1])
    };
    let n_points = s.usize_or("n_points", 2000)?;
    let seed = seed_override.unwrap_or(s.u64_or("seed", 0)?);
    let kernels: Vec<(String, GPModel)> = names
        .iter()
        .map(|name| {
            let k = kernel_from(cfg, name)?;
            Ok((name.clone(), GPModel::new(k, 0.0, 0.0)?))
        })
        .collect::<Result<_>>()?;
    let t0 = Instant::now();
    let (_, _, csv) = export_realizations_1d(&kernels, n_points, domain, seed)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::invalid(format!("cannot create {out_dir:?}: {e}")))?;
    write_file(&out_dir.join("realizations.csv"), &csv)?;
    let manifest = Manifest::new(
        &serde_json::json!({
            "kind": "realizations_1d",
            "n_points": n_points,
            "domain": [domain.0, domain.1],
            "kernels": names,
        }),
        seed,
        t0.elapsed().as_millis(),
        0,
    );
    write_json_17(&out_dir.join("manifest.json"), &manifest)
}

fn cmd_bench(n_evals: usize, seed: u64) -> Result<()> {
    let report = run_timing_bench(n_evals, seed)?;
    println!(
        "bessel_k: {:.1} ns/call  hyperg_u: {:.1} ns/call  ratio: {:.3}  (n={})",
        report.bessel_ns, report.hyperg_ns, report.ratio, report.n_evals
    );
    print!("{}", to_json_17(&report)?);
    Ok(())
}
