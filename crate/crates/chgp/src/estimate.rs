//! Bounded maximum-likelihood / REML estimation of covariance parameters.
//!
//! Free correlation parameters are optimized by Nelder–Mead in log-transformed
//! coordinates with reflective bound handling, best of `n_starts` seeded
//! restarts; the variance (and the constant mean under REML) profile out in
//! closed form. The smoothness parameters (ν, δ) are always held fixed.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{loglik, microergodic_mle, reml_loglik, Dataset, FitResult, GPModel};
use crate::kernels::{ChParams, GcParams, KernelSpec, MaternParams};

/// Objective maximized by [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Profile log-likelihood: σ² maximized out in closed form, mean known.
    ProfileMl,
    /// Restricted likelihood for the constant-mean model.
    Reml,
}

/// Names of the parameters the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    /// Matérn or GC range.
    Phi,
    /// CH tail decay.
    Alpha,
    /// CH scale.
    Beta,
    /// GC tail exponent.
    Lambda,
    /// Nugget-to-variance ratio τ²/σ².
    Eta,
}

// eta is optimized as ln(eta + floor) so that 0 stays reachable
const ETA_FLOOR: f64 = 1e-8;
const ETA_MAX: f64 = 10.0;

/// Configuration of a [`fit`] call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub objective: Objective,
    /// Per-parameter bounds overriding the defaults.
    pub bounds: BTreeMap<FreeParam, (f64, f64)>,
    /// Family parameters to hold at the template's value (e.g. Alpha for the
    /// fixed-α microergodic modes). Smoothness is always fixed.
    pub fixed: BTreeSet<FreeParam>,
    /// Optimize the nugget ratio η as well.
    pub fit_nugget: bool,
    /// Lower the default α bound from d/2 + 1e-6 to 1e-3. The CH kernel is
    /// valid for all α > 0; only the asymptotic theory needs α > d/2.
    pub allow_small_alpha: bool,
    pub n_starts: usize,
    pub max_iters: usize,
    /// Simplex diameter tolerance in log-parameter space.
    pub x_tol: f64,
    /// Objective-change tolerance.
    pub f_tol: f64,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(objective: Objective) -> Self {
        FitConfig {
            objective,
            bounds: BTreeMap::new(),
            fixed: BTreeSet::new(),
            fit_nugget: false,
            allow_small_alpha: false,
            n_starts: 5,
            max_iters: 2000,
            x_tol: 1e-8,
            f_tol: 1e-10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (p, &(lo, hi)) in &self.bounds {
            if !(lo < hi) || !(lo > 0.0) && !matches!(p, FreeParam::Eta) {
                return Err(Error::invalid(format!("invalid bounds for {p:?}: ({lo}, {hi})")));
            }
        }
        if self.n_starts == 0 || self.max_iters == 0 {
            return Err(Error::invalid("n_starts and max_iters must be at least 1"));
        }
        if !(self.x_tol > 0.0) || !(self.f_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ParamSpace {
    names: Vec<FreeParam>,
    lo: Vec<f64>, // in transformed (log) coordinates
    hi: Vec<f64>,
}

fn transform(p: FreeParam, v: f64) -> f64 {
    match p {
        FreeParam::Eta => (v + ETA_FLOOR).ln(),
        _ => v.ln(),
    }
}

fn untransform(p: FreeParam, u: f64) -> f64 {
    match p {
        FreeParam::Eta => (u.exp() - ETA_FLOOR).max(0.0),
        _ => u.exp(),
    }
}

/// Triangle-wave reflection of u into [lo, hi].
fn reflect(u: f64, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let period = 2.0 * (hi - lo);
    let t = (u - lo).rem_euclid(period);
    lo + if t > hi - lo { period - t } else { t }
}

fn family_free_params(kernel: &KernelSpec) -> Result<Vec<FreeParam>> {
    Ok(match kernel {
        KernelSpec::Matern(_) => vec![FreeParam::Phi],
        KernelSpec::Ch(_) => vec![FreeParam::Alpha, FreeParam::Beta],
        KernelSpec::Gc(_) => vec![FreeParam::Lambda, FreeParam::Phi],
        KernelSpec::Tensor(_) => {
            return Err(Error::invalid("fitting tensor kernels is not supported"))
        }
    })
}

fn template_value(kernel: &KernelSpec, p: FreeParam, eta0: f64) -> f64 {
    match (kernel, p) {
        (KernelSpec::Matern(k), FreeParam::Phi) => k.phi,
        (KernelSpec::Ch(k), FreeParam::Alpha) => k.alpha,
        (KernelSpec::Ch(k), FreeParam::Beta) => k.beta,
        (KernelSpec::Gc(k), FreeParam::Lambda) => k.lambda,
        (KernelSpec::Gc(k), FreeParam::Phi) => k.phi,
        (_, FreeParam::Eta) => eta0,
        _ => unreachable!("parameter {p:?} does not belong to this family"),
    }
}

/// Rebuild the kernel with free parameters substituted, unit variance.
fn build_kernel(template: &KernelSpec, values: &BTreeMap<FreeParam, f64>) -> Result<KernelSpec> {
    let get = |p: FreeParam, dflt: f64| values.get(&p).copied().unwrap_or(dflt);
    Ok(match template {
        KernelSpec::Matern(k) => {
            KernelSpec::Matern(MaternParams::new(k.nu, get(FreeParam::Phi, k.phi), 1.0)?)
        }
        KernelSpec::Ch(k) => KernelSpec::Ch(ChParams::new(
            k.nu,
            get(FreeParam::Alpha, k.alpha),
            get(FreeParam::Beta, k.beta),
            1.0,
        )?),
        KernelSpec::Gc(k) => KernelSpec::Gc(GcParams::new(
            k.delta,
            get(FreeParam::Lambda, k.lambda),
            get(FreeParam::Phi, k.phi),
            1.0,
        )?),
        KernelSpec::Tensor(_) => unreachable!("rejected earlier"),
    })
}

fn default_bounds(p: FreeParam, extent: f64, dim: usize, allow_small_alpha: bool) -> (f64, f64) {
    match p {
        FreeParam::Alpha => {
            let lo = if allow_small_alpha {
                1e-3
            } else {
                (dim as f64 / 2.0 + 1e-6).max(1e-3)
            };
            (lo, 1e2)
        }
        FreeParam::Beta | FreeParam::Phi => (1e-3 * extent, 1e3 * extent),
        FreeParam::Lambda => (1e-3, 1e2),
        FreeParam::Eta => (0.0, ETA_MAX),
    }
}

struct StartOutcome {
    u: Vec<f64>,
    value: f64,
    evals: usize,
    converged: bool,
}

/// Maximize the chosen objective over the family's free correlation
/// parameters; σ² (and b under REML) are profiled in closed form. Returns the
/// fitted model with the microergodic estimate for CH kernels.
pub fn fit(template: &GPModel, data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if data.n() < 3 {
        return Err(Error::invalid("fitting needs at least 3 observations"));
    }
    let mut free = family_free_params(&template.kernel)?;
    free.retain(|p| !cfg.fixed.contains(p));
    if cfg.fit_nugget {
        free.push(FreeParam::Eta);
    }
    let extent = {
        let e = data.locs.extent();
        if e > 0.0 {
            e
        } else {
            1.0
        }
    };
    let dim = data.locs.dim();
    let space = ParamSpace {
        lo: free
            .iter()
            .map(|&p| {
                let (lo, _) = cfg
                    .bounds
                    .get(&p)
                    .copied()
                    .unwrap_or_else(|| default_bounds(p, extent, dim, cfg.allow_small_alpha));
                transform(p, lo)
            })
            .collect(),
        hi: free
            .iter()
            .map(|&p| {
                let (_, hi) = cfg
                    .bounds
                    .get(&p)
                    .copied()
                    .unwrap_or_else(|| default_bounds(p, extent, dim, cfg.allow_small_alpha));
                transform(p, hi)
            })
            .collect(),
        names: free,
    };

    let eta0 = template.eta();
    // distances are fixed across the search; only the correlation changes
    let dists = crate::design::pairwise_dist(&data.locs)?;
    let z = data.z_array();
    let objective = |u: &[f64]| -> Option<(f64, BTreeMap<FreeParam, f64>)> {
        let mut values = BTreeMap::new();
        let mut eta = if cfg.fit_nugget { 0.0 } else { eta0 };
        for (k, &p) in space.names.iter().enumerate() {
            let v = untransform(p, reflect(u[k], space.lo[k], space.hi[k]));
            if p == FreeParam::Eta {
                eta = v;
            } else {
                values.insert(p, v);
            }
        }
        let kernel = build_kernel(&template.kernel, &values).ok()?;
        let r = crate::gp::corr_matrix_tabulated(&kernel, &dists, eta).ok()?;
        let val = match cfg.objective {
            Objective::ProfileMl => {
                crate::gp::loglik_from_corr(&r, &z, template.mean_b, None)
                    .ok()?
                    .value
            }
            Objective::Reml => crate::gp::reml_from_corr(&r, &z).ok()?.value,
        };
        if val.is_finite() {
            if cfg.fit_nugget {
                values.insert(FreeParam::Eta, eta);
            }
            Some((val, values))
        } else {
            None
        }
    };

    // degenerate case: everything fixed
    if space.names.is_empty() {
        let (value, _) = objective(&[]).ok_or_else(|| {
            Error::Optimization("objective evaluation failed at the template parameters".into())
        })?;
        return finalize(template, data, cfg, &BTreeMap::new(), eta0, value, 1, true);
    }

    // start 0: the template's own parameters, clamped strictly inside bounds;
    // remaining starts from a seeded latin hypercube over the log-bounds box
    let d = space.names.len();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.n_starts);
    let clamp_in = |u: f64, lo: f64, hi: f64| {
        let pad = 1e-6 * (hi - lo);
        u.clamp(lo + pad, hi - pad)
    };
    starts.push(
        (0..d)
            .map(|k| {
                let v = template_value(&template.kernel, space.names[k], eta0);
                clamp_in(transform(space.names[k], v), space.lo[k], space.hi[k])
            })
            .collect(),
    );
    if cfg.n_starts > 1 {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        let extra = latin_starts(cfg.n_starts - 1, d, &mut rng);
        for row in extra {
            starts.push(
                (0..d)
                    .map(|k| space.lo[k] + row[k] * (space.hi[k] - space.lo[k]))
                    .collect(),
            );
        }
    }

    // restarts are independent work items; the matrix assembly inside each
    // objective evaluation is already parallel, so run them sequentially and
    // reduce deterministically by (value, start index)
    let outcomes: Vec<Option<StartOutcome>> = starts
        .iter()
        .map(|s| nelder_mead(&objective, s, &space, cfg))
        .collect();

    let mut n_evals = 0;
    let mut best: Option<(usize, StartOutcome)> = None;
    for (idx, o) in outcomes.into_iter().enumerate() {
        if let Some(o) = o {
            n_evals += o.evals;
            let better = match &best {
                None => true,
                Some((_, b)) => o.value > b.value,
            };
            if better {
                best = Some((idx, o));
            }
        }
    }
    let (_, best) = best.ok_or_else(|| {
        Error::Optimization(format!(
            "all {} restarts failed to produce a finite objective", cfg.n_starts
        ))
    })?;

    let (value, values) = objective(&best.u).ok_or_else(|| {
        Error::Optimization("objective failed at the reported optimum".into())
    })?;
    let eta_hat = values.get(&FreeParam::Eta).copied().unwrap_or(eta0);
    finalize(template, data, cfg, &values, eta_hat, value, n_evals, best.converged)
}

/// One-shot plain LHS in the unit cube for restart points.
fn latin_starts(n: usize, d: usize, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; n];
    for k in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        // Fisher-Yates via the rng for determinism
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            strata.swap(i, j);
        }
        for i in 0..n {
            let u: f64 = rng.random();
            pts[i][k] = (strata[i] as f64 + u) / n as f64;
        }
    }
    pts
}

fn finalize(
    template: &GPModel,
    data: &Dataset,
    cfg: &FitConfig,
    values: &BTreeMap<FreeParam, f64>,
    eta_hat: f64,
    value: f64,
    n_evals: usize,
    converged: bool,
) -> Result<FitResult> {
    let unit_kernel = build_kernel(&template.kernel, values)?;
    let probe = GPModel {
        kernel: unit_kernel.clone(),
        mean_b: template.mean_b,
        nugget_tau2: eta_hat,
    };
    let (sigma2_hat, b_hat) = match cfg.objective {
        Objective::ProfileMl => {
            let ll = loglik(&probe, data, true)?;
            (ll.sigma2_hat.expect("profiled"), template.mean_b)
        }
        Objective::Reml => {
            let r = reml_loglik(&probe, data)?;
            (r.sigma2_hat, r.b_hat)
        }
    };
    let final_kernel = scale_kernel(&unit_kernel, sigma2_hat);
    let model = GPModel {
        kernel: final_kernel,
        mean_b: b_hat,
        nugget_tau2: eta_hat * sigma2_hat,
    };
    let microergodic = if let KernelSpec::Ch(p) = &model.kernel {
        let centered = Dataset::new(
            data.locs.clone(),
            data.z.iter().map(|v| v - b_hat).collect(),
        )?;
        Some(microergodic_mle(p.nu, p.alpha, p.beta, &centered)?)
    } else {
        None
    };
    Ok(FitResult {
        model,
        loglik: value,
        microergodic,
        n_evals,
        converged,
    })
}

fn scale_kernel(kernel: &KernelSpec, sigma2: f64) -> KernelSpec {
    match kernel {
        KernelSpec::Matern(p) => KernelSpec::Matern(MaternParams { sigma2, ..*p }),
        KernelSpec::Ch(p) => KernelSpec::Ch(ChParams { sigma2, ..*p }),
        KernelSpec::Gc(p) => KernelSpec::Gc(GcParams { sigma2, ..*p }),
        KernelSpec::Tensor(p) => {
            let mut t = p.clone();
            t.sigma2 = sigma2;
            KernelSpec::Tensor(t)
        }
    }
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) maximizing `objective`, with reflective bounds applied inside
/// the objective. Returns None when no vertex ever evaluated finitely.
fn nelder_mead<F>(
    objective: &F,
    start: &[f64],
    space: &ParamSpace,
    cfg: &FitConfig,
) -> Option<StartOutcome>
where
    F: Fn(&[f64]) -> Option<(f64, BTreeMap<FreeParam, f64>)> + Sync,
{
    let d = start.len();
    let mut evals = 0usize;
    let mut eval = |u: &[f64]| -> f64 {
        evals += 1;
        match objective(u) {
            Some((v, _)) => -v, // minimize the negative
            None => f64::INFINITY,
        }
    };

    // initial simplex: start plus 5% (of the box) steps along each axis
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(start.to_vec());
    for k in 0..d {
        let mut v = start.to_vec();
        let step = 0.05 * (space.hi[k] - space.lo[k]).max(1e-3);
        v[k] += step;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let mut converged = false;
    for _ in 0..cfg.max_iters {
        // order: best first
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&i, &j| fvals[i].total_cmp(&fvals[j]));
        let reorder: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let fre: Vec<f64> = order.iter().map(|&i| fvals[i]).collect();
        simplex = reorder;
        fvals = fre;

        let spread = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let fspread = (fvals[d] - fvals[0]).abs();
        if spread < cfg.x_tol || (fspread < cfg.f_tol && fvals[0].is_finite()) {
            converged = true;
            break;
        }

        // centroid of all but worst
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|v| v[k]).sum::<f64>() / d as f64)
            .collect();
        let xr: Vec<f64> = (0..d)
            .map(|k| centroid[k] + (centroid[k] - simplex[d][k]))
            .collect();
        let fr = eval(&xr);

        if fr < fvals[0] {
            let xe: Vec<f64> = (0..d)
                .map(|k| centroid[k] + 2.0 * (centroid[k] - simplex[d][k]))
                .collect();
            let fe = eval(&xe);
            if fe < fr {
                simplex[d] = xe;
                fvals[d] = fe;
            } else {
                simplex[d] = xr;
                fvals[d] = fr;
            }
        } else if fr < fvals[d - 1] {
            simplex[d] = xr;
            fvals[d] = fr;
        } else {
            // contraction (outside if the reflection helped at all)
            let (xc, fc) = if fr < fvals[d] {
                let xc: Vec<f64> = (0..d)
                    .map(|k| centroid[k] + 0.5 * (xr[k] - centroid[k]))
                    .collect();
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc: Vec<f64> = (0..d)
                    .map(|k| centroid[k] + 0.5 * (simplex[d][k] - centroid[k]))
                    .collect();
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fvals[d].min(fr) {
                simplex[d] = xc;
                fvals[d] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=d {
                    for k in 0..d {
                        simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                    }
                    fvals[i] = eval(&simplex[i]);
                }
            }
        }
    }

    let mut best_i = 0;
    for i in 1..=d {
        if fvals[i] < fvals[best_i] {
            best_i = i;
        }
    }
    if !fvals[best_i].is_finite() {
        return None;
    }
    // report the reflected-in-bounds coordinates
    let u: Vec<f64> = simplex[best_i]
        .iter()
        .enumerate()
        .map(|(k, &v)| reflect(v, space.lo[k], space.hi[k]))
        .collect();
    Some(StartOutcome {
        u,
        value: -fvals[best_i],
        evals,
        converged,
    })
}
