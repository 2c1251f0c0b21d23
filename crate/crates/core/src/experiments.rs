//! Seeded Monte Carlo experiments on random weighted point sets.
//!
//! Replication `r` of an experiment with seed `s` draws from ChaCha8 stream
//! `(s, r)`, so the outcome does not depend on how replications are spread
//! over threads. Per-replication values are reduced with a fixed pairwise
//! tree.

use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density1D;
use crate::discrepancy::{self, c_kernel, mean_and_std_error, squared_error_p2, Method};
use crate::error::{Error, Result};
use crate::pointset::{initial_error, int_power, ProductDensity, WeightedPointSet};
use crate::quad::sum_pairwise;

/// Sampling density of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform,
    /// The optimal density for the experiment's own `p`.
    Optimal,
    /// Piecewise-linear density from a `t,rho` CSV file.
    CustomFile(PathBuf),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CRescale {
    #[default]
    None,
    OptimalC,
}

fn default_order() -> usize {
    discrepancy::DEFAULT_ORDER
}

fn default_mc_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: f64,
    pub d: usize,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    pub density_kind: DensitySpec,
    pub replications: usize,
    pub seed: u64,
    /// `None` picks [`Method::auto`].
    #[serde(default)]
    pub evaluator: Option<Method>,
    #[serde(default)]
    pub c_rescale: CRescale,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

impl ExperimentConfig {
    pub fn new(p: f64, d: usize, n: usize, density_kind: DensitySpec, replications: usize, seed: u64) -> Self {
        ExperimentConfig {
            p,
            d,
            n,
            density_kind,
            replications,
            seed,
            evaluator: None,
            c_rescale: CRescale::None,
            order: default_order(),
            mc_samples: default_mc_samples(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidArgument(format!("p = {} must be finite and >= 1", self.p)));
        }
        if self.d == 0 || self.n == 0 {
            return Err(Error::InvalidArgument("need d >= 1 and N >= 1".into()));
        }
        if self.replications < 2 {
            return Err(Error::InvalidArgument("need at least 2 replications".into()));
        }
        Ok(())
    }

    pub fn method(&self) -> Method {
        self.evaluator.unwrap_or_else(|| Method::auto(self.p, self.d))
    }

    pub fn product_density(&self) -> Result<ProductDensity> {
        match &self.density_kind {
            DensitySpec::Uniform => Ok(ProductDensity::uniform(self.d)),
            DensitySpec::Optimal => ProductDensity::optimal(self.d, self.p),
            DensitySpec::CustomFile(path) => {
                Ok(ProductDensity::custom(self.d, Density1D::read_csv_file(path)?))
            }
        }
    }

    fn density_label(&self) -> String {
        match &self.density_kind {
            DensitySpec::Uniform => "uniform".into(),
            DensitySpec::Optimal => "optimal".into(),
            DensitySpec::CustomFile(p) => format!("custom_file:{}", p.display()),
        }
    }
}

/// Statistics of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub p: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub density: String,
    pub evaluator: Method,
    pub c_rescale: CRescale,
    pub c_star: Option<f64>,
    /// Estimate of `E[L^p]`.
    #[serde(rename = "mean_Lp_p")]
    pub mean_lp_p: f64,
    /// `E[L^p]^{1/p}`.
    pub av_p: f64,
    /// `(p+1)^{d/p} av_p`.
    pub n_av_p: f64,
    /// Standard error of `mean_Lp_p`.
    pub std_error: f64,
    /// `N^{1/2} n_av_p`.
    pub scaled: f64,
    pub scaled_std_error: f64,
    pub replications_used: usize,
    /// Draws rejected because the density vanished there.
    pub resampled: u64,
    pub draws: u64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "seed,p,d,N,density,evaluator,c_star,mean_Lp_p,av_p,n_av_p,std_error,scaled,scaled_std_error,replications_used,resampled"
        )?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.p,
            self.d,
            self.n,
            self.density,
            self.evaluator.name(),
            self.c_star.map(|c| c.to_string()).unwrap_or_default(),
            self.mean_lp_p,
            self.av_p,
            self.n_av_p,
            self.std_error,
            self.scaled,
            self.scaled_std_error,
            self.replications_used,
            self.resampled
        )?;
        Ok(())
    }
}

/// Random point set with `n` i.i.d. points from `rho` and weights
/// `1/(N ρ_d(t_k))`, drawn from stream `stream` of `seed`.
pub fn sample_point_set(rho: &ProductDensity, n: usize, seed: u64, stream: u64) -> Result<(WeightedPointSet, u64)> {
    let mut rng = replication_rng(seed, stream);
    sample_with(&mut rng, rho, n)
}

fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_with(rng: &mut ChaCha8Rng, rho: &ProductDensity, n: usize) -> Result<(WeightedPointSet, u64)> {
    let d = rho.d;
    let mut coords = Vec::with_capacity(n * d);
    let mut weights = Vec::with_capacity(n);
    let mut resampled = 0u64;
    let nf = n as f64;
    for _ in 0..n {
        let mut dens = 1.0;
        for _ in 0..d {
            loop {
                let u: f64 = rng.random();
                let t = rho.marginal.cdf_inverse(u)?;
                let r = rho.marginal.value(t);
                if t < 1.0 && r > 0.0 {
                    coords.push(t);
                    dens *= r;
                    break;
                }
                resampled += 1;
                if resampled > 1_000_000 {
                    return Err(Error::InvalidArgument(
                        "sampler keeps landing where the density vanishes".into(),
                    ));
                }
            }
        }
        weights.push(1.0 / (nf * dens));
    }
    Ok((WeightedPointSet::from_flat(d, coords, weights)?, resampled))
}

fn lp_power(ps: &WeightedPointSet, cfg: &ExperimentConfig, method: Method, mc_seed: u64) -> Result<f64> {
    if method == Method::KernelP2 {
        if cfg.p != 2.0 {
            return Err(Error::UnsupportedExponent(cfg.p));
        }
        // E[L²] is averaged directly from e², without the square root
        let e2 = squared_error_p2(ps);
        if e2 < -discrepancy::CLAMP_TOLERANCE {
            return Err(Error::NumericalInconsistency(e2));
        }
        return Ok(e2.max(0.0));
    }
    let r = discrepancy::evaluate(ps, cfg.p, method, cfg.order, cfg.mc_samples, mc_seed)?;
    Ok(r.value_pow_p())
}

/// Average `L^p` over `M` random point sets and normalize.
pub fn run_average_discrepancy(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let rho = cfg.product_density()?;
    let method = cfg.method();
    let c_star = match cfg.c_rescale {
        CRescale::None => None,
        CRescale::OptimalC => Some(optimal_c_rescale(cfg.n, cfg.d, c_kernel(&rho)?.c_k)?),
    };
    let per_rep: Vec<(f64, u64)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(cfg.seed, r);
            let (mut ps, resampled) = sample_with(&mut rng, &rho, cfg.n)?;
            if let Some(c) = c_star {
                ps = ps.scaled(c)?;
            }
            let mc_seed = rng.next_u64();
            Ok((lp_power(&ps, cfg, method, mc_seed)?, resampled))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = per_rep.iter().map(|x| x.0).collect();
    let resampled = per_rep.iter().map(|x| x.1).sum();
    let (mean, se) = mean_and_std_error(&values);
    let p = cfg.p;
    let av_p = mean.powf(1.0 / p);
    let norm = 1.0 / initial_error(p, cfg.d)?;
    let n_av_p = norm * av_p;
    let scaled = (cfg.n as f64).sqrt() * n_av_p;
    let scaled_std_error = if mean > 0.0 { scaled * se / (p * mean) } else { 0.0 };
    Ok(ExperimentReport {
        seed: cfg.seed,
        p,
        d: cfg.d,
        n: cfg.n,
        density: cfg.density_label(),
        evaluator: method,
        c_rescale: cfg.c_rescale,
        c_star,
        mean_lp_p: mean,
        av_p,
        n_av_p,
        std_error: se,
        scaled,
        scaled_std_error,
        replications_used: cfg.replications,
        resampled,
        draws: (cfg.replications * cfg.n * cfg.d) as u64 + resampled,
    })
}

/// Which density a closed-form `p = 2` identity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormDensity {
    Uniform,
    Optimal,
}

/// Exact `n-av_2 = 3^{d/2} √((C − 3^{−d})/N)` with `C = 2^{−d}` (uniform) or
/// `(4/9)^d` (optimal).
pub fn exact_nav2(n: usize, d: usize, kind: ClosedFormDensity) -> f64 {
    let c = match kind {
        ClosedFormDensity::Uniform => int_power(0.5, d),
        ClosedFormDensity::Optimal => int_power(4.0 / 9.0, d),
    };
    let init_sq = int_power(1.0 / 3.0, d);
    ((c - init_sq) / n as f64).sqrt() / init_sq.sqrt()
}

/// Exact `E[e²] = (C − 3^{−d})/N` behind [`exact_nav2`].
pub fn exact_mean_sq_p2(n: usize, d: usize, kind: ClosedFormDensity) -> f64 {
    let v = exact_nav2(n, d, kind);
    v * v * int_power(1.0 / 3.0, d)
}

/// Weight rescaling `c* = N/(N − 1 + 3^d C(K_d, ρ_d))` minimizing the
/// expected squared error.
pub fn optimal_c_rescale(n: usize, d: usize, c_k: f64) -> Result<f64> {
    let init_sq = int_power(1.0 / 3.0, d);
    if c_k < init_sq * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "C(K_d, rho_d) = {c_k} below its lower bound 3^-d = {init_sq}"
        )));
    }
    let nf = n as f64;
    Ok(nf / (nf - 1.0 + c_k / init_sq))
}

/// Paired estimate of `E[e²_{c*}] / E[e²]` at `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CStarEffect {
    pub c_star: f64,
    pub mean_plain: f64,
    pub mean_rescaled: f64,
    pub ratio: f64,
    pub ratio_std_error: f64,
    pub replications: usize,
}

pub fn c_star_effect(cfg: &ExperimentConfig) -> Result<CStarEffect> {
    cfg.validate()?;
    if cfg.p != 2.0 {
        return Err(Error::UnsupportedExponent(cfg.p));
    }
    let rho = cfg.product_density()?;
    let c_star = optimal_c_rescale(cfg.n, cfg.d, c_kernel(&rho)?.c_k)?;
    let pairs: Vec<(f64, f64)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let (ps, _) = sample_point_set(&rho, cfg.n, cfg.seed, r)?;
            Ok((squared_error_p2(&ps), squared_error_p2(&ps.scaled(c_star)?)))
        })
        .collect::<Result<_>>()?;
    let m = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mx = sum_pairwise(&xs) / m;
    let my = sum_pairwise(&ys) / m;
    let ratio = my / mx;
    // ratio-estimator variance via the linearized residuals y − R x
    let resid: Vec<f64> = pairs.iter().map(|(x, y)| (y - ratio * x).powi(2)).collect();
    let ratio_std_error = (sum_pairwise(&resid) / (m * (m - 1.0))).sqrt() / mx;
    Ok(CStarEffect {
        c_star,
        mean_plain: mx,
        mean_rescaled: my,
        ratio,
        ratio_std_error,
        replications: cfg.replications,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub scaled: f64,
    pub std_error: f64,
}

/// `N^{1/2} n-av_p` over a grid of `N`, against the asymptotic constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingProbe {
    pub p: f64,
    pub d: usize,
    pub density: String,
    pub rows: Vec<ScalingRow>,
    pub asymptotic_constant: f64,
    /// Largest-`N` row lies below the constant up to three standard errors.
    pub within_bound: bool,
}

pub fn asymptotic_scaling_probe(
    p: f64,
    d: usize,
    density_kind: DensitySpec,
    n_grid: &[usize],
    replications: usize,
    seed: u64,
) -> Result<ScalingProbe> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("N grid must be non-empty and increasing".into()));
    }
    if *n_grid.last().unwrap() > 1 << 16 {
        return Err(Error::InvalidArgument("largest N must not exceed 2^16".into()));
    }
    let row = crate::bounds::bounds_row(p)?;
    let asymptotic_constant = match density_kind {
        DensitySpec::Optimal => row.optimal_asymptote(d),
        _ => row.uniform_asymptote(d),
    };
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut label = String::new();
    for &n in n_grid {
        let cfg = ExperimentConfig::new(p, d, n, density_kind.clone(), replications, seed);
        let rep = run_average_discrepancy(&cfg)?;
        label = rep.density.clone();
        rows.push(ScalingRow { n, scaled: rep.scaled, std_error: rep.scaled_std_error });
    }
    let last = rows.last().unwrap();
    let within_bound = last.scaled <= asymptotic_constant + 3.0 * last.std_error;
    Ok(ScalingProbe { p, d, density: label, rows, asymptotic_constant, within_bound })
}

/// Stability indicators of a weighted rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityMetrics {
    /// Classical indicator `‖A‖_∞ = Σ |a_k|`.
    pub sum_abs_weights: f64,
    /// `max_k a_k Π (1 − t_kj)^{1/p}`: the largest possible contribution of a
    /// single term for a unit-norm integrand.
    pub max_term_bound: f64,
    pub error: f64,
    pub initial_error: f64,
    /// Triangle-inequality bound `‖A‖ ≤ error + initial error`.
    pub stability_bound: f64,
    /// Exact operator norm `(Σ a_k a_ℓ K_d(t_k, t_ℓ))^{1/2}` when `p = 2`.
    pub operator_norm_p2: Option<f64>,
}

pub fn stability_metrics(ps: &WeightedPointSet, p: f64) -> Result<StabilityMetrics> {
    let init = initial_error(p, ps.dim())?;
    let method = Method::auto(p, ps.dim());
    let err = discrepancy::evaluate(ps, p, method, discrepancy::DEFAULT_ORDER, 100_000, 0)?.value;
    let sum_abs_weights = crate::quad::sum_compensated(ps.weights().iter().map(|a| a.abs()));
    let max_term_bound = ps
        .points()
        .zip(ps.weights())
        .map(|(t, a)| a * t.iter().map(|x| (1.0 - x).powf(1.0 / p)).product::<f64>())
        .fold(0.0, f64::max);
    let operator_norm_p2 = (p == 2.0).then(|| {
        let pts: Vec<&[f64]> = ps.points().collect();
        let w = ps.weights();
        let s = crate::quad::sum_compensated((0..pts.len()).flat_map(|k| {
            let pts = &pts;
            (0..pts.len()).map(move |l| {
                w[k] * w[l] * pts[k].iter().zip(pts[l]).map(|(a, b)| 1.0 - a.max(*b)).product::<f64>()
            })
        }));
        s.max(0.0).sqrt()
    });
    Ok(StabilityMetrics {
        sum_abs_weights,
        max_term_bound,
        error: err,
        initial_error: init,
        stability_bound: err + init,
        operator_norm_p2,
    })
}
