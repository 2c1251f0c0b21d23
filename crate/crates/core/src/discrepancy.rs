//! Generalized `L_p`-discrepancy of weighted point sets.
//!
//! Four evaluators that cross-check each other:
//!
//! * [`l2_discrepancy_kernel`]: closed form through the reproducing kernel
//!   `K_1(x, y) = 1 − max(x, y)` of the `p = 2` space.
//! * [`lp_discrepancy_even`]: multinomial expansion of `Δ^p` for `p ∈ {2, 4}`,
//!   every term integrated in closed form.
//! * [`lp_discrepancy_cells`]: exact cell decomposition of `[0,1]^d` by the
//!   point coordinates, tensor Gauss quadrature inside each cell.
//! * [`lp_discrepancy_mc`]: plain Monte Carlo over `x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density1D;
use crate::error::{Error, Result};
use crate::pointset::{initial_error, int_power, Exponent, ProductDensity, WeightedPointSet};
use crate::quad::{self, sum_compensated, sum_pairwise, GaussRule};

/// Negative squared errors above this are rounding and get clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-12;
/// Largest number of cells the cell decomposition will enumerate.
pub const MAX_CELLS: usize = 10_000_000;
pub const DEFAULT_ORDER: usize = 8;
pub const MAX_EVEN_N_P2: usize = 64;
pub const MAX_EVEN_N_P4: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KernelP2,
    EvenPExact,
    CellQuadrature,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::KernelP2 => "kernel_p2",
            Method::EvenPExact => "even_p_exact",
            Method::CellQuadrature => "cell_quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Method::KernelP2 | Method::EvenPExact)
    }

    /// Default evaluator: the kernel formula at `p = 2`, cells for `d ≤ 4`,
    /// Monte Carlo beyond.
    pub fn auto(p: f64, d: usize) -> Method {
        if p == 2.0 {
            Method::KernelP2
        } else if d <= 4 {
            Method::CellQuadrature
        } else {
            Method::MonteCarlo
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel_p2" | "kernel" => Ok(Method::KernelP2),
            "even_p_exact" | "even" => Ok(Method::EvenPExact),
            "cell_quadrature" | "cells" => Ok(Method::CellQuadrature),
            "monte_carlo" | "mc" => Ok(Method::MonteCarlo),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// Value of `L_{p,N}(P, A)` with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub p: f64,
    pub method: Method,
    /// Zero for the exact methods.
    pub abs_error_estimate: f64,
    pub evaluations: u64,
    /// Set when a slightly negative squared error was rounded up to zero.
    pub clamped: bool,
}

impl DiscrepancyResult {
    /// `L^p`, the quantity averaged by the experiments.
    pub fn value_pow_p(&self) -> f64 {
        if self.p == 2.0 { self.value * self.value } else { self.value.powf(self.p) }
    }
}

/// JSON export record.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyRecord {
    pub p: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub method: Method,
    pub value: f64,
    pub abs_error_estimate: f64,
}

impl DiscrepancyRecord {
    pub fn new(ps: &WeightedPointSet, r: &DiscrepancyResult) -> Self {
        DiscrepancyRecord {
            p: r.p,
            d: ps.dim(),
            n: ps.len(),
            method: r.method,
            value: r.value,
            abs_error_estimate: r.abs_error_estimate,
        }
    }
}

/// `h_d(x) = Π (1 − x_j²)/2`, the representer of the integral.
fn representer(t: &[f64]) -> f64 {
    t.iter().map(|x| 0.5 * (1.0 - x * x)).product()
}

/// `K_d(x, y) = Π (1 − max(x_j, y_j))`.
fn kernel(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| 1.0 - a.max(*b)).product()
}

/// Squared worst-case error `e² = 3^{−d} − 2 Σ a_k h_d(t_k) + Σ a_k a_ℓ K_d(t_k, t_ℓ)`,
/// before clamping.
pub fn squared_error_p2(ps: &WeightedPointSet) -> f64 {
    let d = ps.dim();
    let w = ps.weights();
    let pts: Vec<&[f64]> = ps.points().collect();
    let init_sq = int_power(1.0 / 3.0, d);
    let linear = sum_compensated(pts.iter().zip(w).map(|(t, a)| a * representer(t)));
    let quadratic = sum_compensated(
        (0..pts.len()).flat_map(|k| (0..pts.len()).map(move |l| (k, l))).map(|(k, l)| {
            w[k] * w[l] * kernel(pts[k], pts[l])
        }),
    );
    sum_compensated([init_sq, -2.0 * linear, quadratic])
}

fn clamp_sq(e2: f64) -> Result<(f64, bool)> {
    if e2 >= 0.0 {
        Ok((e2, false))
    } else if e2 >= -CLAMP_TOLERANCE {
        Ok((0.0, true))
    } else {
        Err(Error::NumericalInconsistency(e2))
    }
}

/// `L_2` discrepancy through the reproducing kernel of the `p = 2` space.
/// Cost `O(N² d)`.
pub fn l2_discrepancy_kernel(ps: &WeightedPointSet) -> Result<DiscrepancyResult> {
    let (e2, clamped) = clamp_sq(squared_error_p2(ps))?;
    let n = ps.len() as u64;
    Ok(DiscrepancyResult {
        value: e2.sqrt(),
        p: 2.0,
        method: Method::KernelP2,
        abs_error_estimate: 0.0,
        evaluations: n * n + n,
        clamped,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact `L_p` discrepancy for `p ∈ {2, 4}` by expanding
/// `Δ^p = Σ_m C(p, m) (Σ a_k 1[t_k < x])^m (−Πx)^{p−m}`.
///
/// Each product of `m` indicators with `x^{p−m}` integrates per coordinate to
/// `(1 − M_j^{p−m+1})/(p−m+1)`, `M_j` the largest `j`-th coordinate in the
/// tuple. All `N^m` ordered tuples are enumerated.
pub fn lp_discrepancy_even(ps: &WeightedPointSet, p: u32) -> Result<DiscrepancyResult> {
    let limit = match p {
        2 => MAX_EVEN_N_P2,
        4 => MAX_EVEN_N_P4,
        _ => return Err(Error::UnsupportedExponent(p as f64)),
    };
    let n = ps.len();
    if n > limit {
        return Err(Error::SizeLimit(format!(
            "even-p expansion with p = {p} allows N <= {limit}, got {n}"
        )));
    }
    let d = ps.dim();
    let pu = p as usize;
    let w = ps.weights();
    let mut terms = Vec::with_capacity(pu + 1);
    let mut evaluations = 0u64;
    for m in 0..=pu {
        let e = pu - m;
        let sign = if e.is_multiple_of(2) { 1.0 } else { -1.0 };
        let coef = sign * binomial(pu, m);
        let ep1 = (e + 1) as f64;
        let inner = if m == 0 {
            int_power(1.0 / ep1, d)
        } else {
            let mut acc = Vec::with_capacity(n.pow(m as u32));
            let mut idx = vec![0usize; m];
            let mut maxes = vec![0.0f64; d];
            loop {
                let mut weight = 1.0;
                maxes.iter_mut().for_each(|v| *v = 0.0);
                for &k in &idx {
                    weight *= w[k];
                    for (mj, tj) in maxes.iter_mut().zip(ps.point(k)) {
                        *mj = mj.max(*tj);
                    }
                }
                let integral: f64 =
                    maxes.iter().map(|mj| (1.0 - mj.powi(e as i32 + 1)) / ep1).product();
                acc.push(weight * integral);
                evaluations += 1;
                // odometer over ordered m-tuples
                let mut pos = m;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < n {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
            sum_compensated(acc)
        };
        terms.push(coef * inner);
    }
    let (integral, clamped) = clamp_sq(sum_compensated(terms))?;
    Ok(DiscrepancyResult {
        value: integral.powf(1.0 / p as f64),
        p: p as f64,
        method: Method::EvenPExact,
        abs_error_estimate: 0.0,
        evaluations,
        clamped,
    })
}

#[inline]
fn abs_pow(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// `∫_a^b |c − P y|^p dy` for `P ≥ 0`. Exact through the antiderivative of
/// `|u|^p` when `c − P y` vanishes on the segment or varies enough for the
/// difference to be well conditioned; Gauss otherwise, where the integrand is
/// analytic.
fn line_integral(prod: f64, a: f64, b: f64, c: f64, p: f64, rule: &GaussRule) -> f64 {
    let h = b - a;
    let ua = c - prod * a;
    let ub = c - prod * b;
    let even = p.fract() == 0.0 && (p as u64).is_multiple_of(2);
    if prod > 0.0 && !even && (ua * ub <= 0.0 || prod * h >= 0.01 * ua.abs().max(ub.abs())) {
        let anti = |u: f64| u.signum() * u.abs().powf(p + 1.0) / (p + 1.0);
        return (anti(ua) - anti(ub)) / prod;
    }
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * abs_pow(c - prod * (a + h * x), p);
    }
    acc * h
}

/// Quadrature of `|c − Πx|^p` over the box `[lo, hi]`: tensor Gauss over all
/// axes but the last, [`line_integral`] along the last.
fn tensor_gauss(lo: &[f64], hi: &[f64], c: f64, p: f64, rule: &GaussRule) -> f64 {
    fn rec(j: usize, lo: &[f64], hi: &[f64], prod: f64, c: f64, p: f64, rule: &GaussRule) -> f64 {
        let last = lo.len() - 1;
        if j == last {
            return line_integral(prod, lo[last], hi[last], c, p, rule);
        }
        let h = hi[j] - lo[j];
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * rec(j + 1, lo, hi, prod * (lo[j] + h * x), c, p, rule);
        }
        acc * h
    }
    rec(0, lo, hi, 1.0, c, p, rule)
}

/// Absolute error target per unit volume of the adaptive cell integrator.
pub const CELL_TOLERANCE: f64 = 1e-11;

/// Refinement depth cap by dimension.
fn max_depth(d: usize) -> u32 {
    match d {
        1 | 2 => 30,
        3 => 6,
        _ => 3,
    }
}

/// True when the integrand after the exact last-axis integration may be
/// non-smooth on the cell: `c − Πx` changes sign inside and `p` is not an
/// even integer, or `c` touches the range of `Πx` and `p` is not an integer.
fn is_rough(pmin: f64, pmax: f64, c: f64, p: f64) -> bool {
    let integer = p.fract() == 0.0;
    let even = integer && (p as u64).is_multiple_of(2);
    if pmin < c && c < pmax {
        !even
    } else {
        !integer && (c == pmin || c == pmax)
    }
}

struct CellSum {
    value: f64,
    error: f64,
    evals: u64,
}

/// Integral and error estimate on one cell, refined dyadically over all axes
/// but the last while the estimate exceeds the tolerance. Rough cells compare
/// the rule on the cell with the rule on its children; smooth cells compare
/// against a rule of half the order; polynomial integrands are exact.
fn integrate_cell(
    lo: &[f64],
    hi: &[f64],
    c: f64,
    p: f64,
    rule: &GaussRule,
    half: &GaussRule,
) -> (f64, f64, u64) {
    let d = lo.len();
    let coarse = tensor_gauss(lo, hi, c, p, rule);
    let nodes = rule.len().pow(d as u32) as u64;
    if d == 1 {
        return (coarse, 0.0, nodes);
    }
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let mut acc = CellSum { value: 0.0, error: 0.0, evals: nodes };
    refine(lo, hi, c, p, rule, half, coarse, CELL_TOLERANCE * vol, 0, &mut acc);
    (acc.value, acc.error, acc.evals)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    lo: &[f64],
    hi: &[f64],
    c: f64,
    p: f64,
    rule: &GaussRule,
    half: &GaussRule,
    coarse: f64,
    tol: f64,
    depth: u32,
    acc: &mut CellSum,
) {
    let d = lo.len();
    let outer = d - 1;
    let pmin: f64 = lo.iter().product();
    let pmax: f64 = hi.iter().product();
    let nodes = rule.len().pow(d as u32) as u64;
    if !is_rough(pmin, pmax, c, p) {
        let polynomial = p.fract() == 0.0 && 2.0 * rule.len() as f64 - 1.0 >= p;
        let err = if polynomial {
            0.0
        } else {
            acc.evals += half.len().pow(d as u32) as u64;
            (coarse - tensor_gauss(lo, hi, c, p, half)).abs()
        };
        if err <= tol || depth >= max_depth(d) {
            acc.value += coarse;
            acc.error += err;
            return;
        }
    }
    let children = 1usize << outer;
    let mut sub_lo = vec![lo.to_vec(); children];
    let mut sub_hi = vec![hi.to_vec(); children];
    let mut sub_val = vec![0.0; children];
    for mask in 0..children {
        for j in 0..outer {
            let mid = 0.5 * (lo[j] + hi[j]);
            if mask >> j & 1 == 0 {
                sub_hi[mask][j] = mid;
            } else {
                sub_lo[mask][j] = mid;
            }
        }
        sub_val[mask] = tensor_gauss(&sub_lo[mask], &sub_hi[mask], c, p, rule);
    }
    acc.evals += nodes * children as u64;
    let refined = sub_val.iter().sum::<f64>();
    let delta = (refined - coarse).abs();
    if delta <= tol || depth + 1 >= max_depth(d) {
        acc.value += refined;
        acc.error += delta;
        return;
    }
    let child_tol = tol / children as f64;
    for mask in 0..children {
        refine(&sub_lo[mask], &sub_hi[mask], c, p, rule, half, sub_val[mask], child_tol, depth + 1, acc);
    }
}

/// Public access to a single cell integration, for tests of the error model.
pub fn cell_integral(lo: &[f64], hi: &[f64], c: f64, p: f64, order: usize) -> (f64, f64) {
    let rule = GaussRule::new(order);
    let half = GaussRule::new((order / 2).max(1));
    let (v, e, _) = integrate_cell(lo, hi, c, p, &rule, &half);
    (v, e)
}

/// One-step error estimate `|Q_order − Q_{order/2}|` on a cell where
/// `c − Πx` keeps its sign, the acceptance test of the adaptive integrator.
pub fn smooth_cell_estimate(lo: &[f64], hi: &[f64], c: f64, p: f64, order: usize) -> Result<f64> {
    let pmin: f64 = lo.iter().product();
    let pmax: f64 = hi.iter().product();
    if is_rough(pmin, pmax, c, p) || (pmin < c && c < pmax) {
        return Err(Error::InvalidArgument("c − Πx changes sign or vanishes on the cell".into()));
    }
    let rule = GaussRule::new(order);
    let half = GaussRule::new((order / 2).max(1));
    Ok((tensor_gauss(lo, hi, c, p, &rule) - tensor_gauss(lo, hi, c, p, &half)).abs())
}

/// `L_p` discrepancy by cell decomposition.
///
/// The sorted distinct coordinate values per axis split `[0,1]^d` into
/// boxes on which the counting term `Σ a_k 1[t_k < x]` is constant; each box
/// is integrated by tensor Gauss quadrature of `order` nodes per axis.
/// Slabs along the first axis run in parallel; their partial sums are
/// combined in a fixed pairwise order.
pub fn lp_discrepancy_cells(ps: &WeightedPointSet, p: f64, order: usize) -> Result<DiscrepancyResult> {
    let p = Exponent::new(p)?.p;
    if !(2..=32).contains(&order) {
        return Err(Error::InvalidArgument(format!("Gauss order {order} outside [2, 32]")));
    }
    let d = ps.dim();
    if d > 4 {
        return Err(Error::SizeLimit(format!("cell quadrature supports d <= 4, got {d}")));
    }
    // breakpoints per axis, and each point's rank along each axis
    let mut breaks: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut b: Vec<f64> = ps.points().map(|t| t[j]).collect();
        b.push(0.0);
        b.push(1.0);
        b.sort_by(f64::total_cmp);
        b.dedup();
        breaks.push(b);
    }
    let dims: Vec<usize> = breaks.iter().map(|b| b.len() - 1).collect();
    let cells = dims.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m));
    let cells = match cells {
        Some(c) if c <= MAX_CELLS => c,
        _ => {
            return Err(Error::SizeLimit(format!(
                "cell decomposition needs {dims:?} cells, limit {MAX_CELLS}"
            )))
        }
    };
    // counting term per cell: d-dimensional prefix sums of the weights placed
    // at their rank; a point with t_j = b_j[i] counts in cells starting at i.
    let mut strides = vec![1usize; d];
    for j in (0..d.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dims[j + 1];
    }
    let mut count = vec![0.0f64; cells];
    for (t, a) in ps.points().zip(ps.weights()) {
        let mut flat = 0;
        for j in 0..d {
            let r = breaks[j].partition_point(|&b| b < t[j]);
            flat += r * strides[j];
        }
        count[flat] += a;
    }
    for j in 0..d {
        for idx in 0..cells {
            if !(idx / strides[j]).is_multiple_of(dims[j]) {
                count[idx] += count[idx - strides[j]];
            }
        }
    }

    let rule = GaussRule::new(order);
    let half = GaussRule::new((order / 2).max(1));
    let slab = cells / dims[0];
    let partial: Vec<(f64, f64, u64)> = (0..dims[0])
        .into_par_iter()
        .map(|i0| {
            let mut lo = vec![0.0; d];
            let mut hi = vec![0.0; d];
            let mut vals = Vec::with_capacity(slab);
            let mut errs = Vec::with_capacity(slab);
            let mut evals = 0u64;
            for off in 0..slab {
                let idx = i0 * slab + off;
                for j in 0..d {
                    let ij = (idx / strides[j]) % dims[j];
                    lo[j] = breaks[j][ij];
                    hi[j] = breaks[j][ij + 1];
                }
                let (v, e, n) = integrate_cell(&lo, &hi, count[idx], p, &rule, &half);
                vals.push(v);
                errs.push(e);
                evals += n;
            }
            (sum_pairwise(&vals), sum_pairwise(&errs), evals)
        })
        .collect();
    let vals: Vec<f64> = partial.iter().map(|x| x.0).collect();
    let errs: Vec<f64> = partial.iter().map(|x| x.1).collect();
    let integral = sum_pairwise(&vals).max(0.0);
    let err = sum_pairwise(&errs);
    let value = integral.powf(1.0 / p);
    // transfer the integral error through the 1/p root
    let abs_error_estimate = if integral > 0.0 {
        value / (p * integral) * err
    } else {
        err.powf(1.0 / p)
    };
    Ok(DiscrepancyResult {
        value,
        p,
        method: Method::CellQuadrature,
        abs_error_estimate,
        evaluations: partial.iter().map(|x| x.2).sum(),
        clamped: false,
    })
}

/// Plain Monte Carlo estimate of `L_p`, standard error transferred through
/// the `1/p` root by the delta method. Deterministic in `seed`.
pub fn lp_discrepancy_mc(
    ps: &WeightedPointSet,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<DiscrepancyResult> {
    let p = Exponent::new(p)?.p;
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 samples, got {samples}")));
    }
    let d = ps.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        for xj in x.iter_mut() {
            *xj = rng.random::<f64>();
        }
        vals.push(abs_pow(ps.local_discrepancy(&x), p));
    }
    let (mean, se) = mean_and_std_error(&vals);
    let value = mean.powf(1.0 / p);
    let abs_error_estimate = if mean > 0.0 { value / (p * mean) * se } else { 0.0 };
    Ok(DiscrepancyResult {
        value,
        p,
        method: Method::MonteCarlo,
        abs_error_estimate,
        evaluations: samples as u64,
        clamped: false,
    })
}

/// Sample mean and standard error of the mean (two-pass, pairwise sums).
pub(crate) fn mean_and_std_error(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = sum_pairwise(vals) / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = sum_pairwise(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Evaluate with the chosen method. `order` applies to cells, `samples` and
/// `seed` to Monte Carlo.
pub fn evaluate(
    ps: &WeightedPointSet,
    p: f64,
    method: Method,
    order: usize,
    samples: usize,
    seed: u64,
) -> Result<DiscrepancyResult> {
    match method {
        Method::KernelP2 => {
            if p != 2.0 {
                return Err(Error::UnsupportedExponent(p));
            }
            l2_discrepancy_kernel(ps)
        }
        Method::EvenPExact => {
            if p == 2.0 || p == 4.0 {
                lp_discrepancy_even(ps, p as u32)
            } else {
                Err(Error::UnsupportedExponent(p))
            }
        }
        Method::CellQuadrature => lp_discrepancy_cells(ps, p, order),
        Method::MonteCarlo => lp_discrepancy_mc(ps, p, samples, seed),
    }
}

/// `C(K_d, ρ_d) = ∫ K_d(t,t)/ρ_d(t) dt` together with the squared initial
/// error `3^{−d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConstants {
    pub d: usize,
    pub c_k: f64,
    pub init_sq: f64,
}

/// One-dimensional factor `∫₀¹ (1 − t)/ρ(t) dt`, integrated in `w = √(1−t)`.
pub fn c_kernel_1d(marginal: &Density1D) -> Result<f64> {
    let out = quad::adaptive(
        |w| {
            let r = marginal.value(1.0 - w * w);
            if r > 0.0 { 2.0 * w * w * w / r } else { f64::INFINITY }
        },
        0.0,
        1.0,
        1e-13,
    )?;
    Ok(out.value)
}

pub fn c_kernel(rho: &ProductDensity) -> Result<KernelConstants> {
    let c1 = c_kernel_1d(&rho.marginal)?;
    Ok(KernelConstants {
        d: rho.d,
        c_k: int_power(c1, rho.d),
        init_sq: int_power(1.0 / 3.0, rho.d),
    })
}

/// Discrepancy of the empty rule, `(p+1)^{−d/p}`; used to sanity-check
/// evaluators on zero-weight sets.
pub fn zero_rule_value(p: f64, d: usize) -> Result<f64> {
    initial_error(p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::optimal_density;
    use rand::Rng;

    fn one(d: usize, t: Vec<f64>, a: f64) -> WeightedPointSet {
        WeightedPointSet::new(d, vec![t], vec![a]).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, d: usize, n: usize) -> WeightedPointSet {
        let pts = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let w = (0..n).map(|_| rng.random::<f64>() * 2.0 / n as f64).collect();
        WeightedPointSet::new(d, pts, w).unwrap()
    }

    #[test]
    fn kernel_one_point_rules() {
        let r = l2_discrepancy_kernel(&one(1, vec![1.0 / 3.0], 2.0 / 3.0)).unwrap();
        assert!((r.value - 27f64.sqrt().recip()).abs() < 1e-12);
        let r = l2_discrepancy_kernel(&one(1, vec![0.5], 1.0)).unwrap();
        assert!((r.value - 12f64.sqrt().recip()).abs() < 1e-12);
        let zero = WeightedPointSet::new(2, vec![vec![0.2, 0.3], vec![0.5, 0.9]], vec![0.0, 0.0]).unwrap();
        let r = l2_discrepancy_kernel(&zero).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.abs_error_estimate, 0.0);
    }

    #[test]
    fn clamping_policy() {
        assert_eq!(clamp_sq(-1e-13).unwrap(), (0.0, true));
        assert!(matches!(clamp_sq(-1e-11), Err(Error::NumericalInconsistency(_))));
    }

    #[test]
    fn even_expansion_examples() {
        let r = lp_discrepancy_even(&one(1, vec![1.0 / 3.0], 2.0 / 3.0), 2).unwrap();
        assert!((r.value - 27f64.sqrt().recip()).abs() < 1e-12);
        // kernel form: 1/3 − 2·(1/2) + 1
        let r = lp_discrepancy_even(&one(1, vec![0.0], 1.0), 2).unwrap();
        assert!((r.value - 3f64.sqrt().recip()).abs() < 1e-15);
        assert!(matches!(lp_discrepancy_even(&one(1, vec![0.0], 1.0), 6), Err(Error::UnsupportedExponent(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let big = random_set(&mut rng, 1, 17);
        assert!(matches!(lp_discrepancy_even(&big, 4), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn even_p4_matches_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let ps = random_set(&mut rng, 1, 2);
            let e = lp_discrepancy_even(&ps, 4).unwrap();
            let c = lp_discrepancy_cells(&ps, 4.0, 8).unwrap();
            assert!((e.value - c.value).abs() < 1e-8);
        }
    }

    #[test]
    fn cells_piecewise_example() {
        let r = lp_discrepancy_cells(&one(1, vec![0.5], 1.0), 1.0, 8).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_gives_initial_error_for_every_method() {
        let zero = WeightedPointSet::new(2, vec![vec![0.2, 0.3], vec![0.5, 0.9]], vec![0.0, 0.0]).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let expect = initial_error(p, 2).unwrap();
            let c = lp_discrepancy_cells(&zero, p, 8).unwrap();
            assert!((c.value - expect).abs() < 1e-12, "p={p}");
        }
        let e4 = lp_discrepancy_even(&zero, 4).unwrap();
        assert!((e4.value - initial_error(4.0, 2).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn methods_agree_at_p2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..30 {
            let d = 1 + trial % 3;
            let n = 1 + (rng.random::<u32>() % 32) as usize;
            let ps = random_set(&mut rng, d, n);
            let k = l2_discrepancy_kernel(&ps).unwrap();
            let e = lp_discrepancy_even(&ps, 2).unwrap();
            let c = lp_discrepancy_cells(&ps, 2.0, 8).unwrap();
            assert!((k.value - e.value).abs() <= 1e-12, "trial {trial}");
            assert!((k.value - c.value).abs() <= 1e-10, "trial {trial}");
        }
    }

    #[test]
    fn mc_zero_weight_high_dimension() {
        let pts = vec![vec![0.1, 0.2, 0.3, 0.4, 0.5]];
        let zero = WeightedPointSet::new(5, pts, vec![0.0]).unwrap();
        let r = lp_discrepancy_mc(&zero, 2.0, 20_000, 3).unwrap();
        let exact = (1.0f64 / 3.0).powf(2.5);
        assert!((r.value - exact).abs() < 4.0 * r.abs_error_estimate);
        let again = lp_discrepancy_mc(&zero, 2.0, 20_000, 3).unwrap();
        assert_eq!(r.value.to_bits(), again.value.to_bits());
        assert!(lp_discrepancy_mc(&zero, 2.0, 10, 3).is_err());
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ps = random_set(&mut rng, 2, 10);
        let mut pts: Vec<Vec<f64>> = ps.points().map(|t| t.to_vec()).collect();
        let mut w = ps.weights().to_vec();
        pts.reverse();
        w.reverse();
        let rev = WeightedPointSet::new(2, pts, w).unwrap();
        let a = l2_discrepancy_kernel(&ps).unwrap().value;
        let b = l2_discrepancy_kernel(&rev).unwrap().value;
        assert!((a - b).abs() < 1e-15);
        let a = lp_discrepancy_cells(&ps, 1.5, 8).unwrap().value;
        let b = lp_discrepancy_cells(&rev, 1.5, 8).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn cell_integral_meets_its_estimate() {
        // c − Πx keeps its sign on the first cell and changes it on the second
        fn full_gauss(lo: &[f64], hi: &[f64], c: f64, p: f64, rule: &GaussRule) -> f64 {
            let mut s = 0.0;
            for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
                    let px = lo[0] + (hi[0] - lo[0]) * x;
                    let py = lo[1] + (hi[1] - lo[1]) * y;
                    s += wx * wy * (c - px * py).abs().powf(p);
                }
            }
            s * (hi[0] - lo[0]) * (hi[1] - lo[1])
        }
        let reference = |lo: &[f64], hi: &[f64], c: f64, p: f64| {
            let rule = GaussRule::new(16);
            let n = 256;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let a = [lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64, lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64];
                    let b = [a[0] + (hi[0] - lo[0]) / n as f64, a[1] + (hi[1] - lo[1]) / n as f64];
                    s += full_gauss(&a, &b, c, p, &rule);
                }
            }
            s
        };
        for (lo, hi) in [([0.1, 0.2], [0.4, 0.7]), ([0.5, 0.6], [0.9, 1.0])] {
            for p in [1.0, 1.5, 3.0] {
                let (v, e) = cell_integral(&lo, &hi, 0.5, p, 8);
                let r = reference(&lo, &hi, 0.5, p);
                assert!((v - r).abs() < 1e-10, "p={p}: {v} vs {r}, estimate {e}");
                assert!(e < 1e-10);
            }
        }
    }

    #[test]
    fn cell_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ps = random_set(&mut rng, 5, 3);
        assert!(matches!(lp_discrepancy_cells(&ps, 2.0, 8), Err(Error::SizeLimit(_))));
        let ps = random_set(&mut rng, 2, 3);
        assert!(lp_discrepancy_cells(&ps, 2.0, 1).is_err());
    }

    #[test]
    fn c_kernel_examples() {
        let u = c_kernel(&ProductDensity::uniform(1)).unwrap();
        assert!((u.c_k - 0.5).abs() < 1e-14);
        let o = c_kernel(&ProductDensity::optimal(1, 2.0).unwrap()).unwrap();
        assert!((o.c_k - 4.0 / 9.0).abs() < 1e-12);
        let o3 = c_kernel(&ProductDensity::optimal(3, 2.0).unwrap()).unwrap();
        assert!((o3.c_k - (4.0f64 / 9.0).powi(3)).abs() < 1e-12);
        assert!(o3.c_k >= o3.init_sq);
        let t = ProductDensity::custom(1, optimal_density(3.0).unwrap());
        assert!(c_kernel(&t).unwrap().c_k > 1.0 / 3.0);
    }

    #[test]
    fn record_json_shape() {
        let ps = one(1, vec![0.5], 1.0);
        let r = l2_discrepancy_kernel(&ps).unwrap();
        let json = serde_json::to_string(&DiscrepancyRecord::new(&ps, &r)).unwrap();
        assert!(json.starts_with(r#"{"p":2.0,"d":1,"N":1,"method":"kernel_p2","value":"#));
    }
}
