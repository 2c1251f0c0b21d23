//! Closed-form constants of the average-discrepancy bounds.

use std::f64::consts::{E, PI};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` by the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)` for `x > 0`; overflows to infinity beyond `x ≈ 171.6`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// `α_old(p) = ((2p+2)/(p+2))^{1/p}`, the dimension base for uniform points.
pub fn alpha_old(p: f64) -> f64 {
    ((2.0 * p + 2.0) / (p + 2.0)).powf(1.0 / p)
}

/// `α_new(p) = ((p+2)/(p+1))^{1/2}`, the base under the optimal density.
pub fn alpha_new(p: f64) -> f64 {
    ((p + 2.0) / (p + 1.0)).sqrt()
}

/// `Γ((p+1)/2)^{1/p}` via a caller-supplied log-gamma.
pub fn gamma_root_with(p: f64, ln_gamma_fn: fn(f64) -> f64) -> f64 {
    (ln_gamma_fn(0.5 * (p + 1.0)) / p).exp()
}

pub fn gamma_root(p: f64) -> f64 {
    gamma_root_with(p, ln_gamma)
}

/// `√2 / π^{1/(2p)} · Γ((p+1)/2)^{1/p}`.
pub fn gamma_prefactor_with(p: f64, ln_gamma_fn: fn(f64) -> f64) -> f64 {
    2f64.sqrt() / PI.powf(0.5 / p) * gamma_root_with(p, ln_gamma_fn)
}

pub fn gamma_prefactor(p: f64) -> f64 {
    gamma_prefactor_with(p, ln_gamma)
}

/// Stirling asymptote `√(p/(2e))` of `Γ((p+1)/2)^{1/p}`.
pub fn gamma_prefactor_asymptote(p: f64) -> f64 {
    (p / (2.0 * E)).sqrt()
}

/// Per-exponent constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsRow {
    pub p: f64,
    pub alpha_old: f64,
    pub alpha_new: f64,
    pub alpha_old_sq: f64,
    pub alpha_new_sq: f64,
    pub gamma_prefactor: f64,
    pub init_err_d1: f64,
    /// `3^{2/3} 2^{5/2} p`; a proven bound only for even integer `p`.
    pub even_p_const: f64,
    /// `√2 √p` (symmetrized); a proven bound only for even integer `p`.
    pub even_p_symmetrized_const: f64,
    pub even_p_valid: bool,
}

impl BoundsRow {
    /// The explicit even-`p` constants, or `None` when `p` is not an even integer.
    pub fn explicit_bounds(&self) -> Option<(f64, f64)> {
        self.even_p_valid.then_some((self.even_p_const, self.even_p_symmetrized_const))
    }

    /// Asymptotic constant of `N^{1/2} n-av_p` for uniform points in dimension `d`.
    pub fn uniform_asymptote(&self, d: usize) -> f64 {
        self.gamma_prefactor * self.alpha_old.powi(d as i32)
    }

    /// Asymptotic constant of `N^{1/2} n-av_p` under the optimal density.
    pub fn optimal_asymptote(&self, d: usize) -> f64 {
        self.gamma_prefactor * self.alpha_new.powi(d as i32)
    }
}

pub fn bounds_row(p: f64) -> Result<BoundsRow> {
    if !p.is_finite() {
        return Err(Error::UnsupportedExponent(p));
    }
    if !(1.0..=1e6).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [1, 1e6]")));
    }
    let ao = alpha_old(p);
    let an = alpha_new(p);
    Ok(BoundsRow {
        p,
        alpha_old: ao,
        alpha_new: an,
        alpha_old_sq: ao * ao,
        alpha_new_sq: an * an,
        gamma_prefactor: gamma_prefactor(p),
        init_err_d1: (p + 1.0).powf(-1.0 / p),
        even_p_const: 3f64.powf(2.0 / 3.0) * 2f64.powf(2.5) * p,
        even_p_symmetrized_const: 2f64.sqrt() * p.sqrt(),
        even_p_valid: p.fract() == 0.0 && (p as u64).is_multiple_of(2),
    })
}

/// Point-count bound `C_p² α_p^{2d} ε^{−2}` implied by
/// `n-av_p ≤ C_p α_p^d N^{−1/2}`; the caller rounds up.
pub fn complexity_estimate(p: f64, d: usize, eps: f64, c_p: f64, alpha_p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 1")));
    }
    if !(eps > 0.0 && eps <= 1.0) || !(c_p > 0.0) || !(alpha_p >= 1.0) {
        return Err(Error::InvalidArgument(
            "need eps in (0,1], C_p > 0 and alpha_p >= 1".into(),
        ));
    }
    Ok(c_p * c_p * (alpha_p * alpha_p).powi(d as i32) / (eps * eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRow {
    pub p: f64,
    pub alpha_old_sq: f64,
    pub alpha_new_sq: f64,
}

pub fn figure_alpha_data(p_grid: &[f64]) -> Result<Vec<AlphaRow>> {
    p_grid
        .iter()
        .map(|&p| {
            if !(1.0..=200.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("p = {p} outside [1, 200]")));
            }
            let ao = alpha_old(p);
            let an = alpha_new(p);
            Ok(AlphaRow { p, alpha_old_sq: ao * ao, alpha_new_sq: an * an })
        })
        .collect()
}

/// Equispaced grid of `steps + 1` exponents from `pmin` to `pmax`.
pub fn p_grid(pmin: f64, pmax: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![pmin];
    }
    (0..=steps)
        .map(|i| if i == steps { pmax } else { pmin + (pmax - pmin) * i as f64 / steps as f64 })
        .collect()
}

pub fn write_alpha_csv<W: Write>(rows: &[AlphaRow], mut out: W) -> Result<()> {
    writeln!(out, "p,alpha_old_sq,alpha_new_sq")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.p, r.alpha_old_sq, r.alpha_new_sq)?;
    }
    Ok(())
}
