//! One-dimensional sampling densities on `[0, 1]` and the variational problem
//! behind the optimal importance-sampling density.
//!
//! The optimal density for exponent `p` minimizes
//! `J(ρ) = ∫₀¹ S(x)^{p/2} dx` with `S(x) = ∫₀ˣ 1/ρ` under `∫ρ = 1`. Its graph
//! is the curve `t = (1 − ρ p/(p+1))^{2/p} (1 + 2ρ/(p+1))`.
//!
//! Internally the curve is parametrized by `z = S(x)/S₁ ∈ [0, 1]`:
//!
//! ```text
//! w = z^{p/2},  s = 1 − w,  ρ = s (p+1)/p
//! t(z) = z (1 + 2s/p)
//! F(z) = z/p · (p + 2s + s² (p+2)/p)        (the CDF at t(z))
//! ```
//!
//! Both `t` and `F` are increasing in `z`, so evaluation and inverse-CDF
//! sampling reduce to one bracketed scalar solve each. Working in `z` keeps
//! full resolution near `t = 0` for large `p`, where `ρ` itself is flat to
//! within one ulp of `(p+1)/p`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

/// Largest exponent accepted by the optimal-density solver.
pub const MAX_P: f64 = 1e6;
/// Nodes in the tabulation of a general-`p` optimal density.
pub const TABLE_NODES: usize = 4096;
/// Width of the boundary layer at `t = 1` where `S(x)` switches from
/// quadrature to the closed relation `S(x) = S₁ z(x)`.
pub const BOUNDARY_LAYER: f64 = 1e-6;

const SOLVER_MAX_ITER: usize = 200;
const SOLVER_RESIDUAL_TOL: f64 = 1e-9;

/// Representation tag of a [`Density1D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    Uniform,
    ClosedFormP1,
    ClosedFormP2,
    Tabulated,
}

/// One row of a density table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub t: f64,
    pub rho: f64,
    pub cdf: f64,
}

/// The optimal-density curve for a fixed exponent, in the `z` parametrization.
#[derive(Debug, Clone, Copy)]
pub struct OptimalCurve {
    p: f64,
}

impl OptimalCurve {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(OptimalCurve { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `S₁ = (p+2)/(p+1)`.
    pub fn s1(&self) -> f64 {
        (self.p + 2.0) / (self.p + 1.0)
    }

    /// `ρ(0) = (p+1)/p`, the largest admissible density value.
    pub fn rho_max(&self) -> f64 {
        (self.p + 1.0) / self.p
    }

    fn s_of_z(&self, z: f64) -> f64 {
        // 1 − z^{p/2}, accurate for z near 1
        -((0.5 * self.p) * z.ln()).exp_m1()
    }

    pub fn t_of_z(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let s = self.s_of_z(z);
        z * (1.0 + 2.0 * s / self.p)
    }

    fn dt_dz(&self, z: f64) -> f64 {
        (1.0 + 2.0 / self.p) * self.s_of_z(z)
    }

    pub fn rho_of_z(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return self.rho_max();
        }
        self.s_of_z(z) * self.rho_max()
    }

    pub fn cdf_of_z(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let p = self.p;
        let s = self.s_of_z(z);
        z / p * (p + 2.0 * s + s * s * (p + 2.0) / p)
    }

    /// Residual of the implicit density equation at `(t, ρ(z))`, evaluated
    /// through `z` so that it does not inherit the rounding of `ρ`.
    pub fn residual_at(&self, t: f64, z: f64) -> f64 {
        t - self.t_of_z(z)
    }

    /// Solve `t(z) = t` for `z`.
    pub fn z_of_t(&self, t: f64, bracket: Option<(f64, f64)>) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if t == 1.0 {
            return Ok(1.0);
        }
        let (lo, hi) = bracket.unwrap_or((0.0, 1.0));
        let z = solve_increasing(
            |z| self.t_of_z(z) - t,
            |z| self.dt_dz(z),
            lo,
            hi,
            SOLVER_MAX_ITER,
        );
        let residual = self.residual_at(t, z).abs();
        if residual > SOLVER_RESIDUAL_TOL {
            return Err(Error::SolverFailure { t, residual });
        }
        Ok(z)
    }

    /// Solve `F(z) = u` for `z`.
    pub fn z_of_u(&self, u: f64, bracket: Option<(f64, f64)>) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let (lo, hi) = bracket.unwrap_or((0.0, 1.0));
        solve_increasing(
            |z| self.cdf_of_z(z) - u,
            |z| self.rho_of_z(z) * self.dt_dz(z),
            lo,
            hi,
            SOLVER_MAX_ITER,
        )
    }
}

/// Safeguarded Newton iteration for an increasing function with a sign
/// change on `[lo, hi]`. Falls back to bisection whenever the Newton step
/// leaves the bracket.
pub(crate) fn solve_increasing<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
    }
    x
}

#[derive(Debug, Clone)]
struct OptimalTable {
    t: Vec<f64>,
    z: Vec<f64>,
    rho: Vec<f64>,
    cdf: Vec<f64>,
}

impl OptimalTable {
    fn build(curve: &OptimalCurve, nodes: usize) -> Result<Self> {
        let mut t = Vec::with_capacity(nodes);
        let mut z = Vec::with_capacity(nodes);
        let mut rho = Vec::with_capacity(nodes);
        let mut cdf = Vec::with_capacity(nodes);
        let last = (nodes - 1) as f64;
        for i in 0..nodes {
            // Chebyshev-Lobatto spacing, clustered at both ends.
            let ti = if i == 0 {
                0.0
            } else if i == nodes - 1 {
                1.0
            } else {
                0.5 * (1.0 - (PI * i as f64 / last).cos())
            };
            let bracket = z.last().map(|&zl| (zl, 1.0));
            let zi = curve.z_of_t(ti, bracket)?;
            t.push(ti);
            z.push(zi);
            rho.push(curve.rho_of_z(zi));
            cdf.push(curve.cdf_of_z(zi));
        }
        Ok(OptimalTable { t, z, rho, cdf })
    }

    fn z_bracket_for_t(&self, t: f64) -> (f64, f64) {
        let i = self.t.partition_point(|&x| x <= t);
        bracket_from(&self.z, i)
    }

    fn z_bracket_for_u(&self, u: f64) -> (f64, f64) {
        let i = self.cdf.partition_point(|&x| x <= u);
        bracket_from(&self.z, i)
    }
}

fn bracket_from(z: &[f64], upper: usize) -> (f64, f64) {
    let hi = z.get(upper).copied().unwrap_or(1.0);
    let lo = if upper == 0 { 0.0 } else { z[upper - 1] };
    (lo, hi)
}

/// A piecewise-linear density read from a table, renormalized so that its
/// trapezoid integral is exactly one.
#[derive(Debug, Clone)]
struct CustomTable {
    t: Vec<f64>,
    rho: Vec<f64>,
    cdf: Vec<f64>,
}

impl CustomTable {
    fn new(t: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != rho.len() {
            return Err(Error::InvalidArgument(
                "density table needs at least two (t, rho) rows".into(),
            ));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("density table must span t = 0 .. 1".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("density table t must increase strictly".into()));
        }
        if rho.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidArgument("density values must be finite and >= 0".into()));
        }
        let mut cdf = Vec::with_capacity(t.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..t.len() {
            acc += 0.5 * (rho[i] + rho[i - 1]) * (t[i] - t[i - 1]);
            cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidArgument("density table integrates to zero".into()));
        }
        let rho = rho.into_iter().map(|r| r / acc).collect();
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(CustomTable { t, rho, cdf })
    }

    fn segment(&self, t: f64) -> usize {
        let i = self.t.partition_point(|&x| x <= t);
        i.clamp(1, self.t.len() - 1) - 1
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.t[i + 1] - self.t[i];
        let a = (t - self.t[i]) / h;
        self.rho[i] * (1.0 - a) + self.rho[i + 1] * a
    }

    fn cdf(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let tau = t - self.t[i];
        let h = self.t[i + 1] - self.t[i];
        let slope = (self.rho[i + 1] - self.rho[i]) / h;
        (self.cdf[i] + self.rho[i] * tau + 0.5 * slope * tau * tau).min(1.0)
    }

    fn inv_cdf(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&x| x < u);
        let i = j.clamp(1, self.t.len() - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let r0 = self.rho[i];
        let slope = (self.rho[i + 1] - r0) / h;
        let need = u - self.cdf[i];
        // Solve r0 τ + slope τ²/2 = need for τ ∈ [0, h].
        let tau = if slope.abs() < 1e-300 {
            if r0 > 0.0 { need / r0 } else { 0.0 }
        } else {
            let disc = (r0 * r0 + 2.0 * slope * need).max(0.0);
            // stable form of (−r0 + √disc)/slope
            2.0 * need / (r0 + disc.sqrt())
        };
        (self.t[i] + tau.clamp(0.0, h)).min(self.t[i + 1])
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Uniform,
    OptimalP1(OptimalCurve),
    OptimalP2(OptimalCurve),
    Optimal(OptimalCurve, OptimalTable),
    Custom(CustomTable),
}

/// A probability density on `[0, 1]` with CDF and inverse-CDF access.
#[derive(Debug, Clone)]
pub struct Density1D {
    repr: Repr,
}

impl Density1D {
    pub fn uniform() -> Self {
        Density1D { repr: Repr::Uniform }
    }

    /// Piecewise-linear density through `(t, rho)` nodes; `rho` is rescaled
    /// to unit mass.
    pub fn from_table(t: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        Ok(Density1D { repr: Repr::Custom(CustomTable::new(t, rho)?) })
    }

    /// Load a density from CSV with a `t,rho[,...]` header (as written by
    /// [`Density1D::write_csv`]).
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut t = Vec::new();
        let mut rho = Vec::new();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty density file".into()))??;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let ti = cols.iter().position(|c| *c == "t");
        let ri = cols.iter().position(|c| *c == "rho");
        let (Some(ti), Some(ri)) = (ti, ri) else {
            return Err(Error::Parse("density CSV header must contain t and rho".into()));
        };
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |i: usize| -> Result<f64> {
                fields
                    .get(i)
                    .ok_or_else(|| Error::Parse(format!("line {}: missing column", n + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", n + 2)))
            };
            t.push(get(ti)?);
            rho.push(get(ri)?);
        }
        Self::from_table(t, rho)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    pub fn form(&self) -> DensityForm {
        match self.repr {
            Repr::Uniform => DensityForm::Uniform,
            Repr::OptimalP1(_) => DensityForm::ClosedFormP1,
            Repr::OptimalP2(_) => DensityForm::ClosedFormP2,
            Repr::Optimal(..) | Repr::Custom(_) => DensityForm::Tabulated,
        }
    }

    /// Target exponent for optimal densities; `None` for uniform and custom.
    pub fn p(&self) -> Option<f64> {
        self.curve().map(|c| c.p())
    }

    pub fn curve(&self) -> Option<&OptimalCurve> {
        match &self.repr {
            Repr::OptimalP1(c) | Repr::OptimalP2(c) | Repr::Optimal(c, _) => Some(c),
            _ => None,
        }
    }

    /// Tabulation nodes, when the density carries a table.
    pub fn table(&self) -> Option<Vec<TableRow>> {
        match &self.repr {
            Repr::Optimal(_, tab) => Some(
                (0..tab.t.len())
                    .map(|i| TableRow { t: tab.t[i], rho: tab.rho[i], cdf: tab.cdf[i] })
                    .collect(),
            ),
            Repr::Custom(tab) => Some(
                (0..tab.t.len())
                    .map(|i| TableRow { t: tab.t[i], rho: tab.rho[i], cdf: tab.cdf[i] })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Curve parameter `z(t) = S(t)/S₁` for optimal densities.
    pub fn z_at(&self, t: f64) -> Result<f64> {
        match &self.repr {
            Repr::OptimalP1(c) | Repr::OptimalP2(c) => c.z_of_t(t, None),
            Repr::Optimal(c, tab) => c.z_of_t(t, Some(tab.z_bracket_for_t(t))),
            _ => Err(Error::InvalidArgument("z(t) is defined for optimal densities only".into())),
        }
    }

    /// Density value `ρ(t)`. Values outside `[0, 1]` are zero.
    pub fn value(&self, t: f64) -> f64 {
        if !(0.0..=1.0).contains(&t) {
            return 0.0;
        }
        match &self.repr {
            Repr::Uniform => 1.0,
            Repr::OptimalP1(_) => rho_p1_closed(t),
            Repr::OptimalP2(_) => 1.5 * (1.0 - t).sqrt(),
            Repr::Optimal(c, tab) => {
                let z = c
                    .z_of_t(t, Some(tab.z_bracket_for_t(t)))
                    .expect("curve solve on a valid bracket");
                c.rho_of_z(z)
            }
            Repr::Custom(tab) => tab.value(t),
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Uniform => t,
            Repr::OptimalP2(_) => 1.0 - (1.0 - t) * (1.0 - t).sqrt(),
            Repr::OptimalP1(c) => {
                let s = rho_p1_closed(t) / c.rho_max();
                let w = 1.0 - s;
                (w * w * (1.0 + 2.0 * s + 3.0 * s * s)).min(1.0)
            }
            Repr::Optimal(c, tab) => {
                let z = c
                    .z_of_t(t, Some(tab.z_bracket_for_t(t)))
                    .expect("curve solve on a valid bracket");
                c.cdf_of_z(z)
            }
            Repr::Custom(tab) => tab.cdf(t),
        }
    }

    /// Inverse CDF: the `t` with `F(t) = u`.
    pub fn cdf_inverse(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("u = {u} outside [0, 1]")));
        }
        Ok(match &self.repr {
            Repr::Uniform => u,
            Repr::OptimalP2(_) => 1.0 - (1.0 - u).powf(2.0 / 3.0),
            Repr::OptimalP1(c) => c.t_of_z(c.z_of_u(u, None)),
            Repr::Optimal(c, tab) => c.t_of_z(c.z_of_u(u, Some(tab.z_bracket_for_u(u)))),
            Repr::Custom(tab) => tab.inv_cdf(u),
        })
    }

    /// Residual of the implicit density equation at `t`, evaluated at this
    /// density's own solution (see [`OptimalCurve::residual_at`]).
    pub fn eq_rho_residual(&self, t: f64) -> Result<f64> {
        let c = self
            .curve()
            .ok_or_else(|| Error::InvalidArgument("not an optimal density".into()))?;
        match &self.repr {
            Repr::OptimalP1(_) | Repr::OptimalP2(_) => residual_eq_rho(c.p(), t, self.value(t)),
            _ => Ok(c.residual_at(t, self.z_at(t)?)),
        }
    }

    /// `(t, ρ, F)` rows on `grid` equispaced nodes of `[0, 1]`.
    pub fn sample_rows(&self, grid: usize) -> Result<Vec<TableRow>> {
        if grid < 2 {
            return Err(Error::InvalidArgument("grid needs at least two nodes".into()));
        }
        let last = (grid - 1) as f64;
        Ok((0..grid)
            .map(|i| {
                let t = if i == grid - 1 { 1.0 } else { i as f64 / last };
                TableRow { t, rho: self.value(t), cdf: self.cdf(t) }
            })
            .collect())
    }

    pub fn write_csv<W: Write>(&self, grid: usize, mut out: W) -> Result<()> {
        writeln!(out, "t,rho,cdf")?;
        for r in self.sample_rows(grid)? {
            writeln!(out, "{:.17e},{:.17e},{:.17e}", r.t, r.rho, r.cdf)?;
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::UnsupportedExponent(p));
    }
    if !(1.0..=MAX_P).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [1, {MAX_P}]")));
    }
    Ok(())
}

/// Closed-form optimal density for `p = 1` (trigonometric Cardano root).
fn rho_p1_closed(t: f64) -> f64 {
    let arg = (2.0 * t - 1.0).clamp(-1.0, 1.0);
    let v = 1.0 + 2.0 * (arg.acos() / 3.0 + 4.0 * PI / 3.0).cos();
    v.max(0.0)
}

/// Optimal density for exponent `p`: closed forms for `p = 1, 2`, otherwise
/// the solved and tabulated curve.
pub fn optimal_density(p: f64) -> Result<Density1D> {
    let curve = OptimalCurve::new(p)?;
    if p == 1.0 {
        return Ok(Density1D { repr: Repr::OptimalP1(curve) });
    }
    if p == 2.0 {
        return Ok(Density1D { repr: Repr::OptimalP2(curve) });
    }
    optimal_density_tabulated(p)
}

/// Optimal density from the numerical solver for any `p`, including `p = 1, 2`.
pub fn optimal_density_tabulated(p: f64) -> Result<Density1D> {
    let curve = OptimalCurve::new(p)?;
    let table = OptimalTable::build(&curve, TABLE_NODES)?;
    Ok(Density1D { repr: Repr::Optimal(curve, table) })
}

/// `t − (1 − ρp/(p+1))^{2/p} (1 + 2ρ/(p+1))`; zero on the optimal curve.
pub fn residual_eq_rho(p: f64, t: f64, rho_val: f64) -> Result<f64> {
    check_p(p)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    let rho_max = (p + 1.0) / p;
    if !(rho_val >= 0.0) || rho_val > rho_max {
        return Err(Error::Domain(format!(
            "rho = {rho_val} outside [0, {rho_max}]: negative base for the 2/p power"
        )));
    }
    let base = 1.0 - rho_val * p / (p + 1.0);
    Ok(t - base.max(0.0).powf(2.0 / p) * (1.0 + rho_val * 2.0 / (p + 1.0)))
}

/// `S(x) = ∫₀ˣ 1/ρ(t) dt`.
///
/// Integrated in the variable `w = √(1 − t)`, which absorbs a square-root
/// zero of `ρ` at `t = 1`. For optimal densities the last
/// [`BOUNDARY_LAYER`] before `t = 1` uses `S(x) = S₁ z(x)` instead.
pub fn s_of_x(density: &Density1D, x: f64) -> Result<f64> {
    s_of_x_tol(density, x, 1e-12)
}

fn s_of_x_tol(density: &Density1D, x: f64, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    if let Repr::Uniform = density.repr {
        return Ok(x);
    }
    let layer_start = 1.0 - BOUNDARY_LAYER;
    if let Some(curve) = density.curve() {
        if x > layer_start {
            let base = inv_density_integral(density, layer_start, tol)?;
            let dz = density.z_at(x)? - density.z_at(layer_start)?;
            return Ok(base + curve.s1() * dz);
        }
    }
    inv_density_integral(density, x, tol)
}

fn inv_density_integral(density: &Density1D, x: f64, tol: f64) -> Result<f64> {
    let w_lo = (1.0 - x).sqrt();
    let out = quad::adaptive(
        |w| {
            let r = density.value(1.0 - w * w);
            if r > 0.0 { 2.0 * w / r } else { f64::INFINITY }
        },
        w_lo,
        1.0,
        tol,
    )?;
    Ok(out.value)
}

/// `J(ρ) = ∫₀¹ S(x)^{p/2} dx`, by nested adaptive quadrature.
pub fn j_functional(density: &Density1D, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::UnsupportedExponent(p));
    }
    let half = 0.5 * p;
    let mut failure: Option<Error> = None;
    let out = quad::adaptive(
        |w| {
            if failure.is_some() {
                return 0.0;
            }
            match s_of_x_tol(density, 1.0 - w * w, 1e-13) {
                Ok(s) => 2.0 * w * s.powf(half),
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            }
        },
        0.0,
        1.0,
        1e-11,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(out?.value)
}

/// The closed-form solution of the variational problem for exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalSolution {
    pub p: f64,
    /// `S(1)` at the optimum.
    pub s1: f64,
    /// Beltrami constant μ.
    pub mu: f64,
    /// The quantity `2λ` (λ the Lagrange multiplier of `∫ρ = 1`).
    pub lambda2: f64,
    pub j_min: f64,
    /// Relative residual of the normalization identity for `(2λ)²`.
    pub normalization_residual: f64,
}

/// `J` as a function of `S₁` after eliminating μ and λ.
pub fn j_of_s1(p: f64, s1: f64) -> f64 {
    s1.powf(0.5 * p) / (p + 2.0) * (2.0 - p / (p + 1.0).sqrt() * (s1 - 1.0).sqrt())
}

/// μ and `2λ` as functions of `S₁`.
pub fn mu_lambda2_of_s1(p: f64, s1: f64) -> (f64, f64) {
    let root = (p + 1.0).sqrt() * (s1 - 1.0).sqrt();
    let mu = s1.powf(0.5 * p) / (p + 2.0) * (2.0 + p / root);
    let lambda2 = p / ((p + 2.0) * (p + 1.0).sqrt()) * s1.powf(0.5 * p + 1.0) / (s1 - 1.0).sqrt();
    (mu, lambda2)
}

pub fn variational_solution(p: f64) -> Result<VariationalSolution> {
    check_p(p)?;
    let s1 = (p + 2.0) / (p + 1.0);
    let (mu, lambda2) = mu_lambda2_of_s1(p, s1);
    let j_min = (1.0 / (p + 1.0)) * s1.powf(0.5 * p);
    let rhs = mu * mu * s1 - 4.0 * mu / (p + 2.0) * s1.powf(0.5 * p + 1.0)
        + s1.powf(p + 1.0) / (p + 1.0);
    let lhs = lambda2 * lambda2;
    let normalization_residual = ((lhs - rhs) / lhs).abs();
    if normalization_residual >= 1e-10 {
        return Err(Error::Domain(format!(
            "normalization identity violated at p = {p}: relative residual {normalization_residual:e}"
        )));
    }
    Ok(VariationalSolution { p, s1, mu, lambda2, j_min, normalization_residual })
}
