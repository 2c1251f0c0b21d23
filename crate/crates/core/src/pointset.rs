//! Weighted point sets, exponents and product densities.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::density::{optimal_density, Density1D};
use crate::error::{Error, Result};

/// `N` points in `[0,1)^d` with non-negative weights: the pair of nodes and
/// quadrature weights of a linear rule `Σ a_k f(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet {
    d: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(d: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for (k, pt) in points.iter().enumerate() {
            if pt.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "point {k} has dimension {}, expected {d}",
                    pt.len()
                )));
            }
            coords.extend_from_slice(pt);
        }
        Self::from_flat(d, coords, weights)
    }

    /// Construct from row-major coordinates (`N·d` values).
    pub fn from_flat(d: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidArgument("point set must contain at least one point".into()));
        }
        if coords.len() != d * weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not match {} points in dimension {d}",
                coords.len(),
                weights.len()
            )));
        }
        if let Some(i) = coords.iter().position(|&c| !(0.0..1.0).contains(&c)) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {} of point {} is {}, outside [0, 1)",
                i % d,
                i / d,
                coords[i]
            )));
        }
        if let Some(k) = weights.iter().position(|&a| !a.is_finite() || a < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight {k} is {}, must be finite and non-negative",
                weights[k]
            )));
        }
        Ok(WeightedPointSet { d, coords, weights })
    }

    /// Equal-weight (QMC) rule with `a_k = 1/N`.
    pub fn qmc(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(d, points, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.d..(k + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Same nodes, weights multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_flat(self.d, self.coords.clone(), self.weights.iter().map(|a| a * c).collect())
    }

    /// Discrepancy function `Δ(x) = Σ a_k 1[t_k < x] − x₁⋯x_d` on the
    /// half-open box `[0, x)`.
    pub fn discrepancy_function(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "x has dimension {}, point set has {}",
                x.len(),
                self.d
            )));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("x must lie in [0, 1]^d".into()));
        }
        Ok(self.local_discrepancy(x))
    }

    pub(crate) fn local_discrepancy(&self, x: &[f64]) -> f64 {
        let mut count = 0.0;
        for (pt, a) in self.points().zip(&self.weights) {
            if pt.iter().zip(x).all(|(t, xj)| t < xj) {
                count += a;
            }
        }
        count - x.iter().product::<f64>()
    }

    /// Write the plain-text format: `d N` header, then one line per point
    /// with `d` coordinates and the weight, 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.d, self.len())?;
        let mut line = String::new();
        for (pt, a) in self.points().zip(&self.weights) {
            line.clear();
            for c in pt {
                write!(line, "{c:.16e} ").expect("string write");
            }
            write!(line, "{a:.16e}").expect("string write");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in reader.lines() {
            let line = line?;
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let mut next_usize = |what: &str| -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse(format!("missing {what} in header")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
        };
        let d = next_usize("dimension")?;
        let n = next_usize("point count")?;
        let values: Vec<f64> = it
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if values.len() != n * (d + 1) {
            return Err(Error::Parse(format!(
                "expected {} numbers for {n} points in dimension {d}, found {}",
                n * (d + 1),
                values.len()
            )));
        }
        let mut coords = Vec::with_capacity(n * d);
        let mut weights = Vec::with_capacity(n);
        for row in values.chunks_exact(d + 1) {
            coords.extend_from_slice(&row[..d]);
            weights.push(row[d]);
        }
        Self::from_flat(d, coords, weights)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(f))
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Hölder-conjugate pair `1/p + 1/q = 1`, `p ∈ [1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponent {
    pub p: f64,
    pub q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() {
            return Err(Error::UnsupportedExponent(p));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must be >= 1")));
        }
        let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        Ok(Exponent { p, q })
    }
}

/// Which family a product density belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    Optimal(f64),
    Custom,
}

/// Tensor-product density `ρ_d(t) = Π ρ(t_j)` on `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct ProductDensity {
    pub d: usize,
    pub marginal: Arc<Density1D>,
    pub kind: DensityKind,
}

impl ProductDensity {
    pub fn uniform(d: usize) -> Self {
        ProductDensity { d, marginal: Arc::new(Density1D::uniform()), kind: DensityKind::Uniform }
    }

    pub fn optimal(d: usize, p: f64) -> Result<Self> {
        Ok(ProductDensity {
            d,
            marginal: Arc::new(optimal_density(p)?),
            kind: DensityKind::Optimal(p),
        })
    }

    pub fn custom(d: usize, marginal: Density1D) -> Self {
        ProductDensity { d, marginal: Arc::new(marginal), kind: DensityKind::Custom }
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        t.iter().map(|&tj| self.marginal.value(tj)).product()
    }
}

/// Initial error `(p+1)^{−d/p}`: the worst-case error of the zero rule.
pub fn initial_error(p: f64, d: usize) -> Result<f64> {
    let e = Exponent::new(p)?;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(int_power((e.p + 1.0).powf(-1.0 / e.p), d))
}

/// `base^d`, by repeated multiplication for `d ≤ 30` and `exp/log` above.
pub(crate) fn int_power(base: f64, d: usize) -> f64 {
    if d <= 30 {
        base.powi(d as i32)
    } else {
        (d as f64 * base.ln()).exp()
    }
}

/// Importance-sampling weights `a_k = 1/(N ρ_d(t_k))`.
pub fn weights_from_density(points: Vec<Vec<f64>>, rho: &ProductDensity) -> Result<WeightedPointSet> {
    let n = points.len();
    let mut coords = Vec::with_capacity(n * rho.d);
    for (k, pt) in points.iter().enumerate() {
        if pt.len() != rho.d {
            return Err(Error::InvalidArgument(format!(
                "point {k} has dimension {}, density has {}",
                pt.len(),
                rho.d
            )));
        }
        coords.extend_from_slice(pt);
    }
    weights_from_density_flat(rho.d, coords, rho)
}

pub(crate) fn weights_from_density_flat(
    d: usize,
    coords: Vec<f64>,
    rho: &ProductDensity,
) -> Result<WeightedPointSet> {
    let n = coords.len() / d;
    let nf = n as f64;
    let mut weights = Vec::with_capacity(n);
    for (k, pt) in coords.chunks_exact(d).enumerate() {
        let r = rho.value(pt);
        let a = 1.0 / (nf * r);
        if !(r > 0.0) || !a.is_finite() {
            return Err(Error::DegenerateWeight { index: k, density: r });
        }
        weights.push(a);
    }
    WeightedPointSet::from_flat(d, coords, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(d: usize, t: Vec<f64>, a: f64) -> WeightedPointSet {
        WeightedPointSet::new(d, vec![t], vec![a]).unwrap()
    }

    #[test]
    fn discrepancy_function_examples() {
        assert_eq!(single(1, vec![0.0], 1.0).discrepancy_function(&[1.0]).unwrap(), 0.0);
        assert_eq!(single(1, vec![0.5], 1.0).discrepancy_function(&[0.5]).unwrap(), -0.5);
        let ps = single(2, vec![0.25, 0.25], 0.5);
        assert_eq!(ps.discrepancy_function(&[0.5, 0.5]).unwrap(), 0.25);
        assert!(ps.discrepancy_function(&[0.5]).is_err());
    }

    #[test]
    fn construction_rejects_invalid() {
        assert!(WeightedPointSet::new(1, vec![vec![1.0]], vec![1.0]).is_err());
        assert!(WeightedPointSet::new(1, vec![vec![0.2]], vec![-1.0]).is_err());
        assert!(WeightedPointSet::new(1, vec![vec![0.2]], vec![f64::NAN]).is_err());
        assert!(WeightedPointSet::new(1, vec![], vec![]).is_err());
        assert!(WeightedPointSet::new(2, vec![vec![0.2]], vec![1.0]).is_err());
    }

    #[test]
    fn initial_error_examples() {
        assert!((initial_error(2.0, 1).unwrap() - 3f64.powf(-0.5)).abs() < 1e-16);
        assert!((initial_error(2.0, 1).unwrap() - 0.577_35).abs() < 1e-5);
        assert!((initial_error(1.0, 3).unwrap() - 0.125).abs() < 1e-16);
        assert!((initial_error(2.0, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(initial_error(f64::INFINITY, 1), Err(Error::UnsupportedExponent(_))));
        let e40 = initial_error(2.0, 40).unwrap();
        assert!((e40 / 3f64.powf(-20.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn initial_error_tensorizes() {
        for p in [1.0, 1.5, 2.0, 4.0, 10.0] {
            let base = initial_error(p, 1).unwrap();
            for d in 1..=12 {
                assert_eq!(initial_error(p, d).unwrap(), base.powi(d as i32));
            }
        }
    }

    #[test]
    fn exponent_conjugates() {
        let e = Exponent::new(3.0).unwrap();
        assert!((1.0 / e.p + 1.0 / e.q - 1.0).abs() < 1e-12);
        assert_eq!(Exponent::new(1.0).unwrap().q, f64::INFINITY);
        assert!(Exponent::new(0.5).is_err());
    }

    #[test]
    fn weights_from_density_examples() {
        let pts = vec![vec![0.1], vec![0.2], vec![0.7], vec![0.9]];
        let ps = weights_from_density(pts.clone(), &ProductDensity::uniform(1)).unwrap();
        assert!(ps.weights().iter().all(|&a| a == 0.25));
        let n = 3.0;
        let opt2 = ProductDensity::optimal(1, 2.0).unwrap();
        let ps = weights_from_density(vec![vec![0.0], vec![0.5], vec![0.5]], &opt2).unwrap();
        assert!((ps.weights()[0] - 2.0 / (3.0 * n)).abs() < 1e-16);
        let opt1 = ProductDensity::optimal(1, 1.0).unwrap();
        let ps = weights_from_density(vec![vec![0.0], vec![0.5], vec![0.5]], &opt1).unwrap();
        assert!((ps.weights()[0] - 1.0 / (2.0 * n)).abs() < 1e-15);
    }

    #[test]
    fn weights_from_density_rejects_vanishing_density() {
        // ρ = 0 on [0.5, 1] for this table
        let table = Density1D::from_table(vec![0.0, 0.5, 1.0], vec![2.0, 0.0, 0.0]).unwrap();
        let rho = ProductDensity::custom(1, table);
        let err = weights_from_density(vec![vec![0.1], vec![0.75]], &rho).unwrap_err();
        assert!(matches!(err, Error::DegenerateWeight { index: 1, .. }));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let ps = WeightedPointSet::new(
            2,
            vec![vec![0.1, 1.0 / 3.0], vec![0.0, 0.999_999_999_999]],
            vec![std::f64::consts::PI / 7.0, 1e-300],
        )
        .unwrap();
        let mut buf = Vec::new();
        ps.write_text(&mut buf).unwrap();
        let back = WeightedPointSet::read_text(&buf[..]).unwrap();
        assert_eq!(ps, back);
        assert!(String::from_utf8(buf).unwrap().starts_with("2 2\n"));
        assert!(WeightedPointSet::read_text("1 2\n0.5 1\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn full_box_equals_total_weight_minus_one(
            pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..2.0), 1..20)
        ) {
            let ps = WeightedPointSet::new(
                2,
                pts.iter().map(|p| vec![p.0, p.1]).collect(),
                pts.iter().map(|p| p.2).collect(),
            ).unwrap();
            let total: f64 = ps.weights().iter().sum();
            prop_assert_eq!(ps.discrepancy_function(&[1.0, 1.0]).unwrap(), total - 1.0);
        }

        #[test]
        fn adding_a_point_never_decreases_delta(
            pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..10),
            extra in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0),
            x in (0.0f64..=1.0, 0.0f64..=1.0),
        ) {
            let mut p: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
            let mut w: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let before = WeightedPointSet::new(2, p.clone(), w.clone()).unwrap();
            p.push(vec![extra.0, extra.1]);
            w.push(extra.2);
            let after = WeightedPointSet::new(2, p, w).unwrap();
            let xs = [x.0, x.1];
            prop_assert!(after.discrepancy_function(&xs).unwrap() >= before.discrepancy_function(&xs).unwrap());
        }
    }
}
