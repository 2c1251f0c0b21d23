//! Golden-value checks behind `disclab verify`.

use std::f64::consts::PI;
use std::io::Write;

use crate::bounds::{alpha_new, alpha_old, gamma_prefactor_with};
use crate::density::{j_functional, optimal_density, variational_solution};
use crate::discrepancy::{c_kernel_1d, l2_discrepancy_kernel, lp_discrepancy_cells, lp_discrepancy_even};
use crate::error::{Error, Result};
use crate::experiments::{exact_mean_sq_p2, run_average_discrepancy, ClosedFormDensity, DensitySpec, ExperimentConfig};
use crate::pointset::WeightedPointSet;

pub const GROUPS: [&str; 6] = ["p2", "density", "alpha", "gamma", "discrepancy", "mc"];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Checks {
    out: Vec<CheckOutcome>,
    group: &'static str,
}

impl Checks {
    fn close(&mut self, name: impl Into<String>, value: f64, expected: f64, tolerance: f64) {
        let pass = (value - expected).abs() <= tolerance;
        self.out.push(CheckOutcome { group: self.group, name: name.into(), value, expected, tolerance, pass });
    }
}

/// Run the checks of one group or all of them, printing one line per check.
/// `ln_gamma_fn` feeds the prefactor checks so a faulty Γ can be detected.
/// Returns whether every check passed.
pub fn run_verify<W: Write>(only: Option<&str>, ln_gamma_fn: fn(f64) -> f64, out: &mut W) -> Result<bool> {
    if let Some(g) = only {
        if !GROUPS.contains(&g) {
            return Err(Error::InvalidArgument(format!("unknown check group {g:?}; expected one of {GROUPS:?}")));
        }
    }
    let mut all = Vec::new();
    for group in GROUPS {
        if only.is_some_and(|g| g != group) {
            continue;
        }
        let mut c = Checks { out: Vec::new(), group };
        match group {
            "p2" => p2_checks(&mut c)?,
            "density" => density_checks(&mut c)?,
            "alpha" => alpha_checks(&mut c),
            "gamma" => gamma_checks(&mut c, ln_gamma_fn),
            "discrepancy" => discrepancy_checks(&mut c)?,
            "mc" => mc_checks(&mut c)?,
            _ => unreachable!(),
        }
        all.extend(c.out);
    }
    for o in &all {
        writeln!(
            out,
            "{} [{}] {}: got {:.15e}, expected {:.15e} (tol {:e})",
            if o.pass { "PASS" } else { "FAIL" },
            o.group,
            o.name,
            o.value,
            o.expected,
            o.tolerance
        )?;
    }
    let failed = all.iter().filter(|o| !o.pass).count();
    writeln!(out, "{} checks, {} failed", all.len(), failed)?;
    Ok(failed == 0)
}

fn p2_checks(c: &mut Checks) -> Result<()> {
    let rho = optimal_density(2.0)?;
    c.close("C(K_1, rho*) at p=2", c_kernel_1d(&rho)?, 4.0 / 9.0, 1e-12);
    c.close("J_min(2)", variational_solution(2.0)?.j_min, 4.0 / 9.0, 1e-12);
    c.close("J(rho*) by quadrature at p=2", j_functional(&rho, 2.0)?, 4.0 / 9.0, 1e-7);
    let one = WeightedPointSet::new(1, vec![vec![1.0 / 3.0]], vec![2.0 / 3.0])?;
    c.close("one-point rule a=2/3, t=1/3", l2_discrepancy_kernel(&one)?.value, 27f64.sqrt().recip(), 1e-12);
    let mid = WeightedPointSet::new(1, vec![vec![0.5]], vec![1.0])?;
    c.close("one-point rule a=1, t=1/2", l2_discrepancy_kernel(&mid)?.value, 12f64.sqrt().recip(), 1e-12);
    Ok(())
}

fn density_checks(c: &mut Checks) -> Result<()> {
    for p in [1.0, 2.0, 3.0, 10.0] {
        c.close(format!("S1*({p})"), variational_solution(p)?.s1, (p + 2.0) / (p + 1.0), 1e-12);
    }
    for p in [1.0, 1.5, 2.0, 3.0, 10.0, 100.0] {
        let rho = optimal_density(p)?;
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            worst = worst.max(rho.eq_rho_residual(i as f64 / 1000.0)?.abs());
        }
        c.close(format!("max residual of the density equation, p={p}"), worst, 0.0, 1e-9);
        c.close(format!("total mass, p={p}"), rho.cdf(1.0), 1.0, 1e-9);
        c.close(format!("rho*(0), p={p}"), rho.value(0.0), (p + 1.0) / p, 1e-12);
        c.close(format!("rho*(1), p={p}"), rho.value(1.0), 0.0, 1e-12);
    }
    Ok(())
}

fn alpha_checks(c: &mut Checks) {
    c.close("alpha_old^2(2)", alpha_old(2.0).powi(2), 1.5, 1e-12);
    c.close("alpha_old^2(10)", alpha_old(10.0).powi(2), 1.13, 0.005);
    c.close("alpha_old^2(100)", alpha_old(100.0).powi(2), 1.014, 0.002);
    c.close("alpha_new(1)", alpha_new(1.0), 1.5f64.sqrt(), 1e-12);
}

fn gamma_checks(c: &mut Checks, ln_gamma_fn: fn(f64) -> f64) {
    // Γ(1) = 1 and Γ(3/2) = √π/2 give the prefactor in closed form
    c.close("Gamma prefactor at p=1", gamma_prefactor_with(1.0, ln_gamma_fn), (2.0 / PI).sqrt(), 1e-12);
    c.close("Gamma prefactor at p=2", gamma_prefactor_with(2.0, ln_gamma_fn), 1.0, 1e-12);
    // Γ(5/2) = 3√π/4
    let p4 = 2f64.sqrt() / PI.powf(1.0 / 8.0) * (0.75 * PI.sqrt()).powf(0.25);
    c.close("Gamma prefactor at p=4", gamma_prefactor_with(4.0, ln_gamma_fn), p4, 1e-12);
}

fn discrepancy_checks(c: &mut Checks) -> Result<()> {
    let ps = WeightedPointSet::new(
        2,
        vec![vec![0.125, 0.75], vec![0.5, 0.25], vec![0.875, 0.5]],
        vec![0.4, 0.3, 0.35],
    )?;
    let k = l2_discrepancy_kernel(&ps)?.value;
    c.close("kernel vs even-p expansion at p=2", lp_discrepancy_even(&ps, 2)?.value, k, 1e-12);
    c.close("kernel vs cell quadrature at p=2", lp_discrepancy_cells(&ps, 2.0, 8)?.value, k, 1e-10);
    let e4 = lp_discrepancy_even(&ps, 4)?.value;
    c.close("even-p expansion vs cells at p=4", lp_discrepancy_cells(&ps, 4.0, 8)?.value, e4, 1e-10);
    let zero = WeightedPointSet::new(2, vec![vec![0.3, 0.6]], vec![0.0])?;
    c.close("zero rule gives the initial error at p=2", l2_discrepancy_kernel(&zero)?.value, 1.0 / 3.0, 1e-15);
    Ok(())
}

fn mc_checks(c: &mut Checks) -> Result<()> {
    // the expectation identity at p = 2, judged at four standard errors
    for (spec, kind, label) in [
        (DensitySpec::Uniform, ClosedFormDensity::Uniform, "uniform"),
        (DensitySpec::Optimal, ClosedFormDensity::Optimal, "optimal"),
    ] {
        let cfg = ExperimentConfig::new(2.0, 2, 8, spec, 4000, 20_240_601);
        let r = run_average_discrepancy(&cfg)?;
        let exact = exact_mean_sq_p2(8, 2, kind);
        c.close(format!("E[e^2] for {label} sampling, N=8, d=2"), r.mean_lp_p, exact, 4.0 * r.std_error);
    }
    Ok(())
}
