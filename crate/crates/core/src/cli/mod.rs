//! Command-line front end.

mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::bounds::{figure_alpha_data, p_grid, write_alpha_csv};
use crate::density::optimal_density;
use crate::discrepancy::{self, DiscrepancyRecord, Method};
use crate::error::{Error, Result};
use crate::experiments::{run_average_discrepancy, sample_point_set, ExperimentConfig};
use crate::pointset::{ProductDensity, WeightedPointSet};

pub use verify::{run_verify, CheckOutcome, GROUPS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DISCLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "disclab", version, about = "Generalized L_p discrepancy laboratory")]
pub struct Cli {
    /// Seed for every random choice; generated and printed when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the optimal density (t, rho, cdf), optionally sampling points from it.
    Density {
        #[arg(long)]
        p: f64,
        /// Number of equispaced nodes on [0, 1].
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Draw this many points from the product density and write them with
        /// importance weights to --points-out.
        #[arg(long, requires = "points_out")]
        sample: Option<usize>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        points_out: Option<PathBuf>,
    },
    /// Evaluate the L_p discrepancy of a point-set file.
    Discrepancy {
        file: PathBuf,
        #[arg(long)]
        p: f64,
        /// kernel_p2, even_p_exact, cell_quadrature or monte_carlo; automatic when absent.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long, default_value_t = discrepancy::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Emit the alpha-constant table.
    Bounds {
        #[arg(long, default_value_t = 1.0)]
        pmin: f64,
        #[arg(long, default_value_t = 200.0)]
        pmax: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the golden-value checks.
    Verify {
        /// Restrict to one group: p2, density, alpha, gamma, discrepancy or mc.
        #[arg(long)]
        only: Option<String>,
    },
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Some(n),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return EXIT_ERROR;
            }
        },
        Err(_) => None,
    };
    let outcome = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(Error::InvalidArgument(e.to_string())),
        },
        None => run(cli),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::rng().random();
        eprintln!("seed: {s} (generated; pass --seed {s} to reproduce)");
        s
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Execute a parsed command.
pub fn run(cli: Cli) -> Result<i32> {
    let seed = cli.seed;
    match cli.command {
        Command::Density { p, grid, out, format, sample, dim, points_out } => {
            let density = optimal_density(p)?;
            let mut w = open_out(out.as_deref())?;
            match format {
                Format::Csv => density.write_csv(grid, &mut w)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &density.sample_rows(grid)?)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
            if let (Some(n), Some(path)) = (sample, points_out) {
                let seed = resolve_seed(seed);
                let rho = ProductDensity::optimal(dim, p)?;
                let (ps, resampled) = sample_point_set(&rho, n, seed, 0)?;
                if resampled > 0 {
                    eprintln!("warning: {resampled} draws resampled where the density vanishes");
                }
                ps.write_file(&path)?;
            }
            Ok(EXIT_OK)
        }
        Command::Discrepancy { file, p, method, order, samples, out, format } => {
            let ps = WeightedPointSet::read_file(&file)?;
            let method = method.unwrap_or_else(|| Method::auto(p, ps.dim()));
            let mc_seed = if method == Method::MonteCarlo { resolve_seed(seed) } else { 0 };
            let r = discrepancy::evaluate(&ps, p, method, order, samples, mc_seed)?;
            let rec = DiscrepancyRecord::new(&ps, &r);
            let mut w = open_out(out.as_deref())?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &rec)?;
                    writeln!(w)?;
                }
                Format::Csv => {
                    writeln!(w, "p,d,N,method,value,abs_error_estimate")?;
                    writeln!(
                        w,
                        "{},{},{},{},{:.17e},{:e}",
                        rec.p,
                        rec.d,
                        rec.n,
                        rec.method.name(),
                        rec.value,
                        rec.abs_error_estimate
                    )?;
                }
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Experiment { config, out, format } => {
            let cfg = load_config(&config, seed)?;
            let report = run_average_discrepancy(&cfg)?;
            if report.resampled > 0 {
                eprintln!(
                    "warning: {} of {} draws resampled where the density vanishes",
                    report.resampled, report.draws
                );
            }
            let mut w = open_out(out.as_deref())?;
            match format {
                Format::Json => writeln!(w, "{}", report.to_json()?)?,
                Format::Csv => report.write_csv(&mut w)?,
            }
            w.flush()?;
            eprintln!(
                "seed: {}  N^(1/2) n_av_p = {} +- {}",
                report.seed, report.scaled, report.scaled_std_error
            );
            Ok(EXIT_OK)
        }
        Command::Bounds { pmin, pmax, steps, out, format } => {
            if !(pmin >= 1.0 && pmax >= pmin && steps >= 1) {
                return Err(Error::InvalidArgument(format!(
                    "need 1 <= pmin <= pmax and steps >= 1, got pmin={pmin} pmax={pmax} steps={steps}"
                )));
            }
            let rows = figure_alpha_data(&p_grid(pmin, pmax, steps))?;
            let mut w = open_out(out.as_deref())?;
            match format {
                Format::Csv => write_alpha_csv(&rows, &mut w)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &rows)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Verify { only } => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            let all_pass = run_verify(only.as_deref(), crate::bounds::ln_gamma, &mut w)?;
            Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
    }
}

/// Read an experiment config; a `--seed` flag overrides the file, and a
/// missing seed is generated and printed.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("experiment config must be a JSON object".into()))?;
    let seed = match (seed, obj.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.as_u64().ok_or_else(|| Error::Parse("seed must be a u64".into()))?,
        (None, None) => resolve_seed(None),
    };
    obj.insert("seed".into(), seed.into());
    let cfg: ExperimentConfig = serde_json::from_value(value)?;
    cfg.validate()?;
    Ok(cfg)
}
