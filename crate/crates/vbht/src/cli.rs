//! Command-line front end.
//!
//! Exit codes: 0 when the command ran (a test decision is part of the
//! output, never the status), 2 for usage or input errors, 3 when
//! `--strict` is set and the solver did not converge.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vbht_core::asymptotics::alpha_star;
use vbht_core::{run_test, solve, Hyperparameters, Probability, Sample, SolverConfig};

use crate::error::{Error, Result};
use crate::experiments::{
    alpha_curve, asymptote_comparison, rejection_table, trimsum_experiment, ExperimentGrid,
};
use crate::format;
use crate::input::read_values;
use crate::svg::{Marker, Plot, Series};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "vbht",
    version,
    about = "Variational-Bayes homogeneity test for two-component normal mixtures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Dirichlet concentration of the mixing weights.
    #[arg(long, global = true, default_value_t = 20.0)]
    pub phi: f64,
    /// Prior variance of the second component's mean.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, global = true, env = "VBHT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for Monte Carlo commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Random starts in addition to the two deterministic ones.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Write the CSV or JSON here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Exit with status 3 if the solver did not converge (test, fit).
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the test on a file of observations (or standard input) and print a JSON report.
    Test {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
    },
    /// Fit the VB posterior and print its summary as JSON.
    Fit { input: Option<PathBuf> },
    /// Rejection rates under the null.
    Simulate {
        #[arg(long = "n", value_delimiter = ',', default_values_t = [100usize, 200, 400, 800])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.01])]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 5000)]
        trials: usize,
    },
    /// Numeric free-energy gap against its asymptote.
    Asymptote {
        #[arg(long = "n", value_delimiter = ',', default_values_t = [200usize, 400, 800, 1600, 3200, 6400])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        sets: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Mean sum of the n1 largest of n standard normal draws.
    Trimsum {
        #[arg(long = "n", default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        n1: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
    },
    /// Limiting responsibility mass α₀ as a function of φ.
    AlphaCurve {
        /// Explicit grid; overrides --phi-min/--phi-max/--points.
        #[arg(long, value_delimiter = ',')]
        phis: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.05)]
        phi_min: f64,
        #[arg(long, default_value_t = 10.0)]
        phi_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

impl Common {
    fn hyper(&self) -> Result<Hyperparameters> {
        Ok(Hyperparameters::new(self.phi, self.sigma2)?)
    }

    fn solver(&self) -> Result<SolverConfig> {
        let mut c = SolverConfig {
            seed: self.seed,
            ..SolverConfig::default()
        };
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(m) = self.max_iters {
            c.max_iters = m;
        }
        if let Some(r) = self.restarts {
            c.restarts = r;
        }
        c.validate()?;
        Ok(c)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn load_sample(input: Option<&Path>, required: usize) -> Result<Sample> {
    let values = read_values(input)?;
    if values.len() < required {
        return Err(vbht_core::Error::TooFewObservations {
            required,
            got: values.len(),
        }
        .into());
    }
    Ok(Sample::new(values)?)
}

fn grid_phis(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !min.is_finite() || !max.is_finite() || max <= min {
        return Err(Error::Invalid(
            "alpha-curve grid needs --points >= 2 and --phi-min < --phi-max".into(),
        ));
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}

/// Runs a parsed command; `Ok(true)` means the strict convergence check failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    let hyper = common.hyper()?;
    let config = common.solver()?;
    let out = common.output.as_deref();

    match &cli.command {
        Command::Test { input, level } => {
            alpha_star(hyper.phi())?;
            Probability::new(*level)?;
            let sample = load_sample(input.as_deref(), 2)?;
            let report = run_test(&sample, &hyper, &config, *level)?;
            emit(out, &(format::report_json(&report) + "\n"))?;
            Ok(common.strict && !report.converged)
        }
        Command::Fit { input } => {
            let sample = load_sample(input.as_deref(), 1)?;
            let state = solve(&sample, &hyper, &config)?;
            emit(out, &(format::fit_json(&state, &hyper) + "\n"))?;
            Ok(common.strict && !state.converged)
        }
        Command::Simulate {
            sizes,
            levels,
            trials,
        } => {
            let grid = ExperimentGrid {
                sample_sizes: sizes.clone(),
                trials: *trials,
                levels: levels
                    .iter()
                    .map(|&l| Probability::new(l))
                    .collect::<vbht_core::Result<_>>()?,
                hyper,
                master_seed: common.seed,
                threads: common.threads,
            };
            grid.validate()?;
            let rows = rejection_table(&grid, &config)?;
            emit(out, &format::rejection_csv(&rows))?;
            Ok(false)
        }
        Command::Asymptote { sizes, sets, svg } => {
            alpha_star(hyper.phi())?;
            if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
                return Err(Error::Invalid(format!("sample size {n} is below 2")));
            }
            let rows =
                asymptote_comparison(sizes, *sets, &hyper, &config, common.seed, common.threads)?;
            emit(out, &format::asymptote_csv(&rows))?;
            if let Some(path) = svg {
                let plot = Plot {
                    title: format!("Free-energy gap, phi = {}", format::fmt_num(hyper.phi())),
                    x_label: "n".into(),
                    y_label: "delta F".into(),
                    log_x: true,
                    series: vec![
                        Series {
                            name: "numeric (VB-EM)".into(),
                            color: "#1f4fd1",
                            marker: Marker::Circle,
                            points: rows
                                .iter()
                                .map(|r| (r.n as f64, r.delta_f_numeric))
                                .collect(),
                        },
                        Series {
                            name: "asymptote".into(),
                            color: "#d1271f",
                            marker: Marker::Triangle,
                            points: rows
                                .iter()
                                .map(|r| (r.n as f64, r.delta_f_asymptote))
                                .collect(),
                        },
                    ],
                };
                write_file(path, &plot.to_svg())?;
            }
            Ok(false)
        }
        Command::Trimsum { n, n1, reps } => {
            let summary = trimsum_experiment(*n, *n1, *reps, common.seed, common.threads)?;
            emit(out, &format::trimsum_csv(&summary))?;
            Ok(false)
        }
        Command::AlphaCurve {
            phis,
            phi_min,
            phi_max,
            points,
            svg,
        } => {
            let grid = match phis {
                Some(p) => p.clone(),
                None => grid_phis(*phi_min, *phi_max, *points)?,
            };
            let curve = alpha_curve(&grid)?;
            emit(out, &format::alpha_curve_csv(&curve))?;
            if let Some(path) = svg {
                let plot = Plot {
                    title: "Limiting mass of the second component".into(),
                    x_label: "phi".into(),
                    y_label: "alpha0".into(),
                    log_x: false,
                    series: vec![Series {
                        name: "alpha0(phi)".into(),
                        color: "#1f4fd1",
                        marker: Marker::Line,
                        points: curve.iter().map(|p| (p.phi, p.alpha0)).collect(),
                    }],
                };
                write_file(path, &plot.to_svg())?;
            }
            Ok(false)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("vbht: solver did not converge");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("vbht: error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn linear_grid_hits_both_ends() {
        let g = grid_phis(1.5, 3.0, 4).unwrap();
        assert_eq!(g, vec![1.5, 2.0, 2.5, 3.0]);
        assert!(grid_phis(2.0, 2.0, 10).is_err());
    }
}
