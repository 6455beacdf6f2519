//! Seeded Monte Carlo harness.
//!
//! Trial `t` at sample size `n` always draws from the stream keyed by
//! `mix_seed(master_seed, n, t)`, and per-trial results are combined with
//! integer counts or in trial order. Output is therefore identical for any
//! thread count.

use rayon::prelude::*;
use vbht_core::asymptotics::{
    alpha_star, asymptote_per_sample, deterministic_term, trimmed_sum_asymptote,
    trimmed_sum_expectation,
};
use vbht_core::hypothesis::threshold;
use vbht_core::sampling::mix_seed;
use vbht_core::{solve, Hyperparameters, Probability, SolverConfig};

pub use vbht_core::sampling::{sample_mixture, sample_null};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub levels: Vec<Probability>,
    pub hyper: Hyperparameters,
    pub master_seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::Invalid(format!("sample size {n} is below 2")));
        }
        if let Some(l) = self
            .levels
            .iter()
            .find(|l| !(l.value() > 0.0 && l.value() < 1.0))
        {
            return Err(Error::Invalid(format!(
                "level {} is outside (0, 1)",
                l.value()
            )));
        }
        alpha_star(self.hyper.phi())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionRow {
    pub n: usize,
    pub level: Probability,
    pub rejected: usize,
    pub trials: usize,
    pub rate: Probability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteRow {
    pub n: usize,
    pub trial: usize,
    pub delta_f_numeric: f64,
    pub delta_f_asymptote: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimsumSummary {
    pub n: usize,
    pub n1: usize,
    pub reps: usize,
    pub empirical_mean: f64,
    pub asymptote: f64,
    pub exact_expectation: f64,
    pub ratio_to_asymptote: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPoint {
    pub phi: f64,
    pub alpha0: f64,
}

/// Seed of trial `trial` at sample size `n`.
pub fn trial_seed(master_seed: u64, n: usize, trial: usize) -> u64 {
    mix_seed(master_seed, n as u64, trial as u64)
}

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        Ok(job())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        Ok(pool.install(job))
    }
}

/// `ΔF` of the fitted solution for `trials` null samples of size `n`, in
/// trial order.
pub fn null_gaps(
    n: usize,
    trials: usize,
    hyper: &Hyperparameters,
    config: &SolverConfig,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<f64>> {
    config.validate()?;
    in_pool(threads, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let sample = sample_null(n, trial_seed(master_seed, n, t))?;
                Ok(solve(&sample, hyper, config)?.delta_f)
            })
            .collect::<Result<Vec<f64>>>()
    })?
}

/// Empirical size of the VB test: for each `n` and level, the fraction of
/// null samples it rejects.
///
/// The fit does not depend on the level, so each sample is solved once and
/// compared against every threshold.
pub fn rejection_table(grid: &ExperimentGrid, config: &SolverConfig) -> Result<Vec<RejectionRow>> {
    grid.validate()?;
    config.validate()?;
    let mut rows = Vec::with_capacity(grid.sample_sizes.len() * grid.levels.len());
    for &n in &grid.sample_sizes {
        let thresholds = grid
            .levels
            .iter()
            .map(|l| threshold(n, &grid.hyper, l.value()))
            .collect::<vbht_core::Result<Vec<f64>>>()?;
        let gaps = null_gaps(
            n,
            grid.trials,
            &grid.hyper,
            config,
            grid.master_seed,
            grid.threads,
        )?;
        for (level, t) in grid.levels.iter().zip(&thresholds) {
            let rejected = gaps.iter().filter(|&&g| g < *t).count();
            rows.push(RejectionRow {
                n,
                level: *level,
                rejected,
                trials: grid.trials,
                rate: Probability::new(rejected as f64 / grid.trials as f64)?,
            });
        }
    }
    Ok(rows)
}

/// Numeric `ΔF` next to its per-sample asymptote `D - ξ̂²/2`.
pub fn asymptote_comparison(
    sample_sizes: &[usize],
    sets_per_size: usize,
    hyper: &Hyperparameters,
    config: &SolverConfig,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<AsymptoteRow>> {
    config.validate()?;
    for &n in sample_sizes {
        deterministic_term(n, hyper)?;
    }
    let mut rows = Vec::with_capacity(sample_sizes.len() * sets_per_size);
    for &n in sample_sizes {
        let chunk = in_pool(threads, || {
            (0..sets_per_size)
                .into_par_iter()
                .map(|t| {
                    let sample = sample_null(n, trial_seed(master_seed, n, t))?;
                    Ok(AsymptoteRow {
                        n,
                        trial: t,
                        delta_f_numeric: solve(&sample, hyper, config)?.delta_f,
                        delta_f_asymptote: asymptote_per_sample(&sample, hyper)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })??;
        rows.extend(chunk);
    }
    Ok(rows)
}

/// Mean over `reps` null samples of the sum of the `n1` largest values.
pub fn trimsum_experiment(
    n: usize,
    n1: usize,
    reps: usize,
    master_seed: u64,
    threads: usize,
) -> Result<TrimsumSummary> {
    let asymptote = trimmed_sum_asymptote(n, n1)?;
    let exact_expectation = trimmed_sum_expectation(n, n1)?;
    if reps == 0 {
        return Err(Error::Invalid("reps must be at least 1".into()));
    }
    let sums = in_pool(threads, || {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                Ok(top_sum(
                    sample_null(n, trial_seed(master_seed, n, r))?.into_values(),
                    n1,
                ))
            })
            .collect::<Result<Vec<f64>>>()
    })??;
    let empirical_mean = sums.iter().sum::<f64>() / reps as f64;
    Ok(TrimsumSummary {
        n,
        n1,
        reps,
        empirical_mean,
        asymptote,
        exact_expectation,
        ratio_to_asymptote: empirical_mean / asymptote,
    })
}

// Sum of the k largest values, by selection rather than a full sort.
fn top_sum(mut v: Vec<f64>, k: usize) -> f64 {
    let cut = v.len() - k;
    v.select_nth_unstable_by(cut, f64::total_cmp);
    v[cut..].iter().sum()
}

/// `α₀(φ)` at each grid point; every φ must exceed 1.
pub fn alpha_curve(phis: &[f64]) -> Result<Vec<AlphaPoint>> {
    phis.iter()
        .map(|&phi| {
            Ok(AlphaPoint {
                phi,
                alpha0: alpha_star(phi)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(trials: usize, threads: usize) -> ExperimentGrid {
        ExperimentGrid {
            sample_sizes: vec![30, 60],
            trials,
            levels: [0.1, 0.05, 0.01]
                .iter()
                .map(|&l| Probability::new(l).unwrap())
                .collect(),
            hyper: Hyperparameters::default(),
            master_seed: 11,
            threads,
        }
    }

    #[test]
    fn single_trial_rate_is_zero_or_one() {
        let rows = rejection_table(&grid(1, 1), &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows {
            assert!(r.rate.value() == 0.0 || r.rate.value() == 1.0);
        }
    }

    #[test]
    fn nested_levels_give_ordered_rates() {
        let rows = rejection_table(&grid(200, 0), &SolverConfig::default()).unwrap();
        for pair in rows.chunks(3) {
            assert!(pair[0].rejected >= pair[1].rejected && pair[1].rejected >= pair[2].rejected);
            assert!(pair.iter().all(|r| r.rejected <= r.trials));
        }
    }

    #[test]
    fn grid_validation() {
        let mut g = grid(0, 0);
        assert!(g.validate().is_err());
        g.trials = 5;
        g.sample_sizes.push(1);
        assert!(g.validate().is_err());
        g.sample_sizes.pop();
        g.hyper = Hyperparameters::new(0.9, 1.0).unwrap();
        assert!(matches!(
            g.validate(),
            Err(Error::Core(vbht_core::Error::PhaseBoundary { .. }))
        ));
    }

    #[test]
    fn asymptote_rows_and_empty_sets() {
        let h = Hyperparameters::default();
        let cfg = SolverConfig::default();
        let rows = asymptote_comparison(&[40, 80], 3, &h, &cfg, 1, 0).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[4].n, rows[4].trial), (80, 1));
        assert!(asymptote_comparison(&[40], 0, &h, &cfg, 1, 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn top_sum_matches_sort() {
        let v = sample_null(1001, 3).unwrap().into_values();
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let expect: f64 = sorted[..17].iter().sum();
        assert!((top_sum(v, 17) - expect).abs() < 1e-12);
    }

    #[test]
    fn trimsum_boundaries() {
        let full = trimsum_experiment(50, 49, 2, 0, 0).unwrap();
        assert!(full.empirical_mean.is_finite());
        assert!(trimsum_experiment(50, 50, 2, 0, 0).is_err());
        assert!(trimsum_experiment(50, 0, 2, 0, 0).is_err());
        assert!(trimsum_experiment(50, 5, 0, 0, 0).is_err());
    }

    #[test]
    fn alpha_curve_values() {
        let pts = alpha_curve(&[1.5, 2.0, 20.0]).unwrap();
        assert!((pts[0].alpha0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((pts[1].alpha0 - 0.4).abs() < 1e-15);
        assert!((pts[2].alpha0 - 0.493_506_5).abs() < 1e-7);
        assert!((alpha_curve(&[1e3]).unwrap()[0].alpha0 - 0.5).abs() < 1e-3);
        assert!(alpha_curve(&[2.0, 1.0]).is_err());
    }
}
