//! The VB test: reject homogeneity when the free-energy gap falls below
//! `D - ½ χ²₁(1 - level)`.
//!
//! Under the null the gap behaves as `D - ξ²/2` with `ξ ~ N(0, 1)`, so the
//! threshold and the p-value only need the χ² distribution with one degree
//! of freedom. Defined for φ > 1 only.

use alloc::vec::Vec;

use crate::asymptotics::deterministic_term;
use crate::error::{Error, Result};
use crate::model::{Hyperparameters, Sample};
use crate::numerics::{chi2_1_quantile, chi2_1_sf, Probability};
use crate::solver::{solve, SolverConfig};

/// `ξ̂ = n^{-1/2} Σᵢ Xᵢ`, the sample realization of the N(0, 1) variable
/// driving the O(1) fluctuation of the gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiHat(f64);

impl XiHat {
    pub fn from_sample(sample: &Sample) -> Self {
        let mut v: Vec<f64> = sample.values().to_vec();
        v.sort_unstable_by(f64::total_cmp);
        Self(v.iter().sum::<f64>() / libm::sqrt(sample.n() as f64))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Outcome of one VB test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub n: usize,
    pub phi: f64,
    pub sigma2: f64,
    pub delta_f: f64,
    pub d_term: f64,
    pub xi_hat: f64,
    pub level: Probability,
    pub threshold: f64,
    pub p_value: Probability,
    pub reject: bool,
    pub n1: f64,
    pub b_mean: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "threshold",
            value: level,
            expected: "0 < level < 1",
        })
    }
}

fn threshold_from_d(d: f64, level: f64) -> Result<f64> {
    check_level(level)?;
    Ok(d - 0.5 * chi2_1_quantile(1.0 - level)?)
}

fn p_value_from_d(d: f64, delta_f: f64) -> Probability {
    let gap = d - delta_f;
    if gap > 0.0 {
        chi2_1_sf(2.0 * gap)
    } else {
        // Covers gap <= 0 and a NaN statistic.
        Probability::saturating(1.0)
    }
}

/// Rejection threshold `D(n, φ, σ²) - ½ χ²₁(1 - level)`.
pub fn threshold(n: usize, hyper: &Hyperparameters, level: f64) -> Result<f64> {
    let d = deterministic_term(n, hyper)?.d;
    threshold_from_d(d, level)
}

/// `P(D - ξ²/2 <= delta_f)`: `1 - F_{χ²₁}(2(D - delta_f))` below `D`, else 1.
pub fn p_value(delta_f: f64, n: usize, hyper: &Hyperparameters) -> Result<Probability> {
    let d = deterministic_term(n, hyper)?.d;
    Ok(p_value_from_d(d, delta_f))
}

/// Fit the VB free energy and decide at `level`.
///
/// Non-convergence does not fail the test; it is reported through
/// `converged` and the decision is still made on the best iterate.
pub fn run_test(
    sample: &Sample,
    hyper: &Hyperparameters,
    config: &SolverConfig,
    level: f64,
) -> Result<TestReport> {
    let n = sample.n();
    let d = deterministic_term(n, hyper)?.d;
    let threshold = threshold_from_d(d, level)?;
    let state = solve(sample, hyper, config)?;
    let delta_f = state.delta_f;
    Ok(TestReport {
        n,
        phi: hyper.phi(),
        sigma2: hyper.sigma2(),
        delta_f,
        d_term: d,
        xi_hat: XiHat::from_sample(sample).value(),
        level: Probability::new(level)?,
        threshold,
        p_value: p_value_from_d(d, delta_f),
        reject: delta_f < threshold,
        n1: state.resp.mass(),
        b_mean: state.moments.b_mean,
        iterations: state.iterations,
        converged: state.converged,
    })
}
