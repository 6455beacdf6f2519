//! The mixture model `(1 - a) N(0, 1) + a N(b, 1)` under a Dirichlet(φ, φ)
//! prior on the weights and `N(0, σ²)` on `b`, and the exact finite-n
//! variational quantities.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::numerics::{digamma_unchecked, ln_gamma_unchecked, HALF_LN_2PI};

/// Observations `X₁..Xₙ`, at least one, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewObservations {
                required: 1,
                got: 0,
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// The sample with every observation negated.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|x| -x).collect(),
        }
    }
}

/// Dirichlet concentration `phi` and prior variance `sigma2` of `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    phi: f64,
    sigma2: f64,
}

impl Hyperparameters {
    pub fn new(phi: f64, sigma2: f64) -> Result<Self> {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::Hyperparameter {
                name: "phi",
                value: phi,
            });
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Hyperparameter {
                name: "sigma2",
                value: sigma2,
            });
        }
        Ok(Self { phi, sigma2 })
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }

    #[inline]
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `ln Γ(2φ) - 2 ln Γ(φ)`, the log normalizer of the Dirichlet prior.
    /// Exactly zero for φ = 1.
    pub fn prior_log_normalizer(&self) -> f64 {
        if self.phi == 1.0 {
            return 0.0;
        }
        ln_gamma_unchecked(2.0 * self.phi) - 2.0 * ln_gamma_unchecked(self.phi)
    }
}

impl Default for Hyperparameters {
    /// φ = 20, σ² = 1.
    fn default() -> Self {
        Self {
            phi: 20.0,
            sigma2: 1.0,
        }
    }
}

/// Variational probabilities `ŷ_i1` that observation `i` belongs to the
/// shifted component; `ŷ_i0 = 1 - ŷ_i1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    y1: Vec<f64>,
}

impl Responsibilities {
    pub fn new(y1: Vec<f64>) -> Result<Self> {
        if let Some(&value) = y1.iter().find(|y| !(0.0..=1.0).contains(*y)) {
            return Err(Error::Domain {
                function: "Responsibilities::new",
                value,
                expected: "0 <= y <= 1",
            });
        }
        Ok(Self { y1 })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(alloc::vec![value; n])
    }

    pub(crate) fn from_vec_unchecked(y1: Vec<f64>) -> Self {
        debug_assert!(y1.iter().all(|y| (0.0..=1.0).contains(y)));
        Self { y1 }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.y1.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.y1.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.y1
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.y1
    }

    /// `n₁ = Σᵢ ŷ_i1`.
    pub fn mass(&self) -> f64 {
        self.y1.iter().sum()
    }
}

/// Posterior moments of `b` under `N(b_mean, b_second - b_mean²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BMoments {
    pub mean: f64,
    pub second: f64,
}

/// `⟨log a₀⟩` and `⟨log a₁⟩` under the Dirichlet posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeights {
    pub log_w0: f64,
    pub log_w1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorMoments {
    pub b_mean: f64,
    pub b_second: f64,
    pub log_w0: f64,
    pub log_w1: f64,
}

impl PosteriorMoments {
    pub fn from_parts(b: BMoments, w: LogWeights) -> Self {
        Self {
            b_mean: b.mean,
            b_second: b.second,
            log_w0: w.log_w0,
            log_w1: w.log_w1,
        }
    }

    /// `⟨b²⟩ - ⟨b⟩²`, clamped at zero.
    #[inline]
    pub fn b_variance(&self) -> f64 {
        (self.b_second - self.b_mean * self.b_mean).max(0.0)
    }
}

/// Mixing weight `a` in `[0, 1]` and second-component mean `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    a: f64,
    b: f64,
}

impl MixtureParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !b.is_finite() {
            return Err(Error::MixtureParams { a, b });
        }
        Ok(Self { a, b })
    }

    /// The null point `a = 0`.
    pub fn null() -> Self {
        Self { a: 0.0, b: 0.0 }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
}

fn check_len(sample: &Sample, resp: &Responsibilities) -> Result<()> {
    if sample.n() == resp.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: sample.n(),
            got: resp.len(),
        })
    }
}

/// Sufficient statistics of the responsibilities: `n₁ = Σ ŷ_i1` and
/// `s = Σ Xᵢ ŷ_i1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Stats {
    pub n1: f64,
    pub sx: f64,
}

pub(crate) fn stats(x: &[f64], y1: &[f64]) -> Stats {
    let mut n1 = 0.0;
    let mut sx = 0.0;
    for (&xi, &yi) in x.iter().zip(y1) {
        n1 += yi;
        sx += xi * yi;
    }
    Stats { n1, sx }
}

pub(crate) fn b_moments_from(st: Stats, hyper: &Hyperparameters) -> BMoments {
    let precision = st.n1 + 1.0 / hyper.sigma2;
    let mean = st.sx / precision;
    BMoments {
        mean,
        second: mean * mean + 1.0 / precision,
    }
}

pub(crate) fn log_weights_from(n: usize, n1: f64, hyper: &Hyperparameters) -> LogWeights {
    let n = n as f64;
    let phi = hyper.phi;
    // Rounding can push the mass a hair outside [0, n].
    let n1 = n1.clamp(0.0, n);
    let total = digamma_unchecked(n + 2.0 * phi);
    LogWeights {
        log_w0: digamma_unchecked(n - n1 + phi) - total,
        log_w1: digamma_unchecked(n1 + phi) - total,
    }
}

/// Posterior mean and second moment of `b` given the responsibilities.
pub fn b_moments(
    sample: &Sample,
    resp: &Responsibilities,
    hyper: &Hyperparameters,
) -> Result<BMoments> {
    check_len(sample, resp)?;
    Ok(b_moments_from(
        stats(sample.values(), resp.as_slice()),
        hyper,
    ))
}

/// `⟨log a_k⟩ = ψ(n_k + φ) - ψ(n + 2φ)`.
pub fn log_mix_weights(resp: &Responsibilities, hyper: &Hyperparameters) -> LogWeights {
    log_weights_from(resp.len(), resp.mass(), hyper)
}

/// Both posterior factors in one call.
pub fn posterior_moments(
    sample: &Sample,
    resp: &Responsibilities,
    hyper: &Hyperparameters,
) -> Result<PosteriorMoments> {
    check_len(sample, resp)?;
    let st = stats(sample.values(), resp.as_slice());
    Ok(PosteriorMoments::from_parts(
        b_moments_from(st, hyper),
        log_weights_from(sample.n(), st.n1, hyper),
    ))
}

/// Log-odds `log s - log t` of component 1 against component 0 for one
/// observation. The `X²` terms cancel, leaving `c + ⟨b⟩ x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogOdds {
    intercept: f64,
    slope: f64,
}

impl LogOdds {
    pub fn new(m: &PosteriorMoments) -> Self {
        let mean = m.b_mean;
        Self {
            intercept: m.log_w1 - m.log_w0 - 0.5 * (mean * mean + m.b_variance()),
            slope: mean,
        }
    }

    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Logistic function evaluated without overflow; returns exact 0 or 1 only
/// when the other branch underflows.
#[inline]
pub(crate) fn logistic(d: f64) -> f64 {
    if d >= 0.0 {
        1.0 / (1.0 + libm::exp(-d))
    } else {
        let e = libm::exp(d);
        e / (1.0 + e)
    }
}

pub(crate) fn update_into(x: &[f64], m: &PosteriorMoments, out: &mut [f64]) {
    let odds = LogOdds::new(m);
    for (yi, &xi) in out.iter_mut().zip(x) {
        *yi = logistic(odds.at(xi));
    }
}

/// One responsibility update: `ŷ_i1 = s / (s + t)` with
/// `log s = ⟨log a₁⟩ - ½[(Xᵢ - ⟨b⟩)² + Var b]` and `log t = ⟨log a₀⟩ - ½Xᵢ²`.
/// The larger exponent is factored out, so entries stay in `[0, 1]`.
pub fn responsibility_update(sample: &Sample, moments: &PosteriorMoments) -> Responsibilities {
    let mut y1 = alloc::vec![0.0; sample.n()];
    update_into(sample.values(), moments, &mut y1);
    Responsibilities::from_vec_unchecked(y1)
}

/// `y ln y + (1 - y) ln(1 - y)` with `0 ln 0 = 0`.
#[inline]
pub(crate) fn binary_neg_entropy(y: f64) -> f64 {
    let mut h = 0.0;
    if y > 0.0 {
        h += y * libm::log(y);
    }
    if y < 1.0 {
        h += (1.0 - y) * libm::log1p(-y);
    }
    h
}

/// Free-energy gap on data already in canonical order.
pub(crate) fn gap_kernel(x: &[f64], y1: &[f64], hyper: &Hyperparameters) -> f64 {
    let mut entropy = 0.0;
    let mut n1 = 0.0;
    let mut sx = 0.0;
    for (&xi, &yi) in x.iter().zip(y1) {
        entropy += binary_neg_entropy(yi);
        n1 += yi;
        sx += xi * yi;
    }
    gap_from_parts(x.len(), entropy, Stats { n1, sx }, hyper)
}

pub(crate) fn gap_from_parts(n: usize, entropy: f64, st: Stats, hyper: &Hyperparameters) -> f64 {
    let nf = n as f64;
    let phi = hyper.phi;
    let s2 = hyper.sigma2;
    let n1 = st.n1.clamp(0.0, nf);
    let n0 = (nf - n1).max(0.0);
    let gamma = ln_gamma_unchecked(nf + 2.0 * phi)
        - ln_gamma_unchecked(n1 + phi)
        - ln_gamma_unchecked(n0 + phi);
    let shrink = 0.5 * libm::log1p(s2 * n1);
    let fit = 0.5 * st.sx * st.sx / (n1 + 1.0 / s2);
    entropy + gamma + shrink - fit - hyper.prior_log_normalizer()
}

fn total_order(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// The free-energy gap `ΔF = F - F₀` for given responsibilities:
///
/// `Σᵢ[ŷ ln ŷ + (1-ŷ) ln(1-ŷ)] + ln Γ(n+2φ) - ln Γ(n₁+φ) - ln Γ(n-n₁+φ)
///  + ½ ln(1 + σ² n₁) - ½ (Σ Xᵢŷᵢ)² / (n₁ + 1/σ²) - [ln Γ(2φ) - 2 ln Γ(φ)]`.
///
/// Pairs are summed in a canonical order so the value does not depend on
/// how the observations are listed.
pub fn free_energy_gap(
    sample: &Sample,
    resp: &Responsibilities,
    hyper: &Hyperparameters,
) -> Result<f64> {
    check_len(sample, resp)?;
    let mut pairs: Vec<(f64, f64)> = sample
        .values()
        .iter()
        .copied()
        .zip(resp.as_slice().iter().copied())
        .collect();
    pairs.sort_unstable_by(total_order);
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(gap_kernel(&x, &y, hyper))
}

/// Negative log marginal likelihood under the null: `½ΣXᵢ² + (n/2) ln 2π`.
pub fn null_free_energy(sample: &Sample) -> f64 {
    let mut sq: Vec<f64> = sample.values().iter().map(|x| x * x).collect();
    sq.sort_unstable_by(f64::total_cmp);
    0.5 * sq.iter().sum::<f64>() + sample.n() as f64 * HALF_LN_2PI
}

/// The variational free energy `F = ΔF + F₀`.
pub fn free_energy(
    sample: &Sample,
    resp: &Responsibilities,
    hyper: &Hyperparameters,
) -> Result<f64> {
    Ok(free_energy_gap(sample, resp, hyper)? + null_free_energy(sample))
}

/// `log[(1 - a) N(x; 0, 1) + a N(x; b, 1)]`.
pub fn mixture_log_density(x: f64, params: &MixtureParams) -> f64 {
    let l0 = -0.5 * x * x - HALF_LN_2PI;
    let d = x - params.b;
    let l1 = -0.5 * d * d - HALF_LN_2PI;
    let a = params.a;
    if a == 0.0 {
        return l0;
    }
    if a == 1.0 {
        return l1;
    }
    let t0 = libm::log1p(-a) + l0;
    let t1 = libm::log(a) + l1;
    let (hi, lo) = if t0 >= t1 { (t0, t1) } else { (t1, t0) };
    hi + libm::log1p(libm::exp(lo - hi))
}
