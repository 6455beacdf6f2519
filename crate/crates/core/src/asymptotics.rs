//! Closed-form large-n behavior of the free-energy gap.
//!
//! For φ > 1 the minimizing configuration puts a fraction α₀ of the mass on
//! the shifted component and
//!
//! ```text
//! ΔF = D(n, φ, σ²) - ξ²/2 + o(1),   ξ ~ N(0, 1)
//! ```
//!
//! For φ < 1 the minimizer puts vanishing mass there and only the leading
//! order `φ ln(n/n₁) + ln n₁` is known; [`leading_order`] exposes it as a
//! diagnostic. The trimmed-sum functions back the extreme-value argument
//! used for that phase.

use crate::error::{Error, Result};
use crate::hypothesis::XiHat;
use crate::model::{Hyperparameters, Sample};
use crate::numerics::{std_normal_pdf, std_normal_quantile_unchecked, HALF_LN_2PI};

/// Critical Dirichlet concentration separating the two phases.
pub const PHI_CRITICAL: f64 = 1.0;

/// Deterministic part of the asymptote of ΔF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteTerm {
    pub d: f64,
    pub n: usize,
    pub phi: f64,
    pub sigma2: f64,
}

/// Location and scale of the `n₁`-th largest of `n` standard normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatConstants {
    pub a_n: f64,
    pub b_n: f64,
}

fn require_bulk_phase(phi: f64) -> Result<()> {
    if phi > PHI_CRITICAL {
        Ok(())
    } else {
        Err(Error::PhaseBoundary { phi })
    }
}

/// Limiting fraction `n₁/n` of the minimizer, `α₀ = (φ - 1)/(2φ - 3/2)`.
///
/// Lies in `(0, ½)` and vanishes linearly, `α₀ ≈ 2(φ - 1)`, as φ → 1⁺.
pub fn alpha_star(phi: f64) -> Result<f64> {
    require_bulk_phase(phi)?;
    Ok((phi - 1.0) / (2.0 * phi - 1.5))
}

/// `D = ln n + (1-φ) ln α₀ - (φ-½) ln(1-α₀) + ½ ln σ² - ½ ln 2π
///      - [ln Γ(2φ) - 2 ln Γ(φ)]`.
///
/// This is the leading-order free-energy gap of a bulk configuration
/// evaluated at α₀; the prior normalizer enters with the same sign as in the
/// exact gap.
pub fn deterministic_term(n: usize, hyper: &Hyperparameters) -> Result<AsymptoteTerm> {
    let phi = hyper.phi();
    let alpha = alpha_star(phi)?;
    if n < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            got: n,
        });
    }
    let d = libm::log(n as f64) + phi_part(phi, alpha) + 0.5 * libm::log(hyper.sigma2())
        - HALF_LN_2PI
        - hyper.prior_log_normalizer();
    Ok(AsymptoteTerm {
        d,
        n,
        phi,
        sigma2: hyper.sigma2(),
    })
}

fn phi_part(phi: f64, alpha: f64) -> f64 {
    (1.0 - phi) * libm::log(alpha) - (phi - 0.5) * libm::log1p(-alpha)
}

/// `D - ξ̂²/2` for a concrete sample, with `ξ̂ = n^{-1/2} Σ Xᵢ`.
pub fn asymptote_per_sample(sample: &Sample, hyper: &Hyperparameters) -> Result<f64> {
    let term = deterministic_term(sample.n(), hyper)?;
    let xi = XiHat::from_sample(sample).value();
    Ok(term.d - 0.5 * xi * xi)
}

/// Leading order of ΔF for a configuration with mass `n1`: `ln n` when
/// `n1/n >= ½`, otherwise `φ ln(n/n₁) + ln n₁`. Only accurate to `O_p(1)`.
pub fn leading_order(n: usize, n1: f64, phi: f64) -> Result<f64> {
    let nf = n as f64;
    if n < 2 || !(n1 > 0.0 && n1 <= nf) {
        return Err(Error::Domain {
            function: "leading_order",
            value: n1,
            expected: "n >= 2 and 0 < n1 <= n",
        });
    }
    if n1 / nf < 0.5 {
        Ok(phi * libm::log(nf / n1) + libm::log(n1))
    } else {
        Ok(libm::log(nf))
    }
}

fn check_trim(n: usize, n1: usize, function: &'static str) -> Result<()> {
    if n1 >= 1 && n1 < n {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: n1 as f64,
            expected: "1 <= n1 < n",
        })
    }
}

/// Leading asymptote `n₁ √(2 ln(n/n₁))` of the sum of the `n₁` largest of
/// `n` standard normal draws.
pub fn trimmed_sum_asymptote(n: usize, n1: usize) -> Result<f64> {
    check_trim(n, n1, "trimmed_sum_asymptote")?;
    let n1f = n1 as f64;
    Ok(n1f * libm::sqrt(2.0 * libm::log(n as f64 / n1f)))
}

/// `n φ(Φ⁻¹(1 - n₁/n))`, the tail integral `n ∫_{a_n}^∞ x φ(x) dx` that the
/// expected trimmed sum approaches.
pub fn trimmed_sum_expectation(n: usize, n1: usize) -> Result<f64> {
    check_trim(n, n1, "trimmed_sum_expectation")?;
    let a = upper_quantile(n, n1);
    Ok(n as f64 * std_normal_pdf(a))
}

// Φ⁻¹(1 - n1/n) through the lower tail, exact for small n1/n.
fn upper_quantile(n: usize, n1: usize) -> f64 {
    -std_normal_quantile_unchecked(n1 as f64 / n as f64)
}

/// Von Mises normalization `a_n = Φ⁻¹(1 - n₁/n)`, `b_n = √n₁ / (n φ(a_n))`.
pub fn order_stat_constants(n: usize, n1: usize) -> Result<OrderStatConstants> {
    check_trim(n, n1, "order_stat_constants")?;
    let ratio = n as f64 / n1 as f64;
    if ratio <= core::f64::consts::E {
        return Err(Error::Domain {
            function: "order_stat_constants",
            value: ratio,
            expected: "n / n1 > e",
        });
    }
    let a_n = upper_quantile(n, n1);
    let b_n = libm::sqrt(n1 as f64) / (n as f64 * std_normal_pdf(a_n));
    Ok(OrderStatConstants { a_n, b_n })
}

/// Large-ratio approximation `√(2 ln r - ln((ln r)²))`, `r = n/n₁`, of `a_n`.
pub fn approx_location(n: usize, n1: usize) -> Result<f64> {
    check_trim(n, n1, "approx_location")?;
    let ln_r = libm::log(n as f64 / n1 as f64);
    if ln_r <= 1.0 {
        return Err(Error::Domain {
            function: "approx_location",
            value: ln_r,
            expected: "n / n1 > e",
        });
    }
    Ok(libm::sqrt(2.0 * ln_r - libm::log(ln_r * ln_r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use core::f64::consts::E;

    fn hyper(phi: f64, sigma2: f64) -> Hyperparameters {
        Hyperparameters::new(phi, sigma2).unwrap()
    }

    #[test]
    fn alpha_star_examples() {
        assert!((alpha_star(1.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((alpha_star(20.0).unwrap() - 19.0 / 38.5).abs() < 1e-15);
        assert!((alpha_star(20.0).unwrap() - 0.493_506_5).abs() < 1e-7);
        assert!(alpha_star(1.0 + 1e-12).unwrap() < 1e-11);
        assert_eq!(alpha_star(1.0), Err(Error::PhaseBoundary { phi: 1.0 }));
        assert!(alpha_star(0.3).is_err());
    }

    #[test]
    fn alpha_star_range_and_monotone() {
        let grid: Vec<f64> = (0..400)
            .map(|i| 1.0 + 10f64.powf(-6.0 + 12.0 * i as f64 / 399.0))
            .collect();
        let mut prev = 0.0;
        for &phi in &grid {
            let a = alpha_star(phi).unwrap();
            assert!(a > 0.0 && a < 0.5, "α₀({phi}) = {a}");
            assert!(a > prev);
            prev = a;
        }
        assert!(0.5 - alpha_star(1e6).unwrap() < 1e-6);
    }

    #[test]
    fn alpha_star_vanishes_linearly() {
        let eps = 1e-4;
        let ratio = alpha_star(1.0 + eps).unwrap() / eps;
        assert!((ratio / 2.0 - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn deterministic_term_reference_values() {
        // mpmath at 40 digits.
        let cases = [
            (800, 20.0, 4.496_600_915_256_176_739),
            (100, 20.0, 2.417_159_373_576_340_811),
            (6400, 20.0, 6.576_042_456_936_012_668),
            (200, 1.5, 4.399_438_429_955_147_409),
            (1000, 2.0, 5.879_586_444_072_550_399),
        ];
        for (n, phi, want) in cases {
            let d = deterministic_term(n, &hyper(phi, 1.0)).unwrap().d;
            assert!((d - want).abs() < 1e-11, "D({n}, {phi}) = {d}, want {want}");
        }
    }

    #[test]
    fn deterministic_term_structure() {
        let h = hyper(7.5, 1.0);
        let d1 = deterministic_term(300, &h).unwrap().d;
        let d2 = deterministic_term(900, &h).unwrap().d;
        assert!((d2 - d1 - 3f64.ln()).abs() < 1e-12);

        let wide = hyper(7.5, E * E);
        let d3 = deterministic_term(300, &wide).unwrap().d;
        assert!((d3 - d1 - 1.0).abs() < 1e-12);

        // D - ln n - ½ ln σ² depends on φ only.
        let strip = |n: usize, s2: f64| {
            let d = deterministic_term(n, &hyper(3.0, s2)).unwrap().d;
            d - (n as f64).ln() - 0.5 * s2.ln()
        };
        let base = strip(10, 1.0);
        for (n, s2) in [(55, 0.2), (1000, 4.0), (123_456, 9.5)] {
            assert!((strip(n, s2) - base).abs() < 1e-12);
        }

        assert!(deterministic_term(1, &h).is_err());
        assert!(deterministic_term(10, &hyper(1.0, 1.0)).is_err());
    }

    #[test]
    fn d_shift_by_e_is_one() {
        // D(n e) - D(n) = 1; n is an integer so use the ln n term directly.
        let h = hyper(4.0, 2.0);
        let d = deterministic_term(1000, &h).unwrap().d;
        let rest = d - 1000f64.ln();
        let at = |lnn: f64| lnn + rest;
        assert!((at(1000f64.ln() + 1.0) - d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymptote_per_sample_examples() {
        let h = hyper(20.0, 1.0);
        let s = Sample::new(alloc::vec![1.5, -0.5, -1.0, 0.0]).unwrap();
        let d = deterministic_term(4, &h).unwrap().d;
        assert_eq!(asymptote_per_sample(&s, &h).unwrap(), d);

        let mut v = alloc::vec![0.3, -1.2, 0.8, 2.0, -0.4];
        let before = XiHat::from_sample(&Sample::new(v.clone()).unwrap()).value();
        v[2] += 0.7;
        let after = XiHat::from_sample(&Sample::new(v).unwrap()).value();
        assert!((after - before - 0.7 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn leading_order_examples() {
        assert!((leading_order(500, 500.0, 0.7).unwrap() - 500f64.ln()).abs() < 1e-15);
        // n1 = 1, φ = ½: φ ln n; n = 55 is the integer nearest e⁴.
        let v = leading_order(55, 1.0, 0.5).unwrap();
        assert!((v - 0.5 * 55f64.ln()).abs() < 1e-14);
        assert!((v - 2.0).abs() < 0.01);
        let n = 10_000usize;
        let v = leading_order(n, (n as f64).sqrt(), 1.0).unwrap();
        assert!((v - (n as f64).ln()).abs() < 1e-12);
        assert!(leading_order(10, 0.0, 1.0).is_err());
        assert!(leading_order(10, 11.0, 1.0).is_err());
    }

    #[test]
    fn trimmed_sum_asymptote_examples() {
        let v = trimmed_sum_asymptote(1_000_000, 1000).unwrap();
        assert!((v - 3716.922).abs() < 1e-2);
        assert!((v - 3716.922_188_849_838).abs() < 1e-8);
        assert!(trimmed_sum_asymptote(1000, 1000).is_err());
        assert!(trimmed_sum_asymptote(1000, 0).is_err());
        assert!(
            trimmed_sum_asymptote(2000, 100).unwrap() > trimmed_sum_asymptote(1000, 100).unwrap()
        );
    }

    #[test]
    fn trimmed_sum_expectation_examples() {
        // mpmath: 1e6 · φ(Φ⁻¹(0.999)).
        let v = trimmed_sum_expectation(1_000_000, 1000).unwrap();
        assert!((v - 3367.090_077_063_99).abs() < 1e-6, "{v}");
        let v = trimmed_sum_expectation(1000, 500).unwrap();
        assert!((v - 1000.0 * 0.398_942_280_401_432_7).abs() < 1e-9);
        for &(n, n1) in &[
            (1000usize, 100usize),
            (100_000, 1000),
            (10_000_000, 1000),
            (500, 3),
        ] {
            assert!(
                trimmed_sum_expectation(n, n1).unwrap() < trimmed_sum_asymptote(n, n1).unwrap()
            );
        }
    }

    #[test]
    fn expectation_to_asymptote_ratio_increases() {
        let ratios: Vec<f64> = [100_000usize, 1_000_000, 10_000_000]
            .iter()
            .map(|&n| {
                trimmed_sum_expectation(n, 1000).unwrap() / trimmed_sum_asymptote(n, 1000).unwrap()
            })
            .collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2], "{ratios:?}");
        // mpmath
        assert!((ratios[1] - 0.905_881_238_828_381_3).abs() < 1e-9);
    }

    #[test]
    fn order_stat_constants_examples() {
        let c = order_stat_constants(1_000_000, 1000).unwrap();
        assert!((c.a_n - 3.090_232_3).abs() < 1e-6);
        assert!(c.b_n > 0.0);
        let approx = approx_location(1_000_000, 1000).unwrap();
        assert!((approx - 3.154_36).abs() < 1e-4);
        assert!(order_stat_constants(10, 5).is_err());
        assert!(order_stat_constants(10, 10).is_err());
        for &(n, n1) in &[(30usize, 10usize), (1000, 1), (12345, 17)] {
            assert!(order_stat_constants(n, n1).unwrap().b_n > 0.0);
        }
    }
}
