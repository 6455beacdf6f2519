//! Special functions used by the free energy, the asymptote and the test.
//!
//! Elementary functions come from `libm` so results are bit-identical across
//! platforms and with or without `std`.

use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// ½ ln(2π).
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A probability in `[0, 1]`, used for significance levels and p-values.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain {
                function: "Probability::new",
                value,
                expected: "0 <= p <= 1",
            })
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 1.
    pub(crate) fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Self(1.0)
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

// B_2k / (2k) for the digamma asymptotic series.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

const DIGAMMA_SHIFT: f64 = 10.0;

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: x,
            expected: "x > 0",
        })
    }
}

/// `ln Γ(x)` for `x > 0`, via `libm::lgamma`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Digamma `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut acc = 0.0;
    while z < DIGAMMA_SHIFT {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    for c in DIGAMMA_SERIES.iter().rev() {
        series = series * inv2 + c;
    }
    acc + libm::log(z) - 0.5 / z - series * inv2
}

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Standard normal CDF `Φ(x)`.
pub fn std_normal_cdf(x: f64) -> Probability {
    Probability::saturating(0.5 * libm::erfc(-x / SQRT_2))
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(std_normal_quantile_unchecked(p))
    } else {
        Err(Error::Domain {
            function: "std_normal_quantile",
            value: p,
            expected: "0 < p < 1",
        })
    }
}

/// Wichura's AS 241 (PPND16), relative accuracy about 1e-16.
pub(crate) fn std_normal_quantile_unchecked(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r
            + 67265.770_927_008_7)
            * r
            + 45921.953_931_549_87)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((r * 5226.495_278_852_546 + 28729.085_735_721_943) * r
            + 39307.895_800_092_71)
            * r
            + 21213.794_301_586_596)
            * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }

    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((r * 1.050_750_071_644_416_8e-9 + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((r * 2.010_334_399_292_288e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((r * 2.044_263_103_389_939_8e-15 + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_887_9)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Quantile of the χ² distribution with one degree of freedom, `0 <= p < 1`.
///
/// Computed as `Φ⁻¹((1 + p) / 2)²` through the lower tail `(1 - p) / 2`, which
/// keeps precision for `p` close to one.
pub fn chi2_1_quantile(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain {
            function: "chi2_1_quantile",
            value: p,
            expected: "0 <= p < 1",
        });
    }
    let z = std_normal_quantile_unchecked(0.5 * (1.0 - p));
    Ok(z * z)
}

/// `P(ξ² <= q)` for `ξ ~ N(0, 1)`, i.e. `2Φ(√q) - 1`.
pub fn chi2_1_cdf(q: f64) -> Probability {
    if q <= 0.0 {
        return Probability(0.0);
    }
    Probability::saturating(libm::erf(libm::sqrt(0.5 * q)))
}

/// Upper tail `P(ξ² > q)`, accurate for small tail probabilities.
pub fn chi2_1_sf(q: f64) -> Probability {
    if q <= 0.0 {
        return Probability(1.0);
    }
    Probability::saturating(libm::erfc(libm::sqrt(0.5 * q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath at 40 significant digits.
    const LN_GAMMA_REF: &[(f64, f64)] = &[
        (0.001, 6.907_178_885_383_853_682_5),
        (0.1, 2.252_712_651_734_205_959_9),
        (0.5, 0.572_364_942_924_700_087_07),
        (1.0, 0.0),
        (1.5, -0.120_782_237_635_245_222_35),
        (2.0, 0.0),
        (2.5, 0.284_682_870_472_919_159_63),
        (3.7, 1.428_072_326_665_387_921_9),
        (7.25, 7.052_185_450_738_539_444_9),
        (10.0, 12.801_827_480_081_469_611),
        (33.3, 82.603_723_581_654_952_928),
        (100.0, 359.134_205_369_575_398_78),
        (1234.5, 7550.550_901_077_894_895_7),
        (1e5, 1_051_287.708_973_656_894_9),
        (1e9, 19_723_265_827.503_716_771),
    ];

    const DIGAMMA_REF: &[(f64, f64)] = &[
        (0.001, -1000.575_571_931_810_300_5),
        (0.1, -10.423_754_940_411_076_795),
        (0.5, -1.963_510_026_021_423_479_4),
        (1.0, -0.577_215_664_901_532_860_61),
        (1.5, 0.036_489_973_978_576_520_559),
        (2.0, 0.422_784_335_098_467_139_39),
        (2.5, 0.703_156_640_645_243_187_23),
        (3.7, 1.167_153_539_361_511_385_9),
        (7.25, 1.910_453_526_883_736_028_4),
        (10.0, 2.251_752_589_066_721_107_6),
        (33.3, 3.490_467_238_520_242_863_9),
        (100.0, 4.600_161_852_738_087_400_2),
        (1234.5, 7.118_016_231_827_997_843_3),
        (1e5, 11.512_920_464_961_895_087),
        (1e9, 20.723_265_836_446_411_156),
    ];

    const CDF_REF: &[(f64, f64)] = &[
        (-38.0, 2.885_428_360_068_784_3e-316),
        (-20.0, 2.753_624_118_606_233_7e-89),
        (-8.0, 6.220_960_574_271_784_1e-16),
        (-3.0, 0.001_349_898_031_630_094_526_7),
        (-1.5, 0.066_807_201_268_858_066_004),
        (-0.3, 0.382_088_577_811_047_362_69),
        (0.0, 0.5),
        (0.7, 0.758_036_347_776_926_985_25),
        (2.5, 0.993_790_334_674_223_864_83),
        (6.0, 0.999_999_999_013_412_354_96),
        (9.0, 1.0),
    ];

    // Evaluated at the exact binary value of each f64 argument.
    const QUANTILE_REF: &[(f64, f64)] = &[
        (1e-20, -9.262_340_089_798_407_579_6),
        (1e-10, -6.361_340_902_404_056_199_1),
        (0.001, -3.090_232_306_167_813_535_4),
        (0.025, -1.959_963_984_540_054_211_8),
        (0.3, -0.524_400_512_708_040_815_97),
        (0.5, 0.0),
        (0.8, 0.841_621_233_572_914_363_80),
        (0.975, 1.959_963_984_540_053_855_6),
        (0.999, 3.090_232_306_167_813_277_8),
        (0.999_999, 4.753_424_308_817_087_765_7),
    ];

    /// Absolute 1e-12 where the f64 spacing allows it, otherwise a few ulps.
    fn tol_for(reference: f64) -> f64 {
        1e-12_f64.max(4.0 * f64::EPSILON * reference.abs())
    }

    #[test]
    fn ln_gamma_matches_reference() {
        for &(x, want) in LN_GAMMA_REF {
            let got = ln_gamma(x).unwrap();
            assert!(
                (got - want).abs() <= tol_for(want),
                "lnΓ({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn ln_gamma_examples() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-12);
        assert!((ln_gamma(0.5).unwrap() - 0.572_364_942_9).abs() < 1e-10);
        assert!((ln_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn digamma_matches_reference() {
        for &(x, want) in DIGAMMA_REF {
            let got = digamma(x).unwrap();
            assert!(
                (got - want).abs() <= tol_for(want),
                "ψ({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn digamma_examples() {
        assert!((digamma(1.0).unwrap() + 0.577_215_664_9).abs() < 1e-10);
        assert!((digamma(2.0).unwrap() - 0.422_784_335_1).abs() < 1e-10);
        assert!((digamma(0.5).unwrap() + 1.963_510_026_0).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(digamma(0.0).is_err());
        assert!(digamma(f64::NAN).is_err());
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(chi2_1_quantile(1.0).is_err());
        assert!(chi2_1_quantile(-0.1).is_err());
        assert!(Probability::new(1.5).is_err());
    }

    #[test]
    fn cdf_matches_reference() {
        for &(x, want) in CDF_REF {
            let got = std_normal_cdf(x).value();
            assert!((got - want).abs() <= 1e-12, "Φ({x}) = {got}, want {want}");
            if want < 1e-3 {
                assert!(((got - want) / want).abs() < 1e-12, "Φ({x}) relative");
            }
        }
        assert_eq!(std_normal_cdf(0.0).value(), 0.5);
        assert!((std_normal_cdf(40.0).value() - 1.0).abs() < 1e-15);
        assert!((std_normal_cdf(1.959_964_0).value() - 0.975).abs() < 1e-7);
    }

    #[test]
    fn quantile_matches_reference() {
        for &(p, want) in QUANTILE_REF {
            let got = std_normal_quantile(p).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "Φ⁻¹({p}) = {got}, want {want}"
            );
        }
        assert!(std_normal_quantile(1e-300).unwrap().is_finite());
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_1_quantile(0.0).unwrap(), 0.0);
        assert!((chi2_1_quantile(0.95).unwrap() - 3.841_458_8).abs() < 1e-5);
        assert!((chi2_1_quantile(0.99).unwrap() - 6.634_896_6).abs() < 1e-5);
        assert!((chi2_1_quantile(0.95).unwrap() - 3.841_458_820_694_126).abs() < 1e-12);
        assert_eq!(chi2_1_cdf(0.0).value(), 0.0);
        assert_eq!(chi2_1_sf(-1.0).value(), 1.0);
    }

    #[test]
    fn half_ln_2pi_constant() {
        assert!((HALF_LN_2PI - 0.5 * (2.0 * core::f64::consts::PI).ln()).abs() < 1e-15);
    }
}
