//! Reproducible random draws.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed; seeds for
//! sub-tasks are derived with [`mix_seed`] rather than by advancing a shared
//! stream, so results do not depend on scheduling. Normal variates use the
//! inverse CDF (AS 241) on a 53-bit uniform strictly inside `(0, 1)`.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{MixtureParams, Sample};
use crate::numerics::std_normal_quantile_unchecked;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

// Stafford's mix13 finalizer.
#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed derivation from a master seed and two counters.
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut h = finalize(master.wrapping_add(GOLDEN));
    h = finalize(h ^ a.wrapping_add(GOLDEN.wrapping_mul(2)));
    finalize(h ^ b.wrapping_add(GOLDEN.wrapping_mul(3)))
}

// Stream tags keep the component-label stream of the mixture sampler and the
// solver's random starts disjoint from the observation stream.
pub(crate) const TAG_LABELS: u64 = 0x6c61_6265_6c73;
pub(crate) const TAG_STARTS: u64 = 0x7374_6172_7473;

/// Uniform and standard-normal draws from one keyed stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `(0, 1)`, never exactly 0 or 1.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        std_normal_quantile_unchecked(self.uniform_open())
    }
}

/// `n` i.i.d. `N(0, 1)` observations, the data-generating law under the null.
pub fn sample_null(n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::TooFewObservations {
            required: 1,
            got: 0,
        });
    }
    Sample::new(null_values(n, seed))
}

pub(crate) fn null_values(n: usize, seed: u64) -> Vec<f64> {
    let mut stream = Stream::new(seed);
    (0..n).map(|_| stream.std_normal()).collect()
}

/// `n` i.i.d. draws from `(1 - a) N(0, 1) + a N(b, 1)`.
///
/// The unshifted noise is the same stream [`sample_null`] uses for `seed`;
/// component labels come from a separate stream. With `a = 0` the output is
/// identical to `sample_null(n, seed)`.
pub fn sample_mixture(n: usize, params: &MixtureParams, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::TooFewObservations {
            required: 1,
            got: 0,
        });
    }
    let mut noise = Stream::new(seed);
    let mut labels = Stream::new(mix_seed(seed, TAG_LABELS, 0));
    let values = (0..n)
        .map(|_| {
            let z = noise.std_normal();
            if labels.uniform_open() < params.a() {
                z + params.b()
            } else {
                z
            }
        })
        .collect();
    Sample::new(values)
}
