//! Carter–Wegman polynomial hashing over the Mersenne prime field `2^61 - 1`.
//!
//! A [`KWiseHash`] with `k` coefficients is a random polynomial of degree
//! `k - 1`; evaluated over the field it is exactly k-wise independent, and the
//! final `mod range` step adds a per-bucket bias of at most `range / 2^61`.
//! [`SignHash`] is the 4-wise independent `{-1, +1}` family built on top of it.
//!
//! All randomness comes from [`SplitMix64`] keyed by `(seed, stream_id)`, so a
//! hash is a pure function of those integers on every platform.

use crate::error::{Error, Result};

/// The Mersenne prime `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// splitmix64 generator.
///
/// A stream is keyed by `(seed, stream_id)`: the initial state is
/// `seed ^ mix64((stream_id + 1) * GAMMA)`, after which the standard
/// splitmix64 step (add `GAMMA`, then [`mix64`]) produces each output.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn for_stream(seed: u64, stream_id: u64) -> Self {
        let key = mix64(stream_id.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        Self { state: seed ^ key }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform element of `[0, 2^61 - 1)` by rejection on the top 61 bits.
    pub fn next_field_element(&mut self) -> u64 {
        loop {
            let v = self.next_u64() >> 3;
            if v < MERSENNE_61 {
                return v;
            }
        }
    }
}

/// Derives an independent 64-bit seed for sub-stream `stream_id`.
pub fn derive_seed(seed: u64, stream_id: u64) -> u64 {
    SplitMix64::for_stream(seed, stream_id).next_u64()
}

#[inline]
fn reduce(x: u128) -> u64 {
    // x < 2^122, so the folded sum is below 2^62.
    let folded = (x as u64 & MERSENNE_61) + (x >> 61) as u64;
    let r = (folded & MERSENNE_61) + (folded >> 61);
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// A k-wise independent hash `[0, 2^61-1) -> [0, range)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KWiseHash {
    /// `coefficients[t]` multiplies `i^t`.
    coefficients: Vec<u64>,
    range: u64,
}

impl KWiseHash {
    /// Builds a hash from explicit coefficients, lowest degree first.
    pub fn from_coefficients(coefficients: Vec<u64>, range: u64) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::parameter(format!(
                "independence k must be at least 2, got {}",
                coefficients.len()
            )));
        }
        check_range(range)?;
        if let Some(c) = coefficients.iter().find(|&&c| c >= MERSENNE_61) {
            return Err(Error::parameter(format!(
                "coefficient {c} outside the field"
            )));
        }
        Ok(Self {
            coefficients,
            range,
        })
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn independence(&self) -> usize {
        self.coefficients.len()
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    /// The polynomial value in the field, before range reduction.
    #[inline]
    pub fn field_value(&self, i: usize) -> u64 {
        let mut x = i as u64;
        if x >= MERSENNE_61 {
            x %= MERSENNE_61;
        }
        let mut coeffs = self.coefficients.iter().rev();
        let mut acc = *coeffs.next().expect("k >= 2");
        for &a in coeffs {
            acc = add_mod(mul_mod(acc, x), a);
        }
        acc
    }

    /// `((sum_t a_t i^t) mod (2^61 - 1)) mod range`.
    #[inline]
    pub fn evaluate(&self, i: usize) -> u64 {
        self.field_value(i) % self.range
    }

    /// Stable identifier of this function, used to tag sketches.
    pub fn fingerprint(&self) -> u64 {
        self.coefficients
            .iter()
            .fold(mix64(self.range ^ GOLDEN_GAMMA), |h, &c| {
                mix64(h ^ c.wrapping_add(GOLDEN_GAMMA))
            })
    }
}

fn check_range(range: u64) -> Result<()> {
    if range < 2 {
        return Err(Error::parameter(format!(
            "hash range must be at least 2, got {range}"
        )));
    }
    if range > 1 << 32 {
        return Err(Error::parameter(format!(
            "hash range must be at most 2^32, got {range}"
        )));
    }
    Ok(())
}

/// Samples a k-wise independent hash with output range `range` from stream
/// `(seed, stream_id)`.
pub fn sample_kwise(seed: u64, stream_id: u64, k: usize, range: u64) -> Result<KWiseHash> {
    if k < 2 {
        return Err(Error::parameter(format!(
            "independence k must be at least 2, got {k}"
        )));
    }
    check_range(range)?;
    let mut rng = SplitMix64::for_stream(seed, stream_id);
    let coefficients = (0..k).map(|_| rng.next_field_element()).collect();
    Ok(KWiseHash {
        coefficients,
        range,
    })
}

/// A 4-wise independent sign function `i -> {-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignHash {
    base: KWiseHash,
}

impl SignHash {
    pub fn sample(seed: u64, stream_id: u64) -> Self {
        let base = sample_kwise(seed, stream_id, 4, 2).expect("k = 4, range = 2 are valid");
        Self { base }
    }

    /// Wraps a base hash; it must have `k = 4` and `range = 2`.
    pub fn from_base(base: KWiseHash) -> Result<Self> {
        if base.independence() != 4 || base.range() != 2 {
            return Err(Error::parameter(format!(
                "sign hash needs k = 4 and range = 2, got k = {} and range = {}",
                base.independence(),
                base.range()
            )));
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> &KWiseHash {
        &self.base
    }

    /// Base output 0 maps to `+1`, 1 maps to `-1`.
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if self.base.field_value(i) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn fingerprint(&self) -> u64 {
        self.base.fingerprint()
    }
}
