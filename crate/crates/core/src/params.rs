//! Instance parameters and the derived sub-packetization.

use alloc::format;

use crate::{Error, Rational, Result};

/// One cache-aided PIR instance: `N` databases, `K` messages, cache fraction
/// `p/q` of every message, and a block multiplier `m`.
///
/// The message length is always the minimal admissible
/// `L = q · m · N^K`, so the cached prefix `p·m·N^K` and the PIR suffix
/// `(q−p)·m·N^K` are both whole numbers of base-scheme blocks of `N^K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    num_databases: usize,
    num_messages: usize,
    cache_numerator: usize,
    cache_denominator: usize,
    block_multiplier: usize,
    block_len: usize,
    message_len: usize,
}

impl SchemeParams {
    pub fn new(
        num_databases: usize,
        num_messages: usize,
        cache_numerator: usize,
        cache_denominator: usize,
        block_multiplier: usize,
    ) -> Result<Self> {
        if num_databases == 0 {
            return Err(Error::InvalidParams("need at least one database".into()));
        }
        if num_messages == 0 {
            return Err(Error::InvalidParams("need at least one message".into()));
        }
        if cache_denominator == 0 {
            return Err(Error::InvalidParams("cache denominator must be positive".into()));
        }
        if cache_numerator > cache_denominator {
            return Err(Error::InvalidParams(format!(
                "cache fraction {cache_numerator}/{cache_denominator} exceeds 1"
            )));
        }
        if block_multiplier == 0 {
            return Err(Error::InvalidParams("block multiplier must be positive".into()));
        }
        let exp = u32::try_from(num_messages).map_err(|_| Error::Overflow("N^K"))?;
        let block_len = num_databases.checked_pow(exp).ok_or(Error::Overflow("N^K"))?;
        let message_len = cache_denominator
            .checked_mul(block_multiplier)
            .and_then(|x| x.checked_mul(block_len))
            .ok_or(Error::Overflow("message length q·m·N^K"))?;
        // The answer/decoding paths index symbols with u32 on the wire.
        if message_len > u32::MAX as usize {
            return Err(Error::Overflow("message length exceeds u32 symbol indices"));
        }
        let params = SchemeParams {
            num_databases,
            num_messages,
            cache_numerator,
            cache_denominator,
            block_multiplier,
            block_len,
            message_len,
        };
        debug_assert_eq!(params.cached_len() + params.pir_len(), message_len);
        debug_assert_eq!(params.pir_len() % block_len, 0);
        Ok(params)
    }

    /// Instance without a cache (`S = 0`).
    pub fn without_cache(num_databases: usize, num_messages: usize, block_multiplier: usize) -> Result<Self> {
        Self::new(num_databases, num_messages, 0, 1, block_multiplier)
    }

    pub fn num_databases(&self) -> usize {
        self.num_databases
    }

    pub fn num_messages(&self) -> usize {
        self.num_messages
    }

    pub fn cache_numerator(&self) -> usize {
        self.cache_numerator
    }

    pub fn cache_denominator(&self) -> usize {
        self.cache_denominator
    }

    pub fn block_multiplier(&self) -> usize {
        self.block_multiplier
    }

    /// `N^K`, the symbols per message consumed by one run of the base scheme.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// `L`.
    pub fn message_len(&self) -> usize {
        self.message_len
    }

    /// `s·L`, symbols of each message held in the cache.
    pub fn cached_len(&self) -> usize {
        self.cache_numerator * self.block_multiplier * self.block_len
    }

    /// `(1−s)·L`, symbols of each message retrieved through the base scheme.
    pub fn pir_len(&self) -> usize {
        (self.cache_denominator - self.cache_numerator) * self.block_multiplier * self.block_len
    }

    /// Number of base-scheme blocks covering the uncached suffix.
    pub fn pir_blocks(&self) -> usize {
        (self.cache_denominator - self.cache_numerator) * self.block_multiplier
    }

    /// `s = p/q`.
    pub fn cache_fraction(&self) -> Rational {
        Rational::new(self.cache_numerator as i128, self.cache_denominator as i128)
    }

    /// Normalized storage `S = s·K ∈ [0, K]`.
    pub fn storage(&self) -> Rational {
        self.cache_fraction() * Rational::from(self.num_messages)
    }
}

/// `L = q · m · N^K`.
pub fn derive_length(params: &SchemeParams) -> usize {
    params.message_len()
}
