use alloc::format;
use core::fmt;

use crate::{Error, Rational, Result};

/// `1 + 1/N + … + 1/N^(K−1)`, the optimal cost without a cache.
pub fn base_download_cost(databases: usize, messages: usize) -> Result<Rational> {
    if databases == 0 || messages == 0 {
        return Err(Error::InvalidParams("need N ≥ 1 and K ≥ 1".into()));
    }
    let inv = Rational::new(1, databases as i128);
    let mut term = Rational::ONE;
    let mut sum = Rational::ZERO;
    for _ in 0..messages {
        sum = sum + term;
        term = term * inv;
    }
    Ok(sum)
}

/// Optimal normalized download cost `(1 − S/K)(1 + 1/N + … + 1/N^(K−1))`
/// for storage `S ∈ [0, K]`.
pub fn optimal_download_cost(databases: usize, messages: usize, storage: Rational) -> Result<Rational> {
    let k = Rational::from(messages);
    if storage.is_negative() || storage > k {
        return Err(Error::OutOfRange(format!("storage {storage} not in [0, {messages}]")));
    }
    Ok((Rational::ONE - storage / k) * base_download_cost(databases, messages)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(Rational),
    /// Everything is cached; nothing needs to be downloaded.
    Unbounded,
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(r) => write!(f, "{r}"),
            Capacity::Unbounded => f.write_str("inf"),
        }
    }
}

/// Reciprocal of [`optimal_download_cost`].
pub fn capacity(databases: usize, messages: usize, storage: Rational) -> Result<Capacity> {
    let d = optimal_download_cost(databases, messages, storage)?;
    Ok(d.recip().map_or(Capacity::Unbounded, Capacity::Finite))
}
