//! Cache-aided private information retrieval over replicated databases.
//!
//! A user holds a cache of `S·L` symbols (an arbitrary function of the `K`
//! messages, known to every database) and wants message `θ` from `N`
//! replicated databases without any single database learning `θ`. This crate
//! provides:
//!
//! - [`scheme`]: a capacity-achieving, zero-error XOR scheme for the no-cache
//!   case, with per-message private permutations and side-information pairing.
//! - [`cache`]: the memory-sharing layer that caches a prefix of every message
//!   and runs the base scheme on the remaining suffix.
//! - [`bounds`]: exact cost/capacity formulas, discrete entropies, subset
//!   averages and the permutation-averaged lower bound.
//! - [`audit`]: exhaustive and sampled checks of privacy, correctness and the
//!   entropy inequalities on the implemented scheme.
//!
//! The crate is `no_std` and only needs `alloc`. Networking, CSV and the CLI
//! live in the `pirlab` crate.
//!
//! ```
//! use pirlab_core::{cache, MessageStore, SchemeParams, SeededRandomness};
//!
//! let params = SchemeParams::new(2, 2, 1, 2, 1).unwrap();
//! let mut rng = SeededRandomness::new(7);
//! let store = MessageStore::random(&params, &mut rng);
//! let z = cache::encode_cache(&store, &params).unwrap();
//! let mut dbs = cache::LocalDatabases::new(&store, params.num_databases());
//! let (msg, cost) = cache::retrieve(1, &params, &z, &mut dbs, &mut rng).unwrap();
//! assert_eq!(msg.symbols(), store.message(1).symbols());
//! assert_eq!(cost.normalized().to_string(), "3/4");
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod audit;
pub mod bounds;
pub mod cache;
mod error;
pub mod model;
pub mod params;
pub mod perm;
pub mod rational;
pub mod rng;
pub mod scheme;

pub use error::{Error, Result};
pub use model::{canonical_form, xor_combine, Answer, Message, MessageStore, Query, Symbol, SymbolSum};
pub use params::{derive_length, SchemeParams};
pub use rational::Rational;
pub use rng::SeededRandomness;
