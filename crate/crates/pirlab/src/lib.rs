//! Networked cache-aided PIR on top of [`pirlab_core`]: the binary wire
//! protocol, TCP database servers and client, CSV fixtures, and the
//! producers behind the `pirlab` command line tool.
//!
//! The transport is plain TCP. Channel privacy is out of scope; what is
//! protected is which message the user wants, against each single database.

pub mod commands;
pub mod csvio;
mod error;
pub mod net;
pub mod wire;

pub use error::{Error, Result};
