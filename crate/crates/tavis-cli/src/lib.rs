//! Batch front end for the tavis library.
//!
//! A run is described by one TOML file (see [`config`]) naming a command and
//! its physical parameters; the binary executes it and writes CSV data files
//! plus a manifest of checksums. All computation lives in the tavis crate;
//! this crate is parsing, dispatch, and serialization.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
