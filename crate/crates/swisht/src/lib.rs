//! File IO, report formats and the `swisht` command-line driver on top of
//! [`swisht_core`].

pub mod bench;
pub mod cli;
pub mod curve;
pub mod error;
pub mod io;
pub mod report;

pub use error::{Error, Result};
