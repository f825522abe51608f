//! Std companion to `anderson-core`: a rayon-backed [`Executor`], JSON and
//! CSV artifacts, run configuration and the `anderson` command-line driver.
//!
//! [`Executor`]: anderson_core::Executor

pub mod artifact;
pub mod cli;
pub mod config;
mod error;
pub mod pool;
pub mod suite;

pub use error::{CliError, ExitCode};
