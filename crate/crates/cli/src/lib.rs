//! Configuration-driven experiment runner for `accretive-core`.

pub mod config;
pub mod driver;
pub mod ebm;
pub mod error;
pub mod experiments;
pub mod report;

pub use error::CliError;
