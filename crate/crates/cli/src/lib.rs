//! Configuration, experiment registry and runner behind the `tdho` binary.

pub mod config;
pub mod registry;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] tdho::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
