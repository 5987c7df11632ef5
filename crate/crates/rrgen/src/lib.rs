//! File formats, configuration and pipeline steps around `rrgen-core`.
//! The `rrgen` binary exposes the steps as subcommands.

pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod formats;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{RunError, RunResult};
