//! Library side of the `pulseband` CLI: ingestion, manifest handling, run
//! configuration, the full pipeline, and report writers. The binary in
//! `main.rs` is a thin argument-parsing layer over [`commands`].

pub mod cache;
pub mod commands;
pub mod config;
pub mod errors;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use errors::{CliError, Result};
pub use manifest::DatasetManifest;
pub use pipeline::{run_pipeline, RunReport};
