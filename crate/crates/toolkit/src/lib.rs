//! File formats, dataset generation, training pipeline, the annotation
//! service and the `vdp` command line on top of `vdp-core`.
//!
//! - [`png_io`] – lossless 8-bit RGB PNG.
//! - [`jsonl`] – manifests and rating tables, one JSON object per line.
//! - [`generate`] – parallel, worker-count independent dataset rendering.
//! - [`pipeline`] – checkpoints, training and evaluation over manifests,
//!   heatmaps and their `VDPH` binary layout.
//! - [`service`] – HTTP annotation service with a journaled store.
//! - [`cli`] – argument parsing and the subcommands.

pub mod cli;
mod error;
pub mod generate;
pub mod jsonl;
pub mod pipeline;
pub mod png_io;
pub mod run_manifest;
pub mod service;

pub use error::{Error, Result};
