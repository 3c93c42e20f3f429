#![no_std]
//! Core algorithms for synthesizing and learning visual design principles.
//!
//! The crate is `no_std` + `alloc`. Everything here is a pure function of its
//! inputs (plus explicit seeds), so results do not depend on the host, the
//! number of worker threads, or scheduling. File formats, the CLI and the
//! annotation service live in the `vdp-toolkit` crate.
//!
//! Module map:
//!
//! - [`geometry`] – points, axes, analytic shapes and rigid transforms.
//! - [`composition`] – the 32-rule catalog and the seeded generator / verifier.
//! - [`raster`] – scanline rasterizer with 4×4 supersampling.
//! - [`augment`] – flips, rotations, CIELAB brightness operations, normalization.
//! - [`dataset`] – manifests, stratified splits and balancing schemes.
//! - [`nn`] – a small convolutional classifier, its trainer and top-k prediction.
//! - [`metrics`] – confusion matrices, P/R/F1, top-k, Fleiss' kappa, match rates.
//! - [`gradcam`] – gradient-weighted class activation heatmaps.
//!
//! # Features
//!
//! - `std` *(default)* – only forwards `std` to dependencies (runtime CPU
//!   feature detection inside the GEMM kernel). The crate itself stays `no_std`.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod augment;
pub mod color;
pub mod composition;
pub mod dataset;
mod error;
pub mod geometry;
pub mod gradcam;
pub mod metrics;
pub mod nn;
pub mod raster;
pub mod rng;
pub mod texture;

pub use error::{Error, Result};
