//! Weakly supervised salient object detection.
//!
//! The crate jointly predicts whether an image contains a salient object and,
//! if it does, which superpixels belong to it. Training only needs image-level
//! existence labels: per-superpixel saliency labels are latent variables of a
//! structural SVM and are inferred exactly with a max-flow/min-cut solver.
//!
//! Pipeline overview:
//!
//! - [`imaging`]: image loading, color spaces, LBP, SLIC superpixels and
//!   per-region appearance descriptors.
//! - [`features`]: five regional saliency cues on seven appearance channels,
//!   the global existence descriptor and the explicit chi-square feature map.
//! - [`mrf`]: region graphs and exact binary energy maximization.
//! - [`model`]: parameter layout, joint feature map, inference and the
//!   training loss.
//! - [`learn`]: regularized risk minimization (bundle / subgradient) and a
//!   linear SVM baseline.
//! - [`diffusion`]: turns a binary region labeling into a smooth saliency map.
//! - [`eval`]: PR curves, AP, MAE and accuracy.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod config;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod features;
pub mod imaging;
pub mod learn;
pub mod model;
pub mod mrf;
mod util;

pub use config::Config;
pub use error::{Error, Result};
