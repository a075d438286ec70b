//! Image-analysis pipelines for nonwoven fabric quality evaluation.
//!
//! Five analysis pipelines over 8-bit grayscale scans, plus the shared image
//! machinery and deterministic synthetic-input generators they are validated
//! with:
//!
//! - [`roughness`]: physical height profile, five profile criteria and a
//!   surface-roughness factor against an ideal sinusoidal surface, with the
//!   embedded roughness/friction dataset and its regression.
//! - [`orientation`]: fiber-orientation distributions via the 2D FFT
//!   spectrum and via Hough line detection, line-length estimation, and
//!   acquisition-effect studies (magnification, frame shape, brightness).
//! - [`pilling`]: multi-level 2D Haar wavelet decomposition, the SDcA
//!   statistic, crop augmentation and calibrated 1-5 pilling grading.
//! - [`defect`]: feature extraction (gray statistics, density, box-counting
//!   fractal dimension) and a from-scratch backpropagation MLP classifying
//!   non-defect / thick spot / thin spot / neps patches.
//! - [`pores`]: binary morphology, cross-section slicing, longitudinal
//!   porosity, pore-opening measurement and O50/O95 pore-size percentiles
//!   for geotextile images.

// `!(x > 0.0)` parameter guards intentionally reject NaN along with the
// out-of-range values; index loops mirror the stencil math they implement
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod defect;
pub mod edge;
pub mod error;
pub mod filter;
pub mod histogram;
pub mod image;
pub mod orientation;
pub mod pgm;
pub mod pilling;
pub mod pores;
pub mod rng;
pub mod roughness;
pub mod skeleton;
pub mod synth;
pub mod threshold;

pub use error::{Error, Result};
pub use image::{BinaryImage, GrayImage};
