//! Distance-dependent privacy masking for rendered chart images.
//!
//! Marks are thinned out by tiled center-keep masks, which raises their
//! spatial frequency, and pulled toward the background lightness in CIELAB.
//! At reading distance the chart stays legible; further away the pattern
//! falls past the peak of the contrast sensitivity function and fades.

pub mod contrast;
pub mod corpus;
pub mod error;
pub mod mask;
pub mod perception;
pub mod pipeline;
pub mod raster;
pub mod segment;
pub mod spectral;

pub use error::{Error, Result};
