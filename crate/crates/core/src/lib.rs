//! High-resolution animation by residual warping.
//!
//! A large still is split into a small low-frequency image and the
//! high-frequency residuals that the small image cannot hold. Whatever edits
//! the small image (typically a neural generator working at 128x128) also
//! produces a motion field; the residuals are warped along that field,
//! up-sampled to full size, and added back onto the up-sampled edit. The
//! result keeps the source's fine detail at any resolution.
//!
//! ```
//! use atw_core::{decompose, recompose, ImageBuffer, MotionField, ReswarpConfig};
//!
//! let img = ImageBuffer::from_fn(256, 256, 3, |x, y, c| ((x ^ y) + c) as f32 / 255.0 - 0.5);
//! let cfg = ReswarpConfig::default();
//! let parts = decompose(&img, &cfg)?;
//!
//! // With an unedited low component and no motion, the input comes back.
//! let out = recompose(parts.low(), &parts, &MotionField::zeros(128, 128), &cfg)?;
//! assert!(out.image.max_abs_diff(&img)? < 1e-5);
//! # Ok::<(), atw_core::Error>(())
//! ```

pub mod buffer;
pub mod error;
pub mod field;
pub mod io;
pub mod metrics;
pub mod mock;
pub mod pyramid;
pub mod resample;
pub mod residual;
pub mod reswarp;
pub mod store;
pub mod warp;

pub use buffer::{sample_from_u8, sample_to_u8, ImageBuffer, ResidualMap, CLAMP_SLACK};
pub use error::{Error, Result};
pub use field::{
    interpolate_field, load_field, save_field, scale_field, upsample_field, MotionField,
    NormalizedField,
};
pub use io::{load_atwr, load_image, save_atwr, save_image};
pub use metrics::metric_coherency;
pub use mock::MockFieldSpec;
pub use pyramid::{build_laplacian_pyramid, reconstruct_pyramid, ResidualPyramid};
pub use resample::{downsample_average, upsample, ResamplingMethod};
pub use residual::residual;
pub use reswarp::{
    decompose, multiscale_reswarp, recompose, vanilla_reswarp, Decomposition, Mode, Recomposed,
    ReswarpConfig, ReswarpOutput, Reswarper,
};
pub use warp::{warp, warp_add};

// Chapters of the guide in book/, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/pyramids.md")]
    mod pyramids {}
    #[doc = include_str!("../../../book/src/motion-fields.md")]
    mod motion_fields {}
    #[doc = include_str!("../../../book/src/reswarp.md")]
    mod reswarp {}
    #[doc = include_str!("../../../book/src/animation.md")]
    mod animation {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
