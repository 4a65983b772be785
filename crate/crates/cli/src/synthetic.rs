//! Procedural test images.

use atw_core::ImageBuffer;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Smooth color gradients plus fine noise, so both the low component and the
/// residuals carry signal. Samples stay inside `[-0.9, 0.9]`.
pub fn textured(width: usize, height: usize, channels: usize, seed: u64) -> ImageBuffer {
    let mut rng = StdRng::seed_from_u64(seed);
    let (fw, fh) = (width as f32, height as f32);
    let mut img = ImageBuffer::from_fn(width, height, channels, |x, y, c| {
        let (u, v) = (x as f32 / fw, y as f32 / fh);
        let phase = c as f32 * 1.3;
        0.45 * (6.0 * u + phase).sin() * (4.0 * v - phase).cos() + 0.2 * (37.0 * (u + v)).sin()
    });
    for s in img.data_mut() {
        *s = (*s + rng.gen_range(-0.25..0.25)).clamp(-0.9, 0.9);
    }
    img
}

/// Dark background with a sparse grid of small Gaussian dots.
pub fn dot_pattern(width: usize, height: usize, spacing: usize, sigma: f32) -> ImageBuffer {
    let offset = spacing as f32 / 2.0;
    ImageBuffer::from_fn(width, height, 1, |x, y, _| {
        let fx = (x % spacing) as f32 - offset;
        let fy = (y % spacing) as f32 - offset;
        let g = (-(fx * fx + fy * fy) / (2.0 * sigma * sigma)).exp();
        -1.0 + 2.0 * g
    })
}
