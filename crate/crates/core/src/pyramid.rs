//! Laplacian pyramid of residual maps over a block-averaged base.
//!
//! Level `k` (0-based here, full resolution first) holds
//! `L_k - up(L_{k+1})`, where `L_0` is the input and each `L_{k+1}` is the
//! 2x2 block average of `L_k`. The coarsest `L_K` is the base.

use crate::buffer::{ImageBuffer, ResidualMap};
use crate::error::{Error, Result};
use crate::resample::{detail_residual_into, downsample_average_into, upsample2x, ResamplingMethod};

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualPyramid {
    /// Finest first: `levels[0]` has the input's resolution.
    pub levels: Vec<ResidualMap>,
    pub base: ImageBuffer,
    /// Kernel used for the 2x up-sampling on both the build and the
    /// reconstruction side.
    pub method: ResamplingMethod,
}

/// Number of halvings from `width`x`height` down to `base_size`x`base_size`.
///
/// Both axes must equal `base_size * 2^K` for the same `K`.
pub fn pyramid_depth(width: usize, height: usize, base_size: usize) -> Result<usize> {
    let fail = || {
        Error::IncompatibleDimensions(format!(
            "{width}x{height} is not {base_size}*2^K on both axes with a common K"
        ))
    };
    if base_size == 0 || width % base_size != 0 || height % base_size != 0 {
        return Err(fail());
    }
    let (rx, ry) = (width / base_size, height / base_size);
    if rx != ry || !rx.is_power_of_two() {
        return Err(fail());
    }
    Ok(rx.trailing_zeros() as usize)
}

/// Builds the pyramid with bilinear 2x up-sampling.
pub fn build_laplacian_pyramid(img: &ImageBuffer, base_size: usize) -> Result<ResidualPyramid> {
    build_laplacian_pyramid_with(img, base_size, ResamplingMethod::Bilinear)
}

pub fn build_laplacian_pyramid_with(
    img: &ImageBuffer,
    base_size: usize,
    method: ResamplingMethod,
) -> Result<ResidualPyramid> {
    let mut pyr = ResidualPyramid {
        levels: Vec::new(),
        base: ImageBuffer::placeholder(),
        method,
    };
    build_pyramid_into(img, base_size, method, &mut pyr, &mut ImageBuffer::placeholder())?;
    Ok(pyr)
}

/// Rebuilds `pyr` in place, reusing its buffers. `spare` is scratch space.
pub(crate) fn build_pyramid_into(
    img: &ImageBuffer,
    base_size: usize,
    method: ResamplingMethod,
    pyr: &mut ResidualPyramid,
    spare: &mut ImageBuffer,
) -> Result<()> {
    let depth = pyramid_depth(img.width(), img.height(), base_size)?;
    pyr.method = method;
    pyr.levels.truncate(depth);
    pyr.levels.resize_with(depth, ImageBuffer::placeholder);
    let ResidualPyramid { levels, base, .. } = pyr;
    // Successive halvings alternate between two buffers; the parity is
    // chosen so the last one lands in `base`.
    let (mut dst, mut prev) = if depth % 2 == 1 { (base, spare) } else { (spare, base) };
    if depth == 0 {
        prev.copy_from(img);
        return Ok(());
    }
    for (k, level) in levels.iter_mut().enumerate() {
        let current: &ImageBuffer = if k == 0 { img } else { prev };
        downsample_average_into(current, current.width() / 2, current.height() / 2, dst)?;
        detail_residual_into(current, dst, method, level)?;
        std::mem::swap(&mut dst, &mut prev);
    }
    Ok(())
}

/// Collapses the pyramid: `S_K = base`, `S_k = up(S_{k+1}) + levels[k]`.
pub fn reconstruct_pyramid(pyr: &ResidualPyramid) -> Result<ImageBuffer> {
    pyr.validate()?;
    let mut current = pyr.base.clone();
    for level in pyr.levels.iter().rev() {
        current = upsample2x(&current, pyr.method)?.add(level)?;
    }
    Ok(current)
}

impl ResidualPyramid {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Full-resolution size, i.e. the size of the image the pyramid encodes.
    pub fn full_dimensions(&self) -> (usize, usize) {
        self.levels
            .first()
            .map(|l| l.dimensions())
            .unwrap_or_else(|| self.base.dimensions())
    }

    /// Checks that every level is exactly twice the size of the next coarser
    /// one and that channel counts agree.
    pub fn validate(&self) -> Result<()> {
        let mut coarser = &self.base;
        for (k, level) in self.levels.iter().enumerate().rev() {
            if level.width() != 2 * coarser.width()
                || level.height() != 2 * coarser.height()
                || level.channels() != coarser.channels()
            {
                return Err(Error::MalformedPyramid(format!(
                    "level {} is {}x{}x{}, expected {}x{}x{}",
                    k + 1,
                    level.width(),
                    level.height(),
                    level.channels(),
                    2 * coarser.width(),
                    2 * coarser.height(),
                    coarser.channels()
                )));
            }
            coarser = level;
        }
        Ok(())
    }
}
