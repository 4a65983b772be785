//! The raster container shared by images, residuals and intermediate results.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Planar-interleaved `f32` raster, row-major, `channels` samples per pixel.
///
/// Image samples live nominally in `[-1, 1]`. The same type carries residual
/// maps, whose samples range over `[-2, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

/// Difference between an image and a smoothed version of itself.
pub type ResidualMap = ImageBuffer;

/// Slack allowed above `1.0` (or below `-1.0`) before a clamped sample is
/// counted as an overflow. Recomposition that is exact in real arithmetic can
/// still land a few ulps outside the range.
pub const CLAMP_SLACK: f32 = 1e-5;

/// Maps an 8-bit code to `[-1, 1]`: `0 -> -1`, `255 -> 1`.
pub fn sample_from_u8(v: u8) -> f32 {
    2.0 * (f32::from(v) / 255.0) - 1.0
}

/// Inverse of [`sample_from_u8`], rounding to the nearest code and saturating.
pub fn sample_to_u8(v: f32) -> u8 {
    let unit = (v + 1.0) * 0.5 * 255.0;
    unit.round().clamp(0.0, 255.0) as u8
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidBuffer(format!(
                "dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if channels == 0 {
            return Err(Error::InvalidBuffer("channel count must be nonzero".into()));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::InvalidBuffer(format!(
                "{width}x{height}x{channels} needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A buffer with every sample set to `value`.
    ///
    /// # Panics
    /// If any dimension is zero.
    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        assert!(width > 0 && height > 0 && channels > 0, "empty buffer");
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    /// Builds a buffer by evaluating `f(x, y, c)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        f: impl Fn(usize, usize, usize) -> f32,
    ) -> Self {
        assert!(width > 0 && height > 0 && channels > 0, "empty buffer");
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    /// Decodes 8-bit samples into `[-1, 1]`.
    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            bytes.iter().copied().map(sample_from_u8).collect(),
        )
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().copied().map(sample_to_u8).collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// An empty buffer, to be sized later with [`reshape`](Self::reshape).
    pub(crate) fn placeholder() -> Self {
        ImageBuffer {
            width: 0,
            height: 0,
            channels: 1,
            data: Vec::new(),
        }
    }

    /// Changes the shape in place, reusing the allocation. Sample values are
    /// unspecified afterwards.
    pub(crate) fn reshape(&mut self, width: usize, height: usize, channels: usize) {
        self.width = width;
        self.height = height;
        self.channels = channels;
        self.data.resize(width * height * channels, 0.0);
    }

    pub(crate) fn copy_from(&mut self, other: &ImageBuffer) {
        self.reshape(other.width, other.height, other.channels);
        self.data.copy_from_slice(&other.data);
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Samples in one row, `width * channels` long.
    pub fn row(&self, y: usize) -> &[f32] {
        let stride = self.width * self.channels;
        &self.data[y * stride..(y + 1) * stride]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn ensure_same_shape(&self, other: &ImageBuffer, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )))
        }
    }

    /// Sample-wise `self + other`.
    pub fn add(&self, other: &ImageBuffer) -> Result<ImageBuffer> {
        self.ensure_same_shape(other, "add")?;
        let data = self
            .data
            .par_iter()
            .zip(other.data.par_iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(ImageBuffer { data, ..*self })
    }

    /// Sample-wise `self - other`.
    pub fn sub(&self, other: &ImageBuffer) -> Result<ImageBuffer> {
        self.ensure_same_shape(other, "sub")?;
        let data = self
            .data
            .par_iter()
            .zip(other.data.par_iter())
            .map(|(a, b)| a - b)
            .collect();
        Ok(ImageBuffer { data, ..*self })
    }

    /// In place `self = minuend - self`.
    pub fn subtract_from(&mut self, minuend: &ImageBuffer) -> Result<()> {
        self.ensure_same_shape(minuend, "subtract_from")?;
        self.data
            .par_iter_mut()
            .zip(minuend.data.par_iter())
            .for_each(|(s, m)| *s = m - *s);
        Ok(())
    }

    /// Clamps every sample into `[-1, 1]` and returns how many samples were
    /// further than [`CLAMP_SLACK`] outside that range.
    pub fn clamp_signed(&mut self) -> usize {
        let mut overflow = 0;
        for v in &mut self.data {
            if v.abs() > 1.0 + CLAMP_SLACK {
                overflow += 1;
            }
            *v = v.clamp(-1.0, 1.0);
        }
        overflow
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum::<f64>() / self.data.len() as f64
    }

    /// Largest absolute sample difference. Shapes must match.
    pub fn max_abs_diff(&self, other: &ImageBuffer) -> Result<f32> {
        self.ensure_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max))
    }

    /// Mean absolute sample difference. Shapes must match.
    pub fn mean_abs_diff(&self, other: &ImageBuffer) -> Result<f64> {
        self.ensure_same_shape(other, "mean_abs_diff")?;
        let total: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f64::from((a - b).abs()))
            .sum();
        Ok(total / self.data.len() as f64)
    }

    /// Copies out the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<ImageBuffer> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::DimensionMismatch(format!(
                "crop {w}x{h}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels;
        let mut data = Vec::with_capacity(w * h * c);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * c;
            data.extend_from_slice(&self.data[start..start + w * c]);
        }
        ImageBuffer::new(w, h, c, data)
    }

    /// Extends the raster to `w`x`h` by mirroring it about its right and
    /// bottom edges (`... c b a | a b c ...`), repeating the reflection as
    /// often as needed.
    pub fn pad_reflect(&self, w: usize, h: usize) -> Result<ImageBuffer> {
        if w < self.width || h < self.height {
            return Err(Error::DimensionMismatch(format!(
                "cannot pad {}x{} to smaller {w}x{h}",
                self.width, self.height
            )));
        }
        let c = self.channels;
        let (sw, sh) = (self.width, self.height);
        let mut data = Vec::with_capacity(w * h * c);
        for y in 0..h {
            let sy = fold_index(y, sh);
            for x in 0..w {
                let sx = fold_index(x, sw);
                let start = (sy * sw + sx) * c;
                data.extend_from_slice(&self.data[start..start + c]);
            }
        }
        ImageBuffer::new(w, h, c, data)
    }
}

/// Symmetric reflection of an index into `0..n`, period `2n`.
fn fold_index(i: usize, n: usize) -> usize {
    let m = i % (2 * n);
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(
            ImageBuffer::new(2, 2, 3, vec![0.0; 11]),
            Err(Error::InvalidBuffer(_))
        ));
        assert!(matches!(
            ImageBuffer::new(0, 2, 1, vec![]),
            Err(Error::InvalidBuffer(_))
        ));
    }

    #[test]
    fn u8_endpoints() {
        assert_eq!(sample_from_u8(255), 1.0);
        assert_eq!(sample_from_u8(0), -1.0);
        let mid = sample_from_u8(128);
        assert!((mid - (2.0 * 128.0 / 255.0 - 1.0)).abs() < 1e-7);
        assert!((mid - 0.0039).abs() < 1.0 / 255.0);
    }

    #[test]
    fn u8_round_trip_is_within_one_code() {
        for i in 0..=1000 {
            let v = -1.0 + 2.0 * i as f32 / 1000.0;
            let back = sample_from_u8(sample_to_u8(v));
            assert!((back - v).abs() <= 1.0 / 255.0 + 1e-6, "{v} -> {back}");
        }
        for code in 0..=255u8 {
            assert_eq!(sample_to_u8(sample_from_u8(code)), code);
        }
    }

    #[test]
    fn clamp_counts_only_real_overflow() {
        let mut img = ImageBuffer::new(4, 1, 1, vec![1.0 + 1e-7, -1.5, 0.2, 3.0]).unwrap();
        assert_eq!(img.clamp_signed(), 2);
        assert_eq!(img.data(), &[1.0, -1.0, 0.2, 1.0]);
    }

    #[test]
    fn reflect_pad_then_crop_is_identity() {
        let img = ImageBuffer::from_fn(3, 2, 1, |x, y, _| (x + 10 * y) as f32);
        let padded = img.pad_reflect(8, 5).unwrap();
        assert_eq!(padded.row(0)[..8], [0.0, 1.0, 2.0, 2.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(padded.get(0, 2, 0), 10.0);
        assert_eq!(padded.get(0, 4, 0), 0.0);
        assert_eq!(padded.crop(0, 0, 3, 2).unwrap(), img);
    }
}
