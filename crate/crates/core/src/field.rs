//! Dense motion fields and the ATWF file format.
//!
//! A field stores one `(dx, dy)` pair per pixel, in pixels of its own raster,
//! `+x` to the right and `+y` down. The warp reads the source at
//! `(x + dx, y + dy)`.
//!
//! ATWF layout, all little-endian:
//!
//! | offset | size | field                                        |
//! |--------|------|----------------------------------------------|
//! | 0      | 4    | magic `ATWF`                                 |
//! | 4      | 4    | width, `u32`                                 |
//! | 8      | 4    | height, `u32`                                |
//! | 12     | 4    | flags, `u32`; bit 0 set = values normalized  |
//! | 16     | 4    | scale factor, `f32`                          |
//! | 20     | 8·n  | `(dx, dy)` as `f32` pairs, row-major         |

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::resample::source_coordinate;

pub const ATWF_MAGIC: &[u8; 4] = b"ATWF";
const ATWF_HEADER: usize = 20;
const FLAG_NORMALIZED: u32 = 1;

/// Pixels per normalized unit used for mock fields at 128x128.
pub const DEFAULT_SCALE_FACTOR: f32 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct MotionField {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl MotionField {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidBuffer(format!(
                "field dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if data.len() != width * height * 2 {
            return Err(Error::InvalidBuffer(format!(
                "{width}x{height} field needs {} values, got {}",
                width * height * 2,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidBuffer(format!("non-finite displacement {bad}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 0.0, 0.0)
    }

    pub fn uniform(width: usize, height: usize, dx: f32, dy: f32) -> Self {
        Self::from_fn(width, height, |_, _| (dx, dy))
    }

    /// # Panics
    /// On zero dimensions or a non-finite displacement.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> (f32, f32)) -> Self {
        let mut data = Vec::with_capacity(width * height * 2);
        for y in 0..height {
            for x in 0..width {
                let (dx, dy) = f(x, y);
                data.push(dx);
                data.push(dy);
            }
        }
        Self::new(width, height, data).expect("invalid generated field")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Interleaved `(dx, dy)` pairs.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f32, f32) {
        let i = (y * self.width + x) * 2;
        (self.data[i], self.data[i + 1])
    }

    pub fn max_abs(&self) -> (f32, f32) {
        self.data.chunks_exact(2).fold((0.0f32, 0.0f32), |(mx, my), p| {
            (mx.max(p[0].abs()), my.max(p[1].abs()))
        })
    }
}

/// Raw generator output: values in `[-1, 1]` and the pixels-per-unit factor
/// that turns them into displacements.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedField {
    values: MotionField,
    scale_factor: f32,
}

impl NormalizedField {
    pub fn new(values: MotionField, scale_factor: f32) -> Result<Self> {
        if !(scale_factor > 0.0 && scale_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "scale factor must be positive, got {scale_factor}"
            )));
        }
        if let Some(v) = values.data().iter().find(|v| v.abs() > 1.0) {
            return Err(Error::InvalidBuffer(format!("normalized value {v} outside [-1, 1]")));
        }
        Ok(Self { values, scale_factor })
    }

    pub fn values(&self) -> &MotionField {
        &self.values
    }

    pub fn scale_factor(&self) -> f32 {
        self.scale_factor
    }
}

/// Multiplies normalized values by their scale factor.
pub fn scale_field(nf: &NormalizedField) -> MotionField {
    let k = nf.scale_factor;
    MotionField {
        width: nf.values.width,
        height: nf.values.height,
        data: nf.values.data.iter().map(|v| v * k).collect(),
    }
}

/// Bilinearly resamples both channels to the target size, then rescales
/// `dx` by the width ratio and `dy` by the height ratio so displacements are
/// expressed in target pixels.
pub fn upsample_field(f: &MotionField, target_w: usize, target_h: usize) -> Result<MotionField> {
    if (target_w, target_h) == f.dimensions() {
        return Ok(f.clone());
    }
    let view = UpsampledField::new(f, target_w, target_h)?;
    let mut data = vec![0.0f32; target_w * target_h * 2];
    data.par_chunks_mut(target_w * 2)
        .enumerate()
        .for_each(|(y, row)| view.fill_row(y, row));
    Ok(MotionField {
        width: target_w,
        height: target_h,
        data,
    })
}

/// One bilinear tap pair along an axis.
#[derive(Clone, Copy)]
struct Tap {
    i0: usize,
    i1: usize,
    w0: f32,
    w1: f32,
}

fn axis_taps(src_len: usize, dst_len: usize) -> Vec<Tap> {
    let last = src_len - 1;
    (0..dst_len)
        .map(|i| {
            let s = source_coordinate(i, src_len, dst_len).clamp(0.0, last as f64);
            let i0 = s.floor() as usize;
            let t = s - i0 as f64;
            Tap {
                i0,
                i1: (i0 + 1).min(last),
                w0: (1.0 - t) as f32,
                w1: t as f32,
            }
        })
        .collect()
}

/// A field read at a finer resolution one row at a time, without
/// materializing the upsampled raster.
pub(crate) struct UpsampledField<'a> {
    field: &'a MotionField,
    xs: Vec<Tap>,
    ys: Vec<Tap>,
    scale: [f32; 2],
}

impl<'a> UpsampledField<'a> {
    pub(crate) fn new(field: &'a MotionField, target_w: usize, target_h: usize) -> Result<Self> {
        if target_w < field.width || target_h < field.height {
            return Err(Error::DownscaleNotSupported {
                src_w: field.width,
                src_h: field.height,
                dst_w: target_w,
                dst_h: target_h,
            });
        }
        Ok(Self {
            field,
            xs: axis_taps(field.width, target_w),
            ys: axis_taps(field.height, target_h),
            scale: [
                target_w as f32 / field.width as f32,
                target_h as f32 / field.height as f32,
            ],
        })
    }

    /// Writes the interleaved `(dx, dy)` pairs of target row `y`.
    pub(crate) fn fill_row(&self, y: usize, out: &mut [f32]) {
        let stride = self.field.width * 2;
        let ty = self.ys[y];
        let top = &self.field.data[ty.i0 * stride..][..stride];
        let bottom = &self.field.data[ty.i1 * stride..][..stride];
        for (pair, tx) in out.chunks_exact_mut(2).zip(&self.xs) {
            for k in 0..2 {
                let upper = tx.w0 * top[2 * tx.i0 + k] + tx.w1 * top[2 * tx.i1 + k];
                let lower = tx.w0 * bottom[2 * tx.i0 + k] + tx.w1 * bottom[2 * tx.i1 + k];
                pair[k] = (ty.w0 * upper + ty.w1 * lower) * self.scale[k];
            }
        }
    }
}

/// Scales every displacement by `alpha`, `0 <= alpha <= 1`.
pub fn interpolate_field(f: &MotionField, alpha: f32) -> Result<MotionField> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(MotionField {
        width: f.width,
        height: f.height,
        data: f.data.iter().map(|v| v * alpha).collect(),
    })
}

/// Contents of an ATWF file.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldFile {
    Pixels(MotionField),
    Normalized(NormalizedField),
}

impl FieldFile {
    /// Displacements in pixels, scaling normalized contents.
    pub fn into_pixels(self) -> MotionField {
        match self {
            FieldFile::Pixels(f) => f,
            FieldFile::Normalized(nf) => scale_field(&nf),
        }
    }
}

fn encode(f: &MotionField, flags: u32, scale: f32) -> Vec<u8> {
    let mut out = Vec::with_capacity(ATWF_HEADER + f.data.len() * 4);
    out.extend_from_slice(ATWF_MAGIC);
    out.extend_from_slice(&(f.width as u32).to_le_bytes());
    out.extend_from_slice(&(f.height as u32).to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&scale.to_le_bytes());
    for v in &f.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Serializes a pixel-unit field (flags 0, scale factor 1).
pub fn encode_atwf(f: &MotionField) -> Vec<u8> {
    encode(f, 0, 1.0)
}

pub fn encode_atwf_normalized(nf: &NormalizedField) -> Vec<u8> {
    encode(&nf.values, FLAG_NORMALIZED, nf.scale_factor)
}

pub fn decode_atwf(bytes: &[u8], path: &Path) -> Result<FieldFile> {
    if bytes.len() < 4 || &bytes[..4] != ATWF_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_owned(),
            expected: "ATWF",
        });
    }
    if bytes.len() < ATWF_HEADER {
        return Err(Error::TruncatedFile {
            path: path.to_owned(),
            expected: ATWF_HEADER,
            found: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (w, h, flags) = (word(4) as usize, word(8) as usize, word(12));
    let scale = f32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let expected = ATWF_HEADER + w * h * 8;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile {
            path: path.to_owned(),
            expected,
            found: bytes.len(),
        });
    }
    let data = bytes[ATWF_HEADER..expected]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let field = MotionField::new(w, h, data)?;
    if flags & FLAG_NORMALIZED != 0 {
        Ok(FieldFile::Normalized(NormalizedField::new(field, scale)?))
    } else {
        Ok(FieldFile::Pixels(field))
    }
}

pub fn read_atwf(path: impl AsRef<Path>) -> Result<FieldFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_atwf(&bytes, path)
}

/// Loads a field in pixel units; normalized files are scaled on the way in.
pub fn load_field(path: impl AsRef<Path>) -> Result<MotionField> {
    read_atwf(path).map(FieldFile::into_pixels)
}

pub fn save_field(f: &MotionField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_atwf(f)).map_err(|e| Error::io(path, e))
}

pub fn save_normalized_field(nf: &NormalizedField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_atwf_normalized(nf)).map_err(|e| Error::io(path, e))
}
