//! Block-average down-sampling and kernel up-sampling.
//!
//! Up-sampling uses pixel-center alignment: output sample `i` of `N_out`
//! reads source position `(i + 0.5) * N_in / N_out - 0.5`. Source indices
//! outside the raster are clamped to the nearest edge sample.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Interpolation kernel used when enlarging a raster.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResamplingMethod {
    Nearest,
    #[default]
    Bilinear,
    /// Catmull-Rom cubic, `a = -0.5`.
    Bicubic,
}

impl ResamplingMethod {
    pub const ALL: [ResamplingMethod; 3] = [Self::Nearest, Self::Bilinear, Self::Bicubic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Nearest => "nearest",
            Self::Bilinear => "bilinear",
            Self::Bicubic => "bicubic",
        }
    }
}

impl fmt::Display for ResamplingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResamplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" | "nn" => Ok(Self::Nearest),
            "bilinear" | "linear" => Ok(Self::Bilinear),
            "bicubic" | "cubic" => Ok(Self::Bicubic),
            other => Err(Error::InvalidConfig(format!(
                "unknown up-sampling method {other:?} (expected nearest, bilinear or bicubic)"
            ))),
        }
    }
}

/// Averages non-overlapping blocks of `width / target_w` by
/// `height / target_h` pixels.
pub fn downsample_average(img: &ImageBuffer, target_w: usize, target_h: usize) -> Result<ImageBuffer> {
    let mut out = ImageBuffer::placeholder();
    downsample_average_into(img, target_w, target_h, &mut out)?;
    Ok(out)
}

pub(crate) fn downsample_average_into(
    img: &ImageBuffer,
    target_w: usize,
    target_h: usize,
    out: &mut ImageBuffer,
) -> Result<()> {
    let (w, h) = img.dimensions();
    if target_w == 0 || target_h == 0 || w % target_w != 0 || h % target_h != 0 {
        return Err(Error::NonDivisibleDimensions {
            width: w,
            height: h,
            target_w,
            target_h,
        });
    }
    let (bx, by) = (w / target_w, h / target_h);
    let c = img.channels();
    let norm = 1.0 / (bx * by) as f64;
    out.reshape(target_w, target_h, c);
    out.data_mut()
        .par_chunks_mut(target_w * c)
        .enumerate()
        .for_each(|(oy, out_row)| {
            let mut acc = vec![0.0f64; target_w * c];
            for sy in oy * by..(oy + 1) * by {
                let row = img.row(sy);
                for ox in 0..target_w {
                    let block = &row[ox * bx * c..(ox + 1) * bx * c];
                    let slot = &mut acc[ox * c..(ox + 1) * c];
                    for px in block.chunks_exact(c) {
                        for (a, &v) in slot.iter_mut().zip(px) {
                            *a += f64::from(v);
                        }
                    }
                }
            }
            for (o, a) in out_row.iter_mut().zip(&acc) {
                *o = (a * norm) as f32;
            }
        });
    Ok(())
}

/// Enlarges `img` to `target_w` x `target_h` with the given kernel.
pub fn upsample(
    img: &ImageBuffer,
    target_w: usize,
    target_h: usize,
    method: ResamplingMethod,
) -> Result<ImageBuffer> {
    let mut out = ImageBuffer::placeholder();
    upsample_into(img, target_w, target_h, method, &mut out)?;
    Ok(out)
}

pub(crate) fn upsample_into(
    img: &ImageBuffer,
    target_w: usize,
    target_h: usize,
    method: ResamplingMethod,
    out: &mut ImageBuffer,
) -> Result<()> {
    let (sw, sh) = img.dimensions();
    if target_w < sw || target_h < sh {
        return Err(Error::DownscaleNotSupported {
            src_w: sw,
            src_h: sh,
            dst_w: target_w,
            dst_h: target_h,
        });
    }
    if (sw, sh) == (target_w, target_h) {
        out.copy_from(img);
        return Ok(());
    }
    if method == ResamplingMethod::Bilinear && (target_w, target_h) == (2 * sw, 2 * sh) {
        double_bilinear(img, None, out);
        return Ok(());
    }
    let c = img.channels();
    let xtaps = AxisTaps::new(sw, target_w, method);
    let ytaps = AxisTaps::new(sh, target_h, method);

    // Horizontal pass over the source rows, then each output row is a
    // weighted sum of a few of those widened rows.
    let stride = target_w * c;
    let mut widened = vec![0.0f32; sh * stride];
    widened
        .par_chunks_mut(stride)
        .enumerate()
        .for_each(|(sy, wide)| {
            let src = img.row(sy);
            for (ox, dst) in wide.chunks_exact_mut(c).enumerate() {
                for &(sx, wx) in xtaps.taps(ox) {
                    let px = &src[sx * c..sx * c + c];
                    for (d, &v) in dst.iter_mut().zip(px) {
                        *d += wx * v;
                    }
                }
            }
        });

    out.reshape(target_w, target_h, c);
    out.data_mut()
        .par_chunks_mut(stride)
        .enumerate()
        .for_each(|(oy, out_row)| {
            out_row.fill(0.0);
            for &(sy, wy) in ytaps.taps(oy) {
                let wide = &widened[sy * stride..(sy + 1) * stride];
                for (o, &v) in out_row.iter_mut().zip(wide) {
                    *o += wy * v;
                }
            }
        });
    Ok(())
}

/// Exact 2x bilinear enlargement. Under pixel-center alignment every output
/// sample blends its nearest source sample (weight 3/4) with the next one
/// outward (weight 1/4); the outermost output samples copy the edge.
///
/// With a `minuend` the pass writes `minuend - up(img)` instead.
fn double_bilinear(img: &ImageBuffer, minuend: Option<&ImageBuffer>, out: &mut ImageBuffer) {
    // Source rows per parallel task; each task widens BAND + 2 rows into scratch.
    const BAND: usize = 8;
    let (sw, sh, c) = (img.width(), img.height(), img.channels());
    let (tw, th) = (2 * sw, 2 * sh);
    let stride = tw * c;

    out.reshape(tw, th, c);
    out.data_mut().par_chunks_mut(2 * BAND * stride).enumerate().for_each_init(
        || vec![0.0f32; (BAND + 2) * stride],
        |scratch, (band, block)| {
            let first = band * BAND;
            let rows = block.len() / (2 * stride);
            // scratch row i holds source row first + i - 1, clamped
            for i in 0..rows + 2 {
                let sy = (first + i).saturating_sub(1).min(sh - 1);
                widen_row(img.row(sy), &mut scratch[i * stride..(i + 1) * stride], sw, c);
            }
            let wide = |i: usize| &scratch[i * stride..(i + 1) * stride];
            for (r, pair) in block.chunks_exact_mut(2 * stride).enumerate() {
                let j = first + r;
                let (even, odd) = pair.split_at_mut(stride);
                blend_rows(even, wide(r + 1), wide(r), j == 0);
                blend_rows(odd, wide(r + 1), wide(r + 2), j == sh - 1);
                if let Some(m) = minuend {
                    for (o, &v) in pair.iter_mut().zip(&m.data()[2 * j * stride..(2 * j + 2) * stride]) {
                        *o = v - *o;
                    }
                }
            }
        },
    );
}

fn widen_row(src: &[f32], wide: &mut [f32], sw: usize, c: usize) {
    for i in 0..sw {
        let left = &src[i.saturating_sub(1) * c..][..c];
        let mid = &src[i * c..][..c];
        let right = &src[(i + 1).min(sw - 1) * c..][..c];
        let (even, odd) = wide[2 * i * c..(2 * i + 2) * c].split_at_mut(c);
        for k in 0..c {
            even[k] = 0.25 * left[k] + 0.75 * mid[k];
            odd[k] = 0.75 * mid[k] + 0.25 * right[k];
        }
    }
    let n = wide.len();
    wide[..c].copy_from_slice(&src[..c]);
    wide[n - c..].copy_from_slice(&src[(sw - 1) * c..]);
}

fn blend_rows(out: &mut [f32], near: &[f32], far: &[f32], edge: bool) {
    if edge {
        out.copy_from_slice(near);
    } else {
        for ((o, &n), &f) in out.iter_mut().zip(near).zip(far) {
            *o = 0.75 * n + 0.25 * f;
        }
    }
}

/// `fine - up2x(coarse)`, the detail lost by one halving step.
pub fn detail_residual(fine: &ImageBuffer, coarse: &ImageBuffer, method: ResamplingMethod) -> Result<ImageBuffer> {
    let mut out = ImageBuffer::placeholder();
    detail_residual_into(fine, coarse, method, &mut out)?;
    Ok(out)
}

pub(crate) fn detail_residual_into(
    fine: &ImageBuffer,
    coarse: &ImageBuffer,
    method: ResamplingMethod,
    out: &mut ImageBuffer,
) -> Result<()> {
    let (w, h) = (coarse.width() * 2, coarse.height() * 2);
    if fine.dimensions() != (w, h) || fine.channels() != coarse.channels() {
        return Err(Error::IncompatibleDimensions(format!(
            "detail of {}x{} against a {}x{} coarse level",
            fine.width(),
            fine.height(),
            coarse.width(),
            coarse.height()
        )));
    }
    if method == ResamplingMethod::Bilinear {
        double_bilinear(coarse, Some(fine), out);
        return Ok(());
    }
    upsample_into(coarse, w, h, method, out)?;
    out.subtract_from(fine)
}

/// Doubles both dimensions.
pub fn upsample2x(img: &ImageBuffer, method: ResamplingMethod) -> Result<ImageBuffer> {
    upsample(img, img.width() * 2, img.height() * 2, method)
}

pub(crate) fn upsample2x_into(img: &ImageBuffer, method: ResamplingMethod, out: &mut ImageBuffer) -> Result<()> {
    upsample_into(img, img.width() * 2, img.height() * 2, method, out)
}

/// Source position of output sample `i` under pixel-center alignment.
#[inline]
pub fn source_coordinate(i: usize, src_len: usize, dst_len: usize) -> f64 {
    (i as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5
}

/// Catmull-Rom weight for a tap at distance `d`.
pub fn catmull_rom(d: f64) -> f64 {
    const A: f64 = -0.5;
    let d = d.abs();
    if d <= 1.0 {
        ((A + 2.0) * d - (A + 3.0)) * d * d + 1.0
    } else if d < 2.0 {
        ((A * d - 5.0 * A) * d + 8.0 * A) * d - 4.0 * A
    } else {
        0.0
    }
}

/// Precomputed `(source index, weight)` taps for each output sample of one axis.
struct AxisTaps {
    offsets: Vec<usize>,
    taps: Vec<(usize, f32)>,
}

impl AxisTaps {
    fn new(src_len: usize, dst_len: usize, method: ResamplingMethod) -> Self {
        let last = src_len - 1;
        let clamp = |i: i64| i.clamp(0, last as i64) as usize;
        let mut offsets = Vec::with_capacity(dst_len + 1);
        let mut taps = Vec::new();
        for i in 0..dst_len {
            offsets.push(taps.len());
            let s = source_coordinate(i, src_len, dst_len);
            match method {
                ResamplingMethod::Nearest => {
                    taps.push((clamp((s + 0.5).floor() as i64), 1.0));
                }
                ResamplingMethod::Bilinear => {
                    let s = s.clamp(0.0, last as f64);
                    let i0 = s.floor() as usize;
                    let t = s - i0 as f64;
                    taps.push((i0, (1.0 - t) as f32));
                    if t > 0.0 {
                        taps.push(((i0 + 1).min(last), t as f32));
                    }
                }
                ResamplingMethod::Bicubic => {
                    let base = s.floor();
                    let t = s - base;
                    let base = base as i64;
                    for k in -1..=2i64 {
                        let w = catmull_rom(t - k as f64);
                        if w != 0.0 {
                            taps.push((clamp(base + k), w as f32));
                        }
                    }
                }
            }
        }
        offsets.push(taps.len());
        Self { offsets, taps }
    }

    #[inline]
    fn taps(&self, i: usize) -> &[(usize, f32)] {
        &self.taps[self.offsets[i]..self.offsets[i + 1]]
    }
}
