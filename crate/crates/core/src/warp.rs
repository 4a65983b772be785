//! Backward bilinear warping.

use rayon::prelude::*;

use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};
use crate::field::{MotionField, UpsampledField};

/// `out(x, y) = in(x + dx(x, y), y + dy(x, y))`, sampled bilinearly with the
/// source coordinate clamped to the raster.
///
/// Works on any channel count, so residual maps warp the same way images do.
pub fn warp(img: &ImageBuffer, field: &MotionField) -> Result<ImageBuffer> {
    check_dims(img, field)?;
    let mut out = vec![0.0f32; img.data().len()];
    warp_rows(img, &Displacements::Dense(field), &mut out, |o, v| *o = v);
    ImageBuffer::new(img.width(), img.height(), img.channels(), out)
}

/// `base += warp(img, upsample_field(field, w, h))`, in one pass.
///
/// A field coarser than `img` is upsampled row by row as the warp proceeds,
/// with the same values [`upsample_field`](crate::field::upsample_field)
/// would produce.
pub fn warp_add(base: &mut ImageBuffer, img: &ImageBuffer, field: &MotionField) -> Result<()> {
    base.ensure_same_shape(img, "warp_add")?;
    let field = if img.dimensions() == field.dimensions() {
        Displacements::Dense(field)
    } else {
        Displacements::Coarse(UpsampledField::new(field, img.width(), img.height())?)
    };
    warp_rows(img, &field, base.data_mut(), |o, v| *o += v);
    Ok(())
}

enum Displacements<'a> {
    Dense(&'a MotionField),
    Coarse(UpsampledField<'a>),
}

fn check_dims(img: &ImageBuffer, field: &MotionField) -> Result<()> {
    if img.dimensions() != field.dimensions() {
        return Err(Error::DimensionMismatch(format!(
            "warp: raster {}x{} vs field {}x{}",
            img.width(),
            img.height(),
            field.width(),
            field.height()
        )));
    }
    Ok(())
}

fn warp_rows(img: &ImageBuffer, field: &Displacements, out: &mut [f32], write: impl Fn(&mut f32, f32) + Sync) {
    match img.channels() {
        1 => warp_rows_with::<1>(img, field, out, write),
        3 => warp_rows_with::<3>(img, field, out, write),
        _ => warp_rows_with::<0>(img, field, out, write),
    }
}

/// `C` fixes the channel count at compile time; 0 reads it from the image.
fn warp_rows_with<const C: usize>(
    img: &ImageBuffer,
    field: &Displacements,
    out: &mut [f32],
    write: impl Fn(&mut f32, f32) + Sync,
) {
    let (w, h) = (img.width(), img.height());
    let c = if C == 0 { img.channels() } else { C };
    let (max_x, max_y) = ((w - 1) as f64, (h - 1) as f64);
    let src = img.data();
    out.par_chunks_mut(w * c).enumerate().for_each_init(Vec::new, |scratch, (y, out_row)| {
        let field_row = match field {
            Displacements::Dense(f) => &f.data()[y * w * 2..(y + 1) * w * 2],
            Displacements::Coarse(view) => {
                scratch.resize(w * 2, 0.0);
                view.fill_row(y, scratch);
                &scratch[..]
            }
        };
        for (x, (dst, d)) in out_row
            .chunks_exact_mut(c)
            .zip(field_row.chunks_exact(2))
            .enumerate()
        {
            let sx = (x as f64 + f64::from(d[0])).clamp(0.0, max_x);
            let sy = (y as f64 + f64::from(d[1])).clamp(0.0, max_y);
            // Both coordinates are nonnegative here, so truncation is floor.
            let (x0, y0) = (sx as usize, sy as usize);
            let (tx, ty) = (sx - x0 as f64, sy - y0 as f64);
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(h - 1);
            let p00 = &src[(y0 * w + x0) * c..][..c];
            let p01 = &src[(y0 * w + x1) * c..][..c];
            let p10 = &src[(y1 * w + x0) * c..][..c];
            let p11 = &src[(y1 * w + x1) * c..][..c];
            for i in 0..c {
                let top = f64::from(p00[i]) * (1.0 - tx) + f64::from(p01[i]) * tx;
                let bottom = f64::from(p10[i]) * (1.0 - tx) + f64::from(p11[i]) * tx;
                write(&mut dst[i], (top * (1.0 - ty) + bottom * ty) as f32);
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::upsample_field;

    fn ramp(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 1, |x, _, _| 2.0 * x as f32 / (w - 1) as f32 - 1.0)
    }

    #[test]
    fn zero_field_is_identity() {
        let img = ImageBuffer::from_fn(9, 7, 3, |x, y, c| ((x * 5 + y * 11 + c) % 13) as f32 / 6.5 - 1.0);
        assert_eq!(warp(&img, &MotionField::zeros(9, 7)).unwrap(), img);
    }

    #[test]
    fn unit_shift_moves_ramp_left() {
        let img = ramp(8, 8);
        let out = warp(&img, &MotionField::uniform(8, 8, 1.0, 0.0)).unwrap();
        for y in 0..8 {
            for x in 0..7 {
                assert_eq!(out.get(x, y, 0), img.get(x + 1, y, 0));
            }
            // Sampling past the right edge clamps to the last column.
            assert_eq!(out.get(7, y, 0), img.get(7, y, 0));
        }
    }

    #[test]
    fn fractional_shift_is_linear_on_ramp() {
        let img = ramp(8, 8);
        let out = warp(&img, &MotionField::uniform(8, 8, 0.25, 0.0)).unwrap();
        let step = 2.0 / 7.0;
        for x in 0..7 {
            assert!((out.get(x, 3, 0) - (img.get(x, 3, 0) + 0.25 * step)).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_stays_constant() {
        let img = ImageBuffer::filled(6, 5, 3, 0.42);
        let f = MotionField::from_fn(6, 5, |x, y| (x as f32 * 1.3 - 2.0, (y as f32).sin() * 4.0));
        let out = warp(&img, &f).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.42).abs() < 1e-7));
    }

    #[test]
    fn fused_add_matches_separate_add() {
        let img = ImageBuffer::from_fn(9, 6, 3, |x, y, c| ((x * 3 + y * 5 + c) % 7) as f32 / 3.5 - 1.0);
        let f = MotionField::from_fn(9, 6, |x, y| (x as f32 * 0.3 - 1.0, 0.7 - y as f32 * 0.2));
        let base = ImageBuffer::from_fn(9, 6, 3, |x, _, c| x as f32 * 0.05 - c as f32 * 0.1);
        let mut fused = base.clone();
        warp_add(&mut fused, &img, &f).unwrap();
        assert_eq!(fused, base.add(&warp(&img, &f).unwrap()).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let img = ImageBuffer::filled(4, 4, 1, 0.0);
        assert!(matches!(
            warp(&img, &MotionField::zeros(4, 5)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn upsampled_translation_matches_direct_translation() {
        // A uniform 1 px shift at 16x16 is a 4 px shift at 64x64.
        let img = ImageBuffer::from_fn(64, 64, 1, |x, y, _| ((x * 7 + y * 3) % 10) as f32 / 5.0 - 1.0);
        let up = upsample_field(&MotionField::uniform(16, 16, 1.0, -0.5), 64, 64).unwrap();
        let a = warp(&img, &up).unwrap();
        let b = warp(&img, &MotionField::uniform(64, 64, 4.0, -2.0)).unwrap();
        assert_eq!(a, b);
    }
}
