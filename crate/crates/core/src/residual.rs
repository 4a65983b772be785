use crate::buffer::{ImageBuffer, ResidualMap};
use crate::error::Result;

/// `original - approx`, sample by sample.
pub fn residual(original: &ImageBuffer, approx: &ImageBuffer) -> Result<ResidualMap> {
    original.sub(approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::resample::{downsample_average, upsample, ResamplingMethod};

    #[test]
    fn self_residual_is_zero() {
        let img = ImageBuffer::from_fn(5, 3, 3, |x, y, c| (x * 7 + y * 3 + c) as f32 / 40.0 - 0.5);
        let r = residual(&img, &img).unwrap();
        assert!(r.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_difference() {
        let a = ImageBuffer::filled(1, 1, 1, 0.8);
        let b = ImageBuffer::filled(1, 1, 1, 0.5);
        let r = residual(&a, &b).unwrap();
        assert!((r.data()[0] - 0.3).abs() < 1e-7);
    }

    #[test]
    fn adding_back_restores_original() {
        let img = ImageBuffer::from_fn(32, 16, 3, |x, y, c| ((x * 13 + y * 29 + c * 7) % 17) as f32 / 8.5 - 1.0);
        let low = downsample_average(&img, 8, 8).unwrap();
        let up = upsample(&low, 32, 16, ResamplingMethod::Bilinear).unwrap();
        let r = residual(&img, &up).unwrap();
        let back = up.add(&r).unwrap();
        assert!(back.max_abs_diff(&img).unwrap() <= 1e-6);
    }

    #[test]
    fn shape_mismatch() {
        let a = ImageBuffer::filled(2, 2, 1, 0.0);
        let b = ImageBuffer::filled(2, 2, 3, 0.0);
        assert!(matches!(residual(&a, &b), Err(Error::DimensionMismatch(_))));
    }
}
