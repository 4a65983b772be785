use crate::buffer::ImageBuffer;
use crate::error::{Error, Result};

/// Temporal coherency proxy: mean over consecutive frame pairs of the mean
/// absolute per-sample difference. Lower is smoother; `0` means every frame
/// is identical.
pub fn metric_coherency(frames: &[ImageBuffer]) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::TooFewFrames(frames.len()));
    }
    let total = frames
        .windows(2)
        .map(|pair| pair[0].mean_abs_diff(&pair[1]))
        .sum::<Result<f64>>()?;
    Ok(total / (frames.len() - 1) as f64)
}
