//! Shared per-frame machinery: bringing an input to a size the chosen mode
//! accepts, and rendering frames from one decomposition.

use std::time::Instant;

use atw_core::{
    decompose, interpolate_field, recompose, Decomposition, Error, ImageBuffer, Mode, MotionField,
    ReswarpConfig,
};
use serde::Serialize;

/// Reflective padding applied so a multiscale pyramid can be built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Padding {
    pub original: [usize; 2],
    pub padded: [usize; 2],
}

/// Smallest square `base * 2^K` covering `width`x`height`.
pub fn multiscale_extent(width: usize, height: usize, base: usize) -> usize {
    let mut side = base;
    while side < width.max(height) {
        side *= 2;
    }
    side
}

/// An input decomposed once and ready to render any number of frames.
pub struct Prepared {
    pub cfg: ReswarpConfig,
    pub decomposition: Decomposition,
    pub padding: Option<Padding>,
    pub decompose_ms: f64,
}

impl Prepared {
    /// Decomposes `raw`. Multiscale inputs that are not `base * 2^K` squares
    /// are reflect-padded first; vanilla inputs must already be multiples of
    /// the base size.
    pub fn new(raw: &ImageBuffer, cfg: ReswarpConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let start = Instant::now();
        let (w, h) = raw.dimensions();
        let (decomposition, padding) = if cfg.mode == Mode::Multiscale && !cfg.accepts(w, h) {
            let side = multiscale_extent(w, h, cfg.base_size);
            let padded = raw.pad_reflect(side, side)?;
            let padding = Padding {
                original: [w, h],
                padded: [side, side],
            };
            (decompose(&padded, &cfg)?, Some(padding))
        } else {
            (decompose(raw, &cfg)?, None)
        };
        Ok(Self {
            cfg,
            decomposition,
            padding,
            decompose_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn from_parts(cfg: ReswarpConfig, decomposition: Decomposition, padding: Option<Padding>) -> Self {
        Self {
            cfg,
            decomposition,
            padding,
            decompose_ms: 0.0,
        }
    }

    pub fn low(&self) -> &ImageBuffer {
        self.decomposition.low()
    }

    /// Size of the frames handed back to the caller, i.e. the unpadded size.
    pub fn output_dimensions(&self) -> (usize, usize) {
        match self.padding {
            Some(p) => (p.original[0], p.original[1]),
            None => self.decomposition.full_dimensions(),
        }
    }

    /// Recomposes one frame with the field scaled by `alpha`.
    pub fn render(&self, low_result: &ImageBuffer, field: &MotionField, alpha: f32) -> Result<Frame, Error> {
        let start = Instant::now();
        let scaled = interpolate_field(field, alpha)?;
        let out = recompose(low_result, &self.decomposition, &scaled, &self.cfg)?;
        let image = match self.padding {
            Some(p) => out.image.crop(0, 0, p.original[0], p.original[1])?,
            None => out.image,
        };
        Ok(Frame {
            image,
            alpha,
            clamped: out.clamped,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

pub struct Frame {
    pub image: ImageBuffer,
    pub alpha: f32,
    pub clamped: usize,
    pub elapsed_ms: f64,
}
