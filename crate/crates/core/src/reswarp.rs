//! Residual warping: split an HD image into a base-size low-frequency part
//! plus residuals, then rebuild an HD frame from a (possibly edited) low
//! result by warping the residuals along the motion field.
//!
//! *Vanilla* mode keeps one full-resolution residual taken against the
//! up-sampled block average. *Multiscale* mode keeps a Laplacian pyramid and
//! rebuilds coarse to fine, warping each level with the base field
//! up-sampled to that level's resolution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::buffer::{ImageBuffer, ResidualMap};
use crate::error::{Error, Result};
use crate::field::MotionField;
use crate::pyramid::{build_pyramid_into, ResidualPyramid};
use crate::resample::{downsample_average_into, upsample2x_into, upsample_into, ResamplingMethod};
use crate::warp::warp_add;

pub const DEFAULT_BASE_SIZE: usize = 128;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Vanilla,
    Multiscale,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Vanilla => "vanilla",
            Mode::Multiscale => "multiscale",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" => Ok(Mode::Vanilla),
            "multiscale" => Ok(Mode::Multiscale),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode {other:?} (expected vanilla or multiscale)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReswarpConfig {
    pub mode: Mode,
    /// Side of the square low-resolution component.
    pub base_size: usize,
    /// Kernel for image up-sampling on both the decomposition and the
    /// recomposition side. Fields are always up-sampled bilinearly.
    pub upsample_method: ResamplingMethod,
}

impl Default for ReswarpConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Vanilla,
            base_size: DEFAULT_BASE_SIZE,
            upsample_method: ResamplingMethod::Bilinear,
        }
    }
}

impl ReswarpConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn with_method(mut self, method: ResamplingMethod) -> Self {
        self.upsample_method = method;
        self
    }

    pub fn with_base_size(mut self, base_size: usize) -> Self {
        self.base_size = base_size;
        self
    }

    /// `base_size` must be 16 times a power of two.
    pub fn validate(&self) -> Result<()> {
        let b = self.base_size;
        if b >= 16 && b % 16 == 0 && (b / 16).is_power_of_two() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "base size {b} is not 16 times a power of two"
            )))
        }
    }

    /// Whether `width`x`height` can be decomposed in this mode as-is.
    pub fn accepts(&self, width: usize, height: usize) -> bool {
        let b = self.base_size;
        match self.mode {
            Mode::Vanilla => width % b == 0 && height % b == 0,
            Mode::Multiscale => crate::pyramid::pyramid_depth(width, height, b).is_ok(),
        }
    }
}

/// An HD image split into its base-size low component and residuals.
#[derive(Clone, Debug, PartialEq)]
pub enum Decomposition {
    Vanilla { low: ImageBuffer, residual: ResidualMap },
    Multiscale(ResidualPyramid),
}

impl Decomposition {
    pub fn mode(&self) -> Mode {
        match self {
            Decomposition::Vanilla { .. } => Mode::Vanilla,
            Decomposition::Multiscale(_) => Mode::Multiscale,
        }
    }

    /// The base-size image a generator would consume.
    pub fn low(&self) -> &ImageBuffer {
        match self {
            Decomposition::Vanilla { low, .. } => low,
            Decomposition::Multiscale(p) => &p.base,
        }
    }

    pub fn full_dimensions(&self) -> (usize, usize) {
        match self {
            Decomposition::Vanilla { residual, .. } => residual.dimensions(),
            Decomposition::Multiscale(p) => p.full_dimensions(),
        }
    }
}

pub fn decompose(raw: &ImageBuffer, cfg: &ReswarpConfig) -> Result<Decomposition> {
    let mut slot = None;
    decompose_into(raw, cfg, &mut slot, &mut ImageBuffer::placeholder())?;
    Ok(slot.expect("filled on success"))
}

/// Decomposes into `slot`, reusing its buffers when it already holds a
/// decomposition of the configured mode.
fn decompose_into(
    raw: &ImageBuffer,
    cfg: &ReswarpConfig,
    slot: &mut Option<Decomposition>,
    spare: &mut ImageBuffer,
) -> Result<()> {
    cfg.validate()?;
    let b = cfg.base_size;
    if slot.as_ref().map(Decomposition::mode) != Some(cfg.mode) {
        *slot = None;
    }
    let d = slot.get_or_insert_with(|| match cfg.mode {
        Mode::Vanilla => Decomposition::Vanilla {
            low: ImageBuffer::placeholder(),
            residual: ImageBuffer::placeholder(),
        },
        Mode::Multiscale => Decomposition::Multiscale(ResidualPyramid {
            levels: Vec::new(),
            base: ImageBuffer::placeholder(),
            method: cfg.upsample_method,
        }),
    });
    let result = match d {
        Decomposition::Vanilla { low, residual } => downsample_average_into(raw, b, b, low)
            .and_then(|()| upsample_into(low, raw.width(), raw.height(), cfg.upsample_method, residual))
            .and_then(|()| residual.subtract_from(raw)),
        Decomposition::Multiscale(pyr) => build_pyramid_into(raw, b, cfg.upsample_method, pyr, spare),
    };
    if result.is_err() {
        // Never leave a half-written decomposition behind.
        *slot = None;
    }
    result
}

/// A recomposed frame and the number of samples that had to be clamped.
#[derive(Clone, Debug, PartialEq)]
pub struct ReswarpOutput {
    pub image: ImageBuffer,
    pub clamped: usize,
}

fn check_base(low_result: &ImageBuffer, field: &MotionField, cfg: &ReswarpConfig) -> Result<()> {
    let b = cfg.base_size;
    if low_result.dimensions() != (b, b) {
        return Err(Error::DimensionMismatch(format!(
            "low result is {}x{}, expected {b}x{b}",
            low_result.width(),
            low_result.height()
        )));
    }
    if field.dimensions() != (b, b) {
        return Err(Error::DimensionMismatch(format!(
            "motion field is {}x{}, expected {b}x{b}",
            field.width(),
            field.height()
        )));
    }
    Ok(())
}

/// `clamp(up(low_result) + warp(residual, up_field(field)))`.
pub fn vanilla_reswarp(
    low_result: &ImageBuffer,
    residual: &ResidualMap,
    field: &MotionField,
    cfg: &ReswarpConfig,
) -> Result<ReswarpOutput> {
    let mut image = ImageBuffer::placeholder();
    let clamped = vanilla_into(low_result, residual, field, cfg, &mut image)?;
    Ok(ReswarpOutput { image, clamped })
}

fn vanilla_into(
    low_result: &ImageBuffer,
    residual: &ResidualMap,
    field: &MotionField,
    cfg: &ReswarpConfig,
    out: &mut ImageBuffer,
) -> Result<usize> {
    check_base(low_result, field, cfg)?;
    let (w, h) = residual.dimensions();
    upsample_into(low_result, w, h, cfg.upsample_method, out)?;
    warp_add(out, residual, field)?;
    Ok(out.clamp_signed())
}

/// Coarse to fine: `S = low_result`, then for each level from coarsest,
/// `S = up2x(S) + warp(level, up_field(field))`.
pub fn multiscale_reswarp(
    low_result: &ImageBuffer,
    pyr: &ResidualPyramid,
    field: &MotionField,
    cfg: &ReswarpConfig,
) -> Result<ReswarpOutput> {
    let mut image = ImageBuffer::placeholder();
    let clamped = multiscale_into(low_result, pyr, field, cfg, &mut Vec::new(), &mut image)?;
    Ok(ReswarpOutput { image, clamped })
}

/// `stages[k - 1]` holds the partial sum at level `k`; level 0 goes to `out`.
fn multiscale_into(
    low_result: &ImageBuffer,
    pyr: &ResidualPyramid,
    field: &MotionField,
    cfg: &ReswarpConfig,
    stages: &mut Vec<ImageBuffer>,
    out: &mut ImageBuffer,
) -> Result<usize> {
    pyr.validate()?;
    check_base(low_result, field, cfg)?;
    if pyr.base.dimensions() != low_result.dimensions() {
        return Err(Error::MalformedPyramid(format!(
            "pyramid base is {}x{}, low result is {}x{}",
            pyr.base.width(),
            pyr.base.height(),
            low_result.width(),
            low_result.height()
        )));
    }
    let depth = pyr.depth();
    if depth == 0 {
        out.copy_from(low_result);
        return Ok(out.clamp_signed());
    }
    stages.resize_with(depth - 1, ImageBuffer::placeholder);
    for k in (0..depth).rev() {
        let (finer, coarser) = stages.split_at_mut(k);
        let prev = if k + 1 == depth { low_result } else { &coarser[0] };
        let target = if k == 0 { &mut *out } else { &mut finer[k - 1] };
        upsample2x_into(prev, cfg.upsample_method, target)?;
        warp_add(target, &pyr.levels[k], field)?;
    }
    Ok(out.clamp_signed())
}

/// Runs whichever recomposition matches the decomposition's mode.
pub fn recompose(
    low_result: &ImageBuffer,
    decomposition: &Decomposition,
    field: &MotionField,
    cfg: &ReswarpConfig,
) -> Result<ReswarpOutput> {
    match decomposition {
        Decomposition::Vanilla { residual, .. } => vanilla_reswarp(low_result, residual, field, cfg),
        Decomposition::Multiscale(pyr) => multiscale_reswarp(low_result, pyr, field, cfg),
    }
}

/// Decomposes and recomposes frame after frame with one configuration,
/// reusing every buffer once the frame size settles.
///
/// The results equal those of [`decompose`] and [`recompose`].
pub struct Reswarper {
    cfg: ReswarpConfig,
    decomposition: Option<Decomposition>,
    spare: ImageBuffer,
    stages: Vec<ImageBuffer>,
    output: ImageBuffer,
}

/// A frame borrowed from a [`Reswarper`].
#[derive(Clone, Copy, Debug)]
pub struct Recomposed<'a> {
    pub image: &'a ImageBuffer,
    pub clamped: usize,
}

impl Reswarper {
    pub fn new(cfg: ReswarpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            decomposition: None,
            spare: ImageBuffer::placeholder(),
            stages: Vec::new(),
            output: ImageBuffer::placeholder(),
        })
    }

    pub fn config(&self) -> &ReswarpConfig {
        &self.cfg
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        self.decomposition.as_ref()
    }

    pub fn decompose(&mut self, raw: &ImageBuffer) -> Result<&Decomposition> {
        decompose_into(raw, &self.cfg, &mut self.decomposition, &mut self.spare)?;
        Ok(self.decomposition.as_ref().expect("filled on success"))
    }

    /// Installs a decomposition made elsewhere, e.g. one loaded from disk.
    pub fn set_decomposition(&mut self, d: Decomposition) -> Result<()> {
        if d.mode() != self.cfg.mode {
            return Err(Error::InvalidConfig(format!(
                "{} decomposition given to a {} reswarper",
                d.mode(),
                self.cfg.mode
            )));
        }
        self.decomposition = Some(d);
        Ok(())
    }

    /// Recomposes from the current decomposition.
    pub fn recompose(&mut self, low_result: &ImageBuffer, field: &MotionField) -> Result<Recomposed<'_>> {
        let d = self
            .decomposition
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("recompose called before decompose".into()))?;
        let clamped = match d {
            Decomposition::Vanilla { residual, .. } => {
                vanilla_into(low_result, residual, field, &self.cfg, &mut self.output)?
            }
            Decomposition::Multiscale(pyr) => {
                multiscale_into(low_result, pyr, field, &self.cfg, &mut self.stages, &mut self.output)?
            }
        };
        Ok(Recomposed {
            image: &self.output,
            clamped,
        })
    }
}
