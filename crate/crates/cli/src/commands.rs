//! `decompose`, `reswarp` and `mockgen`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use atw_core::store::{load_decomposition, save_decomposition};
use atw_core::{
    load_image, save_field, save_image, Decomposition, ImageBuffer, MockFieldSpec, MotionField,
    ReswarpConfig,
};
use serde::{Deserialize, Serialize};

use crate::animate::{FrameSidecar, Timings};
use crate::frame::{Padding, Prepared};
use crate::report::{write_json, SelfCheckFailed};

/// Round-trip error allowed by the decomposition self-check.
pub const RECONSTRUCTION_TOLERANCE: f32 = 1e-5;

#[derive(Debug, Serialize, Deserialize)]
pub struct DecomposeManifest {
    pub input: String,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub mode: String,
    pub base_size: usize,
    pub upsample: String,
    /// Pyramid depth; 0 for vanilla.
    pub levels: usize,
    pub padding: Option<[[usize; 2]; 2]>,
    pub files: Vec<String>,
    pub reconstruction_error: f32,
}

impl DecomposeManifest {
    fn config(&self) -> Result<ReswarpConfig> {
        Ok(ReswarpConfig {
            mode: self.mode.parse()?,
            base_size: self.base_size,
            upsample_method: self.upsample.parse()?,
        })
    }

    fn padding(&self) -> Option<Padding> {
        self.padding.map(|[original, padded]| Padding { original, padded })
    }
}

/// Splits `input` into files under `out_dir`, then reloads them and checks
/// that a zero-motion recomposition reproduces the input.
pub fn cmd_decompose(input: &Path, cfg: ReswarpConfig, out_dir: &Path) -> Result<DecomposeManifest> {
    let raw = load_image(input).with_context(|| format!("loading {}", input.display()))?;
    let prep = Prepared::new(&raw, cfg).with_context(|| format!("decomposing {}", input.display()))?;
    let files = save_decomposition(&prep.decomposition, out_dir)?;

    let reloaded = load_decomposition(out_dir, cfg.upsample_method)?;
    let check = Prepared::from_parts(cfg, reloaded, prep.padding);
    let zero = MotionField::zeros(cfg.base_size, cfg.base_size);
    let rebuilt = check.render(check.low(), &zero, 1.0)?;
    let reconstruction_error = rebuilt.image.max_abs_diff(&raw)?;

    let levels = match &prep.decomposition {
        Decomposition::Vanilla { .. } => 0,
        Decomposition::Multiscale(p) => p.depth(),
    };
    let manifest = DecomposeManifest {
        input: input.display().to_string(),
        width: raw.width(),
        height: raw.height(),
        channels: raw.channels(),
        mode: cfg.mode.to_string(),
        base_size: cfg.base_size,
        upsample: cfg.upsample_method.to_string(),
        levels,
        padding: prep.padding.map(|p| [p.original, p.padded]),
        files: files
            .iter()
            .map(|f| f.strip_prefix(out_dir).unwrap_or(f).display().to_string())
            .collect(),
        reconstruction_error,
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    if !(reconstruction_error <= RECONSTRUCTION_TOLERANCE) {
        bail!(SelfCheckFailed(format!(
            "reconstruction error {reconstruction_error:e} exceeds {RECONSTRUCTION_TOLERANCE:e}"
        )));
    }
    Ok(manifest)
}

/// Where `reswarp` gets its residuals from.
#[derive(Clone, Debug)]
pub enum ReswarpSource {
    Image(PathBuf),
    /// Output directory of `decompose`; its manifest supplies the config.
    Decomposition(PathBuf),
}

#[derive(Clone, Debug)]
pub struct ReswarpJob {
    pub source: ReswarpSource,
    pub field: MotionField,
    pub field_label: String,
    pub low_result: Option<PathBuf>,
    pub alpha: f32,
    pub cfg: ReswarpConfig,
    pub out_dir: PathBuf,
}

/// Renders one frame into `out_dir/frame.png` with a `frame.json` side-car.
pub fn cmd_reswarp(job: &ReswarpJob) -> Result<ImageBuffer> {
    let prep = match &job.source {
        ReswarpSource::Image(p) => {
            let raw = load_image(p).with_context(|| format!("loading {}", p.display()))?;
            Prepared::new(&raw, job.cfg)?
        }
        ReswarpSource::Decomposition(dir) => {
            let manifest_path = dir.join("manifest.json");
            let text = fs::read_to_string(&manifest_path)
                .with_context(|| format!("reading {}", manifest_path.display()))?;
            let manifest: DecomposeManifest = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", manifest_path.display()))?;
            let cfg = manifest.config()?;
            let d = load_decomposition(dir, cfg.upsample_method)?;
            Prepared::from_parts(cfg, d, manifest.padding())
        }
    };
    let low_result = match &job.low_result {
        Some(p) => load_image(p).with_context(|| format!("loading low result {}", p.display()))?,
        None => prep.low().clone(),
    };
    let frame = prep
        .render(&low_result, &job.field, job.alpha)
        .with_context(|| format!("rendering (alpha = {})", job.alpha))?;
    fs::create_dir_all(&job.out_dir).with_context(|| format!("creating {}", job.out_dir.display()))?;
    save_image(&frame.image, job.out_dir.join("frame.png"))?;
    let sidecar = FrameSidecar {
        frame: 0,
        alpha: job.alpha,
        mode: prep.cfg.mode.to_string(),
        base_size: prep.cfg.base_size,
        upsample: prep.cfg.upsample_method.to_string(),
        field: &job.field_label,
        clamped: frame.clamped,
        timings_ms: Timings {
            decompose: prep.decompose_ms,
            reswarp: frame.elapsed_ms,
        },
        padding: prep.padding,
    };
    write_json(&job.out_dir.join("frame.json"), &sidecar)?;
    Ok(frame.image)
}

/// Samples `spec` on a `base`x`base` grid and writes it as ATWF.
pub fn cmd_mockgen(spec: &MockFieldSpec, base: usize, out: &Path) -> Result<MotionField> {
    let field = spec.generate(base)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    save_field(&field, out)?;
    Ok(field)
}
