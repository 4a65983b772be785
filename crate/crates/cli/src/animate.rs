//! α-scheduled animation: one decomposition, one frame per α.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use atw_core::{load_field, load_image, save_image, ImageBuffer, MockFieldSpec, MotionField, ReswarpConfig};
use serde::Serialize;

use crate::frame::{Padding, Prepared};
use crate::report::{write_json, SelfCheckFailed};

/// α values used when none are given.
pub const DEFAULT_ALPHAS: [f32; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Frame 0 must reproduce the input this closely when α = 0 and no low
/// result is supplied.
pub const IDENTITY_TOLERANCE: f32 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSource {
    File(PathBuf),
    Mock(MockFieldSpec),
    /// One ATWF per frame, taken in file-name order.
    Dir(PathBuf),
}

#[derive(Clone, Debug)]
pub struct AnimationJob {
    pub input: PathBuf,
    pub field: FieldSource,
    /// Generated low-resolution result. Defaults to the decomposed low
    /// component, i.e. a generator that changes nothing.
    pub low_result: Option<PathBuf>,
    pub alphas: Vec<f32>,
    pub cfg: ReswarpConfig,
    pub out_dir: PathBuf,
    /// Keep rendered frames in memory and return them.
    pub retain_frames: bool,
}

impl AnimationJob {
    pub fn new(input: impl Into<PathBuf>, field: FieldSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            field,
            low_result: None,
            alphas: DEFAULT_ALPHAS.to_vec(),
            cfg: ReswarpConfig::default(),
            out_dir: out_dir.into(),
            retain_frames: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.alphas.is_empty(), "alpha schedule is empty");
        for &a in &self.alphas {
            ensure!((0.0..=1.0).contains(&a), "alpha {a} is outside [0, 1]");
        }
        ensure!(
            self.alphas.windows(2).all(|p| p[0] <= p[1]),
            "alpha schedule must be nondecreasing"
        );
        self.cfg.validate()?;
        Ok(())
    }
}

/// Parses `"0,0.2,0.4"`.
pub fn parse_alphas(s: &str) -> Result<Vec<f32>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f32>().with_context(|| format!("bad alpha {t:?}")))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct FrameRecord {
    pub index: usize,
    pub file: String,
    pub alpha: f32,
    pub clamped: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct FrameSidecar<'a> {
    pub frame: usize,
    pub alpha: f32,
    pub mode: String,
    pub base_size: usize,
    pub upsample: String,
    pub field: &'a str,
    pub clamped: usize,
    pub timings_ms: Timings,
    pub padding: Option<Padding>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Timings {
    pub decompose: f64,
    pub reswarp: f64,
}

#[derive(Debug, Serialize)]
pub struct Coherency {
    pub metric: &'static str,
    pub note: &'static str,
    pub value: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct AnimationReport {
    pub input: String,
    pub width: usize,
    pub height: usize,
    pub mode: String,
    pub base_size: usize,
    pub upsample: String,
    pub field: String,
    pub identity_generator: bool,
    pub padding: Option<Padding>,
    pub decompose_ms: f64,
    pub frames: Vec<FrameRecord>,
    pub coherency: Coherency,
    pub self_checks: Vec<SelfCheck>,
}

pub struct AnimationOutcome {
    pub report: AnimationReport,
    /// Present when the job asked to retain frames.
    pub frames: Vec<ImageBuffer>,
}

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:03}.png")
}

fn field_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading field directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("atwf")))
        .collect();
    files.sort();
    ensure!(!files.is_empty(), "no .atwf files in {}", dir.display());
    Ok(files)
}

/// Loads or generates the base-resolution field(s) for each frame.
fn frame_fields(job: &AnimationJob) -> Result<(Vec<MotionField>, String)> {
    let base = job.cfg.base_size;
    match &job.field {
        FieldSource::File(p) => {
            let f = load_field(p).with_context(|| format!("loading field {}", p.display()))?;
            Ok((vec![f], p.display().to_string()))
        }
        FieldSource::Mock(spec) => Ok((vec![spec.generate(base)?], format!("mock {spec}"))),
        FieldSource::Dir(dir) => {
            let fields = field_files(dir)?
                .iter()
                .map(|p| load_field(p).with_context(|| format!("loading field {}", p.display())))
                .collect::<Result<Vec<_>>>()?;
            ensure!(
                fields.len() == job.alphas.len(),
                "{} fields in {} but {} alphas",
                fields.len(),
                dir.display(),
                job.alphas.len()
            );
            Ok((fields, dir.display().to_string()))
        }
    }
}

/// Renders every frame of `job`, writing `frame_NNN.png` plus a JSON side-car
/// per frame and `report.json`. Fails with [`SelfCheckFailed`] (after
/// writing everything) if a self-check does not pass.
pub fn run_animation(job: &AnimationJob) -> Result<AnimationOutcome> {
    job.validate()?;
    let raw = load_image(&job.input).with_context(|| format!("loading {}", job.input.display()))?;
    let prep = Prepared::new(&raw, job.cfg).with_context(|| format!("decomposing {}", job.input.display()))?;
    let low_result = match &job.low_result {
        Some(p) => load_image(p).with_context(|| format!("loading low result {}", p.display()))?,
        None => prep.low().clone(),
    };
    let (fields, field_label) = frame_fields(job)?;
    fs::create_dir_all(&job.out_dir).with_context(|| format!("creating {}", job.out_dir.display()))?;

    let mut records = Vec::with_capacity(job.alphas.len());
    let mut retained = Vec::new();
    let mut self_checks = Vec::new();
    let mut previous: Option<ImageBuffer> = None;
    let mut pair_diffs = Vec::new();

    for (i, &alpha) in job.alphas.iter().enumerate() {
        let field = &fields[i.min(fields.len() - 1)];
        let frame = prep
            .render(&low_result, field, alpha)
            .with_context(|| format!("rendering frame {i} (alpha = {alpha})"))?;
        let name = frame_name(i);
        save_image(&frame.image, job.out_dir.join(&name))
            .with_context(|| format!("writing frame {i} (alpha = {alpha})"))?;
        let sidecar = FrameSidecar {
            frame: i,
            alpha,
            mode: job.cfg.mode.to_string(),
            base_size: job.cfg.base_size,
            upsample: job.cfg.upsample_method.to_string(),
            field: &field_label,
            clamped: frame.clamped,
            timings_ms: Timings {
                decompose: prep.decompose_ms,
                reswarp: frame.elapsed_ms,
            },
            padding: prep.padding,
        };
        write_json(&job.out_dir.join(format!("frame_{i:03}.json")), &sidecar)?;

        if alpha == 0.0 && job.low_result.is_none() {
            let err = frame.image.max_abs_diff(&raw)?;
            self_checks.push(SelfCheck {
                name: format!("frame {i}: alpha 0 reproduces input"),
                passed: err <= IDENTITY_TOLERANCE,
                detail: format!("max abs error {err:e}"),
            });
        }
        let in_range = frame.image.data().iter().all(|v| (-1.0..=1.0).contains(v));
        self_checks.push(SelfCheck {
            name: format!("frame {i}: samples within [-1, 1]"),
            passed: in_range,
            detail: format!("{} samples clamped", frame.clamped),
        });

        if let Some(prev) = &previous {
            pair_diffs.push(prev.mean_abs_diff(&frame.image)?);
        }
        records.push(FrameRecord {
            index: i,
            file: name,
            alpha,
            clamped: frame.clamped,
            elapsed_ms: frame.elapsed_ms,
        });
        if job.retain_frames {
            retained.push(frame.image.clone());
        }
        previous = Some(frame.image);
    }

    let coherency = Coherency {
        metric: "mean_abs_frame_difference",
        note: "frame-difference proxy for temporal coherency; lower is smoother",
        value: (!pair_diffs.is_empty()).then(|| pair_diffs.iter().sum::<f64>() / pair_diffs.len() as f64),
    };
    let report = AnimationReport {
        input: job.input.display().to_string(),
        width: raw.width(),
        height: raw.height(),
        mode: job.cfg.mode.to_string(),
        base_size: job.cfg.base_size,
        upsample: job.cfg.upsample_method.to_string(),
        field: field_label,
        identity_generator: job.low_result.is_none(),
        padding: prep.padding,
        decompose_ms: prep.decompose_ms,
        frames: records,
        coherency,
        self_checks,
    };
    write_json(&job.out_dir.join("report.json"), &report)?;

    if let Some(bad) = report.self_checks.iter().find(|c| !c.passed) {
        bail!(SelfCheckFailed(format!("{}: {}", bad.name, bad.detail)));
    }
    Ok(AnimationOutcome {
        report,
        frames: retained,
    })
}
