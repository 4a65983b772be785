//! On-disk layout for a decomposition.
//!
//! ```text
//! <dir>/low.png, low.atwr              base-size low component
//! <dir>/residual.png, residual.atwr    vanilla residual
//! <dir>/pyramid/level_<k>.png, .atwr   multiscale levels, k = 1 is full size
//! ```
//!
//! The PNGs are previews (residuals offset-encoded as `(r + 2) / 4`); the
//! ATWR files are the lossless copies that loading reads back.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{load_atwr, save_atwr, save_image, save_residual_image};
use crate::pyramid::ResidualPyramid;
use crate::resample::ResamplingMethod;
use crate::reswarp::Decomposition;

fn level_path(dir: &Path, k: usize, ext: &str) -> PathBuf {
    dir.join("pyramid").join(format!("level_{k}.{ext}"))
}

/// Writes `d` under `dir`, creating it if needed. Returns the files written.
pub fn save_decomposition(d: &Decomposition, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let low_png = dir.join("low.png");
    let low_raw = dir.join("low.atwr");
    save_image(d.low(), &low_png)?;
    save_atwr(d.low(), &low_raw)?;
    written.extend([low_png, low_raw]);
    match d {
        Decomposition::Vanilla { residual, .. } => {
            let png = dir.join("residual.png");
            let raw = dir.join("residual.atwr");
            save_residual_image(residual, &png)?;
            save_atwr(residual, &raw)?;
            written.extend([png, raw]);
        }
        Decomposition::Multiscale(pyr) => {
            let pdir = dir.join("pyramid");
            fs::create_dir_all(&pdir).map_err(|e| Error::io(&pdir, e))?;
            for (i, level) in pyr.levels.iter().enumerate() {
                let png = level_path(dir, i + 1, "png");
                let raw = level_path(dir, i + 1, "atwr");
                save_residual_image(level, &png)?;
                save_atwr(level, &raw)?;
                written.extend([png, raw]);
            }
        }
    }
    Ok(written)
}

/// Reads a decomposition written by [`save_decomposition`]. The mode is
/// inferred from which residual files exist; `method` must be the kernel
/// the decomposition was built with.
pub fn load_decomposition(dir: impl AsRef<Path>, method: ResamplingMethod) -> Result<Decomposition> {
    let dir = dir.as_ref();
    let low = load_atwr(dir.join("low.atwr"))?;
    let residual = dir.join("residual.atwr");
    if residual.exists() {
        return Ok(Decomposition::Vanilla {
            low,
            residual: load_atwr(residual)?,
        });
    }
    if !dir.join("pyramid").is_dir() {
        return Err(Error::MalformedPyramid(format!(
            "{}: neither residual.atwr nor pyramid/ present",
            dir.display()
        )));
    }
    let mut levels = Vec::new();
    for k in 1.. {
        let path = level_path(dir, k, "atwr");
        if !path.exists() {
            break;
        }
        levels.push(load_atwr(path)?);
    }
    let pyr = ResidualPyramid {
        levels,
        base: low,
        method,
    };
    pyr.validate()?;
    Ok(Decomposition::Multiscale(pyr))
}
