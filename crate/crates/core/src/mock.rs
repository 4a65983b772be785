//! Analytic motion fields that stand in for a generator's output.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::MotionField;

/// A closed-form displacement pattern, sampled on a square base raster.
///
/// Textual form is `kind[:p1,p2,...]`: `zero`, `translate:dx,dy`,
/// `radial:cx,cy,gain`, `shear:band,gain`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MockFieldSpec {
    Zero,
    /// The same `(dx, dy)` everywhere.
    Translate { dx: f32, dy: f32 },
    /// `d(p) = gain * (p - c)`: zero at the center, growing linearly outward.
    Radial { cx: f32, cy: f32, gain: f32 },
    /// Horizontal shear about the middle row: `dx = gain * clamp(y - mid, -band, band)`.
    Shear { band: f32, gain: f32 },
}

impl MockFieldSpec {
    pub fn validate(&self) -> Result<()> {
        let params: &[f32] = match self {
            MockFieldSpec::Zero => &[],
            MockFieldSpec::Translate { dx, dy } => &[*dx, *dy],
            MockFieldSpec::Radial { cx, cy, gain } => &[*cx, *cy, *gain],
            MockFieldSpec::Shear { band, gain } => &[*band, *gain],
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::BadSpec(format!("{self}: parameters must be finite")));
        }
        if let MockFieldSpec::Shear { band, .. } = self {
            if *band < 0.0 {
                return Err(Error::BadSpec(format!("{self}: band must be nonnegative")));
            }
        }
        Ok(())
    }

    /// Upper bound on `|dx|` and `|dy|` for a `size`x`size` sampling.
    pub fn max_displacement(&self, size: usize) -> f32 {
        let far = |c: f32| c.abs().max((size as f32 - 1.0 - c).abs());
        match *self {
            MockFieldSpec::Zero => 0.0,
            MockFieldSpec::Translate { dx, dy } => dx.abs().max(dy.abs()),
            MockFieldSpec::Radial { cx, cy, gain } => gain.abs() * far(cx).max(far(cy)),
            MockFieldSpec::Shear { band, gain } => gain.abs() * band,
        }
    }

    pub fn generate(&self, size: usize) -> Result<MotionField> {
        self.validate()?;
        if size == 0 {
            return Err(Error::BadSpec("field size must be nonzero".into()));
        }
        let mid = (size as f32 - 1.0) / 2.0;
        let spec = *self;
        Ok(MotionField::from_fn(size, size, move |x, y| {
            let (x, y) = (x as f32, y as f32);
            match spec {
                MockFieldSpec::Zero => (0.0, 0.0),
                MockFieldSpec::Translate { dx, dy } => (dx, dy),
                MockFieldSpec::Radial { cx, cy, gain } => (gain * (x - cx), gain * (y - cy)),
                MockFieldSpec::Shear { band, gain } => (gain * (y - mid).clamp(-band, band), 0.0),
            }
        }))
    }
}

impl fmt::Display for MockFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MockFieldSpec::Zero => write!(f, "zero"),
            MockFieldSpec::Translate { dx, dy } => write!(f, "translate:{dx},{dy}"),
            MockFieldSpec::Radial { cx, cy, gain } => write!(f, "radial:{cx},{cy},{gain}"),
            MockFieldSpec::Shear { band, gain } => write!(f, "shear:{band},{gain}"),
        }
    }
}

impl FromStr for MockFieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = rest
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<f32>()
                    .map_err(|_| Error::BadSpec(format!("{s:?}: {p:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::BadSpec(format!(
                    "{s:?}: {kind} takes {n} parameters, got {}",
                    params.len()
                )))
            }
        };
        let spec = match kind.trim().to_ascii_lowercase().as_str() {
            "zero" => {
                arity(0)?;
                MockFieldSpec::Zero
            }
            "translate" => {
                arity(2)?;
                MockFieldSpec::Translate {
                    dx: params[0],
                    dy: params[1],
                }
            }
            "radial" => {
                arity(3)?;
                MockFieldSpec::Radial {
                    cx: params[0],
                    cy: params[1],
                    gain: params[2],
                }
            }
            "shear" => {
                arity(2)?;
                MockFieldSpec::Shear {
                    band: params[0],
                    gain: params[1],
                }
            }
            other => return Err(Error::BadSpec(format!("unknown field kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}
