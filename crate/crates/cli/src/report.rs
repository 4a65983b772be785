use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// A run finished but one of its self-checks did not pass.
#[derive(Debug)]
pub struct SelfCheckFailed(pub String);

impl std::fmt::Display for SelfCheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "self-check failed: {}", self.0)
    }
}

impl std::error::Error for SelfCheckFailed {}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
