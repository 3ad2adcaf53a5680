//! Run configuration: TOML file merged with command-line overrides. Every
//! resolved value lands in the output metadata so runs can be replayed
//! bit-exactly.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub n: Option<usize>,
    pub shape: Option<String>,
    pub divisor: Option<u32>,
    pub transition: Option<String>,
    pub horizon: Option<f64>,
    pub horizon_periods: Option<f64>,
    pub dt: Option<f64>,
    pub record_points: Option<usize>,
    pub initial: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    /// Overlay `other` (command-line values) on top of this config.
    pub fn merged_with(mut self, other: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            model,
            n,
            shape,
            divisor,
            transition,
            horizon,
            horizon_periods,
            dt,
            record_points,
            initial,
            out,
            workers
        );
        self
    }
}

/// "j,k" → (j, k)
pub fn parse_transition(raw: &str) -> Result<(usize, usize), String> {
    let mut parts = raw.split(',');
    let j = parts
        .next()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| format!("bad transition `{raw}`: expected `j,k`"))?;
    let k = parts
        .next()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| format!("bad transition `{raw}`: expected `j,k`"))?;
    if parts.next().is_some() {
        return Err(format!("bad transition `{raw}`: expected exactly two levels"));
    }
    Ok((j, k))
}
