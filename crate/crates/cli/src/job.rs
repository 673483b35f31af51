//! Resolving a job configuration and its asset library from CLI flags.

use std::path::{Path, PathBuf};

use facegen::assets::AssetLibrary;
use facegen::pipeline::JobConfig;

use crate::error::CliError;

/// Where the assets of a run came from.
#[derive(Debug, Clone, PartialEq)]
pub enum AssetSource {
    Manifest(PathBuf),
    Builtin,
}

impl AssetSource {
    pub fn describe(&self) -> String {
        match self {
            AssetSource::Manifest(p) => p.display().to_string(),
            AssetSource::Builtin => "builtin".into(),
        }
    }
}

pub struct ResolvedJob {
    pub job: JobConfig,
    pub preset: Option<String>,
    pub assets: AssetSource,
}

/// Build the job from `--preset` or `--config` (defaults when neither), then
/// apply `--seed`.
pub fn resolve_job(preset: Option<&str>, config: Option<&Path>, seed: Option<u64>) -> Result<ResolvedJob, CliError> {
    let mut job = match (preset, config) {
        (Some(_), Some(_)) => return Err(CliError::Config("--preset and --config are mutually exclusive".into())),
        (Some(name), None) => JobConfig::from_preset(name)?,
        (None, Some(path)) => read_config(path)?,
        (None, None) => JobConfig::default(),
    };
    if let Some(s) = seed {
        job.generation.seed = s;
    }
    job.validate().map_err(CliError::Config)?;

    let assets = match &job.assets {
        Some(p) => AssetSource::Manifest(p.clone()),
        None => match std::env::var_os("FACEGEN_ASSETS").filter(|v| !v.is_empty()) {
            Some(p) => AssetSource::Manifest(PathBuf::from(p)),
            None => AssetSource::Builtin,
        },
    };
    if let AssetSource::Manifest(p) = &assets {
        job.assets = Some(p.clone());
    }
    Ok(ResolvedJob {
        job,
        preset: preset.map(str::to_string),
        assets,
    })
}

/// Parse a JSON job file. A relative `assets` path is taken relative to the
/// file's directory.
pub fn read_config(path: &Path) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut job: JobConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(a) = &job.assets {
        if a.is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            job.assets = Some(base.join(a));
        }
    }
    Ok(job)
}

pub fn load_assets(source: &AssetSource) -> Result<AssetLibrary, CliError> {
    match source {
        AssetSource::Manifest(p) => Ok(AssetLibrary::load(p)?),
        AssetSource::Builtin => Ok(AssetLibrary::builtin()),
    }
}
