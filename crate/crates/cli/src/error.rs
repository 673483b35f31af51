use std::path::Path;

use thiserror::Error;

/// Fatal errors, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("asset error: {0}")]
    Asset(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Asset(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<facegen::scene::SceneError> for CliError {
    fn from(e: facegen::scene::SceneError) -> Self {
        use facegen::scene::SceneError::*;
        match e {
            EmptyPool(_) | UnknownAsset { .. } => CliError::Asset(e.to_string()),
            PlacementExhausted { .. } | UnknownPreset(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<facegen::pipeline::PipelineError> for CliError {
    fn from(e: facegen::pipeline::PipelineError) -> Self {
        match e {
            facegen::pipeline::PipelineError::Scene(s) => s.into(),
            facegen::pipeline::PipelineError::MissingAsset(m) => CliError::Asset(m.to_string()),
        }
    }
}

impl From<facegen::assets::AssetError> for CliError {
    fn from(e: facegen::assets::AssetError) -> Self {
        CliError::Asset(e.to_string())
    }
}
