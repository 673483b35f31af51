use super::{GenerationConfig, OcclusionMode, SceneError};
use crate::render::{RenderConfig, SET_A, SET_B, SET_C};

pub const PRESET_NAMES: [&str; 7] = ["s1", "s2", "s3", "setA", "setB", "setC", "mafa_occ"];

/// Named experiment configuration: generation settings plus the render
/// settings they imply.
pub fn preset(name: &str) -> Result<(GenerationConfig, RenderConfig), SceneError> {
    let mut generation = GenerationConfig::default();
    let mut render = RenderConfig::default();
    match name {
        "s1" | "s2" | "s3" => {
            generation.occlusion_mode = OcclusionMode::Landmark;
            generation.face_overlap_coverage_max = if name == "s1" { 0.0 } else { 0.5 };
            if name == "s3" {
                render.base_resolutions = SET_A.to_vec();
            }
        }
        "setA" => render.base_resolutions = SET_A.to_vec(),
        "setB" => render.base_resolutions = SET_B.to_vec(),
        "setC" => render.base_resolutions = SET_C.to_vec(),
        "mafa_occ" => generation.occlusion_mode = OcclusionMode::Mixed,
        other => return Err(SceneError::UnknownPreset(other.to_string())),
    }
    Ok((generation, render))
}
