//! One call per image: sample, render, annotate.

use std::path::PathBuf;

use image::{ImageBuffer, Luma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{
    keeps_box, landmarks_to_box, occlusion_level, scale_bin, visibility_fraction, AnnotateConfig, FaceAnnotation,
    OcclusionLevel,
};
use crate::assets::AssetLibrary;
use crate::bbox::BBox;
use crate::geometry::Camera;
use crate::render::{
    build_render_scene, depth_to_png16, instance_to_png16, rasterize, render_with_noise, silhouette_pixels,
    tonemap_and_encode, MissingAsset, RasterOptions, RenderConfig,
};
use crate::scene::{preset, sample_scene, GenerationConfig, SceneError, SceneSpec};

/// Everything a generation run is configured by.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JobConfig {
    /// Asset manifest; the built-in procedural library when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assets: Option<PathBuf>,
    pub generation: GenerationConfig,
    pub render: RenderConfig,
    pub annotation: AnnotateConfig,
}

impl JobConfig {
    pub fn from_preset(name: &str) -> Result<Self, SceneError> {
        let (generation, render) = preset(name)?;
        Ok(Self {
            generation,
            render,
            ..Default::default()
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        self.generation.validate().map_err(|e| format!("generation.{e}"))?;
        self.render.validate().map_err(|e| format!("render.{e}"))?;
        self.annotation.validate().map_err(|e| format!("annotation.{e}"))?;
        Ok(())
    }

    /// The camera scenes are composed and annotated with.
    pub fn camera(&self) -> Camera {
        let [w, h] = self.render.target_resolution;
        Camera::looking_down_z(self.render.vertical_fov, w, h)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    MissingAsset(#[from] MissingAsset),
}

pub struct DebugMaps {
    pub depth: ImageBuffer<Luma<u16>, Vec<u16>>,
    pub instance: ImageBuffer<Luma<u16>, Vec<u16>>,
}

pub struct ImageOutput {
    pub scene: SceneSpec,
    /// Interleaved 8-bit sRGB at the target resolution.
    pub rgb: Vec<u8>,
    pub width: u32,
    pub height: u32,
    pub base_width: u32,
    pub annotations: Vec<FaceAnnotation>,
    /// Projected landmarks per face; `None` behind the camera.
    pub landmarks: Vec<Vec<Option<[f64; 2]>>>,
    /// Base-resolution depth and instance maps, when enabled.
    pub debug: Option<DebugMaps>,
}

/// Generate image `index` of a run.
pub fn generate_image(job: &JobConfig, assets: &AssetLibrary, index: u32) -> Result<ImageOutput, PipelineError> {
    let camera = job.camera();
    let scene = sample_scene(&job.generation, index, assets, &camera)?;
    let noisy = render_with_noise(&scene, &job.render, assets)?;
    let rgb = tonemap_and_encode(&noisy.color, job.render.exposure);
    let debug = job.render.debug_maps.then(|| DebugMaps {
        depth: depth_to_png16(&noisy.framebuffer),
        instance: instance_to_png16(&noisy.framebuffer),
    });
    drop(noisy.framebuffer);

    let (annotations, landmarks) = annotate_scene(&scene, job, assets, &camera)?;
    Ok(ImageOutput {
        rgb,
        width: camera.image_width,
        height: camera.image_height,
        base_width: noisy.base_width,
        annotations,
        landmarks,
        debug,
        scene,
    })
}

type Annotated = (Vec<FaceAnnotation>, Vec<Vec<Option<[f64; 2]>>>);

/// Boxes from landmarks, visibility from an id-only composite against each
/// face's solo silhouette, all at the annotation camera's resolution.
pub fn annotate_scene(
    scene: &SceneSpec,
    job: &JobConfig,
    assets: &AssetLibrary,
    camera: &Camera,
) -> Result<Annotated, PipelineError> {
    let cull = job.render.cull_backfaces;
    let render_scene = build_render_scene(scene, assets)?;
    let composite = rasterize(&render_scene, camera, None, &RasterOptions::ids_only(cull));
    let mut annotations = Vec::with_capacity(scene.faces.len());
    let mut all_landmarks = Vec::with_capacity(scene.faces.len());
    for (fi, face) in scene.faces.iter().enumerate() {
        let model = assets
            .model(&face.model_id)
            .ok_or_else(|| MissingAsset(format!("model `{}`", face.model_id)))?;
        let projected = face.project_landmarks(model, camera);
        let visible: Vec<[f64; 2]> = projected.iter().flatten().copied().collect();
        let bbox = landmarks_to_box(&visible, camera.image_width, camera.image_height, job.annotation.expand_top);
        let silhouette = silhouette_pixels(&render_scene.instances[fi], camera, cull);
        let visibility = visibility_fraction(fi as u32, &composite.instance_id, silhouette);

        let mut ignored = bbox.is_err() || visibility.is_err();
        let bbox = bbox.unwrap_or(BBox::new(0.0, 0.0, 0.0, 0.0));
        let visibility = visibility.unwrap_or(0.0);
        ignored |= visibility == 0.0 || !keeps_box(&bbox, job.generation.min_face_px, &job.annotation);
        let level = if ignored && visibility == 0.0 {
            OcclusionLevel::Heavy
        } else {
            occlusion_level(visibility, !face.occluders.is_empty())
        };
        let (bin, out_of_range) = scale_bin(bbox.h);
        annotations.push(FaceAnnotation {
            image_id: scene.image_id.clone(),
            face_index: fi as u32,
            bbox,
            occlusion_level: level,
            visibility,
            scale_bin: bin,
            scale_out_of_range: out_of_range,
            pose: face.pose,
            ignored,
        });
        all_landmarks.push(projected);
    }
    Ok((annotations, all_landmarks))
}
