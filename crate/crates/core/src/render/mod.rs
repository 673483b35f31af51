//! Deterministic software rendering.
//!
//! Triangles are z-buffered with perspective-correct interpolation and
//! optional back-face culling, textured with nearest-texel lookups and lit by
//! the order-2 spherical-harmonic irradiance of the scene's environment map.
//! Uncovered pixels show the environment itself. [`render_with_noise`]
//! renders at a randomly chosen base width and resamples to the target size.

mod build;
mod config;
mod framebuffer;
mod raster;
mod resample;
mod shading;
mod tonemap;

pub use build::{build_render_scene, MissingAsset};
pub use config::{DownFilter, Lighting, RenderConfig, UpFilter, SET_A, SET_B, SET_C};
pub use framebuffer::{depth_to_png16, instance_to_png16, Framebuffer, NO_INSTANCE};
pub use raster::{rasterize, silhouette_pixels, RasterOptions, RenderInstance, RenderScene};
pub use resample::resample;
pub use shading::{env_lookup, shade, ShIrradiance};
pub use tonemap::{linear_to_srgb8, tonemap_and_encode};

use rand::Rng;

use crate::assets::AssetLibrary;
use crate::rng::{stream_rng, STREAM_RENDER};
use crate::scene::SceneSpec;

/// Final image of one scene after the render-then-resample pipeline.
#[derive(Debug, Clone)]
pub struct NoisyRender {
    /// Linear color at the target resolution.
    pub color: Vec<[f32; 3]>,
    pub width: usize,
    pub height: usize,
    /// Width the scene was actually rasterized at.
    pub base_width: u32,
    /// The base-resolution framebuffer.
    pub framebuffer: Framebuffer,
}

/// Height for a base width under the fixed 4:3 aspect.
pub fn base_height(width: u32) -> u32 {
    width * 3 / 4
}

/// Seeded uniform choice among the configured base widths.
pub fn choose_base_width(config: &RenderConfig, image_seed: u64) -> u32 {
    if config.base_resolutions.is_empty() {
        return config.target_resolution[0];
    }
    let mut rng = stream_rng(image_seed, STREAM_RENDER);
    config.base_resolutions[rng.gen_range(0..config.base_resolutions.len())]
}

/// Rasterize at the image's base resolution and resample to the target.
pub fn render_with_noise(
    scene: &SceneSpec,
    config: &RenderConfig,
    assets: &AssetLibrary,
) -> Result<NoisyRender, MissingAsset> {
    let base_width = choose_base_width(config, scene.rng_trace);
    let [tw, th] = config.target_resolution;
    let base_h = if base_width == tw { th } else { base_height(base_width) };
    let camera = scene.camera.with_resolution(base_width, base_h);
    let env = assets
        .environment(&scene.environment_id)
        .ok_or_else(|| MissingAsset(format!("environment `{}`", scene.environment_id)))?;
    let render_scene = build_render_scene(scene, assets)?;
    let fb = rasterize(&render_scene, &camera, Some(env), &RasterOptions::shaded(config));
    let color = resample(&fb.color, fb.width, fb.height, tw as usize, th as usize);
    Ok(NoisyRender {
        color,
        width: tw as usize,
        height: th as usize,
        base_width,
        framebuffer: fb,
    })
}
