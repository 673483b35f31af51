//! Deterministic synthetic face-detection dataset generation.
//!
//! 3D head meshes are posed, placed and optionally occluded in randomized
//! scenes, rendered with a software rasterizer lit by HDR environment maps,
//! and annotated with landmark-derived face boxes. The [`eval`] module scores
//! detector output against the generated ground truth.
//!
//! The pipeline is split into:
//!
//! - [`assets`] - OBJ/MTL meshes, landmark files, Radiance HDR environments,
//!   procedural stand-in heads and occluders, and the asset manifest.
//! - [`geometry`] - poses, similarity transforms, landmark alignment and the
//!   pinhole camera.
//! - [`scene`] - configuration, presets and randomized scene composition.
//! - [`render`] - z-buffered rasterization, image-based lighting and the
//!   multi-resolution resampling pipeline.
//! - [`annotate`] - face boxes, visibility, scale bins, annotation formats and
//!   dataset statistics.
//! - [`eval`] - IoU matching and average precision.
//! - [`pipeline`] - one call per image tying the above together.

pub mod annotate;
pub mod assets;
pub mod bbox;
pub mod eval;
pub mod geometry;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod scene;

pub use bbox::BBox;
