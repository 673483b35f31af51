//! Ground-truth face annotations.
//!
//! Boxes come from the projected landmarks, raised at the top to take in the
//! forehead. Visibility compares the pixels a face owns in the composite
//! render with the pixels it covers when rendered alone.

mod formats;
mod stats;

pub use formats::{
    read_coco, read_wider, write_coco, write_wider, CocoAnnotation, CocoCategory, CocoDataset, CocoImage,
    FormatError, WiderFace, WiderImage,
};
pub use stats::{dataset_stats, BinStats, DatasetStats};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbox::BBox;
use crate::geometry::Pose;

/// MAFA labels faces with a side under this many pixels as ignored.
pub const MAFA_IGNORE_SIDE: f64 = 32.0;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum AnnotateError {
    #[error("fewer than 3 landmarks are in front of the camera")]
    TooFewVisible,
    #[error("face covers no pixels when rendered alone")]
    ZeroSilhouette,
    #[error("no annotations to summarize")]
    EmptyDataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnotateConfig {
    /// Fraction of the landmark hull height added above it.
    pub expand_top: f64,
    /// Ignore faces with a side under 32 px.
    pub mafa_ignore_rule: bool,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self {
            expand_top: 0.1,
            mafa_ignore_rule: false,
        }
    }
}

impl AnnotateConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.expand_top.is_finite() && self.expand_top >= 0.0) {
            return Err(format!("expand_top: {} must be finite and >= 0", self.expand_top));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionLevel {
    None,
    Landmark,
    Heavy,
}

impl OcclusionLevel {
    /// Flag used in WIDER-style text files.
    pub fn flag(self) -> u8 {
        self as u8
    }

    pub fn from_flag(f: u8) -> Option<Self> {
        match f {
            0 => Some(Self::None),
            1 => Some(Self::Landmark),
            2 => Some(Self::Heavy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleBin {
    Tiny,
    Medium,
    Large,
}

impl ScaleBin {
    pub const ALL: [ScaleBin; 3] = [ScaleBin::Tiny, ScaleBin::Medium, ScaleBin::Large];

    /// Nominal height range `[lo, hi)`; the large bin includes 400.
    pub fn height_range(self) -> [f64; 2] {
        match self {
            ScaleBin::Tiny => [10.0, 30.0],
            ScaleBin::Medium => [30.0, 50.0],
            ScaleBin::Large => [50.0, 400.0],
        }
    }

    /// Nominal width range, inclusive.
    pub fn width_range(self) -> [f64; 2] {
        match self {
            ScaleBin::Tiny => [8.0, 20.0],
            ScaleBin::Medium => [10.0, 70.0],
            ScaleBin::Large => [20.0, 300.0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScaleBin::Tiny => "tiny",
            ScaleBin::Medium => "medium",
            ScaleBin::Large => "large",
        }
    }
}

impl fmt::Display for ScaleBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bin by box height; boundaries go to the larger bin. The flag is set for
/// heights outside `[10, 400]`, which land in the nearest bin.
pub fn scale_bin(height: f64) -> (ScaleBin, bool) {
    let bin = if height < 30.0 {
        ScaleBin::Tiny
    } else if height < 50.0 {
        ScaleBin::Medium
    } else {
        ScaleBin::Large
    };
    (bin, !(10.0..=400.0).contains(&height))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceAnnotation {
    pub image_id: String,
    /// Position of the face in its scene.
    pub face_index: u32,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub occlusion_level: OcclusionLevel,
    pub visibility: f64,
    pub scale_bin: ScaleBin,
    pub scale_out_of_range: bool,
    pub pose: Pose,
    pub ignored: bool,
}

/// Axis-aligned landmark hull with its top raised by `expand_top` times its
/// height, clipped to the image and rounded outward to whole pixels.
pub fn landmarks_to_box(points: &[[f64; 2]], width: u32, height: u32, expand_top: f64) -> Result<BBox, AnnotateError> {
    if points.len() < 3 {
        return Err(AnnotateError::TooFewVisible);
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    lo[1] -= expand_top * (hi[1] - lo[1]);
    let x0 = lo[0].max(0.0).floor();
    let y0 = lo[1].max(0.0).floor();
    let x1 = hi[0].min(width as f64).ceil();
    let y1 = hi[1].min(height as f64).ceil();
    let x0 = x0.min(width as f64);
    let y0 = y0.min(height as f64);
    Ok(BBox::new(x0, y0, (x1 - x0).max(0.0), (y1 - y0).max(0.0)))
}

/// Share of a face's solo silhouette that it still owns in the composite.
pub fn visibility_fraction(face_id: u32, instance_ids: &[u32], silhouette_pixels: usize) -> Result<f64, AnnotateError> {
    if silhouette_pixels == 0 {
        return Err(AnnotateError::ZeroSilhouette);
    }
    let owned = instance_ids.iter().filter(|&&i| i == face_id).count();
    Ok((owned as f64 / silhouette_pixels as f64).min(1.0))
}

pub fn occlusion_level(visibility: f64, has_occluders: bool) -> OcclusionLevel {
    if visibility < 0.5 {
        OcclusionLevel::Heavy
    } else if has_occluders {
        OcclusionLevel::Landmark
    } else {
        OcclusionLevel::None
    }
}

/// Whether a box passes the generator's size rule (`w > 8`, `h > 10` by
/// default) and, if enabled, the MAFA side-length rule.
pub fn keeps_box(b: &BBox, min_face_px: [u32; 2], config: &AnnotateConfig) -> bool {
    if !(b.w > min_face_px[0] as f64 && b.h > min_face_px[1] as f64) {
        return false;
    }
    !(config.mafa_ignore_rule && b.w.min(b.h) < MAFA_IGNORE_SIDE)
}
