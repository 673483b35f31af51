//! External inputs: meshes, textures, landmarks and HDR environments.
//!
//! Everything that enters the pipeline is parsed and validated here. Loaded
//! assets are immutable afterwards and shared read-only between concurrently
//! generated images.

mod hdr;
mod landmarks;
mod library;
mod manifest;
mod mesh;
mod obj;
pub mod procedural;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hdr::{decode_rgbe, encode_rgbe, load_environment, read_hdr, write_hdr};
pub use landmarks::{parse_landmarks, write_landmarks, LANDMARK_COUNT};
pub use library::{AssetLibrary, PreparedEnvironment, PreparedModel};
pub use manifest::{
    validate_manifest, AssetCheck, AssetManifest, EnvironmentSource, ModelSource, OccluderSource,
};
pub use mesh::{Mesh, Texture};
pub use obj::{load_obj, parse_obj, write_face_model, write_obj, ObjData};
pub use procedural::{make_occluder, make_test_environment, make_test_head};

use nalgebra::Vector3;

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Image { path: String, message: String },
    #[error("alignment of `{0}` to the anchor failed: landmarks are degenerate")]
    Alignment(String),
    #[error("{category} `{id}`: {source}")]
    Entry {
        category: &'static str,
        id: String,
        #[source]
        source: Box<AssetError>,
    },
}

impl AssetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        AssetError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn entry(category: &'static str, id: &str, source: AssetError) -> Self {
        AssetError::Entry {
            category,
            id: id.to_string(),
            source: Box::new(source),
        }
    }

    /// The innermost error, without manifest entry context.
    pub fn root(&self) -> &AssetError {
        match self {
            AssetError::Entry { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        AssetError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

/// Face part a landmark (or an occluder anchor) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Head,
    Eye,
    Mouth,
    Outline,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Head, Region::Eye, Region::Mouth, Region::Outline];

    /// Regions occluders can be anchored to.
    pub const OCCLUDABLE: [Region; 3] = [Region::Head, Region::Eye, Region::Mouth];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Head => "head",
            Region::Eye => "eye",
            Region::Mouth => "mouth",
            Region::Outline => "outline",
        }
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "head" => Ok(Region::Head),
            "eye" => Ok(Region::Eye),
            "mouth" => Ok(Region::Mouth),
            "outline" => Ok(Region::Outline),
            other => Err(format!("unknown landmark region `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub index: u8,
    pub position: Vector3<f64>,
    pub region: Region,
}

/// A textured head mesh with its 50 labeled landmarks.
#[derive(Debug, Clone)]
pub struct FaceModel {
    pub id: String,
    pub mesh: Mesh,
    /// Sorted by index, always exactly [`LANDMARK_COUNT`] entries once validated.
    pub landmarks: Vec<Landmark>,
}

impl FaceModel {
    /// Validates the mesh and the landmark set. Degenerate triangles are
    /// dropped; a mesh left without triangles is rejected.
    pub fn validate(mut self) -> Result<Self, AssetError> {
        self.mesh.validate()?;
        if self.landmarks.len() != LANDMARK_COUNT {
            return Err(AssetError::Validation(format!(
                "expected {LANDMARK_COUNT} landmarks, found {}",
                self.landmarks.len()
            )));
        }
        let mut seen = [false; LANDMARK_COUNT];
        for lm in &self.landmarks {
            let i = lm.index as usize;
            if i >= LANDMARK_COUNT {
                return Err(AssetError::Validation(format!(
                    "landmark index {i} out of range 0..{}",
                    LANDMARK_COUNT - 1
                )));
            }
            if seen[i] {
                return Err(AssetError::Validation(format!("duplicate landmark index {i}")));
            }
            seen[i] = true;
            if !lm.position.iter().all(|c| c.is_finite()) {
                return Err(AssetError::Validation(format!("landmark {i} is not finite")));
            }
        }
        let (center, radius) = self.mesh.bounding_sphere();
        for lm in &self.landmarks {
            if (lm.position - center).norm() > 1.5 * radius {
                return Err(AssetError::Validation(format!(
                    "landmark {} lies outside 1.5x the mesh bounding radius",
                    lm.index
                )));
            }
        }
        self.landmarks.sort_by_key(|l| l.index);
        Ok(self)
    }

    pub fn landmark_positions(&self) -> Vec<Vector3<f64>> {
        self.landmarks.iter().map(|l| l.position).collect()
    }

    pub fn landmark_centroid(&self) -> Vector3<f64> {
        centroid(self.landmarks.iter().map(|l| &l.position))
    }

    /// Centroid of the landmarks of one region, if it has any.
    pub fn region_centroid(&self, region: Region) -> Option<Vector3<f64>> {
        let pts: Vec<_> = self
            .landmarks
            .iter()
            .filter(|l| l.region == region)
            .map(|l| &l.position)
            .collect();
        (!pts.is_empty()).then(|| centroid(pts.into_iter()))
    }
}

pub(crate) fn centroid<'a>(points: impl Iterator<Item = &'a Vector3<f64>>) -> Vector3<f64> {
    let mut sum = Vector3::zeros();
    let mut n = 0usize;
    for p in points {
        sum += p;
        n += 1;
    }
    if n == 0 {
        sum
    } else {
        sum / n as f64
    }
}

/// Load an OBJ head mesh (with its MTL texture) and its landmark file.
pub fn load_face_model(mesh_path: &Path, landmark_path: &Path) -> Result<FaceModel, AssetError> {
    let obj = load_obj(mesh_path)?;
    let text = std::fs::read_to_string(landmark_path).map_err(|e| AssetError::io(landmark_path, e))?;
    let landmarks = parse_landmarks(&text, landmark_path)?;
    let id = mesh_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    FaceModel {
        id,
        mesh: obj.mesh,
        landmarks,
    }
    .validate()
}

/// Linear-radiance equirectangular environment map.
#[derive(Debug, Clone)]
pub struct Environment {
    pub id: String,
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first (looking straight up).
    pub texels: Vec<[f32; 3]>,
    pub is_indoor: bool,
}

impl Environment {
    pub fn validate(self) -> Result<Self, AssetError> {
        if self.width != 2 * self.height || self.height == 0 {
            return Err(AssetError::Validation(format!(
                "not equirectangular 2:1 ({}x{})",
                self.width, self.height
            )));
        }
        if self.texels.len() != self.width * self.height {
            return Err(AssetError::Validation("texel count does not match dimensions".into()));
        }
        if self
            .texels
            .iter()
            .any(|t| t.iter().any(|c| !c.is_finite() || *c < 0.0))
        {
            return Err(AssetError::Validation("radiance must be finite and non-negative".into()));
        }
        Ok(self)
    }

    /// Constant-radiance map, mostly useful in tests.
    pub fn constant(id: &str, height: usize, radiance: [f32; 3]) -> Self {
        Self {
            id: id.to_string(),
            width: 2 * height,
            height,
            texels: vec![radiance; 2 * height * height],
            is_indoor: false,
        }
    }

    pub fn texel(&self, x: usize, y: usize) -> [f32; 3] {
        self.texels[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccluderKind {
    Sunglasses,
    Hat,
    Helmet,
    Generic,
}

impl OccluderKind {
    pub const ALL: [OccluderKind; 4] = [
        OccluderKind::Sunglasses,
        OccluderKind::Hat,
        OccluderKind::Helmet,
        OccluderKind::Generic,
    ];

    /// Regions this kind may be anchored to.
    pub fn anchor_regions(self) -> &'static [Region] {
        match self {
            OccluderKind::Sunglasses => &[Region::Eye],
            OccluderKind::Hat | OccluderKind::Helmet => &[Region::Head],
            OccluderKind::Generic => &Region::OCCLUDABLE,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OccluderKind::Sunglasses => "sunglasses",
            OccluderKind::Hat => "hat",
            OccluderKind::Helmet => "helmet",
            OccluderKind::Generic => "generic",
        }
    }
}

/// Occluding object. Its mesh is expressed relative to the anchor point, the
/// centroid of the anchor region's landmarks on a head in canonical pose.
#[derive(Debug, Clone)]
pub struct OccluderMesh {
    pub id: String,
    pub kind: OccluderKind,
    pub mesh: Mesh,
}

impl OccluderMesh {
    pub fn validate(mut self) -> Result<Self, AssetError> {
        self.mesh.validate()?;
        Ok(self)
    }
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
