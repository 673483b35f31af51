use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;

use super::manifest::AssetManifest;
use super::{
    make_occluder, make_test_environment, make_test_head, AssetError, Environment, FaceModel, OccluderKind,
    OccluderMesh, Region,
};
use crate::geometry::{align_to_anchor, RigidTransform};
use crate::render::ShIrradiance;

/// A head aligned to the anchor, with its landmark centroid at the origin.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub model: FaceModel,
    pub normals: Vec<Vector3<f64>>,
    /// Transform that was applied to the loaded model.
    pub alignment: RigidTransform,
    region_centroids: [Option<Vector3<f64>>; 4],
}

impl PreparedModel {
    pub fn region_centroid(&self, region: Region) -> Option<Vector3<f64>> {
        self.region_centroids[region.slot()]
    }
}

#[derive(Debug, Clone)]
pub struct PreparedEnvironment {
    pub env: Environment,
    pub sh: ShIrradiance,
}

/// Validated, prepared assets shared read-only by every generated image.
#[derive(Debug, Clone)]
pub struct AssetLibrary {
    anchor_id: String,
    models: BTreeMap<String, PreparedModel>,
    environments: BTreeMap<String, PreparedEnvironment>,
    occluders: BTreeMap<String, OccluderMesh>,
}

pub const BUILTIN_MODELS: usize = 100;
pub const BUILTIN_ENVIRONMENTS: usize = 50;
const BUILTIN_DETAIL: u32 = 8;
const BUILTIN_ENV_HEIGHT: usize = 128;

impl AssetLibrary {
    /// Align every model to `anchor_id` and precompute environment lighting.
    pub fn new(
        anchor_id: &str,
        models: Vec<FaceModel>,
        environments: Vec<Environment>,
        occluders: Vec<OccluderMesh>,
    ) -> Result<Self, AssetError> {
        let anchor = models
            .iter()
            .find(|m| m.id == anchor_id)
            .ok_or_else(|| AssetError::Validation(format!("anchor model `{anchor_id}` not found")))?;
        let anchor_centroid = anchor.landmark_centroid();
        let target: Vec<_> = anchor.landmarks.iter().map(|l| l.position - anchor_centroid).collect();

        let mut prepared = BTreeMap::new();
        for model in models {
            let t = align_to_anchor(&model.landmark_positions(), &target)
                .map_err(|_| AssetError::Alignment(model.id.clone()))?;
            prepared.insert(model.id.clone(), prepare_model(model, t));
        }
        let environments = environments
            .into_iter()
            .map(|env| {
                let sh = ShIrradiance::from_environment(&env);
                (env.id.clone(), PreparedEnvironment { env, sh })
            })
            .collect();
        let occluders = occluders.into_iter().map(|o| (o.id.clone(), o)).collect();
        Ok(Self {
            anchor_id: anchor_id.to_string(),
            models: prepared,
            environments,
            occluders,
        })
    }

    /// The procedural library used when no manifest is given: 100 test
    /// heads, 50 panoramas (20 indoor) and two variants of each prop kind.
    pub fn builtin() -> Self {
        let models = (0..BUILTIN_MODELS as u64)
            .map(|seed| {
                let mut m = make_test_head(seed, BUILTIN_DETAIL).expect("built-in head is valid");
                m.id = format!("head_{seed:03}");
                m
            })
            .collect();
        let envs = (0..BUILTIN_ENVIRONMENTS as u64)
            .map(|seed| {
                let mut e = make_test_environment(seed, BUILTIN_ENV_HEIGHT, seed % 5 < 2);
                e.id = format!("env_{seed:02}");
                e
            })
            .collect();
        let occluders = OccluderKind::ALL
            .iter()
            .flat_map(|&k| (0..2).map(move |v| make_occluder(k, v)))
            .collect();
        Self::new("head_000", models, envs, occluders).expect("built-in library is valid")
    }

    /// Load everything a manifest references.
    pub fn load(manifest_path: &Path) -> Result<Self, AssetError> {
        let manifest = AssetManifest::read(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let anchor = manifest
            .anchor_id()
            .ok_or_else(|| AssetError::Validation("manifest lists no models".into()))?
            .to_string();
        let models = manifest
            .models
            .iter()
            .map(|(id, s)| s.load(id, base).map_err(|e| AssetError::entry("model", id, e)))
            .collect::<Result<Vec<_>, _>>()?;
        let envs = manifest
            .environments
            .iter()
            .map(|(id, s)| s.load(id, base).map_err(|e| AssetError::entry("environment", id, e)))
            .collect::<Result<Vec<_>, _>>()?;
        let occluders = manifest
            .occluders
            .iter()
            .map(|(id, s)| s.load(id, base).map_err(|e| AssetError::entry("occluder", id, e)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(&anchor, models, envs, occluders)
    }

    pub fn anchor_id(&self) -> &str {
        &self.anchor_id
    }

    pub fn model(&self, id: &str) -> Option<&PreparedModel> {
        self.models.get(id)
    }

    pub fn environment(&self, id: &str) -> Option<&PreparedEnvironment> {
        self.environments.get(id)
    }

    pub fn occluder(&self, id: &str) -> Option<&OccluderMesh> {
        self.occluders.get(id)
    }

    pub fn model_ids(&self) -> Vec<String> {
        self.models.keys().cloned().collect()
    }

    pub fn environment_ids(&self) -> Vec<String> {
        self.environments.keys().cloned().collect()
    }

    pub fn occluder_ids(&self) -> Vec<String> {
        self.occluders.keys().cloned().collect()
    }

    pub fn occluders(&self) -> impl Iterator<Item = &OccluderMesh> {
        self.occluders.values()
    }
}

fn prepare_model(mut model: FaceModel, t: RigidTransform) -> PreparedModel {
    for v in &mut model.mesh.vertices {
        *v = t.apply(v);
    }
    for l in &mut model.landmarks {
        l.position = t.apply(&l.position);
    }
    // Pin the landmark centroid to exactly the origin.
    let c = model.landmark_centroid();
    for v in &mut model.mesh.vertices {
        *v -= c;
    }
    for l in &mut model.landmarks {
        l.position -= c;
    }
    let alignment = RigidTransform {
        translation: t.translation - c,
        ..t
    };
    let region_centroids = Region::ALL.map(|r| model.region_centroid(r));
    let normals = model.mesh.vertex_normals();
    PreparedModel {
        model,
        normals,
        alignment,
        region_centroids,
    }
}
