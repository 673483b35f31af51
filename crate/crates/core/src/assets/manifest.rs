//! JSON asset manifest: ids mapped to files or procedural generators.
//!
//! ```json
//! {
//!   "anchor": "scan_01",
//!   "models": {
//!     "scan_01": { "mesh": "heads/scan_01.obj", "landmarks": "heads/scan_01.lmk" },
//!     "synthetic": { "procedural": { "seed": 7, "detail": 8 } }
//!   },
//!   "environments": {
//!     "lobby": { "path": "hdr/lobby.hdr", "indoor": true },
//!     "sky": { "procedural": { "seed": 3, "height": 128, "indoor": false } }
//!   },
//!   "occluders": {
//!     "aviators": { "kind": "sunglasses", "mesh": "props/aviators.obj" },
//!     "cap": { "kind": "hat", "procedural": 0 }
//!   }
//! }
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    load_environment, load_face_model, load_obj, make_occluder, make_test_environment, make_test_head, resolve,
    AssetError, Environment, FaceModel, OccluderKind, OccluderMesh,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetManifest {
    /// Model whose landmark frame defines world placement; defaults to the
    /// first model id.
    #[serde(default)]
    pub anchor: Option<String>,
    pub models: BTreeMap<String, ModelSource>,
    pub environments: BTreeMap<String, EnvironmentSource>,
    #[serde(default)]
    pub occluders: BTreeMap<String, OccluderSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProceduralHead {
    pub seed: u64,
    #[serde(default = "default_detail")]
    pub detail: u32,
}

fn default_detail() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmarks: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub procedural: Option<ProceduralHead>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProceduralEnvironment {
    pub seed: u64,
    #[serde(default = "default_env_height")]
    pub height: usize,
    #[serde(default)]
    pub indoor: bool,
}

fn default_env_height() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub indoor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub procedural: Option<ProceduralEnvironment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccluderSource {
    pub kind: OccluderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    /// Variant number of the built-in prop of this kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub procedural: Option<u32>,
}

impl AssetManifest {
    pub fn read(path: &Path) -> Result<Self, AssetError> {
        let text = std::fs::read_to_string(path).map_err(|e| AssetError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| AssetError::parse(path, e.line(), e.to_string()))
    }

    pub fn anchor_id(&self) -> Option<&str> {
        self.anchor.as_deref().or_else(|| self.models.keys().next().map(String::as_str))
    }
}

impl ModelSource {
    pub fn load(&self, id: &str, base: &Path) -> Result<FaceModel, AssetError> {
        let mut model = match (&self.mesh, &self.landmarks, &self.procedural) {
            (Some(m), Some(l), None) => load_face_model(&resolve(base, m), &resolve(base, l))?,
            (None, None, Some(p)) => make_test_head(p.seed, p.detail)?,
            _ => {
                return Err(AssetError::Validation(
                    "a model needs either `mesh` and `landmarks`, or `procedural`".into(),
                ))
            }
        };
        model.id = id.to_string();
        Ok(model)
    }
}

impl EnvironmentSource {
    pub fn load(&self, id: &str, base: &Path) -> Result<Environment, AssetError> {
        let mut env = match (&self.path, &self.procedural) {
            (Some(p), None) => {
                let mut e = load_environment(&resolve(base, p))?;
                e.is_indoor = self.indoor;
                e
            }
            (None, Some(p)) => make_test_environment(p.seed, p.height, p.indoor).validate()?,
            _ => {
                return Err(AssetError::Validation(
                    "an environment needs exactly one of `path` or `procedural`".into(),
                ))
            }
        };
        env.id = id.to_string();
        Ok(env)
    }
}

impl OccluderSource {
    pub fn load(&self, id: &str, base: &Path) -> Result<OccluderMesh, AssetError> {
        let mut occ = match (&self.mesh, self.procedural) {
            (Some(m), None) => OccluderMesh {
                id: id.to_string(),
                kind: self.kind,
                mesh: load_obj(&resolve(base, m))?.mesh,
            }
            .validate()?,
            (None, Some(v)) => make_occluder(self.kind, v),
            _ => {
                return Err(AssetError::Validation(
                    "an occluder needs exactly one of `mesh` or `procedural`".into(),
                ))
            }
        };
        occ.id = id.to_string();
        Ok(occ)
    }
}

/// Outcome of checking one manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetCheck {
    pub category: &'static str,
    pub id: String,
    pub ok: bool,
    pub reason: Option<String>,
}

impl AssetCheck {
    fn from_result<T>(category: &'static str, id: &str, r: Result<T, AssetError>) -> Self {
        let reason = r.err().map(|e| e.to_string());
        Self {
            category,
            id: id.to_string(),
            ok: reason.is_none(),
            reason,
        }
    }
}

/// Load every entry of a manifest and report per-asset pass/fail. Only an
/// unreadable manifest is an error.
pub fn validate_manifest(path: &Path) -> Result<Vec<AssetCheck>, AssetError> {
    let manifest = AssetManifest::read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut checks = Vec::new();

    let mut models = BTreeMap::new();
    for (id, src) in &manifest.models {
        let r = src.load(id, base);
        if let Ok(m) = &r {
            models.insert(id.clone(), m.clone());
        }
        checks.push(AssetCheck::from_result("model", id, r));
    }
    if let Some(anchor_id) = manifest.anchor_id() {
        match models.get(anchor_id) {
            Some(anchor) => {
                let target = anchor.landmark_positions();
                for (id, m) in &models {
                    if crate::geometry::align_to_anchor(&m.landmark_positions(), &target).is_err() {
                        checks.push(AssetCheck::from_result::<()>(
                            "model",
                            id,
                            Err(AssetError::Alignment(id.clone())),
                        ));
                    }
                }
            }
            None => checks.push(AssetCheck::from_result::<()>(
                "anchor",
                anchor_id,
                Err(AssetError::Validation("anchor model missing or invalid".into())),
            )),
        }
    }
    for (id, src) in &manifest.environments {
        checks.push(AssetCheck::from_result("environment", id, src.load(id, base)));
    }
    for (id, src) in &manifest.occluders {
        checks.push(AssetCheck::from_result("occluder", id, src.load(id, base)));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"models": {}, "environments": {}, "backgrounds": {}}"#;
        assert!(serde_json::from_str::<AssetManifest>(text).is_err());
    }

    #[test]
    fn procedural_manifest_parses() {
        let text = r#"{
            "models": {"a": {"procedural": {"seed": 1}}},
            "environments": {"e": {"procedural": {"seed": 2, "height": 16}}},
            "occluders": {"o": {"kind": "hat", "procedural": 0}}
        }"#;
        let m: AssetManifest = serde_json::from_str(text).unwrap();
        assert_eq!(m.anchor_id(), Some("a"));
        assert_eq!(m.models["a"].procedural.as_ref().unwrap().detail, 8);
        assert_eq!(m.occluders["o"].kind, OccluderKind::Hat);
    }
}
