//! Randomized scene composition.
//!
//! [`sample_scene`] draws everything about one image from that image's own
//! seeded stream: the background, the number of faces and, per face, the
//! model, pose, distance, lateral offset and occluders. Candidates whose
//! landmark box is too small or too hidden behind nearer faces are redrawn.

mod config;
mod preset;

pub use config::{GenerationConfig, OcclusionMode, PoseRanges};
pub use preset::{preset, PRESET_NAMES};

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::landmarks_to_box;
use crate::assets::{AssetLibrary, OccluderKind, PreparedModel, Region};
use crate::bbox::BBox;
use crate::geometry::{euler_rotation, Camera, Pose};
use crate::rng::{image_seed, stream_rng, STREAM_SCENE};

/// Attempts per face slot before the slot is dropped.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100;
/// Occluder jitter is drawn on a grid of this pitch (meters) ...
pub const JITTER_STEP: f64 = 0.002;
/// ... with this many steps either side of zero, i.e. +-1 cm.
pub const JITTER_STEPS: i32 = 5;
/// Uniform scale range of a landmark occluder.
pub const LANDMARK_SCALE: [f64; 2] = [0.9, 1.1];
/// Scale range of a generic plate used for heavy occlusion over the mouth.
pub const HEAVY_PLATE_SCALE: [f64; 2] = [1.8, 2.2];
/// Scale range for heavy occlusion with any other kind.
pub const HEAVY_SCALE: [f64; 2] = [2.0, 2.5];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("empty {0} pool")]
    EmptyPool(&'static str),
    #[error("unknown {category} `{id}` in pool")]
    UnknownAsset { category: &'static str, id: String },
    #[error("no face of image {image_index} could be placed in {attempts} attempts")]
    PlacementExhausted { image_index: u32, attempts: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccluderPlacement {
    pub occluder_id: String,
    pub region: Region,
    /// Offset from the region's landmark centroid, model frame, meters.
    pub jitter: [f64; 3],
    pub scale: f64,
    /// Sized to hide at least half of the face.
    pub heavy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceInstance {
    pub model_id: String,
    pub pose: Pose,
    /// Pose drawn from the extreme ranges.
    pub extreme_pose: bool,
    /// Along the optical axis to the landmark centroid, meters.
    pub distance: f64,
    /// Camera-frame `(x, y)` of the landmark centroid, meters.
    pub lateral_offset: [f64; 2],
    pub occluders: Vec<OccluderPlacement>,
}

impl FaceInstance {
    /// Model-to-world rotation and translation. Prepared models have their
    /// landmark centroid at the origin, so the pose rotates about it.
    pub fn placement(&self, camera: &Camera) -> (Matrix3<f64>, Vector3<f64>) {
        let rotation = camera.orientation * euler_rotation(self.pose);
        let local = Vector3::new(self.lateral_offset[0], self.lateral_offset[1], -self.distance);
        (rotation, camera.position + camera.orientation * local)
    }

    /// Landmarks in pixel coordinates, `None` where behind the camera.
    pub fn project_landmarks(&self, model: &PreparedModel, camera: &Camera) -> Vec<Option<[f64; 2]>> {
        let (r, t) = self.placement(camera);
        model
            .model
            .landmarks
            .iter()
            .map(|l| camera.project(&(r * l.position + t)).ok().map(|p| [p.x, p.y]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Zero-padded image index.
    pub image_id: String,
    pub image_index: u32,
    pub environment_id: String,
    pub camera: Camera,
    pub faces: Vec<FaceInstance>,
    /// The per-image seed every random choice derives from.
    pub rng_trace: u64,
    pub warnings: Vec<String>,
}

/// Fraction of the farther face's box covered by the nearer one. On equal
/// depths `b` counts as the farther face.
pub fn coverage_fraction(a: &BBox, b: &BBox, depth_a: f64, depth_b: f64) -> f64 {
    let farther = if depth_a > depth_b { a } else { b };
    let area = farther.area();
    if area <= 0.0 {
        return 0.0;
    }
    (a.intersection_area(b) / area).clamp(0.0, 1.0)
}

/// Tight landmark box used for placement checks: no forehead allowance,
/// clipped to the image. `None` unless every landmark is in front of the
/// camera.
pub fn placement_box(face: &FaceInstance, model: &PreparedModel, camera: &Camera) -> Option<BBox> {
    let pts: Option<Vec<[f64; 2]>> = face.project_landmarks(model, camera).into_iter().collect();
    landmarks_to_box(&pts?, camera.image_width, camera.image_height, 0.0).ok()
}

fn meets_min_size(b: &BBox, min_px: [u32; 2]) -> bool {
    b.w > min_px[0] as f64 && b.h > min_px[1] as f64
}

fn uniform(rng: &mut impl Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.gen_range(r[0]..=r[1])
    }
}

fn sample_pose(rng: &mut impl Rng, r: &PoseRanges) -> Pose {
    let yaw = uniform(rng, r.yaw);
    let pitch = uniform(rng, r.pitch);
    let roll = uniform(rng, r.roll);
    Pose::new(pitch, yaw, roll)
}

fn jitter(rng: &mut impl Rng) -> [f64; 3] {
    [0; 3].map(|_| rng.gen_range(-JITTER_STEPS..=JITTER_STEPS) as f64 * JITTER_STEP)
}

/// Occluders available to a scene: `(id, kind)`.
pub type OccluderPool<'a> = [(&'a str, OccluderKind)];

fn landmark_placement(rng: &mut impl Rng, pool: &OccluderPool) -> OccluderPlacement {
    let (id, kind) = pool[rng.gen_range(0..pool.len())];
    let regions = kind.anchor_regions();
    let region = regions[rng.gen_range(0..regions.len())];
    OccluderPlacement {
        occluder_id: id.to_string(),
        region,
        jitter: jitter(rng),
        scale: uniform(rng, LANDMARK_SCALE),
        heavy: false,
    }
}

fn heavy_placement(rng: &mut impl Rng, pool: &OccluderPool) -> OccluderPlacement {
    let plates: Vec<&(&str, OccluderKind)> = pool.iter().filter(|(_, k)| *k == OccluderKind::Generic).collect();
    if !plates.is_empty() {
        let (id, _) = plates[rng.gen_range(0..plates.len())];
        OccluderPlacement {
            occluder_id: id.to_string(),
            region: Region::Mouth,
            jitter: jitter(rng),
            scale: uniform(rng, HEAVY_PLATE_SCALE),
            heavy: true,
        }
    } else {
        let mut p = landmark_placement(rng, pool);
        p.scale = uniform(rng, HEAVY_SCALE);
        p.heavy = true;
        p
    }
}

/// Attach occluders to a face: one at a landmark region in `Landmark` mode;
/// one or two in `Mixed` mode, the first sized for heavy occlusion half of
/// the time.
pub fn attach_occluders(
    mut face: FaceInstance,
    mode: OcclusionMode,
    rng: &mut impl Rng,
    pool: &OccluderPool,
) -> Result<FaceInstance, SceneError> {
    if mode == OcclusionMode::None {
        return Ok(face);
    }
    if pool.is_empty() {
        return Err(SceneError::EmptyPool("occluder"));
    }
    match mode {
        OcclusionMode::None => {}
        OcclusionMode::Landmark => face.occluders.push(landmark_placement(rng, pool)),
        OcclusionMode::Mixed => {
            let count = rng.gen_range(1..=2);
            let heavy = rng.gen_bool(0.5);
            for k in 0..count {
                let p = if heavy && k == 0 {
                    heavy_placement(rng, pool)
                } else {
                    landmark_placement(rng, pool)
                };
                face.occluders.push(p);
            }
        }
    }
    Ok(face)
}

/// Distinct `(kind, region, jitter cell)` combinations reachable with the
/// given occluder kinds.
pub fn occlusion_combinations(kinds: &[OccluderKind]) -> usize {
    let mut pairs = std::collections::BTreeSet::new();
    for k in kinds {
        for r in k.anchor_regions() {
            pairs.insert((k.as_str(), r.as_str()));
        }
    }
    let cells = (2 * JITTER_STEPS + 1) as usize;
    pairs.len() * cells.pow(3)
}

fn resolve_pool(requested: &[String], available: Vec<String>, category: &'static str) -> Result<Vec<String>, SceneError> {
    let pool = if requested.is_empty() {
        available
    } else {
        for id in requested {
            if !available.contains(id) {
                return Err(SceneError::UnknownAsset {
                    category,
                    id: id.clone(),
                });
            }
        }
        requested.to_vec()
    };
    if pool.is_empty() {
        return Err(SceneError::EmptyPool(category));
    }
    Ok(pool)
}

/// Compose scene `image_index` of a run. `camera` fixes the field of view
/// and the resolution that size and overlap checks are made at.
pub fn sample_scene(
    config: &GenerationConfig,
    image_index: u32,
    assets: &AssetLibrary,
    camera: &Camera,
) -> Result<SceneSpec, SceneError> {
    let models = resolve_pool(&config.model_pool, assets.model_ids(), "model")?;
    let backgrounds = resolve_pool(&config.background_pool, assets.environment_ids(), "environment")?;
    let occluders: Vec<(&str, OccluderKind)> = assets.occluders().map(|o| (o.id.as_str(), o.kind)).collect();
    if config.occlusion_mode != OcclusionMode::None && occluders.is_empty() {
        return Err(SceneError::EmptyPool("occluder"));
    }

    let seed = image_seed(config.seed, image_index as u64);
    let mut rng = stream_rng(seed, STREAM_SCENE);
    let environment_id = backgrounds[rng.gen_range(0..backgrounds.len())].clone();
    let [lo, hi] = config.face_count_range;
    let count = rng.gen_range(lo..=hi);

    let tan_v = (0.5 * camera.vertical_fov.to_radians()).tan();
    let tan_h = tan_v * camera.aspect();
    let [dmin, dmax] = config.distance_range;

    let mut faces: Vec<FaceInstance> = Vec::with_capacity(count as usize);
    let mut boxes: Vec<BBox> = Vec::with_capacity(count as usize);
    let mut warnings = Vec::new();
    for slot in 0..count {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let model_id = &models[rng.gen_range(0..models.len())];
            let extreme = config.extreme_pose_fraction > 0.0 && rng.gen_bool(config.extreme_pose_fraction);
            let ranges = if extreme {
                &config.extreme_pose_ranges
            } else {
                &config.pose_ranges
            };
            let pose = sample_pose(&mut rng, ranges);
            let distance = dmax - rng.gen::<f64>() * (dmax - dmin);
            let lx = (2.0 * rng.gen::<f64>() - 1.0) * distance * tan_h;
            let ly = (2.0 * rng.gen::<f64>() - 1.0) * distance * tan_v;
            let face = FaceInstance {
                model_id: model_id.clone(),
                pose,
                extreme_pose: extreme,
                distance,
                lateral_offset: [lx, ly],
                occluders: Vec::new(),
            };
            let face = attach_occluders(face, config.occlusion_mode, &mut rng, &occluders)?;

            let model = assets.model(model_id).expect("pool ids come from the library");
            let Some(b) = placement_box(&face, model, camera) else {
                continue;
            };
            if !meets_min_size(&b, config.min_face_px) {
                continue;
            }
            let overlaps = faces.iter().zip(&boxes).any(|(other, ob)| {
                coverage_fraction(&b, ob, face.distance, other.distance) > config.face_overlap_coverage_max
            });
            if overlaps {
                continue;
            }
            faces.push(face);
            boxes.push(b);
            placed = true;
            break;
        }
        if !placed {
            warnings.push(format!(
                "face slot {slot} dropped after {MAX_PLACEMENT_ATTEMPTS} placement attempts"
            ));
        }
    }
    if faces.is_empty() {
        return Err(SceneError::PlacementExhausted {
            image_index,
            attempts: MAX_PLACEMENT_ATTEMPTS,
        });
    }
    Ok(SceneSpec {
        image_id: format!("{image_index:06}"),
        image_index,
        environment_id,
        camera: *camera,
        faces,
        rng_trace: seed,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn library() -> &'static AssetLibrary {
        static LIB: OnceLock<AssetLibrary> = OnceLock::new();
        LIB.get_or_init(AssetLibrary::builtin)
    }

    fn camera() -> Camera {
        Camera::looking_down_z(40.0, 640, 480)
    }

    #[test]
    fn coverage_examples() {
        let b = BBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(coverage_fraction(&b, &b, 1.0, 2.0), 1.0);
        assert_eq!(coverage_fraction(&b, &BBox::new(20.0, 0.0, 5.0, 5.0), 1.0, 2.0), 0.0);
        let a = BBox::new(0.0, 0.0, 5.0, 10.0);
        assert_eq!(coverage_fraction(&a, &b, 1.0, 2.0), 0.5);
        // With b nearer, a is the farther face and fully inside b.
        assert_eq!(coverage_fraction(&a, &b, 3.0, 2.0), 1.0);
    }

    #[test]
    fn degenerate_ranges_pin_the_face() {
        let config = GenerationConfig {
            face_count_range: [1, 1],
            distance_range: [2.0, 2.0],
            pose_ranges: PoseRanges::symmetric(0.0, 0.0, 0.0),
            ..Default::default()
        };
        let s = sample_scene(&config, 0, library(), &camera()).unwrap();
        assert_eq!(s.faces.len(), 1);
        assert_eq!(s.faces[0].pose, Pose::new(0.0, 0.0, 0.0));
        assert_eq!(s.faces[0].distance, 2.0);
        assert!(s.faces[0].occluders.is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let config = GenerationConfig {
            occlusion_mode: OcclusionMode::Mixed,
            ..Default::default()
        };
        for i in [0, 7, 31] {
            let a = sample_scene(&config, i, library(), &camera()).unwrap();
            let b = sample_scene(&config, i, library(), &camera()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.image_id, format!("{i:06}"));
        }
        let a = sample_scene(&config, 1, library(), &camera()).unwrap();
        let b = sample_scene(&config, 2, library(), &camera()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn scenes_respect_size_and_overlap() {
        let config = GenerationConfig::default();
        let cam = camera();
        for i in 0..20 {
            let s = sample_scene(&config, i, library(), &cam).unwrap();
            assert!(!s.faces.is_empty() && s.faces.len() <= 48);
            let boxes: Vec<BBox> = s
                .faces
                .iter()
                .map(|f| placement_box(f, library().model(&f.model_id).unwrap(), &cam).unwrap())
                .collect();
            for (i, (f, b)) in s.faces.iter().zip(&boxes).enumerate() {
                assert!(b.w > 8.0 && b.h > 10.0);
                assert!(f.distance > 0.0 && f.distance <= 20.0);
                for (g, c) in s.faces.iter().zip(&boxes).skip(i + 1) {
                    assert!(coverage_fraction(b, c, f.distance, g.distance) <= 0.5);
                }
            }
        }
    }

    #[test]
    fn pose_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = GenerationConfig::default().pose_ranges;
        let poses: Vec<Pose> = (0..10_000).map(|_| sample_pose(&mut rng, &r)).collect();
        let axes: [(&str, f64, fn(&Pose) -> f64); 3] = [
            ("pitch", 15.0, |p| p.pitch),
            ("yaw", 60.0, |p| p.yaw),
            ("roll", 15.0, |p| p.roll),
        ];
        for (axis, lim, get) in axes {
            let v: Vec<f64> = poses.iter().map(get).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!(v.iter().all(|x| x.abs() <= lim), "{axis}");
            assert!(mean.abs() < 1.0, "{axis} mean {mean}");
            // Uniform: the extremes are approached.
            assert!(v.iter().cloned().fold(f64::MIN, f64::max) > 0.99 * lim);
        }
    }

    #[test]
    fn face_counts_are_uniform() {
        // Chi-square over the count draw of 10 000 scene streams, replaying
        // the draws that precede it.
        let bins = 48usize;
        let mut hist = vec![0usize; bins];
        let n_env = library().environment_ids().len();
        for i in 0..10_000u64 {
            let mut rng = stream_rng(image_seed(11, i), STREAM_SCENE);
            let _env = rng.gen_range(0..n_env);
            hist[rng.gen_range(1u32..=48) as usize - 1] += 1;
        }
        let expected = 10_000.0 / bins as f64;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // 47 degrees of freedom; the p = 0.001 critical value is about 82.7.
        assert!(chi2 < 82.7, "chi2 {chi2}");
    }

    #[test]
    fn sampled_counts_match_replayed_draws() {
        let config = GenerationConfig {
            face_count_range: [1, 3],
            distance_range: [3.0, 4.0],
            ..Default::default()
        };
        let n_env = library().environment_ids().len();
        for i in 0..10 {
            let s = sample_scene(&config, i, library(), &camera()).unwrap();
            let mut rng = stream_rng(image_seed(0, i as u64), STREAM_SCENE);
            let env = rng.gen_range(0..n_env);
            assert_eq!(s.environment_id, library().environment_ids()[env]);
            let n = rng.gen_range(1u32..=3) as usize;
            assert_eq!(s.faces.len() + s.warnings.len(), n);
        }
    }

    #[test]
    fn landmark_mode_single_occluder() {
        let kinds: Vec<(String, OccluderKind)> = library().occluders().map(|o| (o.id.clone(), o.kind)).collect();
        let pool: Vec<(&str, OccluderKind)> = kinds.iter().map(|(i, k)| (i.as_str(), *k)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let face = FaceInstance {
            model_id: "head_000".into(),
            pose: Pose::default(),
            extreme_pose: false,
            distance: 2.0,
            lateral_offset: [0.0, 0.0],
            occluders: vec![],
        };
        for _ in 0..200 {
            let f = attach_occluders(face.clone(), OcclusionMode::Landmark, &mut rng, &pool).unwrap();
            assert_eq!(f.occluders.len(), 1);
            let o = &f.occluders[0];
            assert!(Region::OCCLUDABLE.contains(&o.region));
            let kind = library().occluder(&o.occluder_id).unwrap().kind;
            if kind == OccluderKind::Sunglasses {
                assert_eq!(o.region, Region::Eye);
            }
            assert!(o.jitter.iter().all(|j| j.abs() <= 0.01 + 1e-12));
            assert!((0.9..=1.1).contains(&o.scale));
        }
        let mixed = attach_occluders(face.clone(), OcclusionMode::Mixed, &mut rng, &pool).unwrap();
        assert!((1..=2).contains(&mixed.occluders.len()));
        assert_eq!(
            attach_occluders(face, OcclusionMode::Landmark, &mut rng, &[]),
            Err(SceneError::EmptyPool("occluder"))
        );
    }

    #[test]
    fn combination_space_exceeds_one_thousand() {
        assert!(occlusion_combinations(&OccluderKind::ALL) > 1000);
        assert_eq!(occlusion_combinations(&[OccluderKind::Sunglasses]), 1331);
    }

    #[test]
    fn unknown_pool_entry() {
        let config = GenerationConfig {
            model_pool: vec!["nobody".into()],
            ..Default::default()
        };
        assert!(matches!(
            sample_scene(&config, 0, library(), &camera()),
            Err(SceneError::UnknownAsset { .. })
        ));
    }
}
