use serde::{Deserialize, Serialize};

/// Per-axis pose ranges in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRanges {
    pub pitch: [f64; 2],
    pub yaw: [f64; 2],
    pub roll: [f64; 2],
}

impl PoseRanges {
    pub fn symmetric(pitch: f64, yaw: f64, roll: f64) -> Self {
        Self {
            pitch: [-pitch, pitch],
            yaw: [-yaw, yaw],
            roll: [-roll, roll],
        }
    }

    fn check(&self, name: &str) -> Result<(), String> {
        for (axis, r) in [("pitch", self.pitch), ("yaw", self.yaw), ("roll", self.roll)] {
            check_range(&format!("{name}.{axis}"), r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionMode {
    #[default]
    None,
    Landmark,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub seed: u64,
    pub num_images: u32,
    pub face_count_range: [u32; 2],
    /// Meters; sampled from the half-open interval `(min, max]`.
    pub distance_range: [f64; 2],
    pub pose_ranges: PoseRanges,
    pub extreme_pose_fraction: f64,
    pub extreme_pose_ranges: PoseRanges,
    pub occlusion_mode: OcclusionMode,
    pub face_overlap_coverage_max: f64,
    /// Boxes must be strictly wider and taller than this `[w, h]`.
    pub min_face_px: [u32; 2],
    /// Environment ids; empty means every loaded environment.
    pub background_pool: Vec<String>,
    /// Model ids; empty means every loaded model.
    pub model_pool: Vec<String>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_images: 100,
            face_count_range: [1, 48],
            distance_range: [0.0, 20.0],
            pose_ranges: PoseRanges::symmetric(15.0, 60.0, 15.0),
            extreme_pose_fraction: 0.0,
            extreme_pose_ranges: PoseRanges::symmetric(45.0, 90.0, 45.0),
            occlusion_mode: OcclusionMode::None,
            face_overlap_coverage_max: 0.5,
            min_face_px: [8, 10],
            background_pool: Vec::new(),
            model_pool: Vec::new(),
        }
    }
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), String> {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
        return Err(format!("{name}: range [{}, {}] must be finite and ordered", r[0], r[1]));
    }
    Ok(())
}

fn check_fraction(name: &str, v: f64) -> Result<(), String> {
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("{name}: {v} is not in [0, 1]"));
    }
    Ok(())
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), String> {
        let [lo, hi] = self.face_count_range;
        if lo == 0 || lo > hi {
            return Err(format!("face_count_range: [{lo}, {hi}] must satisfy 1 <= min <= max"));
        }
        check_range("distance_range", self.distance_range)?;
        if self.distance_range[0] < 0.0 || self.distance_range[1] <= 0.0 {
            return Err("distance_range: distances must be positive".into());
        }
        self.pose_ranges.check("pose_ranges")?;
        self.extreme_pose_ranges.check("extreme_pose_ranges")?;
        check_fraction("extreme_pose_fraction", self.extreme_pose_fraction)?;
        check_fraction("face_overlap_coverage_max", self.face_overlap_coverage_max)?;
        Ok(())
    }
}
