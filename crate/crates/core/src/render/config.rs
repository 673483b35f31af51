use serde::{Deserialize, Serialize};

/// High-resolution base widths.
pub const SET_A: [u32; 3] = [4096, 3072, 2048];
/// High- and low-resolution base widths.
pub const SET_B: [u32; 6] = [4096, 3072, 2048, 512, 256, 128];
/// Low-resolution base widths.
pub const SET_C: [u32; 3] = [512, 256, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lighting {
    AmbientOnly,
    ShIrradiance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownFilter {
    AreaAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpFilter {
    Bilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    /// Base widths (height is 3/4 of the width); one is picked per image.
    /// Empty renders straight at the target resolution.
    pub base_resolutions: Vec<u32>,
    pub target_resolution: [u32; 2],
    /// Camera vertical field of view, degrees.
    pub vertical_fov: f64,
    pub lighting: Lighting,
    pub sh_bands: u32,
    pub cull_backfaces: bool,
    pub resample_down: DownFilter,
    pub resample_up: UpFilter,
    /// Linear multiplier applied before tone mapping.
    pub exposure: f32,
    /// Also write 16-bit depth and instance-id maps.
    pub debug_maps: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            base_resolutions: Vec::new(),
            target_resolution: [1024, 768],
            vertical_fov: 40.0,
            lighting: Lighting::ShIrradiance,
            sh_bands: 3,
            cull_backfaces: true,
            resample_down: DownFilter::AreaAverage,
            resample_up: UpFilter::Bilinear,
            exposure: 1.0,
            debug_maps: false,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), String> {
        let [w, h] = self.target_resolution;
        if w < 8 || h < 8 {
            return Err(format!("render.target_resolution {w}x{h} is below 8 px"));
        }
        if w * 3 != h * 4 {
            return Err(format!("render.target_resolution {w}x{h} is not 4:3"));
        }
        if let Some(r) = self.base_resolutions.iter().find(|&&r| r < 8 || r * 3 % 4 != 0) {
            return Err(format!(
                "render.base_resolutions entry {r} must be at least 8 and give an integer 4:3 height"
            ));
        }
        if self.sh_bands != 3 {
            return Err(format!("render.sh_bands must be 3, got {}", self.sh_bands));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < 180.0) {
            return Err(format!("render.vertical_fov {} outside (0, 180)", self.vertical_fov));
        }
        if !(self.exposure.is_finite() && self.exposure > 0.0) {
            return Err(format!("render.exposure {} must be positive", self.exposure));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RenderConfig::default().validate().unwrap();
        let mut c = RenderConfig::default();
        c.target_resolution = [1000, 700];
        assert!(c.validate().is_err());
        c.target_resolution = [640, 480];
        c.base_resolutions = SET_B.to_vec();
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RenderConfig>(r#"{"antialias": true}"#).is_err());
        let c: RenderConfig = serde_json::from_str(r#"{"lighting": "ambient_only"}"#).unwrap();
        assert_eq!(c.lighting, Lighting::AmbientOnly);
    }
}
