use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points at or closer than this depth (meters) are behind the camera.
pub const NEAR_PLANE: f64 = 0.01;

/// Pinhole camera. `orientation` columns are the camera's x, y, z axes in
/// world coordinates; it looks along its local -Z with +Y up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vector3<f64>,
    pub orientation: Matrix3<f64>,
    /// Degrees.
    pub vertical_fov: f64,
    pub image_width: u32,
    pub image_height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    /// Continuous pixel coordinates; pixel `(i, j)` has its center at
    /// `(i + 0.5, j + 0.5)`.
    pub x: f64,
    pub y: f64,
    /// Distance along the camera's -Z axis, meters.
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("point is behind the camera near plane")]
pub struct BehindCamera;

impl Camera {
    /// Camera at the origin looking down -Z.
    pub fn looking_down_z(vertical_fov: f64, image_width: u32, image_height: u32) -> Self {
        Self {
            position: Vector3::zeros(),
            orientation: Matrix3::identity(),
            vertical_fov,
            image_width,
            image_height,
        }
    }

    /// Same pose and field of view, different raster size.
    pub fn with_resolution(&self, image_width: u32, image_height: u32) -> Self {
        Self {
            image_width,
            image_height,
            ..*self
        }
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        0.5 * self.image_height as f64 / (0.5 * self.vertical_fov.to_radians()).tan()
    }

    pub fn aspect(&self) -> f64 {
        self.image_width as f64 / self.image_height as f64
    }

    pub fn to_camera_space(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.transpose() * (p - self.position)
    }

    /// Project a camera-space point.
    pub fn project_camera_space(&self, pc: &Vector3<f64>) -> Result<Projected, BehindCamera> {
        let depth = -pc.z;
        if !(depth > NEAR_PLANE) {
            return Err(BehindCamera);
        }
        let f = self.focal_px();
        Ok(Projected {
            x: 0.5 * self.image_width as f64 + f * pc.x / depth,
            y: 0.5 * self.image_height as f64 - f * pc.y / depth,
            depth,
        })
    }

    pub fn project(&self, p: &Vector3<f64>) -> Result<Projected, BehindCamera> {
        self.project_camera_space(&self.to_camera_space(p))
    }

    /// World-space direction (not normalized) through continuous pixel
    /// coordinates `(x, y)`, with unit depth.
    pub fn ray_direction(&self, x: f64, y: f64) -> Vector3<f64> {
        let f = self.focal_px();
        let local = Vector3::new(
            (x - 0.5 * self.image_width as f64) / f,
            -(y - 0.5 * self.image_height as f64) / f,
            -1.0,
        );
        self.orientation * local
    }
}
