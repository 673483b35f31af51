use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::assets::FaceModel;

/// Head orientation in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

impl Pose {
    pub const fn new(pitch: f64, yaw: f64, roll: f64) -> Self {
        Self { pitch, yaw, roll }
    }

    pub fn is_finite(&self) -> bool {
        self.pitch.is_finite() && self.yaw.is_finite() && self.roll.is_finite()
    }
}

/// `R = Rz(roll) * Rx(pitch) * Ry(yaw)`: yaw is applied first, then pitch,
/// then roll.
pub fn euler_rotation(pose: Pose) -> Matrix3<f64> {
    let yaw = Rotation3::from_axis_angle(&Vector3::y_axis(), pose.yaw.to_radians());
    let pitch = Rotation3::from_axis_angle(&Vector3::x_axis(), pose.pitch.to_radians());
    let roll = Rotation3::from_axis_angle(&Vector3::z_axis(), pose.roll.to_radians());
    (roll * pitch * yaw).into_inner()
}

/// Rotate vertices and landmarks about the landmark centroid.
pub fn rotate_about_landmark_center(model: &FaceModel, pose: Pose) -> FaceModel {
    let r = euler_rotation(pose);
    if r == Matrix3::identity() {
        return model.clone();
    }
    let c = model.landmark_centroid();
    let apply = |p: &Vector3<f64>| c + r * (p - c);
    let mut out = model.clone();
    for v in &mut out.mesh.vertices {
        *v = apply(v);
    }
    for l in &mut out.landmarks {
        l.position = apply(&l.position);
    }
    out
}
