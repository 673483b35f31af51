//! Poses, similarity transforms, landmark alignment and the pinhole camera.
//!
//! World and camera frames are right-handed with +Y up. Head models face +Z,
//! and an unrotated camera looks down -Z, so a face placed at `(0, 0, -d)`
//! with a zero pose looks straight into the camera.

mod align;
mod camera;
mod pose;

pub use align::{align_to_anchor, DegenerateError, RigidTransform};
pub use camera::{BehindCamera, Camera, Projected, NEAR_PLANE};
pub use pose::{euler_rotation, rotate_about_landmark_center, Pose};
