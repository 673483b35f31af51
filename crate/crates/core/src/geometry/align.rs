use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// `p -> scale * rotation * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub scale: f64,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.scale * (self.rotation * p) + self.translation
    }

    /// Direction vectors (normals) only rotate.
    pub fn apply_direction(&self, d: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * d
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.apply(&first.translation),
            scale: self.scale * first.scale,
        }
    }
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("landmark configuration is degenerate (covariance rank < 2)")]
pub struct DegenerateError;

/// Least-squares similarity transform taking `model` onto `anchor`
/// (Umeyama's closed form on the centered cross-covariance).
pub fn align_to_anchor(
    model: &[Vector3<f64>],
    anchor: &[Vector3<f64>],
) -> Result<RigidTransform, DegenerateError> {
    let n = model.len();
    if n == 0 || n != anchor.len() {
        return Err(DegenerateError);
    }
    let mean = |pts: &[Vector3<f64>]| pts.iter().sum::<Vector3<f64>>() / n as f64;
    let (mu_p, mu_q) = (mean(model), mean(anchor));

    let mut cov_pp = Matrix3::zeros();
    let mut cross = Matrix3::zeros();
    let mut var_p = 0.0;
    for (p, q) in model.iter().zip(anchor) {
        let (dp, dq) = (p - mu_p, q - mu_q);
        cov_pp += dp * dp.transpose();
        cross += dq * dp.transpose();
        var_p += dp.norm_squared();
    }
    cov_pp /= n as f64;
    cross /= n as f64;
    var_p /= n as f64;

    // Rank test on the model spread; collinear or coincident points leave the
    // rotation about their line undetermined.
    let spread = cov_pp.symmetric_eigenvalues();
    let mut ev: Vec<f64> = spread.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[0] > 0.0) || ev[1] <= ev[0] * 1e-12 {
        return Err(DegenerateError);
    }

    let svd = cross.svd(true, true);
    let (u, v_t) = (svd.u.ok_or(DegenerateError)?, svd.v_t.ok_or(DegenerateError)?);
    // Reflection fix on the smallest singular value (nalgebra leaves them unsorted).
    let mut s = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        let imin = (0..3)
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .unwrap();
        s[(imin, imin)] = -1.0;
    }
    let rotation = u * s * v_t;
    let trace: f64 = (0..3).map(|i| svd.singular_values[i] * s[(i, i)]).sum();
    let scale = trace / var_p;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(DegenerateError);
    }
    let translation = mu_q - scale * (rotation * mu_p);
    Ok(RigidTransform {
        rotation,
        translation,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::make_test_head;
    use crate::geometry::{euler_rotation, Pose};
    use proptest::prelude::*;

    fn residual(t: &RigidTransform, p: &[Vector3<f64>], q: &[Vector3<f64>]) -> f64 {
        p.iter().zip(q).map(|(a, b)| (t.apply(a) - b).norm_squared()).sum()
    }

    #[test]
    fn self_alignment_is_identity() {
        let pts = make_test_head(1, 2).unwrap().landmark_positions();
        let t = align_to_anchor(&pts, &pts).unwrap();
        assert!((t.rotation - Matrix3::identity()).norm() < 1e-9);
        assert!(t.translation.norm() < 1e-9);
        assert!((t.scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_a_known_transform() {
        let pts = make_test_head(4, 2).unwrap().landmark_positions();
        let r0 = euler_rotation(Pose::new(30.0, -140.0, 75.0));
        let t0 = Vector3::new(0.3, -1.2, 4.0);
        let s0 = 1.7;
        let anchor: Vec<_> = pts.iter().map(|p| s0 * (r0 * p) + t0).collect();
        let t = align_to_anchor(&pts, &anchor).unwrap();
        assert!((t.rotation - r0).norm() < 1e-6);
        assert!((t.translation - t0).norm() < 1e-6);
        assert!((t.scale - s0).abs() / s0 < 1e-6);
    }

    #[test]
    fn identical_points_are_degenerate() {
        let pts = vec![Vector3::new(1.0, 2.0, 3.0); 50];
        assert_eq!(align_to_anchor(&pts, &pts), Err(DegenerateError));
        let line: Vec<_> = (0..50).map(|i| Vector3::x() * i as f64).collect();
        assert_eq!(align_to_anchor(&line, &line), Err(DegenerateError));
    }

    #[test]
    fn planar_points_are_fine() {
        let plane: Vec<_> = (0..50).map(|i| Vector3::new((i % 7) as f64, (i / 7) as f64, 0.0)).collect();
        let r0 = euler_rotation(Pose::new(10.0, 20.0, 30.0));
        let q: Vec<_> = plane.iter().map(|p| r0 * p).collect();
        let t = align_to_anchor(&plane, &q).unwrap();
        assert!((t.rotation - r0).norm() < 1e-9);
    }

    proptest! {
        #[test]
        fn never_worse_than_identity(
            seed in 0u64..1000,
            noise in proptest::collection::vec(-0.05..0.05f64, 150),
            pose in (-180.0..180.0f64, -180.0..180.0f64, -180.0..180.0f64),
        ) {
            let p = make_test_head(seed, 1).unwrap().landmark_positions();
            let r = euler_rotation(Pose::new(pose.0, pose.1, pose.2));
            let q: Vec<_> = p.iter().enumerate()
                .map(|(i, x)| r * x + Vector3::new(noise[3 * i], noise[3 * i + 1], noise[3 * i + 2]))
                .collect();
            let t = align_to_anchor(&p, &q).unwrap();
            prop_assert!(residual(&t, &p, &q) <= residual(&RigidTransform::identity(), &p, &q) + 1e-12);
        }
    }
}
