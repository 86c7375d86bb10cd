use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance below which rotation drift is silently re-orthonormalized.
pub const ROTATION_DRIFT_TOL: f64 = 1e-9;
/// Beyond this the matrix is rejected as not a rotation.
const ROTATION_REJECT_TOL: f64 = 1e-6;

/// Rigid transform: `p_world = rotation * p_local + translation`.
///
/// Rotations are proper orthonormal (det +1); translations are in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// Row-major 3x3 rotation matrix.
    pub rotation: [[f64; 3]; 3],
    /// Translation vector, mm.
    pub translation: [f64; 3],
}

impl Pose {
    /// Builds a pose, re-orthonormalizing small drift and rejecting
    /// matrices that are not rotations within 1e-6.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let drift = rotation_drift(&rotation);
        let rot = if drift <= ROTATION_DRIFT_TOL {
            rotation
        } else if drift <= ROTATION_REJECT_TOL {
            orthonormalize(&rotation)
        } else {
            return Err(Error::InvalidPose(format!(
                "rotation drift {drift:.2e} exceeds {ROTATION_REJECT_TOL:.0e}"
            )));
        };
        if rot.determinant() < 0.0 {
            return Err(Error::InvalidPose("rotation has determinant -1".into()));
        }
        Ok(Self::from_parts(rot, translation))
    }

    fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = rotation[(i, j)];
            }
        }
        Pose {
            rotation: r,
            translation: [translation.x, translation.y, translation.z],
        }
    }

    pub fn identity() -> Self {
        Self::from_parts(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::from_parts(Matrix3::identity(), t)
    }

    /// Rotation by `angle` (radians) about the world z axis.
    pub fn rot_z(angle: f64) -> Self {
        Self::from_parts(
            Rotation3::from_axis_angle(&Vector3::z_axis(), angle).into_inner(),
            Vector3::zeros(),
        )
    }

    /// Rotation about an arbitrary axis through the origin.
    pub fn rot_axis_angle(axis: Unit<Vector3<f64>>, angle: f64) -> Self {
        Self::from_parts(
            Rotation3::from_axis_angle(&axis, angle).into_inner(),
            Vector3::zeros(),
        )
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.rotation[i][j])
    }

    pub fn translation_vector(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.translation)
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_matrix() * p + self.translation_vector()
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_matrix() * v
    }

    pub fn invert(&self) -> Pose {
        let rt = self.rotation_matrix().transpose();
        Self::from_parts(rt, -(rt * self.translation_vector()))
    }
}

/// Composition: the result applies `b` first, then `a`.
pub fn compose(a: &Pose, b: &Pose) -> Pose {
    let ra = a.rotation_matrix();
    let mut rot = ra * b.rotation_matrix();
    if rotation_drift(&rot) > ROTATION_DRIFT_TOL {
        rot = orthonormalize(&rot);
    }
    Pose::from_parts(rot, ra * b.translation_vector() + a.translation_vector())
}

/// Translation and geodesic rotation errors between two poses, (mm, radians).
///
/// Symmetric in its arguments: swapping them leaves both values unchanged.
pub fn pose_error(a: &Pose, b: &Pose) -> (f64, f64) {
    let dt = (a.translation_vector() - b.translation_vector()).norm();
    let rel = a.rotation_matrix() * b.rotation_matrix().transpose();
    let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    (dt, c.acos())
}

fn rotation_drift(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).abs().max()
}

/// Nearest rotation in the Frobenius sense, via SVD.
fn orthonormalize(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut q = u * vt;
    if q.determinant() < 0.0 {
        let mut u2 = u;
        u2.set_column(2, &(-u.column(2)));
        q = u2 * vt;
    }
    q
}

/// Minimal rotation mapping unit vector `from` onto unit vector `to`.
pub fn rotation_between(from: &Vector3<f64>, to: &Vector3<f64>) -> Matrix3<f64> {
    let f = from.normalize();
    let t = to.normalize();
    let c = f.dot(&t);
    if c > 1.0 - 1e-14 {
        return Matrix3::identity();
    }
    if c < -1.0 + 1e-14 {
        // Antipodal: rotate pi about any axis orthogonal to f.
        let axis = orthogonal_unit(&f);
        return Rotation3::from_axis_angle(&Unit::new_unchecked(axis), std::f64::consts::PI).into_inner();
    }
    let axis = Unit::new_normalize(f.cross(&t));
    Rotation3::from_axis_angle(&axis, c.clamp(-1.0, 1.0).acos()).into_inner()
}

/// A deterministic unit vector orthogonal to `v`.
pub fn orthogonal_unit(v: &Vector3<f64>) -> Vector3<f64> {
    let probe = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
        Vector3::x()
    } else if v.y.abs() <= v.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    (probe - v * probe.dot(v) / v.norm_squared()).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_pose_eq(a: &Pose, b: &Pose, tol: f64) {
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.rotation[i][j], b.rotation[i][j], epsilon = tol);
            }
            assert_abs_diff_eq!(a.translation[i], b.translation[i], epsilon = tol);
        }
    }

    #[test]
    fn compose_identity_is_noop() {
        let p = compose(
            &Pose::rot_z(0.7),
            &Pose::from_translation(Vector3::new(1.0, -2.0, 3.0)),
        );
        assert_pose_eq(&compose(&Pose::identity(), &p), &p, 0.0);
        assert_pose_eq(&compose(&p, &Pose::identity()), &p, 0.0);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let p = compose(
            &Pose::rot_z(1.1),
            &compose(
                &Pose::rot_axis_angle(Vector3::x_axis(), 0.4),
                &Pose::from_translation(Vector3::new(5.0, 6.0, -7.0)),
            ),
        );
        assert_pose_eq(&compose(&p, &p.invert()), &Pose::identity(), 1e-9);
        assert_pose_eq(&compose(&p.invert(), &p), &Pose::identity(), 1e-9);
    }

    #[test]
    fn rotations_compose_as_a_group() {
        let quarter = Pose::rot_z(std::f64::consts::FRAC_PI_2);
        let half = Pose::rot_z(std::f64::consts::PI);
        assert_pose_eq(&compose(&quarter, &quarter), &half, 1e-12);
    }

    #[test]
    fn rejects_non_rotation() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Pose::new(m, Vector3::zeros()).is_err());
    }

    #[test]
    fn renormalizes_small_drift() {
        let mut m = Rotation3::from_axis_angle(&Vector3::z_axis(), 0.3).into_inner();
        m[(0, 0)] += 5e-8;
        let p = Pose::new(m.into(), Vector3::zeros()).unwrap();
        assert!(rotation_drift(&p.rotation_matrix()) < 1e-12);
    }

    #[test]
    fn pose_error_is_symmetric() {
        let a = compose(
            &Pose::rot_z(0.2),
            &Pose::from_translation(Vector3::new(1.0, 2.0, 3.0)),
        );
        let b = compose(
            &Pose::rot_axis_angle(Vector3::y_axis(), -0.5),
            &Pose::from_translation(Vector3::new(-1.0, 0.5, 2.0)),
        );
        let (t1, r1) = pose_error(&a, &b);
        let (t2, r2) = pose_error(&b, &a);
        assert_abs_diff_eq!(t1, t2, epsilon = 1e-12);
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-12);
    }

    #[test]
    fn rotation_between_maps_vectors() {
        let f = Vector3::new(1.0, 1.0, 1.0).normalize();
        let r = rotation_between(&f, &Vector3::z());
        assert_abs_diff_eq!((r * f - Vector3::z()).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }
}
