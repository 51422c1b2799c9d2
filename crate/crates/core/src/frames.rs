//! Rigid-body transformations between the ground, roof, and vehicle frames.
//!
//! The ground frame follows a North-East-Down (NED) convention: altitude
//! above ground is negative `z`. The roof frame has `x` pointing up-slope,
//! `y` horizontal along the eave, and `z` completing the right-handed triad
//! into the roof surface — so offsetting a surface point by `-z` moves off
//! the roof and `+z` penetrates it. The vehicle frame is body-fixed with `x`
//! forward and `z` down.
//!
//! All types are immutable after construction and all operations are pure.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Margin kept away from the `|pitch| = 90°` gimbal-lock singularity.
const GIMBAL_LOCK_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("euler angle is not finite: roll={roll}, pitch={pitch}, yaw={yaw}")]
    NonFiniteAngle { roll: f64, pitch: f64, yaw: f64 },
    #[error("pitch {0} rad is inside the gimbal-lock region (|pitch| >= pi/2 - 1e-6)")]
    GimbalLock(f64),
}

/// Roll/pitch/yaw set, applied as yaw about `z`, then pitch about `y`, then
/// roll about `x`.
///
/// Pitch is restricted to `|pitch| < pi/2 - 1e-6`; roof slopes and vehicle
/// attitudes in this application stay far away from the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    /// Roll about `x` (rad).
    pub roll: f64,
    /// Pitch about `y` (rad).
    pub pitch: f64,
    /// Yaw about `z` (rad).
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Result<Self, FrameError> {
        if !(roll.is_finite() && pitch.is_finite() && yaw.is_finite()) {
            return Err(FrameError::NonFiniteAngle { roll, pitch, yaw });
        }
        if pitch.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_LOCK_MARGIN {
            return Err(FrameError::GimbalLock(pitch));
        }
        Ok(Self { roll, pitch, yaw })
    }

    pub fn zero() -> Self {
        Self { roll: 0.0, pitch: 0.0, yaw: 0.0 }
    }
}

/// 3x3 rotation matrix, row-major, orthonormal with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Builds the Z-Y-X composition `R_z(yaw) * R_y(pitch) * R_x(roll)`.
    ///
    /// The matrix is written out entry by entry rather than composed from
    /// axis rotations so the implementation can be checked term-for-term
    /// against its algebraic form.
    pub fn from_euler(angles: EulerAngles) -> Self {
        let (sp, cp) = angles.roll.sin_cos(); // phi
        let (st, ct) = angles.pitch.sin_cos(); // theta
        let (ss, cs) = angles.yaw.sin_cos(); // psi
        Self(Matrix3::new(
            cs * ct,
            cs * st * sp - cp * ss,
            ss * sp + cs * cp * st,
            ct * ss,
            cs * cp + ss * st * sp,
            cp * ss * st - cs * sp,
            -st,
            ct * sp,
            ct * cp,
        ))
    }

    /// Pure yaw rotation, used for expressing vectors in a heading-aligned
    /// frame.
    pub fn yaw(yaw: f64) -> Self {
        Self::from_euler(EulerAngles { roll: 0.0, pitch: 0.0, yaw })
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Inverse rotation; for an orthonormal matrix this is the transpose.
    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `self * other`, i.e. `other` applied first.
    pub fn compose(&self, other: &RotationMatrix) -> Self {
        Self(self.0 * other.0)
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Max absolute entry of `R^T R - I`.
    pub fn orthonormality_residual(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity())
            .iter()
            .fold(0.0_f64, |m, e| m.max(e.abs()))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Column `i` as a vector — the image of the `i`th source basis axis.
    pub fn column(&self, i: usize) -> Vector3<f64> {
        self.0.column(i).into()
    }
}

/// Rotation followed by a translation: `p_a = R * p_b + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: RotationMatrix,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn new(rotation: RotationMatrix, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self { rotation: RotationMatrix::identity(), translation: Vector3::zeros() }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p) + self.translation
    }

    /// Inverse transform: `(R, t)^-1 = (R^T, -R^T t)`.
    pub fn invert(&self) -> Self {
        let rot_inv = self.rotation.inverse();
        let t_inv = -rot_inv.apply(&self.translation);
        Self { rotation: rot_inv, translation: t_inv }
    }

    /// Chains `self` after `other`: the result maps frame `c` points through
    /// `other` (c -> b) and then `self` (b -> a).
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.apply(&other.translation) + self.translation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_angles(rng: &mut ChaCha8Rng) -> EulerAngles {
        // Pitch stays inside the gimbal-lock bound; roof slopes max out at 45 deg.
        EulerAngles::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-1.4..1.4),
            rng.gen_range(-3.0..3.0),
        )
        .unwrap()
    }

    fn random_transform(rng: &mut ChaCha8Rng) -> RigidTransform {
        RigidTransform::new(
            RotationMatrix::from_euler(random_angles(rng)),
            Vector3::new(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
            ),
        )
    }

    #[test]
    fn zero_angles_give_identity() {
        let r = RotationMatrix::from_euler(EulerAngles::zero());
        assert_abs_diff_eq!(r.matrix(), &Matrix3::identity(), epsilon = 0.0);
    }

    #[test]
    fn quarter_turn_yaw_maps_x_to_y() {
        let r = RotationMatrix::yaw(std::f64::consts::FRAC_PI_2);
        let v = r.apply(&Vector3::x());
        assert_abs_diff_eq!(v, Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn pure_pitch_maps_z_axis() {
        // 30 deg pitch sends +z to [sin 30, 0, cos 30] = [0.5, 0, 0.8660].
        let r = RotationMatrix::from_euler(
            EulerAngles::new(0.0, 30f64.to_radians(), 0.0).unwrap(),
        );
        let v = r.apply(&Vector3::z());
        assert_abs_diff_eq!(v.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.z, 0.866025403784, epsilon = 1e-9);
    }

    #[test]
    fn matches_nalgebra_euler_composition() {
        // Cross-check the hand-written matrix against nalgebra's
        // roll-pitch-yaw constructor on seeded samples.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = random_angles(&mut rng);
            let ours = RotationMatrix::from_euler(a);
            let theirs = nalgebra::Rotation3::from_euler_angles(a.roll, a.pitch, a.yaw);
            assert_abs_diff_eq!(ours.matrix(), theirs.matrix(), epsilon = 1e-14);
        }
    }

    #[test]
    fn rotations_stay_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let r = RotationMatrix::from_euler(random_angles(&mut rng));
            assert!(r.orthonormality_residual() < 1e-9);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gimbal_lock_rejected() {
        assert_eq!(
            EulerAngles::new(0.0, std::f64::consts::FRAC_PI_2, 0.0),
            Err(FrameError::GimbalLock(std::f64::consts::FRAC_PI_2))
        );
        assert!(EulerAngles::new(0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn transform_point_examples() {
        let id = RigidTransform::identity();
        assert_eq!(id.apply(&Vector3::new(1.0, 2.0, 3.0)), Vector3::new(1.0, 2.0, 3.0));

        let shift = RigidTransform::new(RotationMatrix::identity(), Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(shift.apply(&Vector3::zeros()), Vector3::new(1.0, 2.0, 3.0));

        let yaw = RigidTransform::new(
            RotationMatrix::yaw(std::f64::consts::FRAC_PI_2),
            Vector3::zeros(),
        );
        assert_abs_diff_eq!(yaw.apply(&Vector3::x()), Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn invert_examples() {
        let id = RigidTransform::identity();
        let inv = id.invert();
        assert_abs_diff_eq!(inv.translation, Vector3::zeros(), epsilon = 0.0);

        let shift = RigidTransform::new(RotationMatrix::identity(), Vector3::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(shift.invert().translation, Vector3::new(-1.0, 0.0, 0.0), epsilon = 0.0);
    }

    #[test]
    fn invert_roundtrip_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let t = random_transform(&mut rng);
            let p = Vector3::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            );
            let back = t.invert().apply(&t.apply(&p));
            assert!((back - p).norm() < 1e-12, "roundtrip residual {}", (back - p).norm());
        }
    }

    #[test]
    fn compose_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let id = RigidTransform::identity();
        for _ in 0..1000 {
            let a = random_transform(&mut rng);
            let b = random_transform(&mut rng);
            let c = random_transform(&mut rng);
            let p = Vector3::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            );

            // compose(identity, T) == T
            let left_id = id.compose(&a).apply(&p);
            assert!((left_id - a.apply(&p)).norm() < 1e-12);

            // compose agrees with sequential application
            let seq = a.apply(&b.apply(&p));
            let comp = a.compose(&b).apply(&p);
            assert!((comp - seq).norm() < 1e-12);

            // associativity
            let lhs = a.compose(&b).compose(&c).apply(&p);
            let rhs = a.compose(&b.compose(&c)).apply(&p);
            assert!((lhs - rhs).norm() < 1e-12);

            // inverse composes to identity
            let near_id = a.compose(&a.invert()).apply(&p);
            assert!((near_id - p).norm() < 1e-12);
        }
    }

    #[test]
    fn transform_is_affine_in_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let t = random_transform(&mut rng);
            let p = Vector3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 0.3);
            let q = Vector3::new(0.1, rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let lhs = t.apply(&(p + q)) - t.apply(&q);
            let rhs = t.rotation.apply(&p);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
