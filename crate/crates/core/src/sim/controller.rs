//! Cascaded position tracker.
//!
//! The outer loop turns reference and measured translational state into a
//! commanded acceleration (PID with acceleration feedforward and clamped
//! integrator). The commanded acceleration maps to a total-thrust magnitude
//! and a desired roll/pitch under the reference yaw.
//!
//! Attitude authority is bounded around the planned mission attitude. The
//! bound is tight while the trigger is armed: contact force is then produced
//! by thrust modulation alone, which keeps the tooltip from being swept
//! along the surface by attitude excursions while it is pressed on the deck.

use crate::frames::{EulerAngles, RotationMatrix};
use nalgebra::Vector3;

use super::plant::{AttitudeThrustCommand, VehicleParams, VehicleState};

/// Position-loop gains and authority limits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    /// Position error gain (1/s^2).
    pub kp: f64,
    /// Velocity error gain (1/s).
    pub kd: f64,
    /// Integral gain (1/s^3).
    pub ki: f64,
    /// Anti-windup clamp on each axis of the error integral (m*s).
    pub integral_limit: f64,
    /// Roll/pitch deviation allowed from the planned attitude (rad).
    pub tilt_limit: f64,
    /// Tighter deviation bound while armed (rad).
    pub armed_tilt_limit: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            kp: 10.0,
            kd: 7.0,
            ki: 3.0,
            integral_limit: 0.6,
            tilt_limit: 20.0_f64.to_radians(),
            armed_tilt_limit: 0.25_f64.to_radians(),
        }
    }
}

/// One sample of the reference the controller tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub yaw: f64,
}

/// Stateful outer-loop controller (holds the error integral).
#[derive(Debug, Clone)]
pub struct PositionController {
    pub gains: Gains,
    integral: Vector3<f64>,
}

impl PositionController {
    pub fn new(gains: Gains) -> Self {
        Self { gains, integral: Vector3::zeros() }
    }

    pub fn integral(&self) -> Vector3<f64> {
        self.integral
    }

    /// Computes the attitude/thrust command for one control step.
    ///
    /// `planned_attitude` centers the authority bounds; `armed` switches to
    /// the tight bound.
    pub fn update(
        &mut self,
        measured: &VehicleState,
        reference: &ReferenceSample,
        planned_attitude: EulerAngles,
        armed: bool,
        params: &VehicleParams,
        dt: f64,
    ) -> AttitudeThrustCommand {
        let g = &self.gains;
        let pos_err = reference.position - measured.position;
        let vel_err = reference.velocity - measured.velocity;
        self.integral += pos_err * dt;
        for i in 0..3 {
            self.integral[i] = self.integral[i].clamp(-g.integral_limit, g.integral_limit);
        }

        let accel_cmd =
            reference.acceleration + g.kp * pos_err + g.kd * vel_err + g.ki * self.integral;

        // Force the thrust must supply: m * (a_cmd - g_vec).
        let m = params.mass();
        let force = m * (accel_cmd - Vector3::new(0.0, 0.0, params.gravity));

        // Express in the yaw-aligned frame and extract roll/pitch. The
        // extraction is exact at zero roll and the trim correction folds the
        // canted thrust axis into the pitch command.
        let f_yaw = RotationMatrix::yaw(reference.yaw).inverse().apply(&force);
        let norm = f_yaw.norm();
        let (roll_raw, pitch_raw) = if norm < 1e-9 {
            (0.0, params.trim_pitch)
        } else {
            let roll = (f_yaw.y / norm).clamp(-1.0, 1.0).asin();
            let pitch = (-f_yaw.x).atan2(-f_yaw.z) + params.trim_pitch;
            (roll, pitch)
        };

        let limit = if armed { g.armed_tilt_limit } else { g.tilt_limit };
        let roll = roll_raw.clamp(planned_attitude.roll - limit, planned_attitude.roll + limit);
        let pitch =
            pitch_raw.clamp(planned_attitude.pitch - limit, planned_attitude.pitch + limit);
        let attitude = EulerAngles { roll, pitch, yaw: reference.yaw };

        // Realize the achievable component of the demanded force along the
        // commanded thrust axis.
        let axis = RotationMatrix::from_euler(attitude).apply(&params.thrust_axis_body());
        let thrust = force.dot(&axis).clamp(params.thrust_min, params.thrust_max);

        AttitudeThrustCommand { attitude, thrust }
    }
}
