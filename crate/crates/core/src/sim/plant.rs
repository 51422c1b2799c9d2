//! Simulated multirotor plant: point-mass translation with a first-order
//! attitude lag. Contact, wind, and gravity enter as external forces;
//! integration is semi-implicit Euler.

use crate::frames::{EulerAngles, RotationMatrix};
use nalgebra::Vector3;

use super::SimError;

/// Physical vehicle parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    pub octocopter_mass: f64,
    pub battery_mass: f64,
    pub nailgun_mass: f64,
    /// Attitude lag time constant (s).
    pub tau_att: f64,
    pub thrust_min: f64,
    pub thrust_max: f64,
    pub gravity: f64,
    /// Hover pitch trim (rad): the attitude at which the thrust axis points
    /// straight up. Nonzero because the nailgun shifts the weight balance.
    pub trim_pitch: f64,
}

impl VehicleParams {
    /// Total system mass.
    pub fn mass(&self) -> f64 {
        self.octocopter_mass + self.battery_mass + self.nailgun_mass
    }

    /// Thrust direction in the body frame. Rotated by the trim angle so
    /// that hovering at the trim attitude gives a vertical thrust vector.
    pub fn thrust_axis_body(&self) -> Vector3<f64> {
        let (s, c) = self.trim_pitch.sin_cos();
        Vector3::new(s, 0.0, -c)
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            octocopter_mass: 4.8,
            battery_mass: 1.4,
            nailgun_mass: 3.0,
            tau_att: 0.15,
            thrust_min: 0.0,
            thrust_max: 200.0,
            gravity: 9.81,
            trim_pitch: -2.0_f64.to_radians(),
        }
    }
}

/// Vehicle rigid-body state, ground frame (NED).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub attitude: EulerAngles,
    pub attitude_rate: Vector3<f64>,
    pub time: f64,
}

impl VehicleState {
    pub fn at_rest(position: Vector3<f64>, attitude: EulerAngles) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            attitude,
            attitude_rate: Vector3::zeros(),
            time: 0.0,
        }
    }

    pub fn rotation(&self) -> RotationMatrix {
        RotationMatrix::from_euler(self.attitude)
    }
}

/// Attitude-plus-thrust command from the position controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeThrustCommand {
    pub attitude: EulerAngles,
    /// Total thrust along the body thrust axis (N).
    pub thrust: f64,
}

/// Advances the plant by `dt` under the given command and external force.
///
/// Attitude relaxes toward the commanded attitude with time constant
/// `tau_att`; thrust acts along the current (not commanded) body axis.
pub fn plant_step(
    state: &VehicleState,
    command: &AttitudeThrustCommand,
    external_force: Vector3<f64>,
    params: &VehicleParams,
    dt: f64,
) -> Result<(VehicleState, Vector3<f64>), SimError> {
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(SimError::InvalidTimestep(dt));
    }
    let finite = state.position.iter().all(|v| v.is_finite())
        && state.velocity.iter().all(|v| v.is_finite())
        && external_force.iter().all(|v| v.is_finite())
        && command.thrust.is_finite();
    if !finite {
        return Err(SimError::SimulationFault(state.time));
    }

    let lag = dt / params.tau_att;
    let rate = Vector3::new(
        (command.attitude.roll - state.attitude.roll) / params.tau_att,
        (command.attitude.pitch - state.attitude.pitch) / params.tau_att,
        wrap_angle(command.attitude.yaw - state.attitude.yaw) / params.tau_att,
    );
    let attitude = EulerAngles {
        roll: state.attitude.roll + rate.x * dt,
        pitch: state.attitude.pitch + rate.y * dt,
        yaw: state.attitude.yaw + rate.z * dt,
    };
    let _ = lag;

    let thrust = command.thrust.clamp(params.thrust_min, params.thrust_max);
    let axis = RotationMatrix::from_euler(attitude).apply(&params.thrust_axis_body());
    let m = params.mass();
    let accel =
        (axis * thrust + external_force) / m + Vector3::new(0.0, 0.0, params.gravity);

    // Semi-implicit Euler: position advances with the updated velocity.
    let velocity = state.velocity + accel * dt;
    let position = state.position + velocity * dt;

    Ok((
        VehicleState {
            position,
            velocity,
            attitude,
            attitude_rate: rate,
            time: state.time + dt,
        },
        accel,
    ))
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % std::f64::consts::TAU;
    if x > std::f64::consts::PI {
        x -= std::f64::consts::TAU;
    } else if x < -std::f64::consts::PI {
        x += std::f64::consts::TAU;
    }
    x
}
