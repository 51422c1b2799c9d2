//! Closed-loop plant simulation: PID-tracked multirotor surrogate, tooltip
//! spring contact with stick-slip friction, trigger logic, wind, and the
//! mission state machine.

pub mod contact;
pub mod controller;
pub mod log;
pub mod plant;
pub mod runner;
pub mod wind;

use thiserror::Error;

pub use contact::{contact_update, nailgun_update, ContactModel, ContactState, Deployment};
pub use controller::{Gains, PositionController, ReferenceSample};
pub use log::{NailRecord, SimLog};
pub use plant::{plant_step, AttitudeThrustCommand, VehicleParams, VehicleState};
pub use runner::{run, PhaseTrace, RunOutput, SimSetup};
pub use wind::WindModel;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("timestep {0} s outside (0, 0.01]")]
    InvalidTimestep(f64),
    #[error("non-finite state or input at t = {0} s")]
    SimulationFault(f64),
    #[error("invalid noise standard deviation {0}")]
    InvalidNoise(f64),
    #[error(transparent)]
    Trajectory(#[from] crate::trajectory::TrajectoryError),
    #[error(transparent)]
    Scenario(#[from] Box<crate::scenario::ScenarioError>),
}

/// Builds the setup for a scenario and runs it.
pub fn run_scenario(scenario: &crate::scenario::Scenario) -> Result<RunOutput, SimError> {
    let setup = scenario.sim_setup().map_err(Box::new)?;
    run(&setup)
}
