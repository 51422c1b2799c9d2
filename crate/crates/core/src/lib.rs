//! Mission planning and closed-loop flight simulation for autonomous aerial
//! roof nailing.
//!
//! The crate is organized as a pipeline:
//!
//! - [`frames`] — rigid-body transforms between the ground (NED), roof, and
//!   vehicle frames.
//! - [`trajectory`] — quintic boundary-value segments, ramp-cruise velocity
//!   profiles, 3D line projection, and piecewise stitching.
//! - [`mission`] — roof/shingle/mount geometry and the mission builder that
//!   turns nail points into a phased plan with arming windows.
//! - [`sim`] — the simulated plant: cascaded PID tracker, tooltip spring
//!   contact with stick-slip friction, trigger logic, wind, and the state
//!   machine that executes a mission plan.
//! - [`analysis`] — nail placement errors, per-angle summary statistics,
//!   the two-run bias-correction workflow, and report emission.
//! - [`scenario`] — the TOML scenario configuration shared by every entry
//!   point, with dotted-path overrides.
//!
//! Everything is deterministic for a given scenario and seed.

pub mod analysis;
pub mod frames;
pub mod mission;
pub mod scenario;
pub mod sim;
pub mod trajectory;

pub use frames::{EulerAngles, FrameError, RigidTransform, RotationMatrix};
pub use mission::{
    desired_nailing_velocity, safety_beyond_points, vehicle_position_for_nailing, MissionError,
    MissionParams, MissionPlan, NailgunMount, PhaseKind, RoofModel, ShingleLayout,
};
pub use scenario::{Scenario, ScenarioError};
pub use sim::{run_scenario, NailRecord, RunOutput, SimError, SimLog};
pub use trajectory::{
    LinearTrajectory3, PiecewiseTrajectory, QuinticSegment, QuinticSegment3, RampCruiseProfile,
    TrajectoryError,
};

/// Version string stamped into run manifests so an output directory can be
/// tied back to the build that produced it.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
