//! Closed-loop mission execution.
//!
//! The state machine walks the planned phases in order: takeoff, then
//! traverse / armed approach / retreat per nail, then return and land. A
//! phase normally advances when its reference completes. A nail approach
//! additionally ends as soon as the nail deploys; if the reference completes
//! without a deployment it holds at the beyond point (sustaining the contact
//! press) until the nail fires or the watchdog trips at three times the
//! nominal duration, in which case the approach is recorded as a failed
//! deployment. Landing holds at the touchdown reference until the vehicle is
//! within 2 cm of the start altitude and slower than 2 cm/s.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::mission::{MissionPlan, PhaseKind, PlannedPhase};
use crate::sim::contact::{contact_update, nailgun_update, ContactModel, ContactState, Deployment};
use crate::sim::controller::{Gains, PositionController, ReferenceSample};
use crate::sim::log::{LogRow, NailRecord, SimLog};
use crate::sim::plant::{plant_step, VehicleParams, VehicleState};
use crate::sim::wind::WindModel;
use crate::sim::SimError;
use crate::trajectory::{QuinticSegment3, Segment};

const WIND_STREAM_SALT: u64 = 0x57494e44;
const NOISE_STREAM_SALT: u64 = 0x4e4f4953;

/// Everything a run needs, assembled from a scenario.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub plan: MissionPlan,
    pub vehicle: VehicleParams,
    pub gains: Gains,
    pub contact: ContactModel,
    pub wind: WindModel,
    pub dt: f64,
    /// A phase aborts after `watchdog_factor * nominal_duration`.
    pub watchdog_factor: f64,
    /// Constant offset added to every reference position (fault-injection
    /// knob for tracking-bias studies).
    pub reference_offset: Vector3<f64>,
    /// Gaussian noise on the position the controller sees (m, per axis).
    pub position_noise_std: f64,
    pub seed: u64,
    pub landing_alt_tol: f64,
    pub landing_speed_tol: f64,
}

/// Executed phase summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub label: String,
    pub kind: PhaseKind,
    pub armed: bool,
    pub start_time: f64,
    pub end_time: f64,
    pub watchdog_tripped: bool,
}

/// Complete run result.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: SimLog,
    pub nails: Vec<NailRecord>,
    pub trace: Vec<PhaseTrace>,
    /// True when any watchdog tripped.
    pub aborted: bool,
    pub final_state: VehicleState,
    pub plan: MissionPlan,
}

impl RunOutput {
    pub fn deployed_count(&self) -> usize {
        self.nails.iter().filter(|n| n.deployed).count()
    }

    pub fn attempted_count(&self) -> usize {
        self.nails.len()
    }
}

/// Runs a mission plan in closed loop. Deterministic for a given setup.
pub fn run(setup: &SimSetup) -> Result<RunOutput, SimError> {
    let dt = setup.dt;
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(SimError::InvalidTimestep(dt));
    }
    let plan = &setup.plan;
    let mut phases: Vec<PlannedPhase> = plan.phases.clone();

    let mut state = VehicleState::at_rest(plan.params.takeoff_point, plan.nailing_attitude);
    let mut controller = PositionController::new(setup.gains.clone());
    let mut contact_state = ContactState::default();
    let mut wind = setup.wind.clone();
    let mut wind_rng = ChaCha8Rng::seed_from_u64(setup.seed ^ WIND_STREAM_SALT);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(setup.seed ^ NOISE_STREAM_SALT);
    let noise = if setup.position_noise_std > 0.0 {
        Some(Normal::new(0.0, setup.position_noise_std).map_err(|_| {
            SimError::InvalidNoise(setup.position_noise_std)
        })?)
    } else {
        None
    };

    let mut log = SimLog::default();
    let mut nails = Vec::new();
    let mut trace = Vec::new();
    let mut aborted = false;

    let mut idx = 0;
    while idx < phases.len() {
        let phase = phases[idx].clone();
        let label = phase.kind.label();
        let phase_id = log.intern_phase(&label);
        let nominal = phase.nominal_duration;
        let watchdog_at = setup.watchdog_factor * nominal;
        let start_time = state.time;
        let mut t_phase = 0.0;
        let mut fired: Option<Deployment> = None;
        let mut watchdog_tripped = false;

        loop {
            match phase.kind {
                PhaseKind::NailApproach(_) => {
                    if fired.is_some() {
                        break;
                    }
                    if t_phase >= watchdog_at {
                        watchdog_tripped = true;
                        break;
                    }
                }
                PhaseKind::ReturnLand => {
                    let landed = (state.position.z - plan.params.takeoff_point.z).abs()
                        <= setup.landing_alt_tol
                        && state.velocity.norm() < setup.landing_speed_tol;
                    if t_phase >= nominal && landed {
                        break;
                    }
                    if t_phase >= watchdog_at {
                        watchdog_tripped = true;
                        break;
                    }
                }
                _ => {
                    if t_phase >= nominal {
                        break;
                    }
                }
            }

            // Reference sample; past the nominal end the phase holds its
            // final position with zero velocity and acceleration.
            let t_ref = t_phase.min(nominal);
            let sample = phase.segment.eval_local(t_ref)?;
            let holding = t_phase > nominal;
            let ref_pos = sample.pos + setup.reference_offset;
            let ref_vel = if holding { Vector3::zeros() } else { sample.vel };
            let ref_acc = if holding { Vector3::zeros() } else { sample.acc };
            let armed = phase.armed && fired.is_none();

            // Controller sees the (optionally noisy) measured state.
            let mut measured = state;
            if let Some(n) = &noise {
                measured.position += Vector3::new(
                    n.sample(&mut noise_rng),
                    n.sample(&mut noise_rng),
                    n.sample(&mut noise_rng),
                );
            }
            let reference = ReferenceSample {
                position: ref_pos,
                velocity: ref_vel,
                acceleration: ref_acc,
                yaw: plan.nailing_attitude.yaw,
            };
            let command = controller.update(
                &measured,
                &reference,
                plan.nailing_attitude,
                armed,
                &setup.vehicle,
                dt,
            );

            // Contact force from the true tooltip position.
            let tip = state.position + state.rotation().apply(&plan.tooltip_offset_vehicle);
            let contact_force =
                contact_update(&tip, &setup.contact, &mut contact_state, armed, dt);
            if let Some(dep) =
                nailgun_update(&contact_state, &setup.contact, armed, fired.is_some(), state.time)
            {
                if matches!(phase.kind, PhaseKind::NailApproach(_)) {
                    fired = Some(dep);
                }
            }

            let wind_force = wind.step(&mut wind_rng, dt);
            let (next, accel) =
                plant_step(&state, &command, contact_force + wind_force, &setup.vehicle, dt)?;

            log.push(LogRow {
                t: state.time,
                phase: phase_id,
                armed,
                state_pos: state.position,
                state_vel: state.velocity,
                accel,
                att: [state.attitude.roll, state.attitude.pitch, state.attitude.yaw],
                att_cmd: [
                    command.attitude.roll,
                    command.attitude.pitch,
                    command.attitude.yaw,
                ],
                thrust: command.thrust,
                ref_pos,
                ref_vel,
                ref_acc,
                compression: contact_state.compression,
                switch: contact_state.switch_pressed,
                hold_timer: contact_state.press_timer,
                contact_force,
                wind_force,
                slip: contact_state.slip,
                deployed: fired.is_some(),
            });

            state = next;
            t_phase += dt;
        }

        if let PhaseKind::NailApproach(n) = phase.kind {
            nails.push(match &fired {
                Some(dep) => NailRecord {
                    index: n,
                    deployed: true,
                    deploy_time: Some(dep.time),
                    x_roof: Some(dep.contact_point.x),
                    y_roof: Some(dep.contact_point.y),
                },
                None => NailRecord {
                    index: n,
                    deployed: false,
                    deploy_time: None,
                    x_roof: None,
                    y_roof: None,
                },
            });

            // Ending the approach early leaves the reference short of the
            // planned retreat start, so the retreat is re-solved from the
            // live reference state to keep the commanded path continuous.
            let t_ref = t_phase.min(nominal);
            let sample = phase.segment.eval_local(t_ref)?;
            let holding = t_phase > nominal;
            if let Some(next_phase) = phases.get_mut(idx + 1) {
                if matches!(next_phase.kind, PhaseKind::Retreat(m) if m == n) {
                    let target = next_phase.segment.end_state().pos;
                    let dist = (target - sample.pos).norm();
                    let duration = (plan.params.duration_factor * dist / plan.params.v_f)
                        .max(plan.params.min_segment_duration);
                    let seg = QuinticSegment3::solve(
                        duration,
                        sample.pos,
                        if holding { Vector3::zeros() } else { sample.vel },
                        if holding { Vector3::zeros() } else { sample.acc },
                        target,
                        Vector3::zeros(),
                        Vector3::zeros(),
                    )?;
                    *next_phase = PlannedPhase {
                        kind: next_phase.kind,
                        armed: false,
                        segment: Segment::Quintic(seg),
                        nominal_duration: duration,
                    };
                }
            }
        }

        aborted |= watchdog_tripped;
        trace.push(PhaseTrace {
            label,
            kind: phase.kind,
            armed: phase.armed,
            start_time,
            end_time: state.time,
            watchdog_tripped,
        });
        idx += 1;
    }

    Ok(RunOutput {
        log,
        nails,
        trace,
        aborted,
        final_state: state,
        plan: plan.clone(),
    })
}
