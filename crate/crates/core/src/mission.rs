//! Mission geometry and planning.
//!
//! Converts a roof pose, a shingle nail layout, and the nailgun mount
//! geometry into tooltip waypoints, vehicle waypoints, and a phased mission
//! plan with arming windows.
//!
//! Every nail approach runs along the roof's inward normal: it starts at a
//! safety point `d_s` off the surface, crosses the nail point at the cruise
//! speed `v_f`, and aims `d_b` past the surface at a "beyond point". The
//! tooltip never reaches the beyond point — the sustained position error is
//! what lets the position controller press the tooltip against the deck.

use crate::frames::{EulerAngles, FrameError, RigidTransform, RotationMatrix};
use crate::trajectory::{
    LinearTrajectory3, PiecewiseTrajectory, QuinticSegment3, RampCruiseProfile, Segment,
    TrajectoryError,
};
use nalgebra::Vector3;
use thiserror::Error;

/// Mount angles supported by the detent positions of the adjustable holder.
const MOUNT_DETENTS_DEG: [f64; 4] = [0.0, 15.0, 30.0, 45.0];
/// Roof slopes covered by the tested envelope.
const MAX_ALPHA_DEG: f64 = 45.0;

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("roof slope {0} deg outside the [0, 45] deg envelope")]
    AlphaOutOfRange(f64),
    #[error("nail {index} x={x} m outside legal band [{lo}, {hi}] m")]
    BandViolation { index: usize, x: f64, lo: f64, hi: f64 },
    #[error("nail points must be ordered along the eave (nail {0} is out of order)")]
    UnorderedNails(usize),
    #[error("mount angle {0} deg is not a detent position (0/15/30/45); set allow_any_delta to use it")]
    NonDetentMount(f64),
    #[error(
        "mount angle {delta} deg does not match roof slope {alpha} deg; set allow_delta_mismatch to override"
    )]
    DeltaMismatch { delta: f64, alpha: f64 },
    #[error("nail index {index} out of range ({count} nails)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("stiffness and mass must be positive: k={k}, m={m}")]
    NonPositiveContactParams { k: f64, m: f64 },
    #[error("safety/beyond distances must be positive: d_s={ds}, d_b={db}")]
    NonPositiveStandoff { ds: f64, db: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Roof deck pose and extent. The roof frame origin sits at the deck's
/// lower-left corner; `x` runs up-slope, `y` along the eave, `z` into the
/// deck.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofModel {
    pose: RigidTransform,
    /// Slope angle (rad); equals the roof frame's pitch.
    pub alpha: f64,
    /// Roof heading (rad).
    pub yaw: f64,
    /// Deck extent along `x` (up-slope), m.
    pub deck_up_slope: f64,
    /// Deck extent along `y` (eave), m.
    pub deck_along_eave: f64,
}

impl RoofModel {
    pub fn new(
        origin: Vector3<f64>,
        alpha: f64,
        yaw: f64,
        deck_up_slope: f64,
        deck_along_eave: f64,
    ) -> Result<Self, MissionError> {
        let alpha_deg = alpha.to_degrees();
        if !(0.0..=MAX_ALPHA_DEG + 1e-9).contains(&alpha_deg) {
            return Err(MissionError::AlphaOutOfRange(alpha_deg));
        }
        let rotation = RotationMatrix::from_euler(EulerAngles::new(0.0, alpha, yaw)?);
        Ok(Self {
            pose: RigidTransform::new(rotation, origin),
            alpha,
            yaw,
            deck_up_slope,
            deck_along_eave,
        })
    }

    /// Roof-to-ground transform.
    pub fn pose(&self) -> &RigidTransform {
        &self.pose
    }

    /// Up-slope direction in the ground frame.
    pub fn up_slope_dir(&self) -> Vector3<f64> {
        self.pose.rotation.column(0)
    }

    /// Eave direction in the ground frame.
    pub fn eave_dir(&self) -> Vector3<f64> {
        self.pose.rotation.column(1)
    }

    /// Inward surface normal (into the deck) in the ground frame.
    pub fn inward_normal(&self) -> Vector3<f64> {
        self.pose.rotation.column(2)
    }

    /// Maps a point on the 2D roof surface to the ground frame.
    pub fn surface_point(&self, x: f64, y: f64) -> Vector3<f64> {
        self.pose.apply(&Vector3::new(x, y, 0.0))
    }

    /// Ground position of nail `i` of the layout.
    pub fn nail_point_ground(
        &self,
        layout: &ShingleLayout,
        i: usize,
    ) -> Result<Vector3<f64>, MissionError> {
        let nail = layout
            .nails
            .get(i)
            .ok_or(MissionError::IndexOutOfRange { index: i, count: layout.nails.len() })?;
        Ok(self.surface_point(nail[0], nail[1]))
    }

    /// Roof-frame tangential coordinates of a ground point projected along
    /// the surface normal.
    pub fn to_surface_coords(&self, p: &Vector3<f64>) -> (f64, f64, f64) {
        let rel = p - self.pose.translation;
        (
            rel.dot(&self.up_slope_dir()),
            rel.dot(&self.eave_dir()),
            rel.dot(&self.inward_normal()),
        )
    }
}

/// Nail positions on the shingle, roof frame, plus the legal vertical band
/// between the sealing strip and the exposure cutouts.
#[derive(Debug, Clone, PartialEq)]
pub struct ShingleLayout {
    /// `(x_up_slope, y_along_eave)` per nail, in nailing order.
    pub nails: Vec<[f64; 2]>,
    /// Lower edge of the legal band (m, up-slope coordinate).
    pub band_low: f64,
    /// Upper edge of the legal band (m).
    pub band_high: f64,
}

impl ShingleLayout {
    pub fn new(nails: Vec<[f64; 2]>, band_low: f64, band_high: f64) -> Result<Self, MissionError> {
        let layout = Self { nails, band_low, band_high };
        layout.validate()?;
        Ok(layout)
    }

    /// Standard four-nail pattern for a 914 mm three-tab shingle: one nail
    /// near each end and one above each cutout, centered in the legal band.
    pub fn four_nail_default() -> Self {
        let x = 0.155;
        Self {
            nails: vec![[x, 0.025], [x, 0.330], [x, 0.584], [x, 0.889]],
            band_low: 0.140,
            band_high: 0.170,
        }
    }

    /// Checks band membership and left-to-right ordering. An empty layout is
    /// permitted and produces a takeoff/land-only mission.
    pub fn validate(&self) -> Result<(), MissionError> {
        for (i, nail) in self.nails.iter().enumerate() {
            if nail[0] < self.band_low - 1e-12 || nail[0] > self.band_high + 1e-12 {
                return Err(MissionError::BandViolation {
                    index: i,
                    x: nail[0],
                    lo: self.band_low,
                    hi: self.band_high,
                });
            }
            if i > 0 && nail[1] < self.nails[i - 1][1] {
                return Err(MissionError::UnorderedNails(i));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nails.is_empty()
    }
}

/// Nailgun mount geometry. `w` is the forward offset of the gun pivot, `l`
/// the gun length from pivot to tooltip, `h` the drop from the rotor plane
/// to the pivot, and `delta` the mount tilt matching the roof slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NailgunMount {
    pub w: f64,
    pub l: f64,
    pub h: f64,
    /// Mount angle (rad).
    pub delta: f64,
}

impl NailgunMount {
    pub fn new(w: f64, l: f64, h: f64, delta: f64, allow_any_delta: bool) -> Result<Self, MissionError> {
        if !allow_any_delta {
            let deg = delta.to_degrees();
            if !MOUNT_DETENTS_DEG.iter().any(|d| (deg - d).abs() < 1e-9) {
                return Err(MissionError::NonDetentMount(deg));
            }
        }
        Ok(Self { w, l, h, delta })
    }

    /// Tooltip position in the vehicle frame:
    /// `[w cos(delta) + l sin(delta), 0, h - w sin(delta) + l cos(delta)]`.
    pub fn tooltip_offset(&self) -> Vector3<f64> {
        let (sd, cd) = self.delta.sin_cos();
        Vector3::new(self.w * cd + self.l * sd, 0.0, self.h - self.w * sd + self.l * cd)
    }
}

/// Contact speed that converts the vehicle's kinetic energy into full
/// tooltip spring compression: `v = sqrt(k / m) * c`.
pub fn desired_nailing_velocity(k: f64, m: f64, c: f64) -> Result<f64, MissionError> {
    if k <= 0.0 || m <= 0.0 {
        return Err(MissionError::NonPositiveContactParams { k, m });
    }
    Ok((k / m).sqrt() * c.max(0.0))
}

/// Projects a roof-frame nail point to its safety point (`d_s` off the
/// surface) and beyond point (`d_b` past the surface).
pub fn safety_beyond_points(
    nail_roof: &Vector3<f64>,
    d_s: f64,
    d_b: f64,
) -> (Vector3<f64>, Vector3<f64>) {
    let offset_s = Vector3::new(0.0, 0.0, d_s);
    let offset_b = Vector3::new(0.0, 0.0, d_b);
    (nail_roof - offset_s, nail_roof + offset_b)
}

/// Vehicle ground position that places the tooltip at `tooltip_target`
/// while holding `attitude`: `t_v = target - R_v * r_tooltip`.
pub fn vehicle_position_for_tooltip(
    tooltip_target: &Vector3<f64>,
    attitude: EulerAngles,
    mount: &NailgunMount,
) -> Vector3<f64> {
    let rot = RotationMatrix::from_euler(attitude);
    tooltip_target - rot.apply(&mount.tooltip_offset())
}

/// Vehicle ground position for nailing point `i`.
pub fn vehicle_position_for_nailing(
    roof: &RoofModel,
    layout: &ShingleLayout,
    i: usize,
    attitude: EulerAngles,
    mount: &NailgunMount,
) -> Result<Vector3<f64>, MissionError> {
    let nail_g = roof.nail_point_ground(layout, i)?;
    Ok(vehicle_position_for_tooltip(&nail_g, attitude, mount))
}

/// Tunable mission parameters. Defaults follow the guidance design values;
/// every field is exposed in the scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionParams {
    /// Cruise/contact speed (m/s).
    pub v_f: f64,
    /// Acceleration bound for the approach ramp (m/s^2).
    pub a_max: f64,
    /// Safety standoff off the surface (m).
    pub d_s: f64,
    /// Beyond-point depth past the surface (m).
    pub d_b: f64,
    /// Takeoff hold altitude above the launch point (m AGL).
    pub takeoff_agl: f64,
    /// Speed scale for takeoff/traverse/return duration sizing (m/s).
    pub transit_speed: f64,
    /// Segment duration rule: `max(min_segment_duration, duration_factor * dist / speed)`.
    pub min_segment_duration: f64,
    pub duration_factor: f64,
    /// Hold time at a safety point before an approach (s).
    pub settle_duration: f64,
    /// Planned hover pitch at the nailing point (rad); calibrated trim.
    pub trim_pitch: f64,
    /// Roof-frame shift added to every commanded nail target (up-slope,
    /// along-eave). Carries operator setpoint corrections and injected
    /// systematic offsets.
    pub aim_offset: [f64; 2],
    /// Vehicle launch position, ground frame.
    pub takeoff_point: Vector3<f64>,
    /// Accept a mount angle different from the roof slope.
    pub allow_delta_mismatch: bool,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            v_f: 0.15,
            a_max: 0.10,
            d_s: 1.0,
            d_b: 0.24,
            takeoff_agl: 1.5,
            transit_speed: 0.5,
            min_segment_duration: 3.0,
            duration_factor: 1.5,
            settle_duration: 1.0,
            trim_pitch: -2.0_f64.to_radians(),
            aim_offset: [0.0, 0.0],
            takeoff_point: Vector3::zeros(),
            allow_delta_mismatch: false,
        }
    }
}

impl MissionParams {
    fn quintic_duration(&self, dist: f64, speed: f64) -> f64 {
        (self.duration_factor * dist / speed).max(self.min_segment_duration)
    }
}

/// Mission phase identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Takeoff,
    /// Transit to the safety point of nail `i` (0-based).
    TraverseToSafety(usize),
    /// Armed approach of nail `i`.
    NailApproach(usize),
    /// Retreat after nail `i`.
    Retreat(usize),
    ReturnLand,
}

impl PhaseKind {
    pub fn label(&self) -> String {
        match self {
            PhaseKind::Takeoff => "takeoff".to_string(),
            PhaseKind::TraverseToSafety(i) => format!("traverse_{}", i + 1),
            PhaseKind::NailApproach(i) => format!("nail_approach_{}", i + 1),
            PhaseKind::Retreat(i) => format!("retreat_{}", i + 1),
            PhaseKind::ReturnLand => "return_land".to_string(),
        }
    }
}

/// One planned phase: a vehicle-frame reference segment plus the arming
/// flag for the trigger relay.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPhase {
    pub kind: PhaseKind,
    pub armed: bool,
    pub segment: Segment,
    pub nominal_duration: f64,
}

/// Complete mission: ordered phases, per-nail waypoints, and the planned
/// nailing attitude.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub phases: Vec<PlannedPhase>,
    /// Hover attitude assumed at the nailing point (roll 0, calibrated trim
    /// pitch, roof heading).
    pub nailing_attitude: EulerAngles,
    /// Tooltip offset in the vehicle frame.
    pub tooltip_offset_vehicle: Vector3<f64>,
    /// Tooltip offset rotated into the ground frame at the nailing attitude.
    pub tooltip_offset_ground: Vector3<f64>,
    /// Commanded nail targets (ground frame).
    pub nail_points_ground: Vec<Vector3<f64>>,
    /// Per-nail safety points (ground frame).
    pub safety_points_ground: Vec<Vector3<f64>>,
    /// Per-nail beyond points (ground frame).
    pub beyond_points_ground: Vec<Vector3<f64>>,
    /// Commanded nail targets (roof frame, after aim offsets).
    pub nail_targets_roof: Vec<[f64; 2]>,
    /// Desired nail positions as laid out (roof frame), the reference for
    /// error measurement.
    pub desired_nails_roof: Vec<[f64; 2]>,
    /// Approach motion profile shared by every nail.
    pub approach_profile: Option<RampCruiseProfile>,
    pub params: MissionParams,
    pub warnings: Vec<String>,
}

impl MissionPlan {
    /// Time within an approach at which the tooltip crosses the surface
    /// (path distance `d_s`); the crossing falls in the cruise phase.
    pub fn approach_crossing_time(&self) -> Option<f64> {
        self.approach_profile.map(|p| p.time_at_distance(self.params.d_s))
    }

    pub fn total_duration(&self) -> f64 {
        self.phases.iter().map(|p| p.nominal_duration).sum()
    }

    pub fn armed_duration(&self) -> f64 {
        self.phases.iter().filter(|p| p.armed).map(|p| p.nominal_duration).sum()
    }

    /// The vehicle-frame reference as one stitched trajectory.
    pub fn reference_trajectory(&self) -> Result<PiecewiseTrajectory, TrajectoryError> {
        PiecewiseTrajectory::stitch(
            self.phases.iter().map(|p| (p.segment.clone(), p.kind.label())).collect(),
        )
    }
}

/// Builds the phased mission plan for one shingle.
///
/// Tooltip waypoints are planned first and converted to vehicle waypoints by
/// subtracting the tooltip offset at the planned nailing attitude, so the
/// vehicle reference inherits the tooltip geometry exactly.
pub fn build_mission(
    roof: &RoofModel,
    layout: &ShingleLayout,
    mount: &NailgunMount,
    params: &MissionParams,
) -> Result<MissionPlan, MissionError> {
    layout.validate()?;
    let mut warnings = Vec::new();
    if (mount.delta - roof.alpha).abs() > 1e-9 {
        if params.allow_delta_mismatch {
            warnings.push(format!(
                "mount angle {:.1} deg differs from roof slope {:.1} deg; tooltip axis will not match the surface normal",
                mount.delta.to_degrees(),
                roof.alpha.to_degrees()
            ));
        } else {
            return Err(MissionError::DeltaMismatch {
                delta: mount.delta.to_degrees(),
                alpha: roof.alpha.to_degrees(),
            });
        }
    }
    if params.d_s <= 0.0 || params.d_b <= 0.0 {
        return Err(MissionError::NonPositiveStandoff { ds: params.d_s, db: params.d_b });
    }

    let attitude = EulerAngles::new(0.0, params.trim_pitch, roof.yaw)?;
    let tooltip_v = mount.tooltip_offset();
    let tooltip_g = RotationMatrix::from_euler(attitude).apply(&tooltip_v);

    // Commanded targets: layout plus any aim offset, kept on the surface.
    let targets_roof: Vec<[f64; 2]> = layout
        .nails
        .iter()
        .map(|n| [n[0] + params.aim_offset[0], n[1] + params.aim_offset[1]])
        .collect();

    let mut nail_g = Vec::new();
    let mut safety_g = Vec::new();
    let mut beyond_g = Vec::new();
    for t in &targets_roof {
        let nail_roof = Vector3::new(t[0], t[1], 0.0);
        let (s_roof, b_roof) = safety_beyond_points(&nail_roof, params.d_s, params.d_b);
        nail_g.push(roof.pose().apply(&nail_roof));
        safety_g.push(roof.pose().apply(&s_roof));
        beyond_g.push(roof.pose().apply(&b_roof));
    }

    // Vehicle-frame waypoints: constant offset from the tooltip path.
    let v_safety: Vec<Vector3<f64>> = safety_g.iter().map(|p| p - tooltip_g).collect();
    let v_beyond: Vec<Vector3<f64>> = beyond_g.iter().map(|p| p - tooltip_g).collect();

    let hover = params.takeoff_point + Vector3::new(0.0, 0.0, -params.takeoff_agl);
    let mut phases = Vec::new();
    let push_quintic = |phases: &mut Vec<PlannedPhase>,
                            kind: PhaseKind,
                            from: Vector3<f64>,
                            to: Vector3<f64>,
                            speed: f64,
                            min_duration: f64|
     -> Result<(), MissionError> {
        let dist = (to - from).norm();
        let duration = params.quintic_duration(dist, speed).max(min_duration);
        let seg = QuinticSegment3::between_rest(duration, from, to)?;
        phases.push(PlannedPhase {
            kind,
            armed: false,
            segment: Segment::Quintic(seg),
            nominal_duration: duration,
        });
        Ok(())
    };

    push_quintic(&mut phases, PhaseKind::Takeoff, params.takeoff_point, hover, params.transit_speed, 0.0)?;

    let mut approach_profile = None;
    let mut cursor = hover;
    for i in 0..targets_roof.len() {
        // Transit to the safety point. After a retreat the vehicle is
        // already there, so this becomes a settle hold.
        let dist = (v_safety[i] - cursor).norm();
        if dist > 1e-9 {
            push_quintic(
                &mut phases,
                PhaseKind::TraverseToSafety(i),
                cursor,
                v_safety[i],
                params.transit_speed,
                0.0,
            )?;
        } else {
            let hold = QuinticSegment3::between_rest(params.settle_duration, v_safety[i], v_safety[i])?;
            phases.push(PlannedPhase {
                kind: PhaseKind::TraverseToSafety(i),
                armed: false,
                segment: Segment::Quintic(hold),
                nominal_duration: params.settle_duration,
            });
        }

        // Armed approach: ramp-cruise along the inward normal.
        let profile = RampCruiseProfile::new(params.v_f, params.a_max, params.d_s + params.d_b)?;
        approach_profile = Some(profile);
        let line = LinearTrajectory3::new(profile, v_safety[i], v_beyond[i])?;
        phases.push(PlannedPhase {
            kind: PhaseKind::NailApproach(i),
            armed: true,
            segment: Segment::Line(line),
            nominal_duration: profile.tf,
        });

        // Retreat to the next safety point; the last nail retreats to its own.
        let next = if i + 1 < targets_roof.len() { i + 1 } else { i };
        push_quintic(
            &mut phases,
            PhaseKind::Retreat(i),
            v_beyond[i],
            v_safety[next],
            params.v_f,
            0.0,
        )?;
        cursor = v_safety[next];
    }

    push_quintic(&mut phases, PhaseKind::ReturnLand, cursor, params.takeoff_point, params.transit_speed, 0.0)?;

    let plan = MissionPlan {
        phases,
        nailing_attitude: attitude,
        tooltip_offset_vehicle: tooltip_v,
        tooltip_offset_ground: tooltip_g,
        nail_points_ground: nail_g,
        safety_points_ground: safety_g,
        beyond_points_ground: beyond_g,
        nail_targets_roof: targets_roof,
        desired_nails_roof: layout.nails.clone(),
        approach_profile,
        params: params.clone(),
        warnings,
    };
    // Continuity check across all joints.
    plan.reference_trajectory()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_roof() -> RoofModel {
        RoofModel::new(Vector3::zeros(), 0.0, 0.0, 0.61, 1.22).unwrap()
    }

    #[test]
    fn nail_point_ground_examples() {
        let layout = ShingleLayout {
            nails: vec![[0.5, 0.5]],
            band_low: 0.0,
            band_high: 1.0,
        };
        let p = flat_roof().nail_point_ground(&layout, 0).unwrap();
        assert_abs_diff_eq!(p, Vector3::new(0.5, 0.5, 0.0), epsilon = 1e-15);

        // 30 deg slope: up-slope unit vector pitches up (negative z in NED).
        let sloped = RoofModel::new(Vector3::zeros(), 30f64.to_radians(), 0.0, 2.0, 2.0).unwrap();
        let layout1 = ShingleLayout { nails: vec![[1.0, 0.0]], band_low: 0.0, band_high: 2.0 };
        let p = sloped.nail_point_ground(&layout1, 0).unwrap();
        assert_abs_diff_eq!(p.x, 0.8660254037844387, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.z, -0.5, epsilon = 1e-12);

        let moved = RoofModel::new(Vector3::new(2.0, 3.0, 0.0), 0.0, 0.0, 1.0, 1.0).unwrap();
        let origin_nail = ShingleLayout { nails: vec![[0.0, 0.0]], band_low: 0.0, band_high: 1.0 };
        assert_abs_diff_eq!(
            moved.nail_point_ground(&origin_nail, 0).unwrap(),
            Vector3::new(2.0, 3.0, 0.0),
            epsilon = 1e-15
        );

        assert!(matches!(
            flat_roof().nail_point_ground(&layout, 5),
            Err(MissionError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn tooltip_offset_examples() {
        let straight = NailgunMount::new(0.1, 0.4, 0.2, 0.0, false).unwrap();
        assert_abs_diff_eq!(straight.tooltip_offset(), Vector3::new(0.1, 0.0, 0.6), epsilon = 1e-15);

        let right_angle = NailgunMount::new(0.1, 0.4, 0.2, 90f64.to_radians(), true).unwrap();
        let t = right_angle.tooltip_offset();
        assert_abs_diff_eq!(t.x, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(t.z, 0.1, epsilon = 1e-12);

        let tilted = NailgunMount::new(0.1, 0.4, 0.2, 30f64.to_radians(), false).unwrap();
        let t = tilted.tooltip_offset();
        assert_abs_diff_eq!(t.x, 0.28660254037844385, epsilon = 1e-9);
        assert_abs_diff_eq!(t.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.z, 0.4964101615137755, epsilon = 1e-9);
    }

    #[test]
    fn mount_detents_enforced() {
        assert!(matches!(
            NailgunMount::new(0.1, 0.4, 0.2, 20f64.to_radians(), false),
            Err(MissionError::NonDetentMount(_))
        ));
        assert!(NailgunMount::new(0.1, 0.4, 0.2, 20f64.to_radians(), true).is_ok());
    }

    #[test]
    fn vehicle_position_examples() {
        let layout = ShingleLayout { nails: vec![[0.5, 0.5]], band_low: 0.0, band_high: 1.0 };
        let mount = NailgunMount::new(0.1, 0.4, 0.2, 0.0, false).unwrap();
        let pos = vehicle_position_for_nailing(
            &flat_roof(),
            &layout,
            0,
            EulerAngles::zero(),
            &mount,
        )
        .unwrap();
        assert_abs_diff_eq!(pos, Vector3::new(0.4, 0.5, -0.6), epsilon = 1e-12);

        // Zero mount: the vehicle sits exactly on the nail point.
        let zero = NailgunMount::new(0.0, 0.0, 0.0, 0.0, false).unwrap();
        let pos = vehicle_position_for_nailing(&flat_roof(), &layout, 0, EulerAngles::zero(), &zero)
            .unwrap();
        assert_abs_diff_eq!(pos, Vector3::new(0.5, 0.5, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn tooltip_forward_check_property() {
        // Seeded poses and attitudes: placing the vehicle at the computed
        // position must put the tooltip exactly on the nail point.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let alpha = [0.0, 15.0, 30.0, 45.0][rng.gen_range(0..4)];
            let roof = RoofModel::new(
                Vector3::new(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-2.0..0.0),
                ),
                (alpha as f64).to_radians(),
                rng.gen_range(-3.0..3.0),
                1.0,
                2.0,
            )
            .unwrap();
            let layout = ShingleLayout {
                nails: vec![[rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)]],
                band_low: 0.0,
                band_high: 1.0,
            };
            let mount = NailgunMount::new(
                rng.gen_range(0.0..0.3),
                rng.gen_range(0.1..0.6),
                rng.gen_range(0.0..0.4),
                rng.gen_range(-0.8..0.8),
                true,
            )
            .unwrap();
            let attitude = EulerAngles::new(
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-3.0..3.0),
            )
            .unwrap();
            let vehicle =
                vehicle_position_for_nailing(&roof, &layout, 0, attitude, &mount).unwrap();
            let tooltip = RotationMatrix::from_euler(attitude).apply(&mount.tooltip_offset()) + vehicle;
            let nail = roof.nail_point_ground(&layout, 0).unwrap();
            assert!((tooltip - nail).norm() < 1e-12);
        }
    }

    #[test]
    fn safety_beyond_examples() {
        let nail = Vector3::new(0.3, 0.4, 0.0);
        let (s, b) = safety_beyond_points(&nail, 1.0, 0.24);
        assert_abs_diff_eq!(s, Vector3::new(0.3, 0.4, -1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(b, Vector3::new(0.3, 0.4, 0.24), epsilon = 1e-15);
        assert_abs_diff_eq!((b - s).norm(), 1.24, epsilon = 1e-12);

        let (s0, b0) = safety_beyond_points(&nail, 0.0, 0.0);
        assert_eq!(s0, nail);
        assert_eq!(b0, nail);
    }

    #[test]
    fn nailing_velocity_examples() {
        let v = desired_nailing_velocity(3500.0, 9.2, 0.007).unwrap();
        assert_abs_diff_eq!(v, 0.13653316208096147, epsilon = 1e-12);
        assert_abs_diff_eq!(desired_nailing_velocity(3500.0, 9.2, 0.0).unwrap(), 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            desired_nailing_velocity(3500.0, 9.2, 0.010).unwrap(),
            0.19504737440137353,
            epsilon = 1e-9
        );
        assert!(desired_nailing_velocity(0.0, 9.2, 0.007).is_err());
        assert!(desired_nailing_velocity(3500.0, -1.0, 0.007).is_err());
    }

    fn default_mission(alpha_deg: f64, nails: usize) -> MissionPlan {
        let alpha = alpha_deg.to_radians();
        let roof =
            RoofModel::new(Vector3::new(1.5, -0.61, -0.75), alpha, 0.0, 0.61, 1.22).unwrap();
        let mut layout = ShingleLayout::four_nail_default();
        layout.nails.truncate(nails);
        let mount = NailgunMount::new(0.1, 0.4, 0.2, alpha, true).unwrap();
        build_mission(&roof, &layout, &mount, &MissionParams::default()).unwrap()
    }

    #[test]
    fn four_nail_plan_structure() {
        let plan = default_mission(30.0, 4);
        let kinds: Vec<PhaseKind> = plan.phases.iter().map(|p| p.kind).collect();
        let mut expect = vec![PhaseKind::Takeoff];
        for i in 0..4 {
            expect.push(PhaseKind::TraverseToSafety(i));
            expect.push(PhaseKind::NailApproach(i));
            expect.push(PhaseKind::Retreat(i));
        }
        expect.push(PhaseKind::ReturnLand);
        assert_eq!(kinds, expect);
        assert!(plan.phases.len() >= 10);

        // Arming windows tile exactly the approach phases.
        for p in &plan.phases {
            assert_eq!(p.armed, matches!(p.kind, PhaseKind::NailApproach(_)));
        }
        let armed: f64 = plan.armed_duration();
        let approach_sum: f64 = plan
            .phases
            .iter()
            .filter(|p| matches!(p.kind, PhaseKind::NailApproach(_)))
            .map(|p| p.nominal_duration)
            .sum();
        assert_abs_diff_eq!(armed, approach_sum, epsilon = 1e-12);
    }

    #[test]
    fn single_nail_plan_structure() {
        let plan = default_mission(0.0, 1);
        let kinds: Vec<PhaseKind> = plan.phases.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds,
            vec![
                PhaseKind::Takeoff,
                PhaseKind::TraverseToSafety(0),
                PhaseKind::NailApproach(0),
                PhaseKind::Retreat(0),
                PhaseKind::ReturnLand,
            ]
        );
    }

    #[test]
    fn empty_layout_takeoff_and_land_only() {
        let roof = RoofModel::new(Vector3::new(1.5, -0.61, -0.75), 0.0, 0.0, 0.61, 1.22).unwrap();
        let layout = ShingleLayout { nails: vec![], band_low: 0.14, band_high: 0.17 };
        let mount = NailgunMount::new(0.1, 0.4, 0.2, 0.0, false).unwrap();
        let plan = build_mission(&roof, &layout, &mount, &MissionParams::default()).unwrap();
        let kinds: Vec<PhaseKind> = plan.phases.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![PhaseKind::Takeoff, PhaseKind::ReturnLand]);
    }

    #[test]
    fn approach_direction_is_inward_normal() {
        let plan = default_mission(30.0, 4);
        let roof =
            RoofModel::new(Vector3::new(1.5, -0.61, -0.75), 30f64.to_radians(), 0.0, 0.61, 1.22)
                .unwrap();
        let normal = roof.inward_normal();
        for p in &plan.phases {
            if let (PhaseKind::NailApproach(_), Segment::Line(line)) = (&p.kind, &p.segment) {
                assert!((line.direction() - normal).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn approach_crosses_nail_point_at_cruise_speed() {
        let plan = default_mission(15.0, 4);
        let t_cross = plan.approach_crossing_time().unwrap();
        for (i, p) in plan
            .phases
            .iter()
            .filter(|p| matches!(p.kind, PhaseKind::NailApproach(_)))
            .enumerate()
        {
            let s = p.segment.eval_local(t_cross).unwrap();
            // Crossing point is the commanded nail point, at speed v_f.
            assert!((s.pos + plan.tooltip_offset_ground - plan.nail_points_ground[i]).norm() < 1e-9);
            assert_abs_diff_eq!(s.vel.norm(), 0.15, epsilon = 1e-6);
        }
    }

    #[test]
    fn eq3_forward_check_across_plan() {
        // For every planned nailing pose, the tooltip lands on the nail
        // ground point to machine precision.
        for alpha_deg in [0.0, 15.0, 30.0, 45.0] {
            let plan = default_mission(alpha_deg, 4);
            let rot = RotationMatrix::from_euler(plan.nailing_attitude);
            let t_cross = plan.approach_crossing_time().unwrap();
            let mut nail_idx = 0;
            for p in &plan.phases {
                if let PhaseKind::NailApproach(_) = p.kind {
                    let vehicle = p.segment.eval_local(t_cross).unwrap().pos;
                    let tooltip = rot.apply(&plan.tooltip_offset_vehicle) + vehicle;
                    let residual = (tooltip - plan.nail_points_ground[nail_idx]).norm();
                    assert!(residual < 1e-12, "residual {residual}");
                    nail_idx += 1;
                }
            }
        }
    }

    #[test]
    fn band_violation_rejected() {
        let layout = ShingleLayout {
            nails: vec![[0.2, 0.1]],
            band_low: 0.14,
            band_high: 0.17,
        };
        assert!(matches!(
            layout.validate(),
            Err(MissionError::BandViolation { index: 0, .. })
        ));
    }

    #[test]
    fn delta_mismatch_needs_override() {
        let roof = RoofModel::new(Vector3::new(1.5, -0.61, -0.75), 30f64.to_radians(), 0.0, 0.61, 1.22)
            .unwrap();
        let layout = ShingleLayout::four_nail_default();
        let mount = NailgunMount::new(0.1, 0.4, 0.2, 0.0, false).unwrap();
        let params = MissionParams::default();
        assert!(matches!(
            build_mission(&roof, &layout, &mount, &params),
            Err(MissionError::DeltaMismatch { .. })
        ));
        let mut relaxed = params;
        relaxed.allow_delta_mismatch = true;
        let plan = build_mission(&roof, &layout, &mount, &relaxed).unwrap();
        assert_eq!(plan.warnings.len(), 1);
    }

    #[test]
    fn alpha_envelope_enforced() {
        assert!(matches!(
            RoofModel::new(Vector3::zeros(), 50f64.to_radians(), 0.0, 1.0, 1.0),
            Err(MissionError::AlphaOutOfRange(_))
        ));
    }
}
