//! Reference-trajectory generation.
//!
//! Two motion primitives cover every mission segment:
//!
//! - [`QuinticSegment`] — a fifth-order polynomial fit to position, velocity,
//!   and acceleration at both endpoints, used for takeoff, transit, retreat,
//!   and landing legs.
//! - [`RampCruiseProfile`] — a cubic-quartic blend that accelerates from rest
//!   to a cruise speed under an acceleration bound and then holds that speed,
//!   used for the contact approach where the crossing velocity matters.
//!
//! Profiles are one-dimensional; [`LinearTrajectory3`] projects a profile
//! onto a straight 3D segment, and [`PiecewiseTrajectory`] stitches segments
//! into a continuous, time-indexed reference. Everything is evaluated
//! analytically on demand — there is no pre-sampling, so the consumer's rate
//! is decoupled from generation.

use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("degenerate duration: t_f ({tf}) must exceed t0 ({t0})")]
    DegenerateDuration { t0: f64, tf: f64 },
    #[error("boundary value is not finite")]
    NonFiniteBoundary,
    #[error("time {t} outside trajectory span [{t0}, {tf}]")]
    OutOfSpan { t: f64, t0: f64, tf: f64 },
    #[error("ramp-cruise parameters must be positive: v_f={vf}, a_max={amax}")]
    NonPositiveRampParams { vf: f64, amax: f64 },
    #[error(
        "insufficient distance {ds} m to reach cruise: the ramp alone covers {ramp} m"
    )]
    InsufficientDistance { ds: f64, ramp: f64 },
    #[error("zero-length segment: endpoints coincide")]
    DegenerateDirection,
    #[error("segment length {len} m does not match profile distance {ds} m")]
    LengthMismatch { len: f64, ds: f64 },
    #[error("discontinuity of {gap} m at joint {joint} exceeds tolerance {tol}")]
    Discontinuity { joint: usize, gap: f64, tol: f64 },
    #[error("cannot stitch an empty segment list")]
    Empty,
}

/// Boundary state for one axis: position, velocity, acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

impl Boundary {
    pub fn rest(pos: f64) -> Self {
        Self { pos, vel: 0.0, acc: 0.0 }
    }
}

/// Sampled kinematic state along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

/// Fifth-order polynomial `r(t) = sum a_j t^j` on `[t0, tf]`, determined by
/// six boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticSegment {
    pub coeffs: [f64; 6],
    pub t0: f64,
    pub tf: f64,
}

impl QuinticSegment {
    /// Solves the 6x6 linear system pairing the polynomial and its first two
    /// derivatives with the boundary conditions at `t0` and `tf`.
    pub fn solve(t0: f64, tf: f64, start: Boundary, end: Boundary) -> Result<Self, TrajectoryError> {
        if !(tf > t0) {
            return Err(TrajectoryError::DegenerateDuration { t0, tf });
        }
        for b in [&start, &end] {
            if !(b.pos.is_finite() && b.vel.is_finite() && b.acc.is_finite()) {
                return Err(TrajectoryError::NonFiniteBoundary);
            }
        }
        let row_pos = |t: f64| [1.0, t, t * t, t * t * t, t * t * t * t, t * t * t * t * t];
        let row_vel =
            |t: f64| [0.0, 1.0, 2.0 * t, 3.0 * t * t, 4.0 * t * t * t, 5.0 * t * t * t * t];
        let row_acc = |t: f64| [0.0, 0.0, 2.0, 6.0 * t, 12.0 * t * t, 20.0 * t * t * t];
        let a = [
            row_pos(t0),
            row_vel(t0),
            row_acc(t0),
            row_pos(tf),
            row_vel(tf),
            row_acc(tf),
        ];
        let b = [start.pos, start.vel, start.acc, end.pos, end.vel, end.acc];
        let coeffs = solve_6x6(a, b).ok_or(TrajectoryError::DegenerateDuration { t0, tf })?;
        Ok(Self { coeffs, t0, tf })
    }

    /// Evaluates position, velocity, and acceleration analytically.
    pub fn eval(&self, t: f64) -> Result<Sample, TrajectoryError> {
        self.check_span(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub fn eval_unchecked(&self, t: f64) -> Sample {
        let c = &self.coeffs;
        // Horner evaluation of r, r', r''.
        let pos = ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
        let vel = (((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
        let acc = ((20.0 * c[5] * t + 12.0 * c[4]) * t + 6.0 * c[3]) * t + 2.0 * c[2];
        Sample { pos, vel, acc }
    }

    fn check_span(&self, t: f64) -> Result<(), TrajectoryError> {
        // Half an ulp of headroom at the joints.
        let slack = 1e-12 * (1.0 + self.tf.abs());
        if t < self.t0 - slack || t > self.tf + slack {
            return Err(TrajectoryError::OutOfSpan { t, t0: self.t0, tf: self.tf });
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }
}

/// Gaussian elimination with partial pivoting. The boundary-value system is
/// mildly conditioned at mission durations (tens of seconds), so no scaling
/// is needed.
fn solve_6x6(a: [[f64; 6]; 6], b: [f64; 6]) -> Option<[f64; 6]> {
    let mut m = [[0.0f64; 7]; 6];
    for i in 0..6 {
        m[i][..6].copy_from_slice(&a[i]);
        m[i][6] = b[i];
    }
    for col in 0..6 {
        let pivot = (col..6).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in (col + 1)..6 {
            let f = m[row][col] / m[col][col];
            for k in col..7 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0f64; 6];
    for row in (0..6).rev() {
        let mut s = m[row][6];
        for k in (row + 1)..6 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Three per-axis quintics sharing one time base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticSegment3 {
    pub axes: [QuinticSegment; 3],
}

impl QuinticSegment3 {
    /// Boundary-value segment from `(p0, v0, a0)` to `(p1, v1, a1)` over
    /// `duration` seconds, on a local `[0, duration]` time base.
    pub fn solve(
        duration: f64,
        p0: Vector3<f64>,
        v0: Vector3<f64>,
        a0: Vector3<f64>,
        p1: Vector3<f64>,
        v1: Vector3<f64>,
        a1: Vector3<f64>,
    ) -> Result<Self, TrajectoryError> {
        let axis = |i: usize| {
            QuinticSegment::solve(
                0.0,
                duration,
                Boundary { pos: p0[i], vel: v0[i], acc: a0[i] },
                Boundary { pos: p1[i], vel: v1[i], acc: a1[i] },
            )
        };
        Ok(Self { axes: [axis(0)?, axis(1)?, axis(2)?] })
    }

    /// Rest-to-rest segment between two points.
    pub fn between_rest(
        duration: f64,
        p0: Vector3<f64>,
        p1: Vector3<f64>,
    ) -> Result<Self, TrajectoryError> {
        Self::solve(duration, p0, Vector3::zeros(), Vector3::zeros(), p1, Vector3::zeros(), Vector3::zeros())
    }

    pub fn duration(&self) -> f64 {
        self.axes[0].duration()
    }

    pub fn eval(&self, t: f64) -> Result<Sample3, TrajectoryError> {
        self.axes[0].check_span(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub fn eval_unchecked(&self, t: f64) -> Sample3 {
        let s: Vec<Sample> = self.axes.iter().map(|a| a.eval_unchecked(t)).collect();
        Sample3 {
            pos: Vector3::new(s[0].pos, s[1].pos, s[2].pos),
            vel: Vector3::new(s[0].vel, s[1].vel, s[2].vel),
            acc: Vector3::new(s[0].acc, s[1].acc, s[2].acc),
        }
    }
}

/// Sampled 3D kinematic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample3 {
    pub pos: Vector3<f64>,
    pub vel: Vector3<f64>,
    pub acc: Vector3<f64>,
}

/// Rest-to-cruise motion law `s(t)`: a cubic-quartic blend `b3 t^3 + b4 t^4`
/// up to `t1`, then constant velocity `v_f` until `t_f`.
///
/// The blend coefficients follow from constraining the acceleration extremum
/// to `a_max`, zero acceleration at `t1`, and velocity `v_f` at `t1`:
/// `b3 = 4 a_max^2 / (9 v_f)`, `b4 = -4 a_max^3 / (27 v_f^2)`,
/// `t1 = 3 v_f / (2 a_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampCruiseProfile {
    pub b3: f64,
    pub b4: f64,
    pub t1: f64,
    pub tf: f64,
    pub vf: f64,
    pub a_max: f64,
    pub total_distance: f64,
}

impl RampCruiseProfile {
    pub fn new(vf: f64, a_max: f64, total_distance: f64) -> Result<Self, TrajectoryError> {
        if vf <= 0.0 || a_max <= 0.0 {
            return Err(TrajectoryError::NonPositiveRampParams { vf, amax: a_max });
        }
        let b3 = 4.0 * a_max * a_max / (9.0 * vf);
        let b4 = -4.0 * a_max.powi(3) / (27.0 * vf * vf);
        let t1 = 3.0 * vf / (2.0 * a_max);
        let ramp = b3 * t1.powi(3) + b4 * t1.powi(4);
        if total_distance < ramp {
            return Err(TrajectoryError::InsufficientDistance { ds: total_distance, ramp });
        }
        let tf = t1 + (total_distance - ramp) / vf;
        Ok(Self { b3, b4, t1, tf, vf, a_max, total_distance })
    }

    /// Distance covered by the acceleration ramp, `s(t1)`.
    pub fn ramp_distance(&self) -> f64 {
        self.b3 * self.t1.powi(3) + self.b4 * self.t1.powi(4)
    }

    /// Time of the acceleration extremum, `-b3 / (4 b4)`.
    pub fn peak_accel_time(&self) -> f64 {
        -self.b3 / (4.0 * self.b4)
    }

    /// Time at which the profile crosses path distance `s` (cruise phase
    /// only; `s` must be at or beyond the ramp distance).
    pub fn time_at_distance(&self, s: f64) -> f64 {
        debug_assert!(s >= self.ramp_distance());
        self.t1 + (s - self.ramp_distance()) / self.vf
    }

    pub fn eval(&self, t: f64) -> Result<Sample, TrajectoryError> {
        let slack = 1e-12 * (1.0 + self.tf);
        if t < -slack || t > self.tf + slack {
            return Err(TrajectoryError::OutOfSpan { t, t0: 0.0, tf: self.tf });
        }
        Ok(self.eval_unchecked(t))
    }

    pub fn eval_unchecked(&self, t: f64) -> Sample {
        if t <= self.t1 {
            Sample {
                pos: self.b3 * t.powi(3) + self.b4 * t.powi(4),
                vel: 3.0 * self.b3 * t * t + 4.0 * self.b4 * t.powi(3),
                acc: 6.0 * self.b3 * t + 12.0 * self.b4 * t * t,
            }
        } else {
            // Cruise: exactly v_f, zero acceleration.
            Sample {
                pos: self.ramp_distance() + self.vf * (t - self.t1),
                vel: self.vf,
                acc: 0.0,
            }
        }
    }
}

/// A [`RampCruiseProfile`] projected onto the straight segment from `a` to
/// `b`: `r(t) = (b - a) / |b - a| * s(t) + a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTrajectory3 {
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    unit: Vector3<f64>,
    pub profile: RampCruiseProfile,
}

impl LinearTrajectory3 {
    /// The segment length must equal the profile's total distance; silently
    /// rescaling would change the crossing velocity the profile was built
    /// to deliver.
    pub fn new(
        profile: RampCruiseProfile,
        start: Vector3<f64>,
        end: Vector3<f64>,
    ) -> Result<Self, TrajectoryError> {
        let delta = end - start;
        let len = delta.norm();
        if len == 0.0 {
            return Err(TrajectoryError::DegenerateDirection);
        }
        if (len - profile.total_distance).abs() > 1e-9 {
            return Err(TrajectoryError::LengthMismatch { len, ds: profile.total_distance });
        }
        Ok(Self { start, end, unit: delta / len, profile })
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.unit
    }

    pub fn duration(&self) -> f64 {
        self.profile.tf
    }

    pub fn eval(&self, t: f64) -> Result<Sample3, TrajectoryError> {
        let s = self.profile.eval(t)?;
        Ok(self.project(s))
    }

    pub fn eval_unchecked(&self, t: f64) -> Sample3 {
        self.project(self.profile.eval_unchecked(t))
    }

    fn project(&self, s: Sample) -> Sample3 {
        Sample3 {
            pos: self.start + self.unit * s.pos,
            vel: self.unit * s.vel,
            acc: self.unit * s.acc,
        }
    }
}

/// One stitchable piece: either a quintic or a profiled line.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Quintic(QuinticSegment3),
    Line(LinearTrajectory3),
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Quintic(q) => q.duration(),
            Segment::Line(l) => l.duration(),
        }
    }

    /// Evaluation on the segment-local time base.
    pub fn eval_local(&self, t: f64) -> Result<Sample3, TrajectoryError> {
        match self {
            Segment::Quintic(q) => q.eval(t),
            Segment::Line(l) => l.eval(t),
        }
    }

    pub fn start_state(&self) -> Sample3 {
        match self {
            Segment::Quintic(q) => q.eval_unchecked(0.0),
            Segment::Line(l) => l.eval_unchecked(0.0),
        }
    }

    pub fn end_state(&self) -> Sample3 {
        match self {
            Segment::Quintic(q) => q.eval_unchecked(q.duration()),
            Segment::Line(l) => l.eval_unchecked(l.duration()),
        }
    }
}

/// Position continuity tolerance enforced at stitched joints.
pub const STITCH_TOLERANCE: f64 = 1e-6;

/// Ordered segments on a cumulative time base, each tagged with a mission
/// phase label.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTrajectory {
    pieces: Vec<Piece>,
    duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    segment: Segment,
    label: String,
    start_time: f64,
}

impl PiecewiseTrajectory {
    /// Stitches segments end to start, validating position continuity.
    pub fn stitch(segments: Vec<(Segment, String)>) -> Result<Self, TrajectoryError> {
        if segments.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        let mut pieces = Vec::with_capacity(segments.len());
        let mut clock = 0.0;
        let mut prev_end: Option<Vector3<f64>> = None;
        for (joint, (segment, label)) in segments.into_iter().enumerate() {
            if let Some(prev) = prev_end {
                let gap = (segment.start_state().pos - prev).norm();
                if gap > STITCH_TOLERANCE {
                    return Err(TrajectoryError::Discontinuity {
                        joint,
                        gap,
                        tol: STITCH_TOLERANCE,
                    });
                }
            }
            prev_end = Some(segment.end_state().pos);
            let d = segment.duration();
            pieces.push(Piece { segment, label, start_time: clock });
            clock += d;
        }
        Ok(Self { pieces, duration: clock })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn segment_count(&self) -> usize {
        self.pieces.len()
    }

    /// Evaluates at mission time `t`, returning the sample and the phase
    /// label of the active segment.
    pub fn eval(&self, t: f64) -> Result<(Sample3, &str), TrajectoryError> {
        let slack = 1e-12 * (1.0 + self.duration);
        if t < -slack || t > self.duration + slack {
            return Err(TrajectoryError::OutOfSpan { t, t0: 0.0, tf: self.duration });
        }
        let idx = self
            .pieces
            .iter()
            .rposition(|p| p.start_time <= t)
            .unwrap_or(0);
        let p = &self.pieces[idx];
        let local = (t - p.start_time).clamp(0.0, p.segment.duration());
        Ok((p.segment.eval_local(local)?, &p.label))
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Segment, &str, f64)> {
        self.pieces.iter().map(|p| (&p.segment, p.label.as_str(), p.start_time))
    }

    /// Writes the `t, x, y, z, vx, vy, vz, ax, ay, az, phase` CSV at the
    /// given sample rate (SI units).
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W, rate_hz: f64) -> std::io::Result<()> {
        writeln!(w, "t,x,y,z,vx,vy,vz,ax,ay,az,phase")?;
        let dt = 1.0 / rate_hz;
        let steps = (self.duration / dt).ceil() as usize;
        for i in 0..=steps {
            let t = (i as f64 * dt).min(self.duration);
            let (s, label) = self.eval(t).expect("sample inside span");
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                t, s.pos.x, s.pos.y, s.pos.z, s.vel.x, s.vel.y, s.vel.z, s.acc.x, s.acc.y,
                s.acc.z, label
            )?;
        }
        Ok(())
    }
}
