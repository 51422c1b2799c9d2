//! Tooltip spring contact with the roof plane.
//!
//! The tooltip nose compresses along the surface normal: penetration of the
//! nominal (rigid) tip past the plane is the spring compression, and the
//! normal force is `k * depth` directed off the surface. Tangentially the
//! nose sticks where it first touched; the mount flexes elastically between
//! the nose and the rigid tip position, and when the elastic force exceeds
//! the friction cone `mu * N` the nose slides and the anchor drags. The nail
//! exits at the nose, so deployments record the anchor point.
//!
//! The limit switch closes at the compression threshold; the trigger fires
//! after the switch has been held continuously for the hold time while the
//! relay is armed. Outside armed windows the relay never fires.

use crate::mission::RoofModel;
use nalgebra::{Vector2, Vector3};

/// Contact and trigger parameters plus the roof surface geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactModel {
    /// Tooltip spring constant (N/m).
    pub stiffness: f64,
    /// Compression at which the limit switch closes (m).
    pub switch_compression: f64,
    /// Continuous press time required to fire (s).
    pub hold_time: f64,
    /// Additional relay latency after the hold is satisfied (s).
    pub trigger_latency: f64,
    /// Tangential friction coefficient.
    pub mu: f64,
    /// Elastic tangential stiffness between nose and rigid tip (N/m).
    pub tangential_stiffness: f64,
    /// Tangential damping (N*s/m).
    pub tangential_damping: f64,
    origin: Vector3<f64>,
    up_slope: Vector3<f64>,
    eave: Vector3<f64>,
    normal_in: Vector3<f64>,
    deck_up_slope: f64,
    deck_along_eave: f64,
    /// Contact activates only within the deck extent plus this margin (m).
    pub deck_margin: f64,
}

impl ContactModel {
    pub fn new(
        roof: &RoofModel,
        stiffness: f64,
        switch_compression: f64,
        hold_time: f64,
        trigger_latency: f64,
        mu: f64,
        tangential_stiffness: f64,
        tangential_damping: f64,
        deck_margin: f64,
    ) -> Self {
        Self {
            stiffness,
            switch_compression,
            hold_time,
            trigger_latency,
            mu,
            tangential_stiffness,
            tangential_damping,
            origin: roof.pose().translation,
            up_slope: roof.up_slope_dir(),
            eave: roof.eave_dir(),
            normal_in: roof.inward_normal(),
            deck_up_slope: roof.deck_up_slope,
            deck_along_eave: roof.deck_along_eave,
            deck_margin,
        }
    }

    /// Inward surface normal, ground frame.
    pub fn normal_in(&self) -> Vector3<f64> {
        self.normal_in
    }

    /// Signed distance of a point past the surface (positive = penetrated).
    pub fn penetration(&self, p: &Vector3<f64>) -> f64 {
        (p - self.origin).dot(&self.normal_in)
    }

    /// Roof-frame tangential coordinates of a ground point.
    pub fn tangential(&self, p: &Vector3<f64>) -> Vector2<f64> {
        let rel = p - self.origin;
        Vector2::new(rel.dot(&self.up_slope), rel.dot(&self.eave))
    }

    fn within_deck(&self, tangential: &Vector2<f64>) -> bool {
        let m = self.deck_margin;
        tangential.x >= -m
            && tangential.x <= self.deck_up_slope + m
            && tangential.y >= -m
            && tangential.y <= self.deck_along_eave + m
    }
}

/// Evolving tooltip contact state.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactState {
    /// Current spring compression (m).
    pub compression: f64,
    /// Limit switch: closed iff compression >= threshold.
    pub switch_pressed: bool,
    /// Continuous press timer (s); resets whenever the switch releases and
    /// pauses while disarmed.
    pub press_timer: f64,
    /// Nose anchor point, roof tangential coordinates.
    pub anchor: Option<Vector2<f64>>,
    /// Accumulated nose slide distance in the tangent plane (m).
    pub slip: f64,
    prev_tangential: Option<Vector2<f64>>,
}

impl Default for ContactState {
    fn default() -> Self {
        Self {
            compression: 0.0,
            switch_pressed: false,
            press_timer: 0.0,
            anchor: None,
            slip: 0.0,
            prev_tangential: None,
        }
    }
}

/// Advances the contact state by one step and returns the force the roof
/// exerts on the vehicle (ground frame).
pub fn contact_update(
    tip_position: &Vector3<f64>,
    model: &ContactModel,
    state: &mut ContactState,
    armed: bool,
    dt: f64,
) -> Vector3<f64> {
    debug_assert!(dt > 0.0);
    let depth = model.penetration(tip_position);
    let tangential = model.tangential(tip_position);

    if depth <= 0.0 || !model.within_deck(&tangential) {
        state.compression = 0.0;
        state.switch_pressed = false;
        state.press_timer = 0.0;
        state.anchor = None;
        state.prev_tangential = None;
        return Vector3::zeros();
    }

    state.compression = depth;
    let normal_force = -model.stiffness * depth * model.normal_in;

    let anchor = *state.anchor.get_or_insert(tangential);
    let mut stretch = tangential - anchor;
    let rate = state
        .prev_tangential
        .map(|prev| (tangential - prev) / dt)
        .unwrap_or_else(Vector2::zeros);
    state.prev_tangential = Some(tangential);

    // Sliding is decided by the elastic stretch alone: when the spring
    // force exceeds the cone the nose slides and the anchor drags to the
    // cone edge. Transient damping spikes saturate the force but do not
    // move the anchor.
    let cone = model.mu * model.stiffness * depth;
    if model.tangential_stiffness * stretch.norm() > cone && stretch.norm() > 1e-12 {
        let new_anchor =
            tangential - stretch / stretch.norm() * (cone / model.tangential_stiffness);
        state.slip += (new_anchor - anchor).norm();
        state.anchor = Some(new_anchor);
        stretch = tangential - new_anchor;
    }
    let raw = -(model.tangential_stiffness * stretch + model.tangential_damping * rate);
    let tangential_force =
        if raw.norm() > cone && raw.norm() > 0.0 { raw * (cone / raw.norm()) } else { raw };

    state.switch_pressed = depth >= model.switch_compression;
    if state.switch_pressed {
        if armed {
            state.press_timer += dt;
        }
    } else {
        state.press_timer = 0.0;
    }

    normal_force + tangential_force.x * model.up_slope + tangential_force.y * model.eave
}

/// Nail deployment event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deployment {
    pub time: f64,
    /// Nose contact point, roof frame (up-slope, along-eave).
    pub contact_point: Vector2<f64>,
}

/// Fires when the press timer satisfies the hold (plus relay latency) while
/// armed, at most once per arming window (`already_fired` guards that).
pub fn nailgun_update(
    state: &ContactState,
    model: &ContactModel,
    armed: bool,
    already_fired: bool,
    time: f64,
) -> Option<Deployment> {
    if armed
        && !already_fired
        && state.switch_pressed
        && state.press_timer >= model.hold_time + model.trigger_latency
    {
        Some(Deployment {
            time,
            contact_point: state.anchor.unwrap_or_else(Vector2::zeros),
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat_model() -> ContactModel {
        let roof = RoofModel::new(Vector3::zeros(), 0.0, 0.0, 2.0, 2.0).unwrap();
        ContactModel::new(&roof, 3500.0, 0.007, 0.5, 0.0, 0.9, 1500.0, 80.0, 0.25)
    }

    #[test]
    fn no_penetration_no_force() {
        let model = flat_model();
        let mut state = ContactState::default();
        let f = contact_update(&Vector3::new(0.5, 0.5, -0.1), &model, &mut state, true, 0.001);
        assert_eq!(f, Vector3::zeros());
        assert!(!state.switch_pressed);
        assert_eq!(state.compression, 0.0);
    }

    #[test]
    fn spring_force_values() {
        let model = flat_model();
        let mut state = ContactState::default();
        // 7 mm compression: 24.5 N, switch closed.
        let f = contact_update(&Vector3::new(0.5, 0.5, 0.007), &model, &mut state, true, 0.001);
        assert_abs_diff_eq!(f.z, -24.5, epsilon = 1e-9);
        assert!(state.switch_pressed);
        // 2 mm: 7.0 N, switch open.
        let mut state = ContactState::default();
        let f = contact_update(&Vector3::new(0.5, 0.5, 0.002), &model, &mut state, true, 0.001);
        assert_abs_diff_eq!(f.z, -7.0, epsilon = 1e-9);
        assert!(!state.switch_pressed);
    }

    #[test]
    fn frictionless_force_is_pure_normal_spring() {
        let roof = RoofModel::new(Vector3::zeros(), 30f64.to_radians(), 0.3, 2.0, 2.0).unwrap();
        let model = ContactModel::new(&roof, 3500.0, 0.007, 0.5, 0.0, 0.0, 1500.0, 80.0, 0.25);
        let mut state = ContactState::default();
        let normal = model.normal_in();
        for i in 1..200 {
            let depth = i as f64 * 1e-4;
            let surface = roof.surface_point(0.5, 0.5);
            let p = surface + normal * depth;
            let f = contact_update(&p, &model, &mut state, false, 0.001);
            let expected = -3500.0 * depth;
            assert!((f - normal * expected).norm() < 1e-9);
        }
    }

    #[test]
    fn hold_timer_resets_on_release() {
        let model = flat_model();
        let mut state = ContactState::default();
        let deep = Vector3::new(0.5, 0.5, 0.008);
        let shallow = Vector3::new(0.5, 0.5, 0.001);
        for _ in 0..300 {
            contact_update(&deep, &model, &mut state, true, 0.001);
        }
        assert!(nailgun_update(&state, &model, true, false, 0.3).is_none());
        contact_update(&shallow, &model, &mut state, true, 0.001);
        assert_eq!(state.press_timer, 0.0);
        // Another 0.3 s press still does not fire: continuity is required.
        for _ in 0..300 {
            contact_update(&deep, &model, &mut state, true, 0.001);
        }
        assert!(nailgun_update(&state, &model, true, false, 0.6).is_none());
        // 0.5 s continuous press fires.
        for _ in 0..201 {
            contact_update(&deep, &model, &mut state, true, 0.001);
        }
        let dep = nailgun_update(&state, &model, true, false, 0.8).unwrap();
        assert_abs_diff_eq!(dep.contact_point.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dep.contact_point.y, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn disarmed_press_never_fires() {
        let model = flat_model();
        let mut state = ContactState::default();
        let deep = Vector3::new(0.5, 0.5, 0.008);
        for _ in 0..600 {
            contact_update(&deep, &model, &mut state, false, 0.001);
        }
        assert_eq!(state.press_timer, 0.0);
        assert!(nailgun_update(&state, &model, false, false, 0.6).is_none());
    }

    #[test]
    fn one_shot_per_window() {
        let model = flat_model();
        let mut state = ContactState::default();
        let deep = Vector3::new(0.5, 0.5, 0.008);
        for _ in 0..600 {
            contact_update(&deep, &model, &mut state, true, 0.001);
        }
        assert!(nailgun_update(&state, &model, true, false, 0.6).is_some());
        assert!(nailgun_update(&state, &model, true, true, 0.6).is_none());
    }

    #[test]
    fn stick_holds_anchor_under_small_shear() {
        let model = flat_model();
        let mut state = ContactState::default();
        contact_update(&Vector3::new(0.5, 0.5, 0.008), &model, &mut state, true, 0.001);
        // Tip shifted 2 mm tangentially: elastic force 3 N << cone 25.2 N.
        for _ in 0..100 {
            contact_update(&Vector3::new(0.502, 0.5, 0.008), &model, &mut state, true, 0.001);
        }
        let anchor = state.anchor.unwrap();
        assert_abs_diff_eq!(anchor.x, 0.5, epsilon = 1e-12);
        assert_eq!(state.slip, 0.0);
    }

    #[test]
    fn large_shear_slides_and_drags_anchor() {
        let model = flat_model();
        let mut state = ContactState::default();
        contact_update(&Vector3::new(0.5, 0.5, 0.008), &model, &mut state, true, 0.001);
        // 5 cm tangential offset: elastic force 75 N > cone, nose slides.
        for _ in 0..200 {
            contact_update(&Vector3::new(0.55, 0.5, 0.008), &model, &mut state, true, 0.001);
        }
        let anchor = state.anchor.unwrap();
        assert!(state.slip > 0.02);
        // Anchor trails the tip by the cone-edge stretch mu*k*d/k_t.
        let expected_lag = 0.9 * 3500.0 * 0.008 / 1500.0;
        assert_abs_diff_eq!(anchor.x, 0.55 - expected_lag, epsilon = 1e-9);
    }

    #[test]
    fn contact_outside_deck_is_ignored() {
        let model = flat_model();
        let mut state = ContactState::default();
        let f = contact_update(&Vector3::new(5.0, 0.5, 0.01), &model, &mut state, true, 0.001);
        assert_eq!(f, Vector3::zeros());
    }
}
