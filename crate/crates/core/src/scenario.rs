//! Scenario configuration.
//!
//! A scenario is a TOML file describing the roof, shingle layout, nailgun
//! mount, guidance parameters, controller gains, contact model, wind,
//! fault-injection knobs, and the seed. Every field has a documented
//! default, so the empty file is a valid scenario; unknown keys are
//! rejected. Dotted-path overrides (`controller.kp=12`) patch the document
//! before deserialization, which is what the CLI `--override` flag and the
//! sweep axis machinery use.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mission::{
    build_mission, MissionError, MissionParams, MissionPlan, NailgunMount, RoofModel,
    ShingleLayout,
};
use crate::sim::{ContactModel, Gains, SimSetup, VehicleParams, WindModel};

/// Landing detection: altitude within 2 cm of the start and speed below
/// 2 cm/s end the return-and-land phase.
pub const LANDING_ALT_TOL: f64 = 0.02;
pub const LANDING_SPEED_TOL: f64 = 0.02;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario {path}: {message}")]
    Parse { path: String, message: String },
    #[error("bad override '{0}': expected key.path=value")]
    BadOverride(String),
    #[error("scenario field {field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Mission(#[from] MissionError),
}

macro_rules! default_fns {
    ($($name:ident: $ty:ty = $value:expr;)*) => {
        $(fn $name() -> $ty { $value })*
    };
}

default_fns! {
    d_seed: u64 = 1;
    d_alpha_deg: f64 = 30.0;
    d_yaw_deg: f64 = 0.0;
    d_roof_origin: [f64; 3] = [1.5, -0.61, -0.75];
    d_deck_up_slope: f64 = 0.61;
    d_deck_along_eave: f64 = 1.22;
    d_band_low: f64 = 0.140;
    d_band_high: f64 = 0.170;
    d_nails_x: f64 = 0.155;
    d_nails_y: Vec<f64> = vec![0.025, 0.330, 0.584, 0.889];
    d_mount_w: f64 = 0.10;
    d_mount_l: f64 = 0.40;
    d_mount_h: f64 = 0.20;
    d_v_f: f64 = 0.15;
    d_a_max: f64 = 0.10;
    d_d_s: f64 = 1.0;
    d_d_b: f64 = 0.24;
    d_takeoff_agl: f64 = 1.5;
    d_transit_speed: f64 = 0.5;
    d_min_segment_s: f64 = 3.0;
    d_duration_factor: f64 = 1.5;
    d_settle_s: f64 = 1.0;
    d_mass_octo: f64 = 4.8;
    d_mass_batt: f64 = 1.4;
    d_mass_gun: f64 = 3.0;
    d_tau_att: f64 = 0.15;
    d_thrust_min: f64 = 0.0;
    d_thrust_max: f64 = 200.0;
    d_gravity: f64 = 9.81;
    d_trim_pitch_deg: f64 = -2.0;
    d_kp: f64 = 10.0;
    d_kd: f64 = 7.0;
    d_ki: f64 = 3.0;
    d_integral_limit: f64 = 0.6;
    d_tilt_limit_deg: f64 = 20.0;
    d_armed_tilt_limit_deg: f64 = 0.25;
    d_spring: f64 = 3500.0;
    d_switch_compression: f64 = 0.007;
    d_hold_s: f64 = 0.5;
    d_mu: f64 = 0.9;
    d_k_tangential: f64 = 1500.0;
    d_c_tangential: f64 = 80.0;
    d_trigger_latency: f64 = 0.0;
    d_deck_margin: f64 = 0.25;
    d_wind_tau: f64 = 0.5;
    d_dt: f64 = 0.001;
    d_log_every: usize = 10;
    d_watchdog_factor: f64 = 3.0;
    d_zero3: [f64; 3] = [0.0, 0.0, 0.0];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoofConfig {
    pub alpha_deg: f64,
    pub yaw_deg: f64,
    /// Deck lower-left corner, ground frame (m, NED).
    pub origin_m: [f64; 3],
    pub deck_up_slope_m: f64,
    pub deck_along_eave_m: f64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            alpha_deg: d_alpha_deg(),
            yaw_deg: d_yaw_deg(),
            origin_m: d_roof_origin(),
            deck_up_slope_m: d_deck_up_slope(),
            deck_along_eave_m: d_deck_along_eave(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShingleConfig {
    /// Legal nailing band edges, up-slope coordinate (m).
    pub band_low_m: f64,
    pub band_high_m: f64,
    /// Explicit nail points `[x, y]` (roof frame, m). When absent, the
    /// four-nail pattern is generated from `nails_x_m`/`nails_y_m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nails: Option<Vec<[f64; 2]>>,
    pub nails_x_m: f64,
    pub nails_y_m: Vec<f64>,
}

impl Default for ShingleConfig {
    fn default() -> Self {
        Self {
            band_low_m: d_band_low(),
            band_high_m: d_band_high(),
            nails: None,
            nails_x_m: d_nails_x(),
            nails_y_m: d_nails_y(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MountConfig {
    pub w_m: f64,
    pub l_m: f64,
    pub h_m: f64,
    /// Mount angle (deg). Defaults to the roof slope.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_deg: Option<f64>,
    /// Allow mount angles outside the detent set {0, 15, 30, 45}.
    pub allow_any_delta: bool,
    /// Allow a mount angle that differs from the roof slope.
    pub allow_delta_mismatch: bool,
}

impl Default for MountConfig {
    fn default() -> Self {
        Self {
            w_m: d_mount_w(),
            l_m: d_mount_l(),
            h_m: d_mount_h(),
            delta_deg: None,
            allow_any_delta: false,
            allow_delta_mismatch: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidanceConfig {
    /// Approach cruise speed (m/s).
    pub v_f_mps: f64,
    /// Approach acceleration bound (m/s^2).
    pub a_max_mps2: f64,
    /// Safety standoff (m).
    pub d_s_m: f64,
    /// Beyond-point depth (m).
    pub d_b_m: f64,
    pub takeoff_agl_m: f64,
    pub transit_speed_mps: f64,
    pub min_segment_s: f64,
    pub duration_factor: f64,
    pub settle_s: f64,
    /// Operator setpoint correction, roof frame (m). The bias-correction
    /// workflow writes its output here.
    pub setpoint_shift_up_slope_m: f64,
    pub setpoint_shift_along_eave_m: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            v_f_mps: d_v_f(),
            a_max_mps2: d_a_max(),
            d_s_m: d_d_s(),
            d_b_m: d_d_b(),
            takeoff_agl_m: d_takeoff_agl(),
            transit_speed_mps: d_transit_speed(),
            min_segment_s: d_min_segment_s(),
            duration_factor: d_duration_factor(),
            settle_s: d_settle_s(),
            setpoint_shift_up_slope_m: 0.0,
            setpoint_shift_along_eave_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    pub octocopter_mass_kg: f64,
    pub battery_mass_kg: f64,
    pub nailgun_mass_kg: f64,
    pub tau_att_s: f64,
    pub thrust_min_n: f64,
    pub thrust_max_n: f64,
    pub gravity_mps2: f64,
    /// Hover pitch trim (deg); the planner assumes this attitude at the
    /// nailing point.
    pub trim_pitch_deg: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            octocopter_mass_kg: d_mass_octo(),
            battery_mass_kg: d_mass_batt(),
            nailgun_mass_kg: d_mass_gun(),
            tau_att_s: d_tau_att(),
            thrust_min_n: d_thrust_min(),
            thrust_max_n: d_thrust_max(),
            gravity_mps2: d_gravity(),
            trim_pitch_deg: d_trim_pitch_deg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub kp: f64,
    pub kd: f64,
    pub ki: f64,
    pub integral_limit: f64,
    pub tilt_limit_deg: f64,
    pub armed_tilt_limit_deg: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kp: d_kp(),
            kd: d_kd(),
            ki: d_ki(),
            integral_limit: d_integral_limit(),
            tilt_limit_deg: d_tilt_limit_deg(),
            armed_tilt_limit_deg: d_armed_tilt_limit_deg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContactConfig {
    pub spring_n_per_m: f64,
    pub switch_compression_m: f64,
    pub hold_s: f64,
    pub mu: f64,
    pub tangential_stiffness_n_per_m: f64,
    pub tangential_damping_n_s_per_m: f64,
    pub trigger_latency_s: f64,
    pub deck_margin_m: f64,
}

impl Default for ContactConfig {
    fn default() -> Self {
        Self {
            spring_n_per_m: d_spring(),
            switch_compression_m: d_switch_compression(),
            hold_s: d_hold_s(),
            mu: d_mu(),
            tangential_stiffness_n_per_m: d_k_tangential(),
            tangential_damping_n_s_per_m: d_c_tangential(),
            trigger_latency_s: d_trigger_latency(),
            deck_margin_m: d_deck_margin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindConfig {
    pub enabled: bool,
    /// Stationary standard deviation per horizontal axis (N).
    pub sigma_n: f64,
    /// Correlation time (s).
    pub tau_s: f64,
}

impl Default for WindConfig {
    fn default() -> Self {
        Self { enabled: false, sigma_n: 0.0, tau_s: d_wind_tau() }
    }
}

/// Fault-injection knobs emulating systematic errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiasConfig {
    /// Displaces every commanded nail target up-slope on the surface (m).
    pub nail_offset_up_slope_m: f64,
    /// Displaces every commanded nail target horizontally (ground x) while
    /// keeping it on the surface; a horizontal offset `e` moves the target
    /// `e / cos(alpha)` up-slope.
    pub nail_offset_horizontal_m: f64,
    /// Constant ground-frame offset added to the whole position reference.
    pub reference_offset_m: [f64; 3],
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            nail_offset_up_slope_m: 0.0,
            nail_offset_horizontal_m: 0.0,
            reference_offset_m: d_zero3(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Gaussian noise on the measured position fed to the controller (m).
    pub position_std_m: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { position_std_m: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt_s: f64,
    /// CSV decimation: one row per this many steps.
    pub log_every: usize,
    pub watchdog_factor: f64,
    /// Vehicle launch position, ground frame (m).
    pub takeoff_point_m: [f64; 3],
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_s: d_dt(),
            log_every: d_log_every(),
            watchdog_factor: d_watchdog_factor(),
            takeoff_point_m: d_zero3(),
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub seed: u64,
    pub roof: RoofConfig,
    pub shingle: ShingleConfig,
    pub mount: MountConfig,
    pub guidance: GuidanceConfig,
    pub vehicle: VehicleConfig,
    pub controller: ControllerConfig,
    pub contact: ContactConfig,
    pub wind: WindConfig,
    pub bias: BiasConfig,
    pub noise: NoiseConfig,
    pub sim: SimConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: d_seed(),
            roof: RoofConfig::default(),
            shingle: ShingleConfig::default(),
            mount: MountConfig::default(),
            guidance: GuidanceConfig::default(),
            vehicle: VehicleConfig::default(),
            controller: ControllerConfig::default(),
            contact: ContactConfig::default(),
            wind: WindConfig::default(),
            bias: BiasConfig::default(),
            noise: NoiseConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

impl Scenario {
    /// Parses a scenario file. Syntax and unknown-key errors carry the
    /// file's line/column.
    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ScenarioError::Parse { message, .. } => ScenarioError::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            path: "<inline>".to_string(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Loads with dotted-path overrides applied before deserialization.
    pub fn load_with_overrides(
        path: Option<&std::path::Path>,
        overrides: &[String],
    ) -> Result<Self, ScenarioError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| ScenarioError::Io {
                path: p.display().to_string(),
                source,
            })?,
            None => String::new(),
        };
        if overrides.is_empty() {
            return Self::from_toml_str(&text);
        }
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            ScenarioError::Parse {
                path: path.map(|p| p.display().to_string()).unwrap_or_default(),
                message: e.to_string(),
            }
        })?;
        for spec in overrides {
            apply_override(&mut doc, spec)?;
        }
        let scenario: Scenario =
            toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| {
                ScenarioError::Parse {
                    path: path.map(|p| p.display().to_string()).unwrap_or_default(),
                    message: e.to_string(),
                }
            })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Semantic validation beyond what the type system covers.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |field: &str, message: String| {
            Err(ScenarioError::Invalid { field: field.to_string(), message })
        };
        if !(0.0..=45.0).contains(&self.roof.alpha_deg) {
            return err("roof.alpha_deg", format!("{} outside [0, 45]", self.roof.alpha_deg));
        }
        if self.guidance.v_f_mps <= 0.0 {
            return err("guidance.v_f_mps", "must be positive".into());
        }
        if self.guidance.a_max_mps2 <= 0.0 {
            return err("guidance.a_max_mps2", "must be positive".into());
        }
        if self.guidance.d_s_m <= 0.0 || self.guidance.d_b_m <= 0.0 {
            return err("guidance.d_s_m/d_b_m", "standoff distances must be positive".into());
        }
        if self.shingle.band_low_m >= self.shingle.band_high_m {
            return err("shingle.band_low_m", "band_low_m must be below band_high_m".into());
        }
        for (name, v) in [
            ("vehicle.octocopter_mass_kg", self.vehicle.octocopter_mass_kg),
            ("vehicle.battery_mass_kg", self.vehicle.battery_mass_kg),
            ("vehicle.nailgun_mass_kg", self.vehicle.nailgun_mass_kg),
            ("vehicle.tau_att_s", self.vehicle.tau_att_s),
        ] {
            if v <= 0.0 {
                return err(name, "must be positive".into());
            }
        }
        if self.vehicle.thrust_max_n <= self.vehicle.thrust_min_n
            || self.vehicle.thrust_min_n < 0.0
        {
            return err("vehicle.thrust_max_n", "need 0 <= thrust_min < thrust_max".into());
        }
        if self.contact.spring_n_per_m <= 0.0 {
            return err("contact.spring_n_per_m", "must be positive".into());
        }
        if self.contact.switch_compression_m < 0.0
            || self.contact.hold_s < 0.0
            || self.contact.mu < 0.0
            || self.contact.trigger_latency_s < 0.0
        {
            return err("contact", "thresholds must be non-negative".into());
        }
        if self.contact.tangential_stiffness_n_per_m <= 0.0 {
            return err("contact.tangential_stiffness_n_per_m", "must be positive".into());
        }
        if !(self.sim.dt_s > 0.0 && self.sim.dt_s <= 0.01) {
            return err("sim.dt_s", format!("{} outside (0, 0.01]", self.sim.dt_s));
        }
        if self.sim.log_every == 0 {
            return err("sim.log_every", "must be at least 1".into());
        }
        if self.sim.watchdog_factor < 1.0 {
            return err("sim.watchdog_factor", "must be at least 1".into());
        }
        if self.wind.sigma_n < 0.0 || self.wind.tau_s <= 0.0 {
            return err("wind", "sigma_n must be >= 0 and tau_s > 0".into());
        }
        if self.noise.position_std_m < 0.0 {
            return err("noise.position_std_m", "must be >= 0".into());
        }
        // Layout and mount constructors run their own invariants.
        self.shingle_layout()?;
        self.nailgun_mount()?;
        self.roof_model()?;
        Ok(())
    }

    /// Mount angle, defaulting to the roof slope (the operating rule).
    pub fn delta_rad(&self) -> f64 {
        self.mount.delta_deg.unwrap_or(self.roof.alpha_deg).to_radians()
    }

    pub fn roof_model(&self) -> Result<RoofModel, ScenarioError> {
        Ok(RoofModel::new(
            Vector3::from(self.roof.origin_m),
            self.roof.alpha_deg.to_radians(),
            self.roof.yaw_deg.to_radians(),
            self.roof.deck_up_slope_m,
            self.roof.deck_along_eave_m,
        )?)
    }

    pub fn shingle_layout(&self) -> Result<ShingleLayout, ScenarioError> {
        let nails = match &self.shingle.nails {
            Some(points) => points.clone(),
            None => self
                .shingle
                .nails_y_m
                .iter()
                .map(|&y| [self.shingle.nails_x_m, y])
                .collect(),
        };
        Ok(ShingleLayout::new(nails, self.shingle.band_low_m, self.shingle.band_high_m)?)
    }

    pub fn nailgun_mount(&self) -> Result<NailgunMount, ScenarioError> {
        Ok(NailgunMount::new(
            self.mount.w_m,
            self.mount.l_m,
            self.mount.h_m,
            self.delta_rad(),
            self.mount.allow_any_delta,
        )?)
    }

    /// Combined roof-frame shift of the commanded nail targets: operator
    /// setpoint correction plus injected systematic offsets. A horizontal
    /// injection moves the on-surface target by `e / cos(alpha)` up-slope.
    pub fn aim_offset(&self) -> [f64; 2] {
        let alpha = self.roof.alpha_deg.to_radians();
        [
            self.guidance.setpoint_shift_up_slope_m
                + self.bias.nail_offset_up_slope_m
                + self.bias.nail_offset_horizontal_m / alpha.cos(),
            self.guidance.setpoint_shift_along_eave_m,
        ]
    }

    pub fn mission_params(&self) -> MissionParams {
        MissionParams {
            v_f: self.guidance.v_f_mps,
            a_max: self.guidance.a_max_mps2,
            d_s: self.guidance.d_s_m,
            d_b: self.guidance.d_b_m,
            takeoff_agl: self.guidance.takeoff_agl_m,
            transit_speed: self.guidance.transit_speed_mps,
            min_segment_duration: self.guidance.min_segment_s,
            duration_factor: self.guidance.duration_factor,
            settle_duration: self.guidance.settle_s,
            trim_pitch: self.vehicle.trim_pitch_deg.to_radians(),
            aim_offset: self.aim_offset(),
            takeoff_point: Vector3::from(self.sim.takeoff_point_m),
            allow_delta_mismatch: self.mount.allow_delta_mismatch,
        }
    }

    pub fn vehicle_params(&self) -> VehicleParams {
        VehicleParams {
            octocopter_mass: self.vehicle.octocopter_mass_kg,
            battery_mass: self.vehicle.battery_mass_kg,
            nailgun_mass: self.vehicle.nailgun_mass_kg,
            tau_att: self.vehicle.tau_att_s,
            thrust_min: self.vehicle.thrust_min_n,
            thrust_max: self.vehicle.thrust_max_n,
            gravity: self.vehicle.gravity_mps2,
            trim_pitch: self.vehicle.trim_pitch_deg.to_radians(),
        }
    }

    pub fn gains(&self) -> Gains {
        Gains {
            kp: self.controller.kp,
            kd: self.controller.kd,
            ki: self.controller.ki,
            integral_limit: self.controller.integral_limit,
            tilt_limit: self.controller.tilt_limit_deg.to_radians(),
            armed_tilt_limit: self.controller.armed_tilt_limit_deg.to_radians(),
        }
    }

    pub fn build_plan(&self) -> Result<MissionPlan, ScenarioError> {
        let roof = self.roof_model()?;
        let layout = self.shingle_layout()?;
        let mount = self.nailgun_mount()?;
        Ok(build_mission(&roof, &layout, &mount, &self.mission_params())?)
    }

    /// Assembles the full closed-loop setup.
    pub fn sim_setup(&self) -> Result<SimSetup, ScenarioError> {
        self.validate()?;
        let roof = self.roof_model()?;
        let plan = self.build_plan()?;
        let contact = ContactModel::new(
            &roof,
            self.contact.spring_n_per_m,
            self.contact.switch_compression_m,
            self.contact.hold_s,
            self.contact.trigger_latency_s,
            self.contact.mu,
            self.contact.tangential_stiffness_n_per_m,
            self.contact.tangential_damping_n_s_per_m,
            self.contact.deck_margin_m,
        );
        Ok(SimSetup {
            plan,
            vehicle: self.vehicle_params(),
            gains: self.gains(),
            contact,
            wind: WindModel::new(self.wind.enabled, self.wind.sigma_n, self.wind.tau_s),
            dt: self.sim.dt_s,
            watchdog_factor: self.sim.watchdog_factor,
            reference_offset: Vector3::from(self.bias.reference_offset_m),
            position_noise_std: self.noise.position_std_m,
            seed: self.seed,
            landing_alt_tol: LANDING_ALT_TOL,
            landing_speed_tol: LANDING_SPEED_TOL,
        })
    }
}

/// Applies one `key.path=value` override to a parsed TOML document. The
/// value is parsed as TOML (numbers, booleans, arrays, strings); bare words
/// fall back to strings.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), ScenarioError> {
    let Some((path, raw)) = spec.split_once('=') else {
        return Err(ScenarioError::BadOverride(spec.to_string()));
    };
    let path = path.trim();
    let raw = raw.trim();
    if path.is_empty() {
        return Err(ScenarioError::BadOverride(spec.to_string()));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let mut parts = path.split('.').peekable();
    let mut current = doc;
    while let Some(key) = parts.next() {
        if parts.peek().is_none() {
            current.insert(key.to_string(), value);
            return Ok(());
        }
        current = current
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ScenarioError::BadOverride(spec.to_string()))?;
    }
    Err(ScenarioError::BadOverride(spec.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_resolves_to_defaults() {
        let s = Scenario::from_toml_str("").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.roof.alpha_deg, 30.0);
        assert_eq!(s.guidance.v_f_mps, 0.15);
        // Mount angle follows the roof slope by default.
        assert_eq!(s.delta_rad(), 30f64.to_radians());
    }

    #[test]
    fn minimal_file_gets_documented_defaults() {
        let s = Scenario::from_toml_str("[roof]\nalpha_deg = 15.0\n").unwrap();
        assert_eq!(s.roof.alpha_deg, 15.0);
        assert_eq!(s.delta_rad(), 15f64.to_radians());
        assert_eq!(s.contact.spring_n_per_m, 3500.0);
        assert_eq!(s.shingle_layout().unwrap().len(), 4);
    }

    #[test]
    fn alpha_out_of_envelope_rejected() {
        let e = Scenario::from_toml_str("[roof]\nalpha_deg = 50.0\n").unwrap_err();
        assert!(matches!(e, ScenarioError::Invalid { .. }), "{e}");
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let e = Scenario::from_toml_str("[roof]\nalpha_degrees = 30.0\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line"), "expected line-anchored message, got: {msg}");
    }

    #[test]
    fn malformed_syntax_rejected_with_location() {
        let e = Scenario::from_toml_str("[roof\nalpha_deg = 30\n").unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
    }

    #[test]
    fn round_trip_is_identity() {
        let mut s = Scenario::default();
        s.seed = 1234;
        s.roof.alpha_deg = 15.0;
        s.mount.delta_deg = Some(15.0);
        s.wind.enabled = true;
        s.wind.sigma_n = 0.75;
        let text = s.to_toml_string();
        let back = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(s, back);
        // And a second trip is byte-stable.
        assert_eq!(text, back.to_toml_string());
    }

    #[test]
    fn overrides_patch_dotted_paths() {
        let s = Scenario::load_with_overrides(
            None,
            &[
                "roof.alpha_deg=0".to_string(),
                "controller.kp=12.5".to_string(),
                "wind.enabled=true".to_string(),
                "seed=99".to_string(),
            ],
        )
        .unwrap();
        assert_eq!(s.roof.alpha_deg, 0.0);
        assert_eq!(s.controller.kp, 12.5);
        assert!(s.wind.enabled);
        assert_eq!(s.seed, 99);
    }

    #[test]
    fn bad_override_rejected() {
        assert!(matches!(
            Scenario::load_with_overrides(None, &["no_equals".to_string()]),
            Err(ScenarioError::BadOverride(_))
        ));
        assert!(matches!(
            Scenario::load_with_overrides(None, &["roof.alpha_deg.x=1".to_string()]),
            Err(ScenarioError::BadOverride(_)) | Err(ScenarioError::Parse { .. })
        ));
    }

    #[test]
    fn horizontal_bias_scales_with_slope() {
        let mut s = Scenario::default();
        s.roof.alpha_deg = 30.0;
        s.bias.nail_offset_horizontal_m = 0.02;
        let aim = s.aim_offset();
        assert!((aim[0] - 0.02 / 30f64.to_radians().cos()).abs() < 1e-12);
        s.roof.alpha_deg = 0.0;
        let aim = s.aim_offset();
        assert!((aim[0] - 0.02).abs() < 1e-12);
    }

    #[test]
    fn setup_assembles() {
        let s = Scenario::default();
        let setup = s.sim_setup().unwrap();
        assert_eq!(setup.plan.nail_points_ground.len(), 4);
        assert!(setup.plan.total_duration() > 0.0);
    }
}
