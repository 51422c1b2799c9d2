//! First-order colored-noise horizontal wind force.
//!
//! Discrete Ornstein-Uhlenbeck update with the exact transition, so the
//! stationary standard deviation equals the configured sigma regardless of
//! step size.

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct WindModel {
    pub enabled: bool,
    /// Stationary standard deviation of each horizontal force component (N).
    pub sigma: f64,
    /// Correlation time (s).
    pub tau: f64,
    state: Vector3<f64>,
}

impl WindModel {
    pub fn new(enabled: bool, sigma: f64, tau: f64) -> Self {
        Self { enabled, sigma, tau, state: Vector3::zeros() }
    }

    /// Draws the next force sample. Disabled or zero-sigma wind is exactly
    /// zero and consumes no randomness.
    pub fn step<R: Rng>(&mut self, rng: &mut R, dt: f64) -> Vector3<f64> {
        if !self.enabled || self.sigma <= 0.0 {
            return Vector3::zeros();
        }
        let rho = (-dt / self.tau).exp();
        let scale = self.sigma * (1.0 - rho * rho).sqrt();
        let nx: f64 = StandardNormal.sample(rng);
        let ny: f64 = StandardNormal.sample(rng);
        self.state.x = rho * self.state.x + scale * nx;
        self.state.y = rho * self.state.y + scale * ny;
        self.state
    }
}
