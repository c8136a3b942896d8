//! Closed-form thresholds: disconnection gaps, uniform-grid linking radii,
//! the period-1 diameter condition, and the consensus / divergence regions.

use serde::Serialize;

use crate::model::ModelParams;

/// Gap between adjacent opinions beyond which myopic agents never link:
/// `sqrt(V / (f (1 - f)))`.
pub fn threshold_xi(params: &ModelParams) -> f64 {
    (params.v / (params.f * (1.0 - params.f))).sqrt()
}

/// Disconnection gap for fully rational agents: `(1 + f) * xi`.
pub fn threshold_phi(params: &ModelParams) -> f64 {
    (1.0 + params.f) * threshold_xi(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformRadii {
    /// Farthest optimal link of a central agent on a uniform grid of `n`.
    pub delta: f64,
    /// Farthest optimal link of an extremal agent.
    pub vartheta: f64,
    /// `delta` as `n -> infinity`: `sqrt(V / f)`.
    pub delta_limit: f64,
    /// `vartheta` as `n -> infinity`: `2 / sqrt(4 - 3f) * sqrt(V / f)`.
    pub vartheta_limit: f64,
}

pub fn uniform_radii(params: &ModelParams) -> UniformRadii {
    let (v, f, n) = (params.v, params.f, params.n as f64);
    let delta = (-f + (f * (f + 9.0 * n * n * v)).sqrt()) / (3.0 * f * n);
    let root = (3.0 * f * (4.0 + 3.0 * (f - 2.0) * f) + 36.0 * (4.0 - 3.0 * f) * n * n * v).sqrt();
    let vartheta = (6.0 - 6.0 * f + root / f.sqrt()) / ((12.0 - 9.0 * f) * n);
    let delta_limit = (v / f).sqrt();
    UniformRadii { delta, vartheta, delta_limit, vartheta_limit: 2.0 / (4.0 - 3.0 * f).sqrt() * delta_limit }
}

/// `sqrt(V/f) * (z + 2 / sqrt(4 - 3f)) <= 1`: at large `n` the period-1 network
/// on a uniform grid then has directed diameter at least `z + 1`.
pub fn diameter_condition(params: &ModelParams, z: u32) -> bool {
    let f = params.f;
    (params.v / f).sqrt() * (z as f64 + 2.0 / (4.0 - 3.0 * f).sqrt()) <= 1.0
}

/// Smallest `V` violating [`diameter_condition`] for `z`, i.e. the analytic
/// boundary curve `V = f / (z + 2/sqrt(4-3f))^2`.
pub fn diameter_boundary(f: f64, z: u32) -> f64 {
    f / (z as f64 + 2.0 / (4.0 - 3.0 * f).sqrt()).powi(2)
}

/// Period-1 diameter read off the analytic curves. The condition only bounds the
/// diameter from below by `z + 1`; on simulated grids the curve for `z` is where
/// the diameter steps from `z + 1` to `z + 2`, and above the `z = 0` curve the
/// network is complete. So: 1 when the condition fails at `z = 0`, otherwise
/// `2 + max{z : condition(z)}`.
pub fn predicted_diameter(params: &ModelParams) -> u32 {
    if params.v == 0.0 {
        return u32::MAX;
    }
    if !diameter_condition(params, 0) {
        return 1;
    }
    let mut z = 0;
    while diameter_condition(params, z + 1) {
        z += 1;
    }
    z + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Regions {
    /// `V > f (4 - 3f) / 16`: convergence to consensus at large `n`.
    pub consensus: bool,
    /// `V < f / 16`: at least two components in the limit at large `n`.
    pub divergence: bool,
}

pub fn consensus_boundary(f: f64) -> f64 {
    f * (4.0 - 3.0 * f) / 16.0
}

pub fn divergence_boundary(f: f64) -> f64 {
    f / 16.0
}

pub fn region_predicates(params: &ModelParams) -> Regions {
    Regions { consensus: params.v > consensus_boundary(params.f), divergence: params.v < divergence_boundary(params.f) }
}
