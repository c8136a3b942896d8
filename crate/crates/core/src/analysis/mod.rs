//! Graph metrics, spectral diagnostics, polarization, and the closed-form thresholds.

pub mod graph;
pub mod polarization;
pub mod spectral;
pub mod thresholds;

pub use graph::{directed_diameter, weak_components, Diameter};
pub use polarization::{esteban_ray, PolarizationParams};
pub use spectral::{consensus_time_bound, consensus_time_upper_bound, second_eigenvalue_modulus, HearingMatrix};
pub use thresholds::{
    diameter_condition, predicted_diameter, region_predicates, threshold_phi, threshold_xi, uniform_radii, Regions,
    UniformRadii,
};
