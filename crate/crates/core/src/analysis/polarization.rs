use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Esteban–Ray parameters: scale `k`, sensitivity `alpha`, and the number of
/// equal-width opinion segments `segments` partitioning `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationParams {
    pub k: f64,
    pub alpha: f64,
    pub segments: usize,
}

impl PolarizationParams {
    pub const DEFAULT_ALPHAS: [f64; 3] = [0.8, 1.0, 1.6];
    pub const DEFAULT_SEGMENTS: usize = 10;

    pub fn new(k: f64, alpha: f64, segments: usize) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::InvalidParams(format!("K = {k} must be positive")));
        }
        if !(alpha > 0.0 && alpha <= 1.6) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1.6]")));
        }
        if segments < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 segments, got {segments}")));
        }
        Ok(PolarizationParams { k, alpha, segments })
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(1.0, alpha, Self::DEFAULT_SEGMENTS)
    }
}

/// Segment shares and mean opinions. Segment `k` is `[k/s, (k+1)/s)`, the last
/// one closed at 1; values outside `[0, 1]` are clamped into the end segments.
pub fn segment_summary(opinions: &[f64], segments: usize) -> Vec<(f64, f64)> {
    let mut count = vec![0usize; segments];
    let mut sum = vec![0.0; segments];
    for &x in opinions {
        let k = ((x * segments as f64).floor().max(0.0) as usize).min(segments - 1);
        count[k] += 1;
        sum[k] += x;
    }
    let total = opinions.len() as f64;
    count
        .iter()
        .zip(&sum)
        .map(|(&c, &s)| if c == 0 { (0.0, 0.0) } else { (c as f64 / total, s / c as f64) })
        .collect()
}

/// `K * sum_i sum_j rho_i^(1+alpha) rho_j |m_i - m_j|` over opinion segments.
pub fn esteban_ray(opinions: &[f64], p: &PolarizationParams) -> f64 {
    let bins = segment_summary(opinions, p.segments);
    let mut total = 0.0;
    for &(rho_i, m_i) in &bins {
        if rho_i == 0.0 {
            continue;
        }
        let weight = rho_i.powf(1.0 + p.alpha);
        for &(rho_j, m_j) in &bins {
            if rho_j > 0.0 {
                total += weight * rho_j * (m_i - m_j).abs();
            }
        }
    }
    p.k * total
}
