//! Deterministic initial opinion profiles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::OpinionProfile;

/// Allowed gap between the requested and the achieved sample variance.
pub const VARIANCE_TOLERANCE: f64 = 5e-4;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 agents, got {n}")));
    }
    Ok(())
}

/// Builds a profile from its lower half, mirroring it so `x_i + x_{n+1-i} = 1`
/// holds exactly. The centre slot of an odd `n` is 1/2.
fn mirrored(lower: Vec<f64>, n: usize) -> Vec<f64> {
    let mut x = lower;
    if n % 2 == 1 {
        x.push(0.5);
    }
    for k in (0..n / 2).rev() {
        x.push(1.0 - x[k]);
    }
    x
}

/// `x_i = (i - 1) / (n - 1)`.
pub fn uniform_grid(n: usize) -> Result<OpinionProfile> {
    check_n(n)?;
    let step = (n - 1) as f64;
    let lower = (0..n / 2).map(|k| k as f64 / step).collect();
    OpinionProfile::new(mirrored(lower, n))
}

/// Sample (n - 1) variance.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// How a piecewise-normal profile was assembled, for output metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalConstruction {
    /// Gaps per block from the left end: tail, shoulder, centre, shoulder, tail.
    pub block_gaps: [usize; 5],
    /// Spacing ratio between neighbouring blocks; tails are `ratio^2` times the centre.
    pub ratio: f64,
    pub sample_variance: f64,
}

fn block_gaps(n: usize) -> [usize; 5] {
    let m = n - 1;
    let tail = (m as f64 * 0.1).round() as usize;
    let shoulder = (m as f64 * 0.2).round() as usize;
    [tail, shoulder, m - 2 * (tail + shoulder), shoulder, tail]
}

fn normal_profile(n: usize, blocks: &[usize; 5], r: f64) -> Vec<f64> {
    let spacing = [r * r, r, 1.0, r, r * r];
    let mut gaps = Vec::with_capacity(n - 1);
    for (count, s) in blocks.iter().zip(spacing) {
        gaps.extend(std::iter::repeat_n(s, *count));
    }
    let total: f64 = gaps.iter().sum();
    let mut lower = Vec::with_capacity(n / 2);
    let mut acc = 0.0;
    for g in gaps.iter().take(n / 2) {
        lower.push(acc / total);
        acc += g;
    }
    mirrored(lower, n)
}

/// Symmetric profile built from five equispaced blocks whose spacing grows
/// geometrically toward the tails; the ratio is bisected to hit the target
/// sample variance.
pub fn piecewise_normal_with_construction(n: usize, target_variance: f64) -> Result<(OpinionProfile, NormalConstruction)> {
    check_n(n)?;
    let unattainable = || Error::UnattainableVariance { target: target_variance, n };
    if !(target_variance > 0.0 && target_variance <= 1.0 / 12.0) {
        return Err(unattainable());
    }
    let blocks = block_gaps(n);
    let variance = |r: f64| sample_variance(&normal_profile(n, &blocks, r));
    // Variance decreases as the ratio grows.
    let (mut lo, mut hi) = (1.0f64 / 64.0, 64.0f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if variance(mid) > target_variance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = if (variance(lo) - target_variance).abs() <= (variance(hi) - target_variance).abs() { lo } else { hi };
    let x = normal_profile(n, &blocks, r);
    let achieved = sample_variance(&x);
    if (achieved - target_variance).abs() > VARIANCE_TOLERANCE {
        return Err(unattainable());
    }
    Ok((OpinionProfile::new(x)?, NormalConstruction { block_gaps: blocks, ratio: r, sample_variance: achieved }))
}

pub fn piecewise_normal(n: usize, target_variance: f64) -> Result<OpinionProfile> {
    piecewise_normal_with_construction(n, target_variance).map(|(x, _)| x)
}

pub const DEFAULT_NORMAL_VARIANCE: f64 = 0.0546;
pub const DEFAULT_MODE_GAP: f64 = 0.5;
pub const DEFAULT_MODE_WIDTH: f64 = 0.3;

/// Two equispaced blocks of width `mode_width` centred at `(1 -+ mode_gap) / 2`.
/// With odd `n` the extra agent sits at 1/2.
pub fn bimodal(n: usize, mode_gap: f64, mode_width: f64) -> Result<OpinionProfile> {
    check_n(n)?;
    if !(mode_gap >= 0.0 && mode_width >= 0.0) {
        return Err(Error::InvalidParams(format!("mode gap {mode_gap} and width {mode_width} must be nonnegative")));
    }
    if mode_width > mode_gap {
        return Err(Error::Overlap(format!("blocks of width {mode_width} overlap at centre distance {mode_gap}")));
    }
    if mode_gap + mode_width > 1.0 {
        return Err(Error::Overlap(format!("blocks of width {mode_width} at distance {mode_gap} leave [0, 1]")));
    }
    let half = n / 2;
    let start = (1.0 - mode_gap - mode_width) / 2.0;
    let lower = (0..half)
        .map(|k| if half == 1 { (1.0 - mode_gap) / 2.0 } else { start + mode_width * k as f64 / (half - 1) as f64 })
        .collect();
    OpinionProfile::new(mirrored(lower, n))
}
