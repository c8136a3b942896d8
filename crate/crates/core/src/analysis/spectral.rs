use faer::Mat;

use crate::error::{Error, Result};
use crate::model::PeerGraph;

/// Accuracy the eigensolver is asked to certify.
pub const EIGEN_TOLERANCE: f64 = 1e-8;

/// Row-stochastic update operator `(1 - f) I + f D`, where `D` row-normalizes
/// the adjacency and isolated agents get `D_ii = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HearingMatrix {
    entries: Mat<f64>,
}

impl HearingMatrix {
    pub fn from_graph(graph: &PeerGraph, f: f64) -> Self {
        let n = graph.n();
        let mut entries = Mat::zeros(n, n);
        for i in 0..n {
            entries[(i, i)] = 1.0 - f;
            let row = graph.row(i);
            if row.is_empty() {
                entries[(i, i)] += f;
            } else {
                let w = f / row.len() as f64;
                for &j in row {
                    entries[(i, j)] += w;
                }
            }
        }
        HearingMatrix { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<f64> {
        &self.entries
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.entries[(i, j)] * x[j]).sum()).collect()
    }

    /// Eigenvalue moduli in decreasing order.
    pub fn eigenvalue_moduli(&self) -> Result<Vec<f64>> {
        let eigenvalues = self.entries.eigenvalues().map_err(|_| Error::ToleranceFailure(EIGEN_TOLERANCE))?;
        let mut moduli: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        // A stochastic matrix has spectral radius exactly 1.
        if (moduli[0] - 1.0).abs() > EIGEN_TOLERANCE {
            return Err(Error::ToleranceFailure(EIGEN_TOLERANCE));
        }
        Ok(moduli)
    }
}

/// `|lambda_2|`, the second largest eigenvalue modulus of the hearing matrix.
pub fn second_eigenvalue_modulus(w: &HearingMatrix) -> Result<f64> {
    let moduli = w.eigenvalue_moduli()?;
    Ok(moduli.get(1).copied().unwrap_or(0.0))
}

/// `ceil(log(eps) / log|lambda_2|)`, the number of steps a fixed network needs
/// to bring any profile within `eps` of consensus. At least one step.
pub fn consensus_time_bound(lambda2: f64, epsilon: f64) -> Result<u64> {
    if !(lambda2.abs() < 1.0) {
        return Err(Error::NoBound(lambda2));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let steps = (epsilon.ln() / lambda2.abs().ln()).ceil();
    Ok((steps as u64).max(1))
}

pub fn consensus_time_upper_bound(w: &HearingMatrix, epsilon: f64) -> Result<u64> {
    consensus_time_bound(second_eigenvalue_modulus(w)?, epsilon)
}
