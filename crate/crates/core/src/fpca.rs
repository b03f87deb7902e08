//! Functional principal component analysis of standardized log sections.
//!
//! Each (property, formation) block is treated as N curves sampled on a
//! uniform grid over [0, 1] (normalized depth). The covariance operator is
//! discretized with trapezoid quadrature weights: with W the diagonal weight
//! matrix and K the sample covariance of the centered rows, the symmetric
//! eigenproblem of W^(1/2) K W^(1/2) yields eigenfunctions phi = W^(-1/2) u
//! that are orthonormal under the quadrature inner product. Scores are the
//! quadrature inner products of centered curves with the eigenfunctions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FpcaError {
    #[error("too few wells: {0} (need at least 3)")]
    TooFewWells(usize),
    #[error("degenerate grid: {0} points (need at least 2)")]
    DegenerateGrid(usize),
    #[error("component count {k} outside 1..={k_max}")]
    KOutOfRange { k: usize, k_max: usize },
}

/// Fitted fPCA model for one (property, formation) block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaModel {
    pub property: String,
    pub formation: String,
    /// n equally spaced points on [0, 1].
    pub grid: Vec<f64>,
    pub mean_curve: Vec<f64>,
    /// k_max rows, each a length-n eigenfunction with unit quadrature norm.
    /// The entry of largest magnitude in each is positive.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Non-increasing, clamped at 0.
    pub eigenvalues: Vec<f64>,
    /// N x k_max, aligned with `well_ids`; columns have zero mean.
    pub scores: Vec<Vec<f64>>,
    pub well_ids: Vec<String>,
    /// Trapezoid weights on [0, 1]; they sum to 1.
    pub quadrature: Vec<f64>,
}

impl FpcaModel {
    pub fn k_max(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_wells(&self) -> usize {
        self.well_ids.len()
    }
}

/// Trapezoid quadrature weights for n uniform points on [0, 1].
pub fn trapezoid_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
        .collect()
}

/// Fit fPCA on an N x n block with no missing entries.
pub fn fit_fpca(
    block: &[Vec<f64>],
    well_ids: &[String],
    property: &str,
    formation: &str,
) -> Result<FpcaModel, FpcaError> {
    let n_wells = block.len();
    if n_wells < 3 {
        return Err(FpcaError::TooFewWells(n_wells));
    }
    let n = block[0].len();
    if n < 2 {
        return Err(FpcaError::DegenerateGrid(n));
    }
    assert!(block.iter().all(|r| r.len() == n), "ragged block");
    assert_eq!(well_ids.len(), n_wells, "well id list misaligned");

    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let weights = trapezoid_weights(n);

    let x = DMatrix::from_fn(n_wells, n, |i, j| block[i][j]);
    let mean: DVector<f64> = x.row_mean().transpose();
    let mut centered = x;
    for i in 0..n_wells {
        for j in 0..n {
            centered[(i, j)] -= mean[j];
        }
    }

    // A = W^(1/2) (C' C / (N-1)) W^(1/2), symmetric by construction.
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let k = (centered.transpose() * &centered) / (n_wells - 1) as f64;
    let a = DMatrix::from_fn(n, n, |i, j| sqrt_w[i] * k[(i, j)] * sqrt_w[j]);

    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());

    let k_max = (n_wells - 1).min(n);
    let mut eigenvalues = Vec::with_capacity(k_max);
    let mut eigenfunctions = Vec::with_capacity(k_max);
    for &idx in order.iter().take(k_max) {
        // Symmetric solvers can return tiny negative values for null modes.
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
        let u = eig.eigenvectors.column(idx);
        let mut phi: Vec<f64> = (0..n).map(|j| u[j] / sqrt_w[j]).collect();
        fix_sign(&mut phi);
        eigenfunctions.push(phi);
    }

    // scores_{i,k} = <centered_i, phi_k> under quadrature.
    let scores: Vec<Vec<f64>> = (0..n_wells)
        .map(|i| {
            eigenfunctions
                .iter()
                .map(|phi| {
                    (0..n)
                        .map(|j| weights[j] * centered[(i, j)] * phi[j])
                        .sum::<f64>()
                })
                .collect()
        })
        .collect();

    let model = FpcaModel {
        property: property.to_string(),
        formation: formation.to_string(),
        grid,
        mean_curve: mean.iter().copied().collect(),
        eigenfunctions,
        eigenvalues,
        scores,
        well_ids: well_ids.to_vec(),
        quadrature: weights,
    };
    debug_assert!(model_invariants_hold(&model), "fPCA invariants violated");
    Ok(model)
}

/// Make the entry of largest magnitude positive; ties resolve to the first
/// such index so the convention is deterministic.
fn fix_sign(phi: &mut [f64]) {
    let mut best = 0;
    for (i, v) in phi.iter().enumerate() {
        if v.abs() > phi[best].abs() {
            best = i;
        }
    }
    if phi[best] < 0.0 {
        for v in phi.iter_mut() {
            *v = -*v;
        }
    }
}

fn model_invariants_hold(m: &FpcaModel) -> bool {
    let n = m.grid.len();
    // Orthonormality under quadrature.
    for (i, a) in m.eigenfunctions.iter().enumerate() {
        for (j, b) in m.eigenfunctions.iter().enumerate() {
            let dot: f64 = (0..n).map(|t| m.quadrature[t] * a[t] * b[t]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot - expect).abs() > 1e-8 {
                return false;
            }
        }
    }
    // Ordering and non-negativity.
    if m.eigenvalues.windows(2).any(|w| w[1] > w[0]) || m.eigenvalues.iter().any(|&v| v < 0.0) {
        return false;
    }
    // Centered scores.
    for k in 0..m.k_max() {
        let mean: f64 = m.scores.iter().map(|r| r[k]).sum::<f64>() / m.scores.len() as f64;
        if mean.abs() > 1e-8 {
            return false;
        }
    }
    true
}

/// First k score columns with feature names `<property>_<formation>_fpc<j>`.
pub fn fpca_scores(model: &FpcaModel, k: usize) -> Result<(Vec<Vec<f64>>, Vec<String>), FpcaError> {
    if k == 0 || k > model.k_max() {
        return Err(FpcaError::KOutOfRange {
            k,
            k_max: model.k_max(),
        });
    }
    let names = (1..=k)
        .map(|j| format!("{}_{}_fpc{}", model.property, model.formation, j))
        .collect();
    let cols = model
        .scores
        .iter()
        .map(|row| row[..k].to_vec())
        .collect();
    Ok((cols, names))
}

/// Reconstruct curves from the first k components:
/// `mean + sum_{j<=k} score_j * phi_j`.
pub fn reconstruct(model: &FpcaModel, k: usize) -> Result<Vec<Vec<f64>>, FpcaError> {
    if k == 0 || k > model.k_max() {
        return Err(FpcaError::KOutOfRange {
            k,
            k_max: model.k_max(),
        });
    }
    let n = model.grid.len();
    Ok(model
        .scores
        .iter()
        .map(|row| {
            (0..n)
                .map(|t| {
                    model.mean_curve[t]
                        + (0..k)
                            .map(|j| row[j] * model.eigenfunctions[j][t])
                            .sum::<f64>()
                })
                .collect()
        })
        .collect())
}

/// Quadrature-weighted squared reconstruction error summed over wells.
pub fn reconstruction_error(model: &FpcaModel, block: &[Vec<f64>], k: usize) -> Result<f64, FpcaError> {
    let recon = reconstruct(model, k)?;
    let n = model.grid.len();
    Ok(block
        .iter()
        .zip(&recon)
        .map(|(orig, fit)| {
            (0..n)
                .map(|t| model.quadrature[t] * (orig[t] - fit[t]).powi(2))
                .sum::<f64>()
        })
        .sum())
}

/// Optional per-curve summary statistics over the block grid: mean, variance
/// (quadrature-weighted), maximum, and minimum. Disabled by default in the
/// pipeline; fPC scores are the primary features.
pub fn summary_features(block: &[Vec<f64>], quadrature: &[f64]) -> Vec<[f64; 4]> {
    block
        .iter()
        .map(|row| {
            let mean: f64 = row.iter().zip(quadrature).map(|(v, w)| v * w).sum();
            let var: f64 = row
                .iter()
                .zip(quadrature)
                .map(|(v, w)| w * (v - mean).powi(2))
                .sum();
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            [mean, var, max, min]
        })
        .collect()
}
