//! Regression model zoo with a uniform fit/predict contract.
//!
//! Every model runs through [`fit_pipeline`]: restrict to a preselected
//! feature subset (for models without built-in selection), standardize
//! within the training rows, fit, and predict back on the original target
//! scale. Trained state derives `PartialEq` so a leakage audit can compare
//! two fits bit for bit.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinate-descent convergence threshold on max coefficient change.
pub const CD_TOL: f64 = 1e-7;
/// Coordinate-descent sweep cap; hitting it sets `converged = false`.
pub const CD_MAX_SWEEPS: usize = 10_000;
/// Columns with sample sd at or below this are dropped as zero-variance.
const SD_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("row {row} has {got} values, expected {expected}")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error("prediction rows have {got} columns, model was fit on {expected}")]
    ColumnMismatch { got: usize, expected: usize },
    #[error("non-finite value in column {0:?}")]
    NonFinite(String),
    #[error("{n} rows is too few for {k}-fold selection (need at least 2K)")]
    TooFewRows { n: usize, k: usize },
    #[error("model {model:?} needs hyperparameter {name:?}")]
    MissingHyper { model: String, name: String },
}

/// A feature matrix and target with aligned well ids. No missing entries;
/// imputation happens upstream in evaluation assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// Row-major: `x[i][j]` is well i, feature j.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub feature_names: Vec<String>,
    pub well_ids: Vec<String>,
    /// Present only on the output of [`standardize`].
    pub scaling: Option<Scaling>,
}

impl Dataset {
    pub fn new(
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        feature_names: Vec<String>,
        well_ids: Vec<String>,
    ) -> Result<Self, ModelError> {
        if x.is_empty() || y.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        assert_eq!(x.len(), y.len());
        assert_eq!(x.len(), well_ids.len());
        for (i, row) in x.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(ModelError::RowWidth {
                    row: i,
                    got: row.len(),
                    expected: feature_names.len(),
                });
            }
            for (v, name) in row.iter().zip(&feature_names) {
                if !v.is_finite() {
                    return Err(ModelError::NonFinite(name.clone()));
                }
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("<target>".to_string()));
        }
        Ok(Dataset { x, y, feature_names, well_ids, scaling: None })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.feature_names.len()
    }

    /// Column j as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.iter().map(|r| r[j]).collect()
    }
}

/// Fit-time scaling statistics: z-score parameters for each retained column
/// and for the target, plus the bookkeeping to map raw rows onto the
/// retained columns at predict time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    /// Indices of retained columns in the pre-standardization order.
    pub kept: Vec<usize>,
    pub x_mean: Vec<f64>,
    pub x_sd: Vec<f64>,
    pub y_mean: f64,
    /// 1.0 when the target is constant, so scaling stays invertible.
    pub y_sd: f64,
    /// Names of columns dropped for zero variance.
    pub dropped: Vec<String>,
}

impl Scaling {
    /// Z-score one raw row (full pre-standardization width).
    pub fn scale_row(&self, row: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .enumerate()
            .map(|(c, &j)| (row[j] - self.x_mean[c]) / self.x_sd[c])
            .collect()
    }

    pub fn unscale_y(&self, z: f64) -> f64 {
        self.y_mean + self.y_sd * z
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Z-score every column and the target using training statistics (sample sd,
/// N-1 convention). Zero-variance columns are dropped and recorded; a
/// constant target keeps sd 1.0 so the transform stays invertible.
pub fn standardize(ds: &Dataset) -> Dataset {
    let mut kept = Vec::new();
    let mut x_mean = Vec::new();
    let mut x_sd = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..ds.p() {
        let col = ds.column(j);
        let (m, s) = mean_sd(&col);
        if s <= SD_FLOOR * (1.0 + m.abs()) {
            dropped.push(ds.feature_names[j].clone());
        } else {
            kept.push(j);
            x_mean.push(m);
            x_sd.push(s);
        }
    }
    let (y_mean, y_sd_raw) = mean_sd(&ds.y);
    let y_sd = if y_sd_raw <= SD_FLOOR * (1.0 + y_mean.abs()) { 1.0 } else { y_sd_raw };
    let scaling = Scaling { kept: kept.clone(), x_mean, x_sd, y_mean, y_sd, dropped };
    let x = ds.x.iter().map(|row| scaling.scale_row(row)).collect();
    let y = ds.y.iter().map(|v| (v - y_mean) / y_sd).collect();
    Dataset {
        x,
        y,
        feature_names: kept.iter().map(|&j| ds.feature_names[j].clone()).collect(),
        well_ids: ds.well_ids.clone(),
        scaling: Some(scaling),
    }
}

/// Elastic-net objective (1/2N)·sum r^2 + lambda·(alpha·l1 + (1-alpha)/2·l2).
pub fn enet_objective(ds: &Dataset, alpha: f64, lambda: f64, beta: &[f64]) -> f64 {
    let n = ds.n() as f64;
    let mut sse = 0.0;
    for (row, &yi) in ds.x.iter().zip(&ds.y) {
        let pred: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        sse += (yi - pred).powi(2);
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    sse / (2.0 * n) + lambda * (alpha * l1 + (1.0 - alpha) / 2.0 * l2)
}

/// Smallest penalty for which all coefficients are zero:
/// max_j |(1/N)·X_j'y| / alpha.
pub fn lambda_max(ds: &Dataset, alpha: f64) -> f64 {
    let n = ds.n() as f64;
    let mut best = 0.0f64;
    for j in 0..ds.p() {
        let g: f64 = ds.x.iter().zip(&ds.y).map(|(row, y)| row[j] * y).sum::<f64>() / n;
        best = best.max(g.abs());
    }
    best / alpha
}

/// Cyclic coordinate descent with soft-thresholding on a standardized
/// dataset. Returns the coefficient vector and whether the sweep cap was
/// avoided; coefficients are exactly zero when thresholded.
pub fn fit_elastic_net(ds: &Dataset, alpha: f64, lambda: f64) -> (Vec<f64>, bool) {
    fit_elastic_net_warm(ds, alpha, lambda, vec![0.0; ds.p()])
}

/// [`fit_elastic_net`] starting from a warm coefficient vector (used along
/// descending lambda paths).
pub fn fit_elastic_net_warm(
    ds: &Dataset,
    alpha: f64,
    lambda: f64,
    mut beta: Vec<f64>,
) -> (Vec<f64>, bool) {
    let n = ds.n();
    let p = ds.p();
    assert_eq!(beta.len(), p);
    let nf = n as f64;
    let cols: Vec<Vec<f64>> = (0..p).map(|j| ds.column(j)).collect();
    let z: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();
    // Residual maintained incrementally: r = y - X beta.
    let mut r: Vec<f64> = ds
        .y
        .iter()
        .enumerate()
        .map(|(i, y)| y - cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    let soft = |a: f64, t: f64| a.signum() * (a.abs() - t).max(0.0);

    for _sweep in 0..CD_MAX_SWEEPS {
        #[cfg(debug_assertions)]
        let obj_before = enet_objective(ds, alpha, lambda, &beta);
        let mut max_delta = 0.0f64;
        for j in 0..p {
            if z[j] == 0.0 {
                continue;
            }
            let g: f64 = cols[j].iter().zip(&r).map(|(x, ri)| x * ri).sum::<f64>() / nf;
            let rho = g + z[j] * beta[j];
            let new = soft(rho, lambda * alpha) / (z[j] + lambda * (1.0 - alpha));
            let delta = new - beta[j];
            if delta != 0.0 {
                for (ri, x) in r.iter_mut().zip(&cols[j]) {
                    *ri -= delta * x;
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        #[cfg(debug_assertions)]
        {
            let obj_after = enet_objective(ds, alpha, lambda, &beta);
            debug_assert!(
                obj_after <= obj_before + 1e-10 * (1.0 + obj_before.abs()),
                "objective rose in a sweep: {obj_before} -> {obj_after}"
            );
        }
        if max_delta < CD_TOL {
            return (beta, true);
        }
    }
    (beta, false)
}

/// Max subgradient optimality violation: for zero coefficients
/// max(0, |g_j| - alpha·lambda); for nonzero ones
/// |g_j - lambda(1-alpha)·beta_j - lambda·alpha·sign(beta_j)|,
/// where g_j = (1/N)·X_j'(y - X·beta).
pub fn kkt_residual(ds: &Dataset, alpha: f64, lambda: f64, beta: &[f64]) -> f64 {
    let nf = ds.n() as f64;
    let r: Vec<f64> = ds
        .x
        .iter()
        .zip(&ds.y)
        .map(|(row, y)| y - row.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    let mut worst = 0.0f64;
    for j in 0..ds.p() {
        let g: f64 = ds.x.iter().zip(&r).map(|(row, ri)| row[j] * ri).sum::<f64>() / nf;
        let v = if beta[j] == 0.0 {
            (g.abs() - alpha * lambda).max(0.0)
        } else {
            (g - lambda * (1.0 - alpha) * beta[j] - lambda * alpha * beta[j].signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Number of log-spaced penalties on the selection path.
pub const SELECT_PATH_LEN: usize = 50;
/// Smallest path penalty as a fraction of lambda_max.
pub const SELECT_MIN_RATIO: f64 = 1e-3;
/// L1 mix used for feature pre-selection.
pub const SELECT_ALPHA: f64 = 0.5;

/// Log-spaced ratios from 1 down to `min_ratio`.
pub fn lambda_ratios(len: usize, min_ratio: f64) -> Vec<f64> {
    (0..len)
        .map(|i| 10f64.powf(min_ratio.log10() * i as f64 / (len - 1) as f64))
        .collect()
}

/// Elastic-net feature selection by K-fold cross validation over a
/// descending penalty path (ratios of each training fold's own lambda_max).
/// Ties in CV error break toward the larger penalty, i.e. the sparser model.
/// Returns sorted indices into `ds.feature_names`; may be empty.
pub fn select_features_enet(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<usize>, ModelError> {
    let n = ds.n();
    if n < 2 * k {
        return Err(ModelError::TooFewRows { n, k });
    }
    let ratios = lambda_ratios(SELECT_PATH_LEN, SELECT_MIN_RATIO);

    // Deterministic shuffled round-robin fold labels.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }

    let mut cv_sse = vec![0.0f64; ratios.len()];
    for f in 0..k {
        let train_rows: Vec<usize> = (0..n).filter(|i| fold[*i] != f).collect();
        let test_rows: Vec<usize> = (0..n).filter(|i| fold[*i] == f).collect();
        let train = restrict_rows(ds, &train_rows);
        let scaled = standardize(&train);
        let scaling = scaled.scaling.as_ref().unwrap();
        let lmax = lambda_max(&scaled, SELECT_ALPHA);
        let mut beta = vec![0.0; scaled.p()];
        for (g, ratio) in ratios.iter().enumerate() {
            let (b, _) = fit_elastic_net_warm(&scaled, SELECT_ALPHA, ratio * lmax, beta);
            beta = b;
            for &i in &test_rows {
                let zrow = scaling.scale_row(&ds.x[i]);
                let pred_z: f64 = zrow.iter().zip(&beta).map(|(x, b)| x * b).sum();
                let pred = scaling.unscale_y(pred_z);
                cv_sse[g] += (pred - ds.y[i]).powi(2);
            }
        }
    }

    // Argmin with ties toward the larger penalty (smaller index).
    let mut best = 0usize;
    for g in 1..cv_sse.len() {
        if cv_sse[g] < cv_sse[best] {
            best = g;
        }
    }

    // Refit on all rows at the chosen ratio of the full-data lambda_max.
    let scaled = standardize(ds);
    let lmax = lambda_max(&scaled, SELECT_ALPHA);
    let (beta, _) = fit_elastic_net(&scaled, SELECT_ALPHA, ratios[best] * lmax);
    let kept = &scaled.scaling.as_ref().unwrap().kept;
    Ok(beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(c, _)| kept[c])
        .collect())
}

fn restrict_rows(ds: &Dataset, rows: &[usize]) -> Dataset {
    Dataset {
        x: rows.iter().map(|&i| ds.x[i].clone()).collect(),
        y: rows.iter().map(|&i| ds.y[i]).collect(),
        feature_names: ds.feature_names.clone(),
        well_ids: rows.iter().map(|&i| ds.well_ids[i].clone()).collect(),
        scaling: None,
    }
}

/// How a model obtains its feature subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSelection {
    /// The penalty itself zeroes coefficients.
    BuiltIn,
    /// Needs an elastic-net pre-selection pass before fitting.
    ElasticNetPre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ols,
    Ridge,
    Lasso,
    ElasticNet,
    KernelRidgeRbf,
    Knn,
    /// Predicts the training target mean; a sanity baseline, not in the
    /// default registry.
    ConstantMean,
}

/// One hyperparameter grid point, keyed by parameter name.
pub type HyperPoint = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    pub feature_selection: FeatureSelection,
    /// Non-empty; a single empty map for grid-free models.
    pub grid: Vec<HyperPoint>,
}

fn point(entries: &[(&str, f64)]) -> HyperPoint {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl ModelSpec {
    pub fn constant_mean() -> ModelSpec {
        ModelSpec {
            name: "constant_mean".to_string(),
            kind: ModelKind::ConstantMean,
            feature_selection: FeatureSelection::BuiltIn,
            grid: vec![HyperPoint::new()],
        }
    }
}

/// The default zoo. Grid order is fixed so argmin tie-breaks are stable.
pub fn registry() -> Vec<ModelSpec> {
    let ratios = lambda_ratios(10, 1e-3);
    let mut zoo = Vec::new();
    zoo.push(ModelSpec {
        name: "ols".to_string(),
        kind: ModelKind::Ols,
        feature_selection: FeatureSelection::ElasticNetPre,
        grid: vec![HyperPoint::new()],
    });
    zoo.push(ModelSpec {
        name: "ridge".to_string(),
        kind: ModelKind::Ridge,
        feature_selection: FeatureSelection::ElasticNetPre,
        grid: [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0]
            .iter()
            .map(|l| point(&[("lambda", *l)]))
            .collect(),
    });
    zoo.push(ModelSpec {
        name: "lasso".to_string(),
        kind: ModelKind::Lasso,
        feature_selection: FeatureSelection::BuiltIn,
        grid: ratios.iter().map(|r| point(&[("lambda_ratio", *r)])).collect(),
    });
    zoo.push(ModelSpec {
        name: "elastic_net".to_string(),
        kind: ModelKind::ElasticNet,
        feature_selection: FeatureSelection::BuiltIn,
        grid: [0.25, 0.5, 0.75]
            .iter()
            .flat_map(|a| {
                ratios
                    .iter()
                    .map(move |r| point(&[("alpha", *a), ("lambda_ratio", *r)]))
            })
            .collect(),
    });
    zoo.push(ModelSpec {
        name: "kernel_ridge_rbf".to_string(),
        kind: ModelKind::KernelRidgeRbf,
        feature_selection: FeatureSelection::ElasticNetPre,
        grid: [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
            .iter()
            .flat_map(|l| {
                [0.5, 1.0, 2.0, 4.0]
                    .iter()
                    .map(move |b| point(&[("bandwidth", *b), ("lambda", *l)]))
            })
            .collect(),
    });
    zoo.push(ModelSpec {
        name: "knn".to_string(),
        kind: ModelKind::Knn,
        feature_selection: FeatureSelection::ElasticNetPre,
        grid: [3.0, 5.0, 7.0, 9.0].iter().map(|k| point(&[("k", *k)])).collect(),
    });
    zoo
}

/// Trained state, in standardized coordinates. Linear models have zero
/// intercept because both X and y are centered at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelState {
    Linear { coefs: Vec<f64> },
    KernelRidge { sigma: f64, dual: Vec<f64>, train_x: Vec<Vec<f64>> },
    Knn { k: usize, train_x: Vec<Vec<f64>>, train_y: Vec<f64> },
    Constant,
}

/// A fully trained model: feature routing, scaling, and coefficients.
/// Comparable with `==` for leakage audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub model_name: String,
    pub hyper: HyperPoint,
    /// Width of the raw rows this model expects.
    pub input_width: usize,
    /// Indices into the raw row picked before standardization.
    pub preselected: Vec<usize>,
    pub scaling: Scaling,
    pub state: ModelState,
    /// Effective penalty after resolving lambda_ratio against lambda_max.
    pub lambda_used: Option<f64>,
    pub converged: bool,
}

fn hyper_value(spec: &ModelSpec, hyper: &HyperPoint, name: &str) -> Result<f64, ModelError> {
    hyper.get(name).copied().ok_or_else(|| ModelError::MissingHyper {
        model: spec.name.clone(),
        name: name.to_string(),
    })
}

/// Fit one model at one grid point.
///
/// `preselected` (column indices into `train`) applies only to
/// `ElasticNetPre` models; `None` means use every column. An empty retained
/// set degrades to the constant-mean predictor rather than failing.
pub fn fit_pipeline(
    spec: &ModelSpec,
    hyper: &HyperPoint,
    train: &Dataset,
    preselected: Option<&[usize]>,
) -> Result<FittedPipeline, ModelError> {
    if train.n() == 0 {
        return Err(ModelError::EmptyDataset);
    }
    let preselected: Vec<usize> = match (spec.feature_selection, preselected) {
        (FeatureSelection::ElasticNetPre, Some(idx)) => idx.to_vec(),
        _ => (0..train.p()).collect(),
    };
    let restricted = restrict_columns(train, &preselected);
    let scaled = standardize(&restricted);
    let mut scaling = scaled.scaling.clone().unwrap();
    // Re-express kept indices against the raw row, not the restricted one.
    scaling.kept = scaling.kept.iter().map(|&c| preselected[c]).collect();

    let mut lambda_used = None;
    let mut converged = true;
    let state = if scaled.p() == 0 || matches!(spec.kind, ModelKind::ConstantMean) {
        ModelState::Constant
    } else {
        match spec.kind {
            ModelKind::ConstantMean => unreachable!(),
            ModelKind::Ols => ModelState::Linear { coefs: ols_coefs(&scaled) },
            ModelKind::Ridge => {
                let lambda = hyper_value(spec, hyper, "lambda")?;
                lambda_used = Some(lambda);
                ModelState::Linear { coefs: ridge_coefs(&scaled, lambda) }
            }
            ModelKind::Lasso | ModelKind::ElasticNet => {
                let alpha = if spec.kind == ModelKind::Lasso {
                    1.0
                } else {
                    hyper_value(spec, hyper, "alpha")?
                };
                let ratio = hyper_value(spec, hyper, "lambda_ratio")?;
                let lambda = ratio * lambda_max(&scaled, alpha);
                lambda_used = Some(lambda);
                let (coefs, ok) = fit_elastic_net(&scaled, alpha, lambda);
                converged = ok;
                ModelState::Linear { coefs }
            }
            ModelKind::KernelRidgeRbf => {
                let lambda = hyper_value(spec, hyper, "lambda")?;
                let factor = hyper_value(spec, hyper, "bandwidth")?;
                lambda_used = Some(lambda);
                fit_kernel_ridge(&scaled, lambda, factor)
            }
            ModelKind::Knn => {
                let k = hyper_value(spec, hyper, "k")?.round().max(1.0) as usize;
                ModelState::Knn {
                    k: k.min(scaled.n()),
                    train_x: scaled.x.clone(),
                    train_y: scaled.y.clone(),
                }
            }
        }
    };
    Ok(FittedPipeline {
        model_name: spec.name.clone(),
        hyper: hyper.clone(),
        input_width: train.p(),
        preselected,
        scaling,
        state,
        lambda_used,
        converged,
    })
}

impl FittedPipeline {
    /// Predict on raw rows (same width and column order as the training
    /// dataset), returning values on the original target scale.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        rows.iter()
            .map(|row| {
                if row.len() != self.input_width {
                    return Err(ModelError::ColumnMismatch {
                        got: row.len(),
                        expected: self.input_width,
                    });
                }
                let z = self.scaling.scale_row(row);
                Ok(self.scaling.unscale_y(self.predict_scaled(&z)))
            })
            .collect()
    }

    fn predict_scaled(&self, z: &[f64]) -> f64 {
        match &self.state {
            ModelState::Constant => 0.0,
            ModelState::Linear { coefs } => z.iter().zip(coefs).map(|(x, b)| x * b).sum(),
            ModelState::KernelRidge { sigma, dual, train_x } => train_x
                .iter()
                .zip(dual)
                .map(|(xi, a)| a * rbf(z, xi, *sigma))
                .sum(),
            ModelState::Knn { k, train_x, train_y } => {
                let mut order: Vec<usize> = (0..train_x.len()).collect();
                order.sort_by(|&a, &b| {
                    sqdist(z, &train_x[a])
                        .partial_cmp(&sqdist(z, &train_x[b]))
                        .unwrap()
                        .then(a.cmp(&b))
                });
                let kk = (*k).min(order.len());
                order[..kk].iter().map(|&i| train_y[i]).sum::<f64>() / kk as f64
            }
        }
    }
}

fn restrict_columns(ds: &Dataset, cols: &[usize]) -> Dataset {
    Dataset {
        x: ds
            .x
            .iter()
            .map(|row| cols.iter().map(|&j| row[j]).collect())
            .collect(),
        y: ds.y.clone(),
        feature_names: cols.iter().map(|&j| ds.feature_names[j].clone()).collect(),
        well_ids: ds.well_ids.clone(),
        scaling: None,
    }
}

fn sqdist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn rbf(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    (-sqdist(a, b) / (2.0 * sigma * sigma)).exp()
}

/// Minimum-norm least squares via SVD, so p > N stays well-defined.
fn ols_coefs(scaled: &Dataset) -> Vec<f64> {
    let n = scaled.n();
    let p = scaled.p();
    let x = DMatrix::from_fn(n, p, |i, j| scaled.x[i][j]);
    let y = DVector::from_iterator(n, scaled.y.iter().copied());
    let svd = x.svd(true, true);
    svd.solve(&y, 1e-10).expect("svd computed with u and v").as_slice().to_vec()
}

/// Ridge normal equations (X'X/N + lambda I) beta = X'y/N.
fn ridge_coefs(scaled: &Dataset, lambda: f64) -> Vec<f64> {
    let n = scaled.n();
    let p = scaled.p();
    let nf = n as f64;
    let x = DMatrix::from_fn(n, p, |i, j| scaled.x[i][j]);
    let y = DVector::from_iterator(n, scaled.y.iter().copied());
    let a = (x.transpose() * &x) / nf + DMatrix::identity(p, p) * lambda;
    let b = x.transpose() * y / nf;
    match a.clone().cholesky() {
        Some(ch) => ch.solve(&b).as_slice().to_vec(),
        // lambda = 0 on collinear data: fall back to the min-norm solution.
        None => ols_coefs(scaled),
    }
}

/// Kernel ridge: dual = (K + N·lambda·I)^-1 y with an RBF kernel whose
/// bandwidth is `factor` times the median pairwise training distance.
fn fit_kernel_ridge(scaled: &Dataset, lambda: f64, factor: f64) -> ModelState {
    let n = scaled.n();
    let mut dists = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(sqdist(&scaled.x[i], &scaled.x[j]).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if dists.is_empty() { 0.0 } else { dists[dists.len() / 2] };
    // Degenerate geometry (all rows identical): any positive sigma works.
    let sigma = if median > 0.0 { factor * median } else { 1.0 };

    let k = DMatrix::from_fn(n, n, |i, j| rbf(&scaled.x[i], &scaled.x[j], sigma));
    let y = DVector::from_iterator(n, scaled.y.iter().copied());
    let a = k + DMatrix::identity(n, n) * (n as f64 * lambda).max(1e-12);
    let dual = a
        .cholesky()
        .map(|ch| ch.solve(&y))
        .unwrap_or_else(|| DVector::zeros(n));
    ModelState::KernelRidge {
        sigma,
        dual: dual.as_slice().to_vec(),
        train_x: scaled.x.clone(),
    }
}
