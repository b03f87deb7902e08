//! Model ranking by repeated K-fold RMSE distributions, nested
//! leave-one-well-out external validation, and the kriging-on-production
//! baseline.
//!
//! Everything that learns from data (imputation means, scalings, feature
//! selection, hyperparameters) is recomputed inside each training split, so
//! a held-out well influences nothing but its own prediction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geostat::{
    empirical_variogram, fit_variogram, krige, GeostatConfig, GeostatError, SpatialSamples,
};
use crate::models::{
    fit_pipeline, select_features_enet, Dataset, FeatureSelection, FittedPipeline, HyperPoint,
    ModelError, ModelSpec, ModelState,
};
use crate::production::{cum_column, CumulativeProductionFrame, Phase};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("bad fold count K={k} for N={n} (need 2 <= K <= N)")]
    BadK { k: usize, n: usize },
    #[error("no wells with a non-missing target for {0}")]
    EmptyDataset(String),
    #[error("frame has no feature columns; run feature interpolation first")]
    NoFeatures,
    #[error("{n} wells is too few (need at least {need})")]
    TooFewWells { n: usize, need: usize },
    #[error("plan covers {plan} rows but the dataset has {data}")]
    PlanMismatch { plan: usize, data: usize },
    #[error("every model failed: {0}")]
    AllModelsFailed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geostat(#[from] GeostatError),
}

/// Deterministic seed derivation (splitmix64 over seed XOR salted index) so
/// per-well and per-fold sub-seeds never collide with the parent stream.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// B repeated partitions of N rows into K folds, sizes differing by at most
/// one. Labels are 1..=K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub n: usize,
    pub k: usize,
    pub b: usize,
    pub seed: u64,
    /// `assignments[b][i]` is row i's fold label in repeat b.
    pub assignments: Vec<Vec<usize>>,
}

pub fn make_plan(n: usize, k: usize, b: usize, seed: u64) -> Result<ResamplePlan, EvalError> {
    if k < 2 || k > n || b == 0 {
        return Err(EvalError::BadK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = Vec::with_capacity(b);
    for _ in 0..b {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut labels = vec![0usize; n];
        for (pos, &i) in order.iter().enumerate() {
            labels[i] = pos % k + 1;
        }
        assignments.push(labels);
    }
    Ok(ResamplePlan { n, k, b, seed, assignments })
}

impl ResamplePlan {
    /// All (repeat, fold) pairs in deterministic order.
    pub fn folds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.b * self.k);
        for b in 0..self.b {
            for f in 1..=self.k {
                out.push((b, f));
            }
        }
        out
    }

    pub fn split(&self, repeat: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let labels = &self.assignments[repeat];
        let train = (0..self.n).filter(|i| labels[*i] != fold).collect();
        let test = (0..self.n).filter(|i| labels[*i] == fold).collect();
        (train, test)
    }
}

/// Root mean squared error. Lengths must match.
pub fn rmse(obs: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(obs.len(), pred.len());
    assert!(!obs.is_empty());
    let sse: f64 = obs.iter().zip(pred).map(|(o, p)| (o - p).powi(2)).sum();
    (sse / obs.len() as f64).sqrt()
}

/// Pearson correlation; `None` when undefined (fewer than 3 pairs or zero
/// variance on either side).
pub fn pearson(obs: &[f64], pred: &[f64]) -> Option<f64> {
    assert_eq!(obs.len(), pred.len());
    let n = obs.len() as f64;
    if obs.len() < 3 {
        return None;
    }
    let mo = obs.iter().sum::<f64>() / n;
    let mp = pred.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (o, p) in obs.iter().zip(pred) {
        sxy += (o - mo) * (p - mp);
        sxx += (o - mo).powi(2);
        syy += (p - mp).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub(crate) fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Type-7 quantile (linear interpolation) of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile(&s, 0.5)
}

fn iqr(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile(&s, 0.75) - quantile(&s, 0.25)
}

/// Feature matrix with missing entries plus the raw target, straight off the
/// production frame. Imputation happens per training split, never globally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledData {
    pub well_ids: Vec<String>,
    /// `x[i][j]`: feature j of well i; `None` = missing.
    pub x: Vec<Vec<Option<f64>>>,
    pub y: Vec<f64>,
    pub feature_names: Vec<String>,
    pub coords: Vec<(f64, f64)>,
}

/// Rows with a non-missing cumulative target for (phase, horizon), in well-id
/// order. Feature gaps stay `None` here.
pub fn assemble(
    frame: &CumulativeProductionFrame,
    phase: Phase,
    horizon_months: u32,
) -> Result<AssembledData, EvalError> {
    if frame.feature_names.is_empty() {
        return Err(EvalError::NoFeatures);
    }
    let col = cum_column(phase, horizon_months);
    let mut out = AssembledData {
        well_ids: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
        feature_names: frame.feature_names.clone(),
        coords: Vec::new(),
    };
    for (well, row) in &frame.rows {
        let Some(Some(target)) = row.cum.get(&col) else {
            continue;
        };
        out.well_ids.push(well.clone());
        out.y.push(*target);
        out.coords.push(row.surface_xy);
        out.x.push(
            frame
                .feature_names
                .iter()
                .map(|f| row.features.get(f).copied().flatten())
                .collect(),
        );
    }
    if out.y.is_empty() {
        return Err(EvalError::EmptyDataset(col));
    }
    Ok(out)
}

impl AssembledData {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn restrict(&self, rows: &[usize]) -> AssembledData {
        AssembledData {
            well_ids: rows.iter().map(|&i| self.well_ids[i].clone()).collect(),
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            coords: rows.iter().map(|&i| self.coords[i]).collect(),
        }
    }

    /// Column means over non-missing entries of these rows; a column with no
    /// observed value at all imputes to 0.0.
    pub fn imputer(&self) -> Imputer {
        let p = self.feature_names.len();
        let mut means = vec![0.0f64; p];
        for j in 0..p {
            let vals: Vec<f64> = self.x.iter().filter_map(|r| r[j]).collect();
            if !vals.is_empty() {
                means[j] = vals.iter().sum::<f64>() / vals.len() as f64;
            }
        }
        Imputer { means }
    }

    /// Impute with this data's own means and wrap as a model-ready dataset.
    pub fn to_dataset(&self) -> Result<Dataset, ModelError> {
        let imp = self.imputer();
        Dataset::new(
            self.x.iter().map(|r| imp.fill_row(r)).collect(),
            self.y.clone(),
            self.feature_names.clone(),
            self.well_ids.clone(),
        )
    }
}

/// Training-split column means used to fill feature gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub means: Vec<f64>,
}

impl Imputer {
    pub fn fill_row(&self, row: &[Option<f64>]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .map(|(v, m)| v.unwrap_or(*m))
            .collect()
    }
}

/// One model's benchmark outcome at its best grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBenchmark {
    pub name: String,
    /// Standardized-scale RMSE, one entry per resample (K·B of them).
    pub rmse: Vec<f64>,
    /// Raw-target-scale RMSE, aligned with `rmse`.
    pub rmse_raw: Vec<f64>,
    pub chosen_hyper: HyperPoint,
    pub mean_cv_rmse: f64,
    pub median_rmse: f64,
    /// Feature names actually used, per resample.
    pub selected_features: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub models: BTreeMap<String, ModelBenchmark>,
    /// Model names sorted by median RMSE, ties by IQR, then by name.
    pub ranking: Vec<String>,
    /// Models excluded by errors, with the reason. Never silent.
    pub failures: BTreeMap<String, String>,
    pub k: usize,
    pub b: usize,
    pub seed: u64,
}

struct FoldContext {
    train_ds: Dataset,
    test_x: Vec<Vec<f64>>,
    test_y: Vec<f64>,
    /// Pre-selected column indices shared by every elastic_net_pre model.
    preselected: Vec<usize>,
}

fn prepare_fold(
    ad: &AssembledData,
    train_rows: &[usize],
    test_rows: &[usize],
    k: usize,
    fold_seed: u64,
) -> Result<FoldContext, EvalError> {
    let train_ad = ad.restrict(train_rows);
    let imp = train_ad.imputer();
    let train_ds = Dataset::new(
        train_ad.x.iter().map(|r| imp.fill_row(r)).collect(),
        train_ad.y.clone(),
        train_ad.feature_names.clone(),
        train_ad.well_ids.clone(),
    )?;
    // Selection folds shrink with small training splits so the 2K floor holds.
    let k_sel = k.min(train_rows.len() / 2).max(2);
    let preselected = select_features_enet(&train_ds, k_sel, fold_seed)?;
    Ok(FoldContext {
        train_ds,
        test_x: test_rows.iter().map(|&i| imp.fill_row(&ad.x[i])).collect(),
        test_y: test_rows.iter().map(|&i| ad.y[i]).collect(),
        preselected,
    })
}

fn active_features(fitted: &FittedPipeline, names: &[String]) -> Vec<String> {
    match &fitted.state {
        ModelState::Linear { coefs } => fitted
            .scaling
            .kept
            .iter()
            .zip(coefs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(&j, _)| names[j].clone())
            .collect(),
        ModelState::Constant => Vec::new(),
        _ => fitted.scaling.kept.iter().map(|&j| names[j].clone()).collect(),
    }
}

/// Rank a zoo by repeated K-fold RMSE.
///
/// Per fold: impute and standardize from the training split, pre-select
/// features once (shared by every model without built-in selection), then
/// fit every grid point of every model. Each model keeps the grid point with
/// the smallest mean CV RMSE; its per-resample RMSE values form the reported
/// distribution. Grid-mean ties keep the earlier grid point.
pub fn benchmark(
    ad: &AssembledData,
    zoo: &[ModelSpec],
    plan: &ResamplePlan,
) -> Result<BenchmarkResult, EvalError> {
    if plan.n != ad.n() {
        return Err(EvalError::PlanMismatch { plan: plan.n, data: ad.n() });
    }
    let folds = plan.folds();
    let mut contexts = Vec::with_capacity(folds.len());
    for (idx, (b, f)) in folds.iter().enumerate() {
        let (train, test) = plan.split(*b, *f);
        contexts.push(prepare_fold(
            ad,
            &train,
            &test,
            plan.k,
            mix_seed(plan.seed, idx as u64 + 1),
        )?);
    }

    let mut models = BTreeMap::new();
    let mut failures = BTreeMap::new();
    for spec in zoo {
        match benchmark_one(spec, &contexts, &ad.feature_names) {
            Ok(mb) => {
                models.insert(spec.name.clone(), mb);
            }
            Err(e) => {
                failures.insert(spec.name.clone(), e.to_string());
            }
        }
    }
    if models.is_empty() {
        let detail = failures
            .iter()
            .map(|(m, e)| format!("{m}: {e}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(EvalError::AllModelsFailed(detail));
    }

    let mut ranking: Vec<String> = models.keys().cloned().collect();
    ranking.sort_by(|a, b| {
        let (ma, mb) = (&models[a], &models[b]);
        ma.median_rmse
            .partial_cmp(&mb.median_rmse)
            .unwrap()
            .then(iqr(&ma.rmse).partial_cmp(&iqr(&mb.rmse)).unwrap())
            .then(a.cmp(b))
    });
    Ok(BenchmarkResult {
        models,
        ranking,
        failures,
        k: plan.k,
        b: plan.b,
        seed: plan.seed,
    })
}

fn benchmark_one(
    spec: &ModelSpec,
    contexts: &[FoldContext],
    names: &[String],
) -> Result<ModelBenchmark, EvalError> {
    let sel = |ctx: &FoldContext| match spec.feature_selection {
        FeatureSelection::ElasticNetPre => Some(ctx.preselected.clone()),
        FeatureSelection::BuiltIn => None,
    };
    let mut per_grid: Vec<(f64, Vec<f64>, Vec<f64>, Vec<Vec<String>>)> = Vec::new();
    for hyper in &spec.grid {
        let mut std_list = Vec::with_capacity(contexts.len());
        let mut raw_list = Vec::with_capacity(contexts.len());
        let mut feats = Vec::with_capacity(contexts.len());
        for ctx in contexts {
            let selected = sel(ctx);
            let fitted = fit_pipeline(spec, hyper, &ctx.train_ds, selected.as_deref())?;
            let preds = fitted.predict(&ctx.test_x)?;
            let raw = rmse(&ctx.test_y, &preds);
            raw_list.push(raw);
            std_list.push(raw / fitted.scaling.y_sd);
            feats.push(active_features(&fitted, names));
        }
        let mean = std_list.iter().sum::<f64>() / std_list.len() as f64;
        per_grid.push((mean, std_list, raw_list, feats));
    }
    // Smallest mean CV RMSE wins; strict < keeps the earlier grid point on
    // ties (penalty grids are ordered strongest-first, so ties stay sparse).
    let mut best = 0usize;
    for g in 1..per_grid.len() {
        if per_grid[g].0 < per_grid[best].0 {
            best = g;
        }
    }
    let (mean, std_list, raw_list, feats) = per_grid.swap_remove(best);
    Ok(ModelBenchmark {
        name: spec.name.clone(),
        median_rmse: median(&std_list),
        rmse: std_list,
        rmse_raw: raw_list,
        chosen_hyper: spec.grid[best].clone(),
        mean_cv_rmse: mean,
        selected_features: feats,
    })
}

/// Everything trained in one outer LOO iteration. Two fits on the same
/// training rows must compare equal regardless of the held-out row's
/// contents; `predictions` is the only field that may differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterFit {
    pub holdout_well: String,
    pub inner_ranking: Vec<String>,
    pub winner: String,
    pub chosen_hypers: BTreeMap<String, HyperPoint>,
    /// Feature names pre-selected on the full N-1 training rows.
    pub selected_features: Vec<String>,
    pub fitted: BTreeMap<String, FittedPipeline>,
    /// Per-model prediction for the held-out well, raw target scale.
    pub predictions: BTreeMap<String, f64>,
}

impl OuterFit {
    /// Equality of everything learned from the training rows, ignoring the
    /// held-out prediction. The leakage audit mutates the held-out row and
    /// requires this to stay bit-identical.
    pub fn trained_state_eq(&self, other: &OuterFit) -> bool {
        self.inner_ranking == other.inner_ranking
            && self.winner == other.winner
            && self.chosen_hypers == other.chosen_hypers
            && self.selected_features == other.selected_features
            && self.fitted == other.fitted
    }
}

/// One outer iteration of the nested LOO: inner benchmark on the other N-1
/// wells, refit every surviving model at its chosen hyperparameters, predict
/// the held-out well. Public so the leakage audit can replay a single
/// iteration with a mutated held-out row.
pub fn run_outer_iteration(
    ad: &AssembledData,
    holdout: usize,
    zoo: &[ModelSpec],
    inner_k: usize,
    inner_b: usize,
    seed: u64,
) -> Result<OuterFit, EvalError> {
    let train_rows: Vec<usize> = (0..ad.n()).filter(|i| *i != holdout).collect();
    let train_ad = ad.restrict(&train_rows);
    let plan = make_plan(train_ad.n(), inner_k, inner_b, seed)?;
    let inner = benchmark(&train_ad, zoo, &plan)?;
    let winner = inner.ranking[0].clone();

    // Final refit artifacts on all N-1 rows.
    let imp = train_ad.imputer();
    let train_ds = Dataset::new(
        train_ad.x.iter().map(|r| imp.fill_row(r)).collect(),
        train_ad.y.clone(),
        train_ad.feature_names.clone(),
        train_ad.well_ids.clone(),
    )?;
    let k_sel = inner_k.min(train_ds.n() / 2).max(2);
    let preselected = select_features_enet(&train_ds, k_sel, mix_seed(seed, 0))?;
    let holdout_x = imp.fill_row(&ad.x[holdout]);

    let mut fitted = BTreeMap::new();
    let mut predictions = BTreeMap::new();
    let mut chosen_hypers = BTreeMap::new();
    for spec in zoo {
        let Some(mb) = inner.models.get(&spec.name) else {
            continue;
        };
        let selected = match spec.feature_selection {
            FeatureSelection::ElasticNetPre => Some(preselected.as_slice()),
            FeatureSelection::BuiltIn => None,
        };
        let fit = fit_pipeline(spec, &mb.chosen_hyper, &train_ds, selected)?;
        predictions.insert(spec.name.clone(), fit.predict(&[holdout_x.clone()])?[0]);
        chosen_hypers.insert(spec.name.clone(), mb.chosen_hyper.clone());
        fitted.insert(spec.name.clone(), fit);
    }
    Ok(OuterFit {
        holdout_well: ad.well_ids[holdout].clone(),
        inner_ranking: inner.ranking,
        winner,
        chosen_hypers,
        selected_features: preselected
            .iter()
            .map(|&j| ad.feature_names[j].clone())
            .collect(),
        fitted,
        predictions,
    })
}

/// Out-of-sample metrics for one predictor across the LOO loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooModelEntry {
    /// well id -> (observed, predicted), raw target scale.
    pub predictions: BTreeMap<String, (f64, f64)>,
    pub rmse_raw: f64,
    /// `rmse_raw` divided by the sample sd of the observed targets, putting
    /// values on a unit-variance scale.
    pub rmse_std: f64,
    pub pearson: Option<f64>,
}

fn loo_entry(pairs: BTreeMap<String, (f64, f64)>) -> LooModelEntry {
    let obs: Vec<f64> = pairs.values().map(|(o, _)| *o).collect();
    let pred: Vec<f64> = pairs.values().map(|(_, p)| *p).collect();
    let raw = rmse(&obs, &pred);
    let sd = sample_sd(&obs);
    LooModelEntry {
        rmse_raw: raw,
        rmse_std: if sd > 0.0 { raw / sd } else { raw },
        pearson: pearson(&obs, &pred),
        predictions: pairs,
    }
}

/// External validation report: nested-LOO metrics per finalist, the
/// inner-winner composite, and the kriging baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub phase: String,
    pub horizon_months: u32,
    pub n_wells: usize,
    /// Pre-declared finalists: the top_m of the full-data benchmark ranking.
    pub finalists: Vec<String>,
    /// Full-data benchmark used to declare the finalists.
    pub full_benchmark: BenchmarkResult,
    /// Per-model LOO metrics: every finalist plus any model that ranked
    /// first in some inner loop.
    pub models: BTreeMap<String, LooModelEntry>,
    /// The adaptive external path: each well predicted by its own inner
    /// winner.
    pub inner_selected: LooModelEntry,
    /// well id -> inner winner name.
    pub inner_winners: BTreeMap<String, String>,
    /// well id -> features pre-selected on that well's training rows.
    pub inner_selections: BTreeMap<String, Vec<String>>,
    /// well id -> per-model chosen hyperparameters.
    pub inner_hypers: BTreeMap<String, BTreeMap<String, HyperPoint>>,
    /// Wells whose whole inner loop failed, with the reason.
    pub failed_wells: BTreeMap<String, String>,
    pub baseline: Option<LooModelEntry>,
}

/// Nested leave-one-well-out validation.
///
/// Finalists are declared once from a benchmark on the full dataset (the
/// ranking step), then every outer iteration reruns feature and
/// model selection from scratch on its own N-1 wells; finalists are refit in
/// every iteration regardless of inner rank so their LOO metrics cover every
/// well.
pub fn nested_loo(
    ad: &AssembledData,
    phase: Phase,
    horizon_months: u32,
    zoo: &[ModelSpec],
    top_m: usize,
    plan: &ResamplePlan,
    inner_k: usize,
    inner_b: usize,
) -> Result<LooReport, EvalError> {
    if ad.n() < 10 {
        return Err(EvalError::TooFewWells { n: ad.n(), need: 10 });
    }
    let full = benchmark(ad, zoo, plan)?;
    let finalists: Vec<String> = full.ranking.iter().take(top_m).cloned().collect();

    let mut per_model: BTreeMap<String, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
    let mut inner_pairs: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut inner_winners = BTreeMap::new();
    let mut inner_selections = BTreeMap::new();
    let mut inner_hypers = BTreeMap::new();
    let mut failed_wells = BTreeMap::new();
    for i in 0..ad.n() {
        let well = ad.well_ids[i].clone();
        let outer = match run_outer_iteration(ad, i, zoo, inner_k, inner_b, mix_seed(plan.seed, i as u64 + 1)) {
            Ok(o) => o,
            Err(e) => {
                failed_wells.insert(well, e.to_string());
                continue;
            }
        };
        for (model, pred) in &outer.predictions {
            per_model
                .entry(model.clone())
                .or_default()
                .insert(well.clone(), (ad.y[i], *pred));
        }
        inner_pairs.insert(well.clone(), (ad.y[i], outer.predictions[&outer.winner]));
        inner_winners.insert(well.clone(), outer.winner);
        inner_selections.insert(well.clone(), outer.selected_features);
        inner_hypers.insert(well, outer.chosen_hypers);
    }
    if inner_pairs.is_empty() {
        return Err(EvalError::AllModelsFailed(
            "every outer iteration failed".to_string(),
        ));
    }

    // Winners by how often they ranked first, capped at top_m, then the
    // pre-declared finalists.
    let mut win_counts: BTreeMap<&String, usize> = BTreeMap::new();
    for w in inner_winners.values() {
        *win_counts.entry(w).or_default() += 1;
    }
    let mut winners: Vec<&String> = win_counts.keys().copied().collect();
    winners.sort_by(|a, b| win_counts[b].cmp(&win_counts[a]).then(a.cmp(b)));
    let mut reported: Vec<String> = finalists.clone();
    for w in winners.into_iter().take(top_m) {
        if !reported.contains(w) {
            reported.push(w.clone());
        }
    }

    let mut models = BTreeMap::new();
    for name in reported {
        if let Some(pairs) = per_model.get(&name) {
            models.insert(name.clone(), loo_entry(pairs.clone()));
        }
    }
    Ok(LooReport {
        phase: phase.as_str().to_string(),
        horizon_months,
        n_wells: ad.n(),
        finalists,
        full_benchmark: full,
        models,
        inner_selected: loo_entry(inner_pairs),
        inner_winners,
        inner_selections,
        inner_hypers,
        failed_wells,
        baseline: None,
    })
}

/// Leave-one-well-out ordinary kriging of the raw target over surface
/// coordinates, variogram refit on each fold's N-1 training values.
pub fn kriging_baseline(ad: &AssembledData, cfg: &GeostatConfig) -> Result<LooModelEntry, EvalError> {
    if ad.n() < 10 {
        return Err(EvalError::TooFewWells { n: ad.n(), need: 10 });
    }
    let mut pairs = BTreeMap::new();
    for i in 0..ad.n() {
        let donors = SpatialSamples::new((0..ad.n()).filter(|j| *j != i).map(|j| {
            (ad.well_ids[j].clone(), ad.coords[j], ad.y[j])
        }));
        let emp = empirical_variogram(&donors, cfg.n_bins, cfg.max_dist)?;
        let fitted = fit_variogram(&emp, cfg.family)?;
        let pred = krige(&donors, &fitted.model, &[ad.coords[i]])?;
        pairs.insert(ad.well_ids[i].clone(), (ad.y[i], pred[0].value));
    }
    Ok(loo_entry(pairs))
}
