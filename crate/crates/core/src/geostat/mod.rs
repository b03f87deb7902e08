//! Spatial interpolation: empirical variograms, variogram model fitting,
//! ordinary kriging with an IDW fallback, and the carrier that moves fPCA
//! scores from vertical wells to horizontal well surface locations.

mod kriging;
mod variogram;

pub use kriging::{idw, krige, krige_weights, KrigePrediction};
pub use variogram::{
    empirical_variogram, fit_variogram, FittedVariogram, VariogramBin, VariogramFamily,
    VariogramModel,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fpca::FpcaModel;
use crate::production::{append_features, CumulativeProductionFrame};

/// Locations closer than this are treated as coincident.
pub const COINCIDENT_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeostatError {
    #[error("no samples")]
    NoSamples,
    #[error("too few samples: {0} (need at least 2)")]
    TooFewSamples(usize),
    #[error("too few variogram bins: {0}")]
    TooFewBins(usize),
    #[error("feature {0:?} already on the frame")]
    DuplicateFeature(String),
}

/// Point samples of one scalar field. Duplicate locations are merged by mean
/// at construction, so no two stored points are closer than
/// [`COINCIDENT_EPS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialSamples {
    points: Vec<(f64, f64)>,
    values: Vec<f64>,
    ids: Vec<String>,
}

impl SpatialSamples {
    pub fn new(entries: impl IntoIterator<Item = (String, (f64, f64), f64)>) -> Self {
        let mut points: Vec<(f64, f64)> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut ids: Vec<String> = Vec::new();
        for (id, xy, v) in entries {
            match points.iter().position(|p| dist(*p, xy) < COINCIDENT_EPS) {
                Some(i) => {
                    sums[i] += v;
                    counts[i] += 1;
                }
                None => {
                    points.push(xy);
                    sums.push(v);
                    counts.push(1);
                    ids.push(id);
                }
            }
        }
        let values = sums
            .iter()
            .zip(&counts)
            .map(|(s, c)| s / *c as f64)
            .collect();
        SpatialSamples { points, values, ids }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

pub(crate) fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Geostatistics settings shared by feature interpolation and the production
/// kriging baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeostatConfig {
    pub family: VariogramFamily,
    /// Lag bins for the empirical variogram.
    pub n_bins: usize,
    /// Defaults to half the maximum pairwise distance when absent.
    pub max_dist: Option<f64>,
    /// Features with fewer scored donor wells than this degrade to missing.
    pub min_donors: usize,
    pub idw_power: f64,
    /// Use plain IDW instead of kriging for feature interpolation.
    pub use_idw: bool,
}

impl Default for GeostatConfig {
    fn default() -> Self {
        GeostatConfig {
            family: VariogramFamily::Exponential,
            n_bins: 12,
            max_dist: None,
            min_donors: 5,
            idw_power: 2.0,
            use_idw: false,
        }
    }
}

/// Audit entry for one interpolated feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAudit {
    pub feature: String,
    pub formation: String,
    pub donors: usize,
    /// Wells kriged through the IDW fallback because the system was singular.
    pub fallback_wells: Vec<String>,
    /// Wells left missing, with the reason.
    pub missing: Vec<(String, String)>,
    pub variogram: Option<FittedVariogram>,
}

/// Carry fPCA scores to horizontal wells.
///
/// Feature columns are named `<property>_fpc<j>`; each horizontal well's
/// value is interpolated within its own target formation from the vertical
/// wells scored there. Formations with fewer than `min_donors` scored wells
/// leave their wells missing, and per-feature failures degrade to missing
/// rather than aborting the frame.
pub fn interpolate_features(
    frame: &CumulativeProductionFrame,
    models: &[FpcaModel],
    vertical_coords: &BTreeMap<String, (f64, f64)>,
    k: usize,
    cfg: &GeostatConfig,
) -> Result<(CumulativeProductionFrame, Vec<FeatureAudit>), GeostatError> {
    let mut audits = Vec::new();

    // Group horizontal wells by target formation once.
    let mut wells_by_formation: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (well, row) in &frame.rows {
        wells_by_formation
            .entry(row.target_formation.as_str())
            .or_default()
            .push(well);
    }

    // Properties in sorted order; a (property, formation) model pair must be
    // unique upstream.
    let mut by_property: BTreeMap<&str, Vec<&FpcaModel>> = BTreeMap::new();
    for m in models {
        by_property.entry(m.property.as_str()).or_default().push(m);
    }

    let mut out = frame.clone();
    for (property, prop_models) in by_property {
        let k_cap = prop_models.iter().map(|m| m.k_max()).max().unwrap_or(0).min(k);
        for j in 1..=k_cap {
            let feature = format!("{property}_fpc{j}");
            let mut values: BTreeMap<String, f64> = BTreeMap::new();
            for model in &prop_models {
                let Some(targets) = wells_by_formation.get(model.formation.as_str()) else {
                    continue;
                };
                let mut audit = FeatureAudit {
                    feature: feature.clone(),
                    formation: model.formation.clone(),
                    donors: 0,
                    fallback_wells: Vec::new(),
                    missing: Vec::new(),
                    variogram: None,
                };
                if j > model.k_max() {
                    for w in targets {
                        audit.missing.push((w.to_string(), format!(
                            "component {j} exceeds the block's {} components", model.k_max()
                        )));
                    }
                    audits.push(audit);
                    continue;
                }
                let donors = SpatialSamples::new(model.well_ids.iter().enumerate().filter_map(
                    |(i, id)| {
                        vertical_coords
                            .get(id)
                            .map(|xy| (id.clone(), *xy, model.scores[i][j - 1]))
                    },
                ));
                audit.donors = donors.len();
                if donors.len() < cfg.min_donors {
                    for w in targets {
                        audit.missing.push((
                            w.to_string(),
                            format!("{} scored donors, need {}", donors.len(), cfg.min_donors),
                        ));
                    }
                    audits.push(audit);
                    continue;
                }
                let target_xy: Vec<(f64, f64)> = targets
                    .iter()
                    .map(|w| frame.rows[*w].surface_xy)
                    .collect();
                if cfg.use_idw {
                    let preds = idw(&donors, &target_xy, cfg.idw_power)?;
                    for (w, p) in targets.iter().zip(preds) {
                        values.insert(w.to_string(), p);
                    }
                } else {
                    let emp = empirical_variogram(&donors, cfg.n_bins, cfg.max_dist)?;
                    let fitted = fit_variogram(&emp, cfg.family)?;
                    let preds = krige(&donors, &fitted.model, &target_xy)?;
                    for (w, p) in targets.iter().zip(&preds) {
                        values.insert(w.to_string(), p.value);
                        if p.fallback {
                            audit.fallback_wells.push(w.to_string());
                        }
                    }
                    audit.variogram = Some(fitted);
                }
                audits.push(audit);
            }
            out = append_features(&out, &feature, &values)
                .map_err(|_| GeostatError::DuplicateFeature(feature.clone()))?;
        }
    }
    Ok((out, audits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::production::{build_production_frame, load_daily, load_meta};

    fn grid_model(property: &str, formation: &str, coords: &mut BTreeMap<String, (f64, f64)>) -> FpcaModel {
        // 3x3 grid of vertical wells; component-1 score equals x + 10y.
        let mut ids = Vec::new();
        let mut scores = Vec::new();
        for gy in 0..3 {
            for gx in 0..3 {
                let id = format!("V_{property}_{formation}_{gx}{gy}");
                coords.insert(id.clone(), (gx as f64 * 100.0, gy as f64 * 100.0));
                scores.push(vec![gx as f64 + 10.0 * gy as f64, 0.5]);
                ids.push(id);
            }
        }
        FpcaModel {
            property: property.to_string(),
            formation: formation.to_string(),
            grid: vec![0.0, 1.0],
            mean_curve: vec![0.0, 0.0],
            eigenfunctions: vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            eigenvalues: vec![2.0, 1.0],
            scores,
            well_ids: ids,
            quadrature: vec![0.5, 0.5],
        }
    }

    fn frame_for(wells: &[(&str, &str, f64, f64)]) -> CumulativeProductionFrame {
        let mut meta = String::from("well_id,target_formation,x,y\n");
        for (w, f, x, y) in wells {
            meta.push_str(&format!("{w},{f},{x},{y}\n"));
        }
        let meta = load_meta(&meta).unwrap();
        let daily = load_daily("well_id,date,oil,gas\n").unwrap();
        build_production_frame(
            &daily,
            &meta,
            &["Alpha".to_string(), "Beta".to_string()],
            &[12],
        )
        .unwrap()
    }

    #[test]
    fn duplicate_locations_merge_by_mean() {
        let s = SpatialSamples::new([
            ("a".to_string(), (0.0, 0.0), 2.0),
            ("b".to_string(), (0.0, 0.0), 4.0),
            ("c".to_string(), (1.0, 0.0), 6.0),
        ]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.values(), &[3.0, 6.0]);
    }

    #[test]
    fn features_route_by_target_formation() {
        let mut coords = BTreeMap::new();
        let alpha = grid_model("GR", "Alpha", &mut coords);
        let beta = grid_model("GR", "Beta", &mut coords);
        // Beta scores differ from Alpha's so routing is observable.
        let beta = FpcaModel {
            scores: beta.scores.iter().map(|r| vec![r[0] + 1000.0, r[1]]).collect(),
            ..beta
        };
        let frame = frame_for(&[
            ("H1", "Alpha", 50.0, 50.0),
            ("H2", "Beta", 50.0, 50.0),
        ]);
        let (out, _) =
            interpolate_features(&frame, &[alpha, beta], &coords, 1, &GeostatConfig::default())
                .unwrap();
        let h1 = out.rows["H1"].features["GR_fpc1"].unwrap();
        let h2 = out.rows["H2"].features["GR_fpc1"].unwrap();
        assert!(h1 < 100.0, "H1 must come from Alpha scores, got {h1}");
        assert!(h2 > 900.0, "H2 must come from Beta scores, got {h2}");
    }

    #[test]
    fn coincident_horizontal_well_gets_exact_score() {
        let mut coords = BTreeMap::new();
        let model = grid_model("GR", "Alpha", &mut coords);
        // H1 sits exactly on the vertical well at (100, 100), score 1 + 10 = 11.
        let frame = frame_for(&[("H1", "Alpha", 100.0, 100.0)]);
        let (out, audits) =
            interpolate_features(&frame, &[model], &coords, 2, &GeostatConfig::default()).unwrap();
        let v = out.rows["H1"].features["GR_fpc1"].unwrap();
        assert!((v - 11.0).abs() < 1e-6, "exactness at a donor location, got {v}");
        assert_eq!(out.feature_names, vec!["GR_fpc1", "GR_fpc2"]);
        let fpc1 = audits.iter().find(|a| a.feature == "GR_fpc1").unwrap();
        assert!(fpc1.fallback_wells.is_empty());
        // Component 2 is constant across donors, so its variogram is
        // identically zero, the kriging system is singular, and the flagged
        // IDW fallback must still reproduce the constant.
        let fpc2 = audits.iter().find(|a| a.feature == "GR_fpc2").unwrap();
        assert_eq!(fpc2.fallback_wells, vec!["H1".to_string()]);
        assert_eq!(out.rows["H1"].features["GR_fpc2"], Some(0.5));
    }

    #[test]
    fn sparse_formations_degrade_to_missing() {
        let mut coords = BTreeMap::new();
        let mut model = grid_model("GR", "Alpha", &mut coords);
        model.well_ids.truncate(3);
        model.scores.truncate(3);
        let frame = frame_for(&[("H1", "Alpha", 50.0, 50.0)]);
        let (out, audits) =
            interpolate_features(&frame, &[model], &coords, 1, &GeostatConfig::default()).unwrap();
        assert_eq!(out.rows["H1"].features["GR_fpc1"], None);
        assert_eq!(audits.len(), 1);
        assert_eq!(audits[0].donors, 3);
        assert_eq!(audits[0].missing.len(), 1);
    }
}
