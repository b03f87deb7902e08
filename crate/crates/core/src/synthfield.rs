//! Synthetic fields with known ground truth: vertical wells with logs,
//! formation tops, and horizontal wells with production, all driven by
//! latent Gaussian random fields so downstream predictions can be scored
//! against the generating model.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Months, NaiveDate};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::pearson;
use crate::las::{write_las, Curve, LasFile};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    ConfigInvalid(String),
    #[error("prediction well {0:?} is not in the ground truth")]
    UnknownWell(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthFormation {
    pub name: String,
    pub mean_thickness: f64,
}

/// One latent Gaussian random field, attached to a (property, formation)
/// block. The field has unit marginal variance; `amplitude` scales its
/// imprint on the log curves only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentField {
    pub property: String,
    pub formation: String,
    /// e-folding length of the exponential covariance, same units as the
    /// field extent.
    pub correlation_length: f64,
    pub amplitude: f64,
}

/// Weight of one latent component in log production.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalCoefficient {
    pub property: String,
    pub formation: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_vertical: usize,
    pub n_horizontal: usize,
    /// Square field side length; wells are placed uniformly inside it.
    pub field_extent: f64,
    pub formations: Vec<SynthFormation>,
    pub properties: Vec<String>,
    pub latent_fields: Vec<LatentField>,
    pub signal_coefficients: Vec<SignalCoefficient>,
    /// Standard deviation of the log-production noise.
    pub noise_sd: f64,
    /// Standard deviation of the per-sample depth noise on log curves.
    pub depth_noise_sd: f64,
    pub seed: u64,
    pub horizon_months: u32,
    /// Trailing horizontal wells emitted with only 60 days of history.
    pub censor_short_history: usize,
    /// Horizontal wells (before the short-history block) with no gas rows.
    pub censor_gas_missing: usize,
    /// Depth sample spacing for the emitted LAS files.
    pub depth_step: f64,
    /// Baseline of log cumulative production.
    pub log_level: f64,
}

impl SynthConfig {
    /// Study-sized default: 90 vertical and 98 horizontal wells, one target
    /// formation, three properties carrying a planted signal whose variance
    /// equals the noise variance (true-signal R^2 of one half).
    pub fn study_scale(seed: u64) -> SynthConfig {
        let properties = ["GR", "RHOB", "NPHI"];
        SynthConfig {
            n_vertical: 90,
            n_horizontal: 98,
            field_extent: 10_000.0,
            formations: vec![SynthFormation {
                name: "Wolfcamp".to_string(),
                mean_thickness: 120.0,
            }],
            properties: properties.iter().map(|p| p.to_string()).collect(),
            latent_fields: properties
                .iter()
                .map(|p| LatentField {
                    property: p.to_string(),
                    formation: "Wolfcamp".to_string(),
                    correlation_length: 2_000.0,
                    amplitude: 8.0,
                })
                .collect(),
            // Sum of squared weights 0.045 = noise variance, so the planted
            // R^2 is 0.5. Total log sd 0.3 keeps exp() near-affine, so the
            // R^2 also holds on the raw volumes the models actually fit; a
            // larger log variance would concentrate raw-scale variance in
            // the lognormal tail and quietly dilute the planted signal.
            signal_coefficients: [("GR", 0.15), ("RHOB", 0.12), ("NPHI", 0.09)]
                .iter()
                .map(|(p, w)| SignalCoefficient {
                    property: p.to_string(),
                    formation: "Wolfcamp".to_string(),
                    weight: *w,
                })
                .collect(),
            noise_sd: 0.045f64.sqrt(),
            depth_noise_sd: 0.3,
            seed,
            horizon_months: 12,
            censor_short_history: 0,
            censor_gas_missing: 0,
            depth_step: 1.0,
            log_level: 10.0,
        }
    }

    /// `study_scale` with the production-history censoring that produces the
    /// study's 88 oil / 86 gas observation counts out of 98 wells.
    pub fn study_scale_censored(seed: u64) -> SynthConfig {
        SynthConfig {
            censor_short_history: 10,
            censor_gas_missing: 2,
            ..SynthConfig::study_scale(seed)
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |m: String| Err(SynthError::ConfigInvalid(m));
        if self.n_vertical == 0 || self.n_horizontal == 0 {
            return fail("well counts must be at least 1".into());
        }
        if self.formations.is_empty() || self.properties.is_empty() {
            return fail("need at least one formation and one property".into());
        }
        if !(self.field_extent > 0.0) || !(self.depth_step > 0.0) {
            return fail("field_extent and depth_step must be positive".into());
        }
        if self.noise_sd < 0.0 || self.depth_noise_sd < 0.0 {
            return fail("noise standard deviations must be nonnegative".into());
        }
        if self.horizon_months == 0 {
            return fail("horizon_months must be at least 1".into());
        }
        if self.censor_short_history + self.censor_gas_missing > self.n_horizontal {
            return fail("censoring exceeds the horizontal well count".into());
        }
        for f in &self.formations {
            if !(f.mean_thickness > 0.0) {
                return fail(format!("formation {:?} thickness must be positive", f.name));
            }
        }
        for lf in &self.latent_fields {
            if !(lf.correlation_length > 0.0) {
                return fail(format!(
                    "latent field {}@{} correlation length must be positive",
                    lf.property, lf.formation
                ));
            }
            self.check_pair(&lf.property, &lf.formation)?;
        }
        for sc in &self.signal_coefficients {
            self.check_pair(&sc.property, &sc.formation)?;
            if !self
                .latent_fields
                .iter()
                .any(|lf| lf.property == sc.property && lf.formation == sc.formation)
            {
                return fail(format!(
                    "signal on {}@{} has no latent field",
                    sc.property, sc.formation
                ));
            }
        }
        Ok(())
    }

    fn check_pair(&self, property: &str, formation: &str) -> Result<(), SynthError> {
        if !self.properties.iter().any(|p| p == property)
            || !self.formations.iter().any(|f| f.name == formation)
        {
            return Err(SynthError::ConfigInvalid(format!(
                "{property}@{formation} is not in properties x formations"
            )));
        }
        Ok(())
    }
}

/// Latent values and noise-free production means, for scoring predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    /// "(property)@(formation)" -> well id -> unit-variance latent value.
    pub latents: BTreeMap<String, BTreeMap<String, f64>>,
    /// Horizontal well -> noise-free log cumulative oil production.
    pub true_log_mean: BTreeMap<String, f64>,
    /// Phase name -> well -> emitted cumulative volume (before censoring).
    pub observed_cum: BTreeMap<String, BTreeMap<String, f64>>,
    pub censored_short_history: Vec<String>,
    pub censored_gas_only: Vec<String>,
}

/// Everything the pipeline ingests, in memory. LAS structs, not text, so
/// tests can inspect them; `write_to_dir` emits the file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub las: BTreeMap<String, LasFile>,
    pub dictionary_csv: String,
    pub tops_csv: String,
    pub coords_csv: String,
    pub order_text: String,
    pub meta_csv: String,
    pub daily_csv: String,
    pub ground_truth: GroundTruth,
}

/// First production date shared by every horizontal well.
pub const FIRST_PROD_DATE: &str = "2020-01-01";
/// Calendar days of history emitted for short-history censored wells.
const SHORT_HISTORY_DAYS: i64 = 60;
/// Gas volume as a fixed multiple of oil volume.
const GAS_OIL_RATIO: f64 = 6.0;

fn latent_key(property: &str, formation: &str) -> String {
    format!("{property}@{formation}")
}

/// Standard normal via Box-Muller on the shared stream.
fn randn(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Joint draw of a unit-variance exponential-covariance field at `points`.
fn grf(points: &[(f64, f64)], correlation_length: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len();
    let mut cov = DMatrix::from_fn(n, n, |i, j| {
        let d = ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
        (-d / correlation_length).exp()
    });
    for i in 0..n {
        cov[(i, i)] += 1e-10;
    }
    let chol = cov.cholesky().expect("jittered covariance is positive definite");
    let eps: Vec<f64> = (0..n).map(|_| randn(rng)).collect();
    let z = chol.l() * DMatrix::from_column_slice(n, 1, &eps);
    z.column(0).iter().copied().collect()
}

/// Smooth depth template for property index `ip` at normalized depth u.
fn template(ip: usize, u: f64) -> f64 {
    60.0 + 15.0 * ip as f64
        + 20.0 * (std::f64::consts::PI * u).sin()
        + 5.0 * (std::f64::consts::TAU * u).cos()
}

struct TopsModel {
    /// Formation name, nominal top depth, undulation amplitude, phases.
    surfaces: Vec<(String, f64, f64, f64, f64)>,
    extent: f64,
}

impl TopsModel {
    fn top_at(&self, s: usize, x: f64, y: f64) -> f64 {
        let (_, base, amp, phase_x, phase_y) = self.surfaces[s];
        base + amp * (std::f64::consts::TAU * 1.3 * x / self.extent + phase_x).sin()
            + amp * (std::f64::consts::TAU * 0.9 * y / self.extent + phase_y).cos()
    }
}

/// Generate one synthetic field. Fully determined by `cfg.seed`: a single
/// seeded stream drives locations, tops, latent fields, depth noise, and
/// production noise in a fixed order.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // 1. Well locations, verticals first.
    let v_ids: Vec<String> = (0..cfg.n_vertical).map(|i| format!("V{i:03}")).collect();
    let h_ids: Vec<String> = (0..cfg.n_horizontal).map(|i| format!("H{i:03}")).collect();
    let v_xy: Vec<(f64, f64)> = (0..cfg.n_vertical)
        .map(|_| (rng.gen::<f64>() * cfg.field_extent, rng.gen::<f64>() * cfg.field_extent))
        .collect();
    let h_xy: Vec<(f64, f64)> = (0..cfg.n_horizontal)
        .map(|_| (rng.gen::<f64>() * cfg.field_extent, rng.gen::<f64>() * cfg.field_extent))
        .collect();

    // 2. Gently undulating top surfaces; the underburden closes the last
    // formation from below. Amplitudes stay under a tenth of the thinnest
    // formation so surfaces can never cross.
    let min_thickness = cfg
        .formations
        .iter()
        .map(|f| f.mean_thickness)
        .fold(f64::INFINITY, f64::min);
    let amp = 0.1 * min_thickness;
    let mut surfaces = Vec::new();
    let mut base = 5_000.0;
    for f in &cfg.formations {
        let phase_x = rng.gen::<f64>() * std::f64::consts::TAU;
        let phase_y = rng.gen::<f64>() * std::f64::consts::TAU;
        surfaces.push((f.name.clone(), base, amp, phase_x, phase_y));
        base += f.mean_thickness;
    }
    let phase_x = rng.gen::<f64>() * std::f64::consts::TAU;
    let phase_y = rng.gen::<f64>() * std::f64::consts::TAU;
    surfaces.push(("Underburden".to_string(), base, amp, phase_x, phase_y));
    let tops = TopsModel { surfaces, extent: cfg.field_extent };

    // 3. Latent fields drawn jointly at every well location.
    let mut all_xy = v_xy.clone();
    all_xy.extend_from_slice(&h_xy);
    let mut latents: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for lf in &cfg.latent_fields {
        let z = grf(&all_xy, lf.correlation_length, &mut rng);
        let mut per_well = BTreeMap::new();
        for (i, id) in v_ids.iter().chain(h_ids.iter()).enumerate() {
            per_well.insert(id.clone(), z[i]);
        }
        latents.insert(latent_key(&lf.property, &lf.formation), per_well);
    }

    // 4. LAS logs: template per property, shifted inside each formation by
    // amplitude times that block's latent value, plus depth noise.
    let mut las = BTreeMap::new();
    for (i, id) in v_ids.iter().enumerate() {
        let (x, y) = v_xy[i];
        let top0 = tops.top_at(0, x, y);
        let bottom = tops.top_at(cfg.formations.len(), x, y);
        let start = top0 - 10.0;
        let n_samples = ((bottom + 10.0 - start) / cfg.depth_step).ceil() as usize + 1;
        let depth: Vec<f64> = (0..n_samples).map(|k| start + k as f64 * cfg.depth_step).collect();
        let formation_tops: Vec<f64> =
            (0..tops.surfaces.len()).map(|s| tops.top_at(s, x, y)).collect();
        let mut curves = Vec::new();
        for (ip, prop) in cfg.properties.iter().enumerate() {
            let values = depth
                .iter()
                .map(|&d| {
                    // Formation containing d; outside any, template only.
                    let mut value = template(ip, 0.0);
                    for f in 0..cfg.formations.len() {
                        if d >= formation_tops[f] && d < formation_tops[f + 1] {
                            let u = (d - formation_tops[f])
                                / (formation_tops[f + 1] - formation_tops[f]);
                            value = template(ip, u);
                            let key = latent_key(prop, &cfg.formations[f].name);
                            if let Some(per_well) = latents.get(&key) {
                                let lf = cfg
                                    .latent_fields
                                    .iter()
                                    .find(|l| l.property == *prop
                                        && l.formation == cfg.formations[f].name)
                                    .unwrap();
                                value += lf.amplitude * per_well[id];
                            }
                            break;
                        }
                    }
                    Some(value + cfg.depth_noise_sd * randn(&mut rng))
                })
                .collect();
            curves.push(Curve { name: prop.clone(), unit: "U".to_string(), values });
        }
        las.insert(
            id.clone(),
            LasFile {
                well_id: id.clone(),
                location: (x, y),
                null_value: -999.25,
                depth_unit: "FT".to_string(),
                depth,
                curves,
                dropped_rows: 0,
            },
        );
    }

    // 5. Production: log-normal around the planted signal, constant daily
    // rate over the horizon. Gas is a fixed multiple of oil with its own
    // noise draw.
    let first = NaiveDate::parse_from_str(FIRST_PROD_DATE, "%Y-%m-%d").unwrap();
    let end = first + Months::new(cfg.horizon_months);
    let horizon_days = (end - first).num_days();
    let mut true_log_mean = BTreeMap::new();
    let mut cum_oil = BTreeMap::new();
    let mut cum_gas = BTreeMap::new();
    for id in &h_ids {
        let mut log_mean = cfg.log_level;
        for sc in &cfg.signal_coefficients {
            log_mean += sc.weight * latents[&latent_key(&sc.property, &sc.formation)][id];
        }
        let oil = (log_mean + cfg.noise_sd * randn(&mut rng)).exp();
        let gas = (log_mean + GAS_OIL_RATIO.ln() + cfg.noise_sd * randn(&mut rng)).exp();
        true_log_mean.insert(id.clone(), log_mean);
        cum_oil.insert(id.clone(), oil);
        cum_gas.insert(id.clone(), gas);
    }

    // 6. Censoring: the trailing block loses history length, the block just
    // before it loses its gas stream.
    let short_from = cfg.n_horizontal - cfg.censor_short_history;
    let gas_from = short_from - cfg.censor_gas_missing;
    let censored_short: Vec<String> = h_ids[short_from..].to_vec();
    let censored_gas: Vec<String> = h_ids[gas_from..short_from].to_vec();

    let mut daily_csv = String::from("well_id,date,oil,gas\n");
    for (i, id) in h_ids.iter().enumerate() {
        let days = if i >= short_from { SHORT_HISTORY_DAYS } else { horizon_days };
        let oil_rate = cum_oil[id] / horizon_days as f64;
        let gas_rate = cum_gas[id] / horizon_days as f64;
        let gas_missing = i >= gas_from && i < short_from;
        let mut date = first;
        for _ in 0..days {
            if gas_missing {
                daily_csv.push_str(&format!("{id},{date},{oil_rate},\n"));
            } else {
                daily_csv.push_str(&format!("{id},{date},{oil_rate},{gas_rate}\n"));
            }
            date = date.succ_opt().unwrap();
        }
    }

    // 7. Companion text files.
    let mut tops_csv = String::from("well_id,formation,top_depth\n");
    let mut coords_csv = String::from("well_id,x,y\n");
    for (i, id) in v_ids.iter().enumerate() {
        let (x, y) = v_xy[i];
        coords_csv.push_str(&format!("{id},{x},{y}\n"));
        for s in 0..tops.surfaces.len() {
            tops_csv.push_str(&format!("{id},{},{}\n", tops.surfaces[s].0, tops.top_at(s, x, y)));
        }
    }
    let mut order_text = String::new();
    for (name, ..) in &tops.surfaces {
        order_text.push_str(name);
        order_text.push('\n');
    }
    let mut meta_csv = String::from("well_id,target_formation,x,y\n");
    for (i, id) in h_ids.iter().enumerate() {
        let (x, y) = h_xy[i];
        meta_csv.push_str(&format!("{id},{},{x},{y}\n", cfg.formations[0].name));
    }
    let mut dictionary_csv = String::from("raw,alias\n");
    for p in &cfg.properties {
        dictionary_csv.push_str(&format!("{p},{p}\n"));
    }

    let mut observed_cum = BTreeMap::new();
    observed_cum.insert("oil".to_string(), cum_oil);
    observed_cum.insert("gas".to_string(), cum_gas);
    Ok(SynthOutput {
        las,
        dictionary_csv,
        tops_csv,
        coords_csv,
        order_text,
        meta_csv,
        daily_csv,
        ground_truth: GroundTruth {
            seed: cfg.seed,
            latents,
            true_log_mean,
            observed_cum,
            censored_short_history: censored_short,
            censored_gas_only: censored_gas,
        },
    })
}

impl SynthOutput {
    /// Write the pipeline file layout: `las/<well>.las`, the CSV and order
    /// files, and `ground_truth.json`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SynthError> {
        let write = |path: std::path::PathBuf, content: &str| {
            std::fs::write(&path, content).map_err(|source| SynthError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let las_dir = dir.join("las");
        std::fs::create_dir_all(&las_dir).map_err(|source| SynthError::Io {
            path: las_dir.display().to_string(),
            source,
        })?;
        for (id, file) in &self.las {
            write(las_dir.join(format!("{id}.las")), &write_las(file))?;
        }
        write(dir.join("dictionary.csv"), &self.dictionary_csv)?;
        write(dir.join("tops.csv"), &self.tops_csv)?;
        write(dir.join("coords.csv"), &self.coords_csv)?;
        write(dir.join("formation_order.txt"), &self.order_text)?;
        write(dir.join("meta.csv"), &self.meta_csv)?;
        write(dir.join("daily.csv"), &self.daily_csv)?;
        let gt = serde_json::to_string_pretty(&self.ground_truth).expect("serializable");
        write(dir.join("ground_truth.json"), &gt)?;
        Ok(())
    }
}

/// Squared correlation between predictions and the true noise-free
/// production mean (exp of the planted log mean). `None` when either side
/// has no variance.
pub fn oracle_r2(
    gt: &GroundTruth,
    predictions: &BTreeMap<String, f64>,
) -> Result<Option<f64>, SynthError> {
    let mut truth = Vec::with_capacity(predictions.len());
    let mut preds = Vec::with_capacity(predictions.len());
    for (well, p) in predictions {
        let Some(m) = gt.true_log_mean.get(well) else {
            return Err(SynthError::UnknownWell(well.clone()));
        };
        truth.push(m.exp());
        preds.push(*p);
    }
    Ok(pearson(&truth, &preds).map(|r| r * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::{build_formation_map, load_tops};
    use crate::geostat::{empirical_variogram, fit_variogram, SpatialSamples, VariogramFamily};
    use crate::las::{apply_dictionary, load_dictionary, parse_las};
    use crate::production::{build_production_frame, load_daily, load_meta, Phase};

    fn small_cfg(seed: u64) -> SynthConfig {
        SynthConfig {
            n_vertical: 12,
            n_horizontal: 14,
            ..SynthConfig::study_scale(seed)
        }
    }

    #[test]
    fn same_seed_reproduces_everything() {
        let a = generate(&small_cfg(5)).unwrap();
        let b = generate(&small_cfg(5)).unwrap();
        assert_eq!(a, b);
        let c = generate(&small_cfg(6)).unwrap();
        assert_ne!(a.daily_csv, c.daily_csv);
    }

    #[test]
    fn emitted_las_round_trips_and_matches_the_dictionary() {
        let out = generate(&small_cfg(1)).unwrap();
        let dict = load_dictionary(&out.dictionary_csv).unwrap();
        for file in out.las.values() {
            let parsed = parse_las(&write_las(file)).unwrap();
            assert_eq!(&parsed, file);
            let (canon, skipped) = apply_dictionary(&parsed, &dict);
            assert!(skipped.is_empty());
            for prop in ["GR", "RHOB", "NPHI"] {
                assert!(canon.curve(prop).is_some(), "{prop} missing");
            }
        }
    }

    #[test]
    fn tops_build_a_complete_formation_map() {
        let out = generate(&small_cfg(2)).unwrap();
        let table = load_tops(&out.tops_csv, &out.coords_csv, &out.order_text).unwrap();
        let map = build_formation_map(&table, &["Wolfcamp".to_string()]).unwrap();
        assert!(map.excluded.is_empty());
        let wells = map.wells_for("Wolfcamp");
        assert_eq!(wells.len(), 12);
        for w in wells {
            let iv = map.interval(w, "Wolfcamp").unwrap();
            assert!(iv.top < iv.bottom);
            // Logs cover the interval.
            let las = &out.las[w];
            assert!(*las.depth.first().unwrap() <= iv.top);
            assert!(*las.depth.last().unwrap() >= iv.bottom);
        }
    }

    #[test]
    fn zero_noise_production_is_exactly_the_planted_function() {
        let mut cfg = small_cfg(3);
        cfg.noise_sd = 0.0;
        let out = generate(&cfg).unwrap();
        let daily = load_daily(&out.daily_csv).unwrap();
        let meta = load_meta(&out.meta_csv).unwrap();
        let frame =
            build_production_frame(&daily, &meta, &["Wolfcamp".to_string()], &[12]).unwrap();
        for (well, log_mean) in &out.ground_truth.true_log_mean {
            let cum = frame.cum(well, Phase::Oil, 12).unwrap();
            let expect = log_mean.exp();
            assert!(
                (cum - expect).abs() <= 1e-9 * expect,
                "{well}: {cum} vs {expect}"
            );
        }
    }

    #[test]
    fn censoring_produces_the_study_observation_counts() {
        let cfg = SynthConfig::study_scale_censored(7);
        let out = generate(&cfg).unwrap();
        assert_eq!(out.ground_truth.censored_short_history.len(), 10);
        assert_eq!(out.ground_truth.censored_gas_only.len(), 2);
        let daily = load_daily(&out.daily_csv).unwrap();
        let meta = load_meta(&out.meta_csv).unwrap();
        let frame =
            build_production_frame(&daily, &meta, &["Wolfcamp".to_string()], &[12]).unwrap();
        let count = |phase: Phase| {
            frame
                .rows
                .keys()
                .filter(|w| frame.cum(w, phase, 12).is_some())
                .count()
        };
        assert_eq!(count(Phase::Oil), 88);
        assert_eq!(count(Phase::Gas), 86);
    }

    #[test]
    fn latent_variogram_range_tracks_the_configured_length() {
        // 90-sample variograms scatter, so the consistency claim is about
        // the center of the seed distribution, not each draw.
        let mut fitted_ranges = Vec::new();
        for seed in 0..20 {
            let cfg = SynthConfig::study_scale(seed);
            let out = generate(&cfg).unwrap();
            let z = &out.ground_truth.latents["GR@Wolfcamp"];
            let table = load_tops(&out.tops_csv, &out.coords_csv, &out.order_text).unwrap();
            let samples = SpatialSamples::new(table.well_coords.iter().map(|(w, xy)| {
                (w.clone(), *xy, z[w])
            }));
            let emp = empirical_variogram(&samples, 12, None).unwrap();
            let fit = fit_variogram(&emp, VariogramFamily::Exponential).unwrap();
            assert!(!fit.degenerate);
            fitted_ranges.push(fit.model.range);
        }
        fitted_ranges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = fitted_ranges[fitted_ranges.len() / 2];
        assert!(
            (1_000.0..=3_000.0).contains(&median),
            "median fitted range {median} outside 50% of 2000"
        );
    }

    #[test]
    fn oracle_r2_examples() {
        let out = generate(&small_cfg(9)).unwrap();
        let gt = &out.ground_truth;
        let exact: BTreeMap<String, f64> =
            gt.true_log_mean.iter().map(|(w, m)| (w.clone(), m.exp())).collect();
        let r2 = oracle_r2(gt, &exact).unwrap().unwrap();
        assert!((r2 - 1.0).abs() < 1e-12);

        let constant: BTreeMap<String, f64> =
            gt.true_log_mean.keys().map(|w| (w.clone(), 3.0)).collect();
        assert_eq!(oracle_r2(gt, &constant).unwrap(), None);

        let mut unknown = exact.clone();
        unknown.insert("NOPE".to_string(), 1.0);
        assert!(matches!(oracle_r2(gt, &unknown), Err(SynthError::UnknownWell(_))));
    }

    #[test]
    fn equal_variance_noise_attenuates_r2_to_about_half() {
        let mut r2s = Vec::new();
        for seed in 0..20 {
            let out = generate(&small_cfg(100 + seed)).unwrap();
            let gt = &out.ground_truth;
            let means: Vec<f64> = gt.true_log_mean.values().map(|m| m.exp()).collect();
            let mu = means.iter().sum::<f64>() / means.len() as f64;
            let sd = (means.iter().map(|m| (m - mu).powi(2)).sum::<f64>()
                / (means.len() - 1) as f64)
                .sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noisy: BTreeMap<String, f64> = gt
                .true_log_mean
                .iter()
                .map(|(w, m)| (w.clone(), m.exp() + sd * randn(&mut rng)))
                .collect();
            r2s.push(oracle_r2(gt, &noisy).unwrap().unwrap());
        }
        let mean_r2 = r2s.iter().sum::<f64>() / r2s.len() as f64;
        assert!((0.4..=0.6).contains(&mean_r2), "mean r2 {mean_r2}");
    }

    #[test]
    fn config_validation_rejects_bad_setups() {
        let mut cfg = small_cfg(0);
        cfg.n_vertical = 0;
        assert!(generate(&cfg).is_err());

        let mut cfg = small_cfg(0);
        cfg.signal_coefficients[0].property = "NOPE".to_string();
        assert!(generate(&cfg).is_err());

        let mut cfg = small_cfg(0);
        cfg.censor_short_history = 20;
        assert!(generate(&cfg).is_err());

        let mut cfg = small_cfg(0);
        cfg.latent_fields[0].correlation_length = 0.0;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn zero_signal_keeps_production_independent_of_latents() {
        let mut cfg = small_cfg(4);
        for sc in &mut cfg.signal_coefficients {
            sc.weight = 0.0;
        }
        let out = generate(&cfg).unwrap();
        let means: Vec<f64> = out.ground_truth.true_log_mean.values().copied().collect();
        assert!(means.iter().all(|m| *m == cfg.log_level));
    }
}
