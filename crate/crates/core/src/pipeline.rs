//! End-to-end orchestration of the three pipeline stages, rooted at the
//! config's output directory:
//!
//! 1. preprocess: LAS ingest, curve canonicalization, formation mapping,
//!    depth-normalized log blocks, cumulative production frame.
//! 2. features: fPCA per block, kriging of leading scores to the horizontal
//!    wells, feature columns appended to the production frame.
//! 3. validate: model benchmark, nested leave-one-well-out runs per phase,
//!    kriging-on-production baseline, rendered reports.
//!
//! Every stage is deterministic under a fixed config and seed and overwrites
//! its own outputs, so reruns converge to the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, PipelineConfig};
use crate::evaluation::{assemble, kriging_baseline, make_plan, nested_loo};
use crate::formation::{build_formation_map, infer_missing_tops, load_tops, TopsTable};
use crate::fpca::{fit_fpca, FpcaModel};
use crate::geostat::{interpolate_features, FeatureAudit};
use crate::las::{apply_dictionary, load_dictionary, parse_las, LasFile};
use crate::log_frame::{build_standardized_frame, read_block_csv, write_block_csv};
use crate::production::{
    build_production_frame, load_daily, load_meta, read_frame_csv, write_frame_csv,
};
use crate::report::{render_outputs, summary_text, ValidationReport};
use crate::synthfield::{generate, SynthConfig, SynthError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Bad or insufficient input data; the message carries file or well
    /// context.
    #[error("{0}")]
    Data(String),
    /// Output writing or serialization failures.
    #[error("{0}")]
    Internal(String),
}

impl PipelineError {
    /// Process exit code: 1 config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data(_) => 2,
            PipelineError::Internal(_) => 3,
        }
    }
}

impl From<SynthError> for PipelineError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::ConfigInvalid(msg) => PipelineError::Config(ConfigError::Invalid(msg)),
            other => PipelineError::Internal(other.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Data(format!("reading {}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text)
        .map_err(|e| PipelineError::Internal(format!("writing {}: {e}", path.display())))
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, PipelineError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| PipelineError::Internal(format!("serializing: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Even-odd ray casting; suitable for the simple study polygons the config
/// allows. Boundary points count by ray parity, so wells exactly on an edge
/// should not be relied on either way.
pub fn point_in_polygon(p: (f64, f64), poly: &[[f64; 2]]) -> bool {
    let (x, y) = p;
    let mut inside = false;
    for i in 0..poly.len() {
        let [x1, y1] = poly[i];
        let [x2, y2] = poly[(i + 1) % poly.len()];
        if (y1 > y) != (y2 > y) {
            let xi = x1 + (y - y1) / (y2 - y1) * (x2 - x1);
            if x < xi {
                inside = !inside;
            }
        }
    }
    inside
}

/// Audit trail written by the preprocess stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessAudit {
    pub las_files: usize,
    pub vertical_wells: usize,
    pub horizontal_wells: usize,
    /// Wells cut by the study polygon (or lacking coordinates while a
    /// polygon is set).
    pub excluded_vertical: Vec<String>,
    pub excluded_horizontal: Vec<String>,
    /// Curves no dictionary alias claimed, per well.
    pub unmapped_curves: BTreeMap<String, Vec<String>>,
    /// Malformed data rows dropped at parse time, per well.
    pub dropped_rows: BTreeMap<String, usize>,
    /// Top records added by spatial inference.
    pub inferred_tops: usize,
    /// Per "property/formation" block: wells kept and rejection reasons.
    pub blocks: BTreeMap<String, BlockAudit>,
    pub production_wells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAudit {
    pub wells: usize,
    pub rejections: Vec<String>,
}

/// Index entry mapping a block CSV file to its (property, formation) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockIndexEntry {
    pub property: String,
    pub formation: String,
}

fn block_file_name(property: &str, formation: &str) -> String {
    let safe = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect()
    };
    format!("{}__{}.csv", safe(property), safe(formation))
}

/// Load tops and apply the study polygon. Returns the filtered table plus the
/// excluded vertical well ids.
fn load_study_tops(cfg: &PipelineConfig) -> Result<(TopsTable, Vec<String>), PipelineError> {
    let tops_csv = read_input(&cfg.inputs.tops)?;
    let coords_csv = read_input(&cfg.inputs.coords)?;
    let order_text = read_input(&cfg.inputs.formation_order)?;
    let tops = load_tops(&tops_csv, &coords_csv, &order_text)
        .map_err(|e| PipelineError::Data(format!("loading tops: {e}")))?;

    let Some(poly) = &cfg.study.polygon else {
        return Ok((tops, Vec::new()));
    };
    let keep: BTreeSet<String> = tops
        .well_coords
        .iter()
        .filter(|(_, &xy)| point_in_polygon(xy, poly))
        .map(|(w, _)| w.clone())
        .collect();
    let mut excluded: Vec<String> = tops
        .records
        .iter()
        .map(|r| r.well_id.clone())
        .chain(tops.well_coords.keys().cloned())
        .filter(|w| !keep.contains(w))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    excluded.sort();
    let filtered = TopsTable {
        records: tops
            .records
            .iter()
            .filter(|r| keep.contains(&r.well_id))
            .cloned()
            .collect(),
        well_coords: tops
            .well_coords
            .iter()
            .filter(|(w, _)| keep.contains(*w))
            .map(|(w, &xy)| (w.clone(), xy))
            .collect(),
        formation_order: tops.formation_order,
    };
    if filtered.well_coords.is_empty() {
        return Err(PipelineError::Data(
            "study polygon excludes every vertical well".to_string(),
        ));
    }
    Ok((filtered, excluded))
}

/// Stage 1: ingest inputs, write standardized log blocks and the production
/// frame under the output directory.
pub fn run_preprocess(cfg: &PipelineConfig) -> Result<PreprocessAudit, PipelineError> {
    let out = &cfg.output.dir;
    let blocks_dir = out.join("blocks");
    std::fs::create_dir_all(&blocks_dir)
        .map_err(|e| PipelineError::Internal(format!("creating {}: {e}", blocks_dir.display())))?;

    let dict_text = read_input(&cfg.inputs.dictionary)?;
    let dict = load_dictionary(&dict_text)
        .map_err(|e| PipelineError::Data(format!("loading dictionary: {e}")))?;

    // LAS files sorted by file name so the run order is stable.
    let mut las_paths: Vec<PathBuf> = std::fs::read_dir(&cfg.inputs.las_dir)
        .map_err(|e| PipelineError::Data(format!("reading {}: {e}", cfg.inputs.las_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("las"))
        })
        .collect();
    las_paths.sort();
    if las_paths.is_empty() {
        return Err(PipelineError::Data(format!(
            "no .las files in {}",
            cfg.inputs.las_dir.display()
        )));
    }

    let mut audit = PreprocessAudit {
        las_files: las_paths.len(),
        vertical_wells: 0,
        horizontal_wells: 0,
        excluded_vertical: Vec::new(),
        excluded_horizontal: Vec::new(),
        unmapped_curves: BTreeMap::new(),
        dropped_rows: BTreeMap::new(),
        inferred_tops: 0,
        blocks: BTreeMap::new(),
        production_wells: 0,
    };

    let mut files: Vec<LasFile> = Vec::with_capacity(las_paths.len());
    let mut seen = BTreeSet::new();
    for path in &las_paths {
        let text = read_input(path)?;
        let parsed = parse_las(&text)
            .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        if !seen.insert(parsed.well_id.clone()) {
            return Err(PipelineError::Data(format!(
                "well id {:?} appears in more than one LAS file",
                parsed.well_id
            )));
        }
        let (canonical, skipped) = apply_dictionary(&parsed, &dict);
        if !skipped.is_empty() {
            audit.unmapped_curves.insert(canonical.well_id.clone(), skipped);
        }
        if canonical.dropped_rows > 0 {
            audit
                .dropped_rows
                .insert(canonical.well_id.clone(), canonical.dropped_rows);
        }
        files.push(canonical);
    }

    let (tops, excluded_vertical) = load_study_tops(cfg)?;
    if cfg.study.polygon.is_some() {
        let keep: BTreeSet<&str> = tops.well_coords.keys().map(String::as_str).collect();
        files.retain(|f| keep.contains(f.well_id.as_str()));
        if files.is_empty() {
            return Err(PipelineError::Data(
                "study polygon excludes every vertical well with logs".to_string(),
            ));
        }
    }
    audit.excluded_vertical = excluded_vertical;
    audit.vertical_wells = files.len();

    let before = tops.records.len();
    let tops = infer_missing_tops(&tops, cfg.geostat.idw_power)
        .map_err(|e| PipelineError::Data(format!("inferring tops: {e}")))?;
    audit.inferred_tops = tops.records.len() - before;

    let map = build_formation_map(&tops, &cfg.study.formations)
        .map_err(|e| PipelineError::Data(format!("building formation map: {e}")))?;

    let mut index: BTreeMap<String, BlockIndexEntry> = BTreeMap::new();
    for property in &cfg.study.properties {
        let frame = build_standardized_frame(&files, &map, property, &cfg.study.formations);
        for (formation, block) in &frame.blocks {
            let name = block_file_name(property, formation);
            write_output(&blocks_dir.join(&name), &write_block_csv(block))?;
            index.insert(
                name,
                BlockIndexEntry {
                    property: property.clone(),
                    formation: formation.clone(),
                },
            );
        }
        for formation in frame
            .blocks
            .keys()
            .map(String::as_str)
            .chain(frame.empty_blocks.iter().map(String::as_str))
        {
            let key = format!("{property}/{formation}");
            let rejections: Vec<String> = frame
                .rejections
                .iter()
                .filter(|r| r.formation == formation)
                .map(|r| format!("{}: {}", r.well_id, r.reason))
                .collect();
            let wells = frame.blocks.get(formation).map_or(0, |b| b.well_ids.len());
            audit.blocks.insert(key, BlockAudit { wells, rejections });
        }
    }
    write_output(&blocks_dir.join("index.json"), &to_json_pretty(&index)?)?;

    let meta_text = read_input(&cfg.inputs.meta)?;
    let mut meta = load_meta(&meta_text)
        .map_err(|e| PipelineError::Data(format!("loading meta: {e}")))?;
    if let Some(poly) = &cfg.study.polygon {
        let excluded: Vec<String> = meta
            .iter()
            .filter(|(_, row)| !point_in_polygon((row.x, row.y), poly))
            .map(|(w, _)| w.clone())
            .collect();
        for w in &excluded {
            meta.remove(w);
        }
        if meta.is_empty() {
            return Err(PipelineError::Data(
                "study polygon excludes every horizontal well".to_string(),
            ));
        }
        audit.excluded_horizontal = excluded;
    }
    audit.horizontal_wells = meta.len();

    let daily_text = read_input(&cfg.inputs.daily)?;
    let daily = load_daily(&daily_text)
        .map_err(|e| PipelineError::Data(format!("loading daily production: {e}")))?;
    let frame = build_production_frame(&daily, &meta, &tops.formation_order, &cfg.study.horizons)
        .map_err(|e| PipelineError::Data(format!("building production frame: {e}")))?;
    audit.production_wells = frame.rows.len();

    write_output(&out.join("production_frame.csv"), &write_frame_csv(&frame))?;
    write_output(&out.join("preprocess_audit.json"), &to_json_pretty(&audit)?)?;
    Ok(audit)
}

/// Audit trail written by the features stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesAudit {
    pub models_fit: usize,
    /// Blocks that could not support an fPCA fit, with the reason.
    pub skipped_blocks: Vec<SkippedBlock>,
    /// Feature columns now present on the production frame.
    pub feature_columns: Vec<String>,
    /// Per-feature interpolation audit from the geostat stage.
    pub interpolation: Vec<FeatureAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedBlock {
    pub property: String,
    pub formation: String,
    pub reason: String,
}

/// Stage 2: fit fPCA per block and interpolate the leading scores to the
/// horizontal wells; rewrites the production frame with feature columns.
pub fn run_features(cfg: &PipelineConfig) -> Result<FeaturesAudit, PipelineError> {
    let out = &cfg.output.dir;
    let blocks_dir = out.join("blocks");
    let index_path = blocks_dir.join("index.json");
    if !index_path.is_file() {
        return Err(PipelineError::Data(format!(
            "{} not found; run the preprocess stage first",
            index_path.display()
        )));
    }
    let index: BTreeMap<String, BlockIndexEntry> = serde_json::from_str(&read_input(&index_path)?)
        .map_err(|e| PipelineError::Data(format!("parsing {}: {e}", index_path.display())))?;

    let mut audit = FeaturesAudit {
        models_fit: 0,
        skipped_blocks: Vec::new(),
        feature_columns: Vec::new(),
        interpolation: Vec::new(),
    };

    let mut models: Vec<FpcaModel> = Vec::new();
    for (file, entry) in &index {
        let block = read_block_csv(&read_input(&blocks_dir.join(file))?)
            .map_err(|e| PipelineError::Data(format!("parsing block {file}: {e}")))?;
        match fit_fpca(&block.matrix, &block.well_ids, &entry.property, &entry.formation) {
            Ok(model) => models.push(model),
            Err(e) => audit.skipped_blocks.push(SkippedBlock {
                property: entry.property.clone(),
                formation: entry.formation.clone(),
                reason: e.to_string(),
            }),
        }
    }
    audit.models_fit = models.len();

    let (tops, _) = load_study_tops(cfg)?;
    let frame_path = out.join("production_frame.csv");
    let mut frame = read_frame_csv(&read_input(&frame_path)?)
        .map_err(|e| PipelineError::Data(format!("parsing {}: {e}", frame_path.display())))?;

    // Idempotent reruns: drop columns from a previous features pass before
    // appending fresh ones.
    if !frame.feature_names.is_empty() {
        frame.feature_names.clear();
        for row in frame.rows.values_mut() {
            row.features.clear();
        }
    }

    let (frame, interp_audit) = interpolate_features(
        &frame,
        &models,
        &tops.well_coords,
        cfg.study.k,
        &cfg.geostat,
    )
    .map_err(|e| PipelineError::Data(format!("interpolating features: {e}")))?;
    audit.feature_columns = frame.feature_names.clone();
    audit.interpolation = interp_audit;

    write_output(&frame_path, &write_frame_csv(&frame))?;
    write_output(&out.join("fpca_models.json"), &to_json_pretty(&models)?)?;
    write_output(&out.join("features_audit.json"), &to_json_pretty(&audit)?)?;
    Ok(audit)
}

/// Stage 3: benchmark the zoo, run nested leave-one-well-out validation per
/// phase with the kriging baseline, and render the report files.
pub fn run_validate(cfg: &PipelineConfig) -> Result<ValidationReport, PipelineError> {
    let out = &cfg.output.dir;
    let frame_path = out.join("production_frame.csv");
    if !frame_path.is_file() {
        return Err(PipelineError::Data(format!(
            "{} not found; run preprocess and features first",
            frame_path.display()
        )));
    }
    let frame = read_frame_csv(&read_input(&frame_path)?)
        .map_err(|e| PipelineError::Data(format!("parsing {}: {e}", frame_path.display())))?;
    if frame.feature_names.is_empty() {
        return Err(PipelineError::Data(
            "production frame has no feature columns; run the features stage first".to_string(),
        ));
    }

    let horizon = cfg.validate_horizon();
    if !frame.horizons.contains(&horizon) {
        return Err(PipelineError::Data(format!(
            "horizon {horizon} not in the production frame (has {:?})",
            frame.horizons
        )));
    }

    let registry = crate::models::registry();
    let zoo: Vec<crate::models::ModelSpec> = match &cfg.evaluation.zoo {
        None => registry,
        Some(names) => registry
            .into_iter()
            .filter(|s| names.contains(&s.name))
            .collect(),
    };

    let ev = &cfg.evaluation;
    let mut phases = BTreeMap::new();
    for phase in cfg.phases() {
        let ad = assemble(&frame, phase, horizon)
            .map_err(|e| PipelineError::Data(format!("assembling {}: {e}", phase.as_str())))?;
        let plan = make_plan(ad.n(), ev.k, ev.b, ev.seed)
            .map_err(|e| PipelineError::Data(format!("{}: {e}", phase.as_str())))?;
        // The inner loop sees one fewer well; cap the fold count so small
        // datasets stay runnable.
        let inner_k = ev.k.min(ad.n() - 1);
        let mut loo = nested_loo(&ad, phase, horizon, &zoo, ev.top_m, &plan, inner_k, ev.inner_b)
            .map_err(|e| PipelineError::Data(format!("{} validation: {e}", phase.as_str())))?;
        let baseline = kriging_baseline(&ad, &cfg.geostat)
            .map_err(|e| PipelineError::Data(format!("{} kriging baseline: {e}", phase.as_str())))?;
        loo.baseline = Some(baseline);
        phases.insert(phase.as_str().to_string(), loo);
    }

    let report = ValidationReport {
        horizon_months: horizon,
        k: ev.k,
        b: ev.b,
        inner_b: ev.inner_b,
        seed: ev.seed,
        top_m: ev.top_m,
        phases,
    };
    for (name, content) in render_outputs(&report) {
        write_output(&out.join(name), &content)?;
    }
    Ok(report)
}

/// Re-render every report artifact from `report.json` and return the summary
/// text. Lets plot or CSV tweaks be regenerated without revalidating.
pub fn run_report(cfg: &PipelineConfig) -> Result<String, PipelineError> {
    let path = cfg.output.dir.join("report.json");
    if !path.is_file() {
        return Err(PipelineError::Data(format!(
            "{} not found; run the validate stage first",
            path.display()
        )));
    }
    let report = crate::report::parse_report_json(&read_input(&path)?)
        .map_err(|e| PipelineError::Data(format!("parsing {}: {e}", path.display())))?;
    for (name, content) in render_outputs(&report) {
        write_output(&cfg.output.dir.join(name), &content)?;
    }
    Ok(summary_text(&report))
}

/// Generate a synthetic field into `out`.
pub fn run_synth(cfg: &SynthConfig, out: &Path) -> Result<(), PipelineError> {
    let output = generate(cfg)?;
    output.write_to_dir(out)?;
    Ok(())
}
