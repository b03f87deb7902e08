//! Pipeline configuration: one TOML file naming the input files, the study
//! scope, geostatistics and evaluation settings, and the output directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geostat::GeostatConfig;
use crate::models::registry;
use crate::production::Phase;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Input file locations. Relative paths resolve against the config file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsConfig {
    /// Directory of `.las` files, one vertical well each.
    pub las_dir: PathBuf,
    /// Curve alias dictionary CSV (`raw,alias`).
    pub dictionary: PathBuf,
    /// Formation tops CSV (`well_id,formation,top_depth`).
    pub tops: PathBuf,
    /// Vertical well surface coordinates CSV (`well_id,x,y`).
    pub coords: PathBuf,
    /// Formation order file, one name per line, shallowest first.
    pub formation_order: PathBuf,
    /// Horizontal well metadata CSV (`well_id,target_formation,x,y`).
    pub meta: PathBuf,
    /// Daily production CSV (`well_id,date,phase,volume`).
    pub daily: PathBuf,
}

/// What the study covers: which wells (polygon), formations, log properties,
/// and production horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Optional study polygon vertices; wells outside are excluded.
    #[serde(default)]
    pub polygon: Option<Vec<[f64; 2]>>,
    pub formations: Vec<String>,
    pub properties: Vec<String>,
    /// Cumulative production horizons in months.
    pub horizons: Vec<u32>,
    /// Leading fPCA components kept per (property, formation).
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    10
}

/// Resampling and model selection settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Cross-validation folds.
    pub k: usize,
    /// Cross-validation repeats.
    pub b: usize,
    /// Repeats inside each leave-one-well-out iteration.
    pub inner_b: usize,
    pub seed: u64,
    /// Finalists carried into leave-one-well-out validation.
    pub top_m: usize,
    /// Model names to run; `None` means the full registry.
    pub zoo: Option<Vec<String>>,
    pub phases: Vec<String>,
    /// Horizon validated against; defaults to the largest study horizon.
    pub horizon: Option<u32>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            k: 10,
            b: 3,
            inner_b: 1,
            seed: 42,
            top_m: 3,
            zoo: None,
            phases: vec!["oil".to_string(), "gas".to_string()],
            horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: InputsConfig,
    pub study: StudyConfig,
    #[serde(default)]
    pub geostat: GeostatConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    pub output: OutputConfig,
}

impl PipelineConfig {
    /// Horizon the validate stage scores against.
    pub fn validate_horizon(&self) -> u32 {
        self.evaluation
            .horizon
            .unwrap_or_else(|| self.study.horizons.iter().copied().max().unwrap_or(0))
    }

    /// Evaluation phases as parsed enums, in config order.
    pub fn phases(&self) -> Vec<Phase> {
        self.evaluation
            .phases
            .iter()
            .filter_map(|s| Phase::parse(s))
            .collect()
    }
}

/// Parse and validate a config document. Path existence is checked separately
/// by [`load_config`], so unit tests can exercise validation without a
/// filesystem.
pub fn parse_config(text: &str) -> Result<PipelineConfig, ConfigError> {
    let cfg: PipelineConfig = toml::from_str(text)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &PipelineConfig) -> Result<(), ConfigError> {
    let inv = |msg: String| Err(ConfigError::Invalid(msg));
    if cfg.study.formations.is_empty() {
        return inv("study.formations must name at least one formation".into());
    }
    if cfg.study.properties.is_empty() {
        return inv("study.properties must name at least one property".into());
    }
    if cfg.study.horizons.is_empty() {
        return inv("study.horizons must hold at least one horizon".into());
    }
    if cfg.study.k < 1 {
        return inv("study.k must be at least 1".into());
    }
    if let Some(poly) = &cfg.study.polygon {
        if poly.len() < 3 {
            return inv(format!("study.polygon needs at least 3 vertices, got {}", poly.len()));
        }
    }
    let ev = &cfg.evaluation;
    if ev.k < 2 {
        return inv(format!("evaluation.k must be at least 2, got {}", ev.k));
    }
    if ev.b < 1 || ev.inner_b < 1 {
        return inv("evaluation.b and evaluation.inner_b must be at least 1".into());
    }
    if ev.top_m < 1 {
        return inv("evaluation.top_m must be at least 1".into());
    }
    if ev.phases.is_empty() {
        return inv("evaluation.phases must not be empty".into());
    }
    for p in &ev.phases {
        if Phase::parse(p).is_none() {
            return inv(format!("unknown phase {p:?}; expected \"oil\" or \"gas\""));
        }
    }
    if let Some(h) = ev.horizon {
        if !cfg.study.horizons.contains(&h) {
            return inv(format!("evaluation.horizon {h} is not one of study.horizons"));
        }
    }
    if let Some(zoo) = &ev.zoo {
        if zoo.is_empty() {
            return inv("evaluation.zoo must not be an empty list".into());
        }
        let known: BTreeSet<String> = registry().into_iter().map(|s| s.name).collect();
        for name in zoo {
            if !known.contains(name) {
                return inv(format!(
                    "unknown model {name:?}; registry has: {}",
                    known.iter().cloned().collect::<Vec<_>>().join(", ")
                ));
            }
        }
    }
    if cfg.geostat.n_bins < 2 {
        return inv("geostat.n_bins must be at least 2".into());
    }
    if cfg.geostat.idw_power <= 0.0 {
        return inv("geostat.idw_power must be positive".into());
    }
    Ok(())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_to_string(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load a config file: parse, resolve relative paths against the file's
/// directory, and check that every input path exists and that the study
/// formations all appear in the formation order file.
pub fn load_config(path: &Path) -> Result<PipelineConfig, ConfigError> {
    let text = read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();

    let i = &mut cfg.inputs;
    for p in [
        &mut i.las_dir,
        &mut i.dictionary,
        &mut i.tops,
        &mut i.coords,
        &mut i.formation_order,
        &mut i.meta,
        &mut i.daily,
    ] {
        *p = resolve(&base, p);
    }
    cfg.output.dir = resolve(&base, &cfg.output.dir);

    check_exists(&cfg.inputs.las_dir, true)?;
    for p in [
        &cfg.inputs.dictionary,
        &cfg.inputs.tops,
        &cfg.inputs.coords,
        &cfg.inputs.formation_order,
        &cfg.inputs.meta,
        &cfg.inputs.daily,
    ] {
        check_exists(p, false)?;
    }

    let order_text = read_to_string(&cfg.inputs.formation_order)?;
    let order: BTreeSet<&str> = order_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    for f in &cfg.study.formations {
        if !order.contains(f.as_str()) {
            return Err(ConfigError::Invalid(format!(
                "formation {f:?} is not listed in {}",
                cfg.inputs.formation_order.display()
            )));
        }
    }
    Ok(cfg)
}

fn check_exists(path: &Path, dir: bool) -> Result<(), ConfigError> {
    let ok = if dir { path.is_dir() } else { path.is_file() };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!(
            "{} {} does not exist",
            if dir { "directory" } else { "file" },
            path.display()
        )))
    }
}
