//! Cumulative production frame for horizontal wells.
//!
//! One row per well in the metadata table: identity, target formation,
//! surface coordinates, cumulative production per (phase, horizon), and
//! appended feature columns. Horizons are calendar months from the first
//! production date, half-open; a series that ends before the horizon yields
//! a missing value rather than an undercounted sum.

use std::collections::BTreeMap;

use chrono::{Months, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProductionError {
    #[error("well {well:?} reports negative volume {volume} on {date}")]
    NegativeVolume {
        well: String,
        date: NaiveDate,
        volume: f64,
    },
    #[error("well {0:?} absent from metadata")]
    WellAbsent(String),
    #[error("formation {0:?} not recognized against the formation order list")]
    FormationUnrecognized(String),
    #[error("feature {0:?} already present")]
    DuplicateFeature(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {message}")]
    BadRow { row: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Oil,
    Gas,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::Oil, Phase::Gas];

    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Oil => "oil",
            Phase::Gas => "gas",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s.to_ascii_lowercase().as_str() {
            "oil" => Some(Phase::Oil),
            "gas" => Some(Phase::Gas),
            _ => None,
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Column name for a cumulative production value, e.g. `Cum_12month_oil_Prod`.
pub fn cum_column(phase: Phase, months: u32) -> String {
    format!("Cum_{months}month_{phase}_Prod")
}

/// Sum daily volumes over `[first date, first date + months)`.
///
/// Returns `None` for an empty series or one that ends before the horizon.
/// Dates without a row contribute nothing; a reported zero is data.
pub fn cumulative_production(
    daily: &[(NaiveDate, f64)],
    months: u32,
    well: &str,
) -> Result<Option<f64>, ProductionError> {
    let Some(&(first, _)) = daily.first() else {
        return Ok(None);
    };
    for &(date, volume) in daily {
        if volume < 0.0 {
            return Err(ProductionError::NegativeVolume {
                well: well.to_string(),
                date,
                volume,
            });
        }
    }
    let end = first
        .checked_add_months(Months::new(months))
        .expect("horizon within calendar range");
    let last_day = end.pred_opt().expect("horizon end has a predecessor");
    let &(last, _) = daily.last().expect("non-empty");
    if last < last_day {
        return Ok(None);
    }
    Ok(Some(
        daily
            .iter()
            .filter(|(d, _)| *d < end)
            .map(|(_, v)| v)
            .sum(),
    ))
}

/// Normalization used when matching formation names: case-folded with all
/// whitespace removed, so "wolfcamp a" matches "WolfcampA".
pub fn fold_formation(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRow {
    pub target_formation: String,
    pub x: f64,
    pub y: f64,
}

/// Metadata table keyed by well id.
pub type MetaTable = BTreeMap<String, MetaRow>;

/// Parse `well_id,target_formation,x,y` CSV.
pub fn load_meta(text: &str) -> Result<MetaTable, ProductionError> {
    let mut meta = MetaTable::new();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 4 {
            return Err(ProductionError::BadRow {
                row: i + 2,
                message: "expected well_id,target_formation,x,y".into(),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| ProductionError::BadRow {
                row: i + 2,
                message: format!("{what} {s:?} is not a number"),
            })
        };
        meta.insert(
            record[0].to_string(),
            MetaRow {
                target_formation: record[1].to_string(),
                x: parse(&record[2], "x")?,
                y: parse(&record[3], "y")?,
            },
        );
    }
    Ok(meta)
}

/// Resolve a well's target formation against the canonical order list.
pub fn find_target_formation(
    meta: &MetaTable,
    well_id: &str,
    formation_order: &[String],
) -> Result<String, ProductionError> {
    let row = meta
        .get(well_id)
        .ok_or_else(|| ProductionError::WellAbsent(well_id.to_string()))?;
    let folded = fold_formation(&row.target_formation);
    formation_order
        .iter()
        .find(|f| fold_formation(f) == folded)
        .cloned()
        .ok_or_else(|| ProductionError::FormationUnrecognized(row.target_formation.clone()))
}

/// Daily production series per well and phase, parsed from
/// `well_id,date,oil,gas` CSV. Empty phase fields mean "no report for that
/// phase that day"; duplicate (well, date) rows are summed.
pub type DailyTable = BTreeMap<String, BTreeMap<Phase, Vec<(NaiveDate, f64)>>>;

pub fn load_daily(text: &str) -> Result<DailyTable, ProductionError> {
    let mut per_well: BTreeMap<String, BTreeMap<Phase, BTreeMap<NaiveDate, f64>>> =
        BTreeMap::new();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 4 {
            return Err(ProductionError::BadRow {
                row: i + 2,
                message: "expected well_id,date,oil,gas".into(),
            });
        }
        let well = record[0].to_string();
        let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|_| {
            ProductionError::BadRow {
                row: i + 2,
                message: format!("date {:?} is not YYYY-MM-DD", &record[1]),
            }
        })?;
        for (phase, field) in [(Phase::Oil, &record[2]), (Phase::Gas, &record[3])] {
            if field.is_empty() {
                continue;
            }
            let v = field.parse::<f64>().map_err(|_| ProductionError::BadRow {
                row: i + 2,
                message: format!("volume {field:?} is not a number"),
            })?;
            *per_well
                .entry(well.clone())
                .or_default()
                .entry(phase)
                .or_default()
                .entry(date)
                .or_insert(0.0) += v;
        }
    }
    Ok(per_well
        .into_iter()
        .map(|(w, phases)| {
            (
                w,
                phases
                    .into_iter()
                    .map(|(p, days)| (p, days.into_iter().collect()))
                    .collect(),
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionRow {
    pub target_formation: String,
    pub surface_xy: (f64, f64),
    /// Keyed by [`cum_column`] names; `None` marks an incomplete history.
    pub cum: BTreeMap<String, Option<f64>>,
    pub features: BTreeMap<String, Option<f64>>,
}

/// The central per-horizontal-well data frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeProductionFrame {
    pub rows: BTreeMap<String, ProductionRow>,
    /// Feature columns in append order; every row exposes the same set.
    pub feature_names: Vec<String>,
    pub horizons: Vec<u32>,
}

impl CumulativeProductionFrame {
    pub fn cum(&self, well: &str, phase: Phase, months: u32) -> Option<f64> {
        self.rows
            .get(well)
            .and_then(|r| r.cum.get(&cum_column(phase, months)).copied().flatten())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Build the frame: one row per metadata well. Wells without production get
/// all-missing cumulative columns; no row is ever silently dropped.
pub fn build_production_frame(
    daily: &DailyTable,
    meta: &MetaTable,
    formation_order: &[String],
    horizons: &[u32],
) -> Result<CumulativeProductionFrame, ProductionError> {
    let mut rows = BTreeMap::new();
    for (well, info) in meta {
        let target = find_target_formation(meta, well, formation_order)?;
        let mut cum = BTreeMap::new();
        for &months in horizons {
            for phase in Phase::ALL {
                let value = match daily.get(well).and_then(|p| p.get(&phase)) {
                    Some(series) => cumulative_production(series, months, well)?,
                    None => None,
                };
                cum.insert(cum_column(phase, months), value);
            }
        }
        rows.insert(
            well.clone(),
            ProductionRow {
                target_formation: target,
                surface_xy: (info.x, info.y),
                cum,
                features: BTreeMap::new(),
            },
        );
    }
    Ok(CumulativeProductionFrame {
        rows,
        feature_names: Vec::new(),
        horizons: horizons.to_vec(),
    })
}

/// Append one feature column; wells absent from `values` get missing.
/// Existing columns are never mutated.
pub fn append_features(
    frame: &CumulativeProductionFrame,
    feature_name: &str,
    values: &BTreeMap<String, f64>,
) -> Result<CumulativeProductionFrame, ProductionError> {
    if frame.feature_names.iter().any(|f| f == feature_name) {
        return Err(ProductionError::DuplicateFeature(feature_name.to_string()));
    }
    let mut out = frame.clone();
    out.feature_names.push(feature_name.to_string());
    for (well, row) in out.rows.iter_mut() {
        row.features
            .insert(feature_name.to_string(), values.get(well).copied());
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serialize the frame as CSV with the cumulative column naming scheme.
pub fn write_frame_csv(frame: &CumulativeProductionFrame) -> String {
    let mut cum_cols: Vec<String> = Vec::new();
    for &months in &frame.horizons {
        for phase in Phase::ALL {
            cum_cols.push(cum_column(phase, months));
        }
    }
    let mut out = String::from("well_id,target_formation,x,y");
    for c in &cum_cols {
        out.push_str(&format!(",{c}"));
    }
    for f in &frame.feature_names {
        out.push_str(&format!(",{f}"));
    }
    out.push('\n');
    for (well, row) in &frame.rows {
        out.push_str(&format!(
            "{well},{},{},{}",
            row.target_formation, row.surface_xy.0, row.surface_xy.1
        ));
        for c in &cum_cols {
            out.push_str(&format!(",{}", fmt_opt(row.cum.get(c).copied().flatten())));
        }
        for f in &frame.feature_names {
            out.push_str(&format!(",{}", fmt_opt(row.features.get(f).copied().flatten())));
        }
        out.push('\n');
    }
    out
}

/// Parse a frame back from [`write_frame_csv`] output.
pub fn read_frame_csv(text: &str) -> Result<CumulativeProductionFrame, ProductionError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let is_cum = |h: &str| -> Option<u32> {
        let rest = h.strip_prefix("Cum_")?;
        let (months, tail) = rest.split_once("month_")?;
        let (phase, end) = tail.split_once('_')?;
        (end == "Prod" && Phase::parse(phase).is_some())
            .then(|| months.parse::<u32>().ok())
            .flatten()
    };

    let mut horizons: Vec<u32> = Vec::new();
    let mut cum_cols: Vec<String> = Vec::new();
    let mut feature_names: Vec<String> = Vec::new();
    for h in headers.iter().skip(4) {
        if let Some(m) = is_cum(h) {
            if !horizons.contains(&m) {
                horizons.push(m);
            }
            cum_cols.push(h.clone());
        } else {
            feature_names.push(h.clone());
        }
    }

    let mut rows = BTreeMap::new();
    let parse_opt = |s: &str, row: usize| -> Result<Option<f64>, ProductionError> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>().map(Some).map_err(|_| ProductionError::BadRow {
            row,
            message: format!("{s:?} is not a number"),
        })
    };
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(ProductionError::BadRow {
                row: i + 2,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| ProductionError::BadRow {
                row: i + 2,
                message: format!("{what} {s:?} is not a number"),
            })
        };
        let mut cum = BTreeMap::new();
        let mut features = BTreeMap::new();
        for (h, field) in headers.iter().zip(record.iter()).skip(4) {
            let v = parse_opt(field, i + 2)?;
            if cum_cols.contains(h) {
                cum.insert(h.clone(), v);
            } else {
                features.insert(h.clone(), v);
            }
        }
        rows.insert(
            record[0].to_string(),
            ProductionRow {
                target_formation: record[1].to_string(),
                surface_xy: (parse(&record[2], "x")?, parse(&record[3], "y")?),
                cum,
                features,
            },
        );
    }
    Ok(CumulativeProductionFrame {
        rows,
        feature_names,
        horizons,
    })
}
