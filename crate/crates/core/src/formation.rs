//! Formation tops ingestion and the formation 3D map.
//!
//! Tops arrive as sparse (well, formation, depth) records. Missing tops are
//! inferred by inverse-distance weighting over wells where the formation is
//! known, then each target formation's interval at a well is (its top, the
//! top of the next formation below). Geologically inverted intervals are
//! excluded and reported, never clamped.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinates closer than this are treated as the same location.
pub const COINCIDENT_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FormationError {
    #[error("duplicate top for well {well:?}, formation {formation:?}")]
    DuplicateTop { well: String, formation: String },
    #[error("formation {0:?} is not in the formation order list")]
    UnknownFormation(String),
    #[error("well {0:?} has tops but no coordinates")]
    MissingCoordinates(String),
    #[error("formation {0:?} has no known tops anywhere")]
    NoDonors(String),
    #[error("formation {0:?} is the deepest in the order list; no bottom exists")]
    NoFormationBelow(String),
    #[error("tops csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("tops csv row {row}: {message}")]
    BadRow { row: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopRecord {
    pub well_id: String,
    pub formation: String,
    pub top_depth: f64,
    /// True when the depth was spatially inferred rather than observed.
    pub inferred: bool,
}

/// Sparse formation tops plus well coordinates and the stratigraphic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopsTable {
    pub records: Vec<TopRecord>,
    pub well_coords: BTreeMap<String, (f64, f64)>,
    /// Formation names, shallowest first.
    pub formation_order: Vec<String>,
}

impl TopsTable {
    pub fn get(&self, well: &str, formation: &str) -> Option<&TopRecord> {
        self.records
            .iter()
            .find(|r| r.well_id == well && r.formation == formation)
    }

    fn known_wells(&self, formation: &str) -> Vec<(&str, (f64, f64), f64)> {
        // Fixed well-id order keeps IDW weight sums deterministic.
        let mut donors: Vec<_> = self
            .records
            .iter()
            .filter(|r| r.formation == formation)
            .filter_map(|r| {
                self.well_coords
                    .get(&r.well_id)
                    .map(|xy| (r.well_id.as_str(), *xy, r.top_depth))
            })
            .collect();
        donors.sort_by(|a, b| a.0.cmp(b.0));
        donors
    }
}

/// Load tops from three text inputs: `well_id,formation,top_depth` CSV,
/// `well_id,x,y` coordinates CSV, and a formation-order list (one name per
/// line, shallowest first).
pub fn load_tops(
    tops_csv: &str,
    coords_csv: &str,
    order_text: &str,
) -> Result<TopsTable, FormationError> {
    let formation_order: Vec<String> = order_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let order_set: BTreeSet<&str> = formation_order.iter().map(String::as_str).collect();

    let mut well_coords = BTreeMap::new();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(coords_csv.as_bytes());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 3 {
            return Err(FormationError::BadRow {
                row: i + 2,
                message: "expected well_id,x,y".into(),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| FormationError::BadRow {
                row: i + 2,
                message: format!("{what} {s:?} is not a number"),
            })
        };
        well_coords.insert(
            record[0].to_string(),
            (parse(&record[1], "x")?, parse(&record[2], "y")?),
        );
    }

    let mut records: Vec<TopRecord> = Vec::new();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(tops_csv.as_bytes());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 3 {
            return Err(FormationError::BadRow {
                row: i + 2,
                message: "expected well_id,formation,top_depth".into(),
            });
        }
        let well = record[0].to_string();
        let formation = record[1].to_string();
        if !order_set.contains(formation.as_str()) {
            return Err(FormationError::UnknownFormation(formation));
        }
        if !well_coords.contains_key(&well) {
            return Err(FormationError::MissingCoordinates(well));
        }
        if !seen.insert((well.clone(), formation.clone())) {
            return Err(FormationError::DuplicateTop { well, formation });
        }
        let depth = record[2]
            .parse::<f64>()
            .map_err(|_| FormationError::BadRow {
                row: i + 2,
                message: format!("top_depth {:?} is not a number", &record[2]),
            })?;
        records.push(TopRecord {
            well_id: well,
            formation,
            top_depth: depth,
            inferred: false,
        });
    }

    Ok(TopsTable {
        records,
        well_coords,
        formation_order,
    })
}

fn idw_estimate(donors: &[(&str, (f64, f64), f64)], at: (f64, f64), power: f64) -> f64 {
    // Coincident donor wins exactly; avoids dividing by a vanishing distance.
    for (_, xy, v) in donors {
        if dist(*xy, at) < COINCIDENT_EPS {
            return *v;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (_, xy, v) in donors {
        let w = dist(*xy, at).powf(-power);
        num += w * v;
        den += w;
    }
    num / den
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Fill every missing (well, formation) top by inverse-distance weighting
/// over the wells where that formation's top is known. Known tops are never
/// altered; filled records carry `inferred = true`.
pub fn infer_missing_tops(tops: &TopsTable, power: f64) -> Result<TopsTable, FormationError> {
    let mut out = tops.clone();
    for formation in &tops.formation_order {
        let donors = tops.known_wells(formation);
        let have: BTreeSet<&str> = donors.iter().map(|(w, _, _)| *w).collect();
        let missing: Vec<(&String, (f64, f64))> = tops
            .well_coords
            .iter()
            .filter(|(w, _)| !have.contains(w.as_str()))
            .map(|(w, xy)| (w, *xy))
            .collect();
        if missing.is_empty() {
            continue;
        }
        if donors.is_empty() {
            return Err(FormationError::NoDonors(formation.clone()));
        }
        for (well, xy) in missing {
            out.records.push(TopRecord {
                well_id: well.clone(),
                formation: formation.clone(),
                top_depth: idw_estimate(&donors, xy, power),
                inferred: true,
            });
        }
    }
    out.records
        .sort_by(|a, b| (&a.well_id, &a.formation).cmp(&(&b.well_id, &b.formation)));
    Ok(out)
}

/// One formation interval at one well. `bottom` is the top of the next
/// formation below, so consecutive intervals tile the depth range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationInterval {
    pub top: f64,
    pub bottom: f64,
    pub inferred_top: bool,
    pub inferred_bottom: bool,
}

/// A well excluded from one formation because inference inverted it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedInterval {
    pub well_id: String,
    pub formation: String,
    pub top: f64,
    pub bottom: f64,
}

/// Top and bottom depths of every target formation at every well.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Formation3dMap {
    intervals: BTreeMap<String, BTreeMap<String, FormationInterval>>,
    pub excluded: Vec<ExcludedInterval>,
}

impl Formation3dMap {
    pub fn interval(&self, well: &str, formation: &str) -> Option<&FormationInterval> {
        self.intervals.get(formation)?.get(well)
    }

    /// Wells carrying an interval for `formation`, in sorted id order.
    pub fn wells_for(&self, formation: &str) -> Vec<&str> {
        self.intervals
            .get(formation)
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn formations(&self) -> Vec<&str> {
        self.intervals.keys().map(String::as_str).collect()
    }
}

/// Build intervals for the target formations from a complete tops table.
pub fn build_formation_map(
    tops: &TopsTable,
    targets: &[String],
) -> Result<Formation3dMap, FormationError> {
    let mut map = Formation3dMap::default();
    for target in targets {
        let idx = tops
            .formation_order
            .iter()
            .position(|f| f == target)
            .ok_or_else(|| FormationError::UnknownFormation(target.clone()))?;
        let below = tops
            .formation_order
            .get(idx + 1)
            .ok_or_else(|| FormationError::NoFormationBelow(target.clone()))?;

        let mut per_well = BTreeMap::new();
        for record in tops.records.iter().filter(|r| &r.formation == target) {
            let Some(next) = tops.get(&record.well_id, below) else {
                continue;
            };
            if record.top_depth >= next.top_depth {
                map.excluded.push(ExcludedInterval {
                    well_id: record.well_id.clone(),
                    formation: target.clone(),
                    top: record.top_depth,
                    bottom: next.top_depth,
                });
                continue;
            }
            per_well.insert(
                record.well_id.clone(),
                FormationInterval {
                    top: record.top_depth,
                    bottom: next.top_depth,
                    inferred_top: record.inferred,
                    inferred_bottom: next.inferred,
                },
            );
        }
        map.intervals.insert(target.clone(), per_well);
    }
    Ok(map)
}
