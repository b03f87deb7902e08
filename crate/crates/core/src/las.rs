//! LAS 2.0 well-log parsing and curve-name canonicalization.
//!
//! Only unwrapped LAS 2.0 is accepted; `WRAP = YES` is rejected up front.
//! Samples equal to the file's NULL sentinel become missing values during
//! parsing and are never visible as numbers downstream. Depths must be
//! strictly increasing; offending data rows are dropped and counted rather
//! than failing the whole file.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default NULL sentinel when the ~WELL section does not declare one.
pub const DEFAULT_NULL: f64 = -999.25;

#[derive(Debug, Error)]
pub enum LasError {
    #[error("missing required section ~{0}")]
    MissingSection(&'static str),
    #[error("wrapped mode (WRAP = YES) is not supported")]
    WrappedMode,
    #[error("data row {line}: expected {expected} fields, found {found}")]
    RowArity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("first curve {0:?} is not a depth mnemonic")]
    NoDepthCurve(String),
    #[error("data row {line}: {token:?} is not a number")]
    BadDatum { line: usize, token: String },
    #[error("dictionary row {row}: raw mnemonic {raw:?} maps to both {first:?} and {second:?}")]
    DuplicateRaw {
        row: usize,
        raw: String,
        first: String,
        second: String,
    },
    #[error("dictionary header must be raw,alias (found {0:?})")]
    DictionaryHeader(String),
    #[error("dictionary parse: {0}")]
    DictionaryCsv(#[from] csv::Error),
}

/// One named curve: values are aligned with the depth vector and missing
/// where the file carried the NULL sentinel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub unit: String,
    pub values: Vec<Option<f64>>,
}

/// A parsed vertical well log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LasFile {
    /// API identifier (falls back to UWI, then WELL).
    pub well_id: String,
    /// Surface coordinates (easting, northing); (0, 0) if the header lacks them.
    pub location: (f64, f64),
    pub null_value: f64,
    pub depth_unit: String,
    /// Strictly increasing measured depths.
    pub depth: Vec<f64>,
    /// Curves in file order, depth excluded. Every value vector has the same
    /// length as `depth`.
    pub curves: Vec<Curve>,
    /// Data rows dropped for non-increasing or non-numeric depth.
    pub dropped_rows: usize,
}

impl LasFile {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn has_curve(&self, name: &str) -> bool {
        self.curve(name).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Version,
    Well,
    Curve,
    Data,
    Other,
}

/// A `MNEM.UNIT  DATA : DESC` header line, split into its four parts.
struct HeaderLine {
    mnemonic: String,
    unit: String,
    data: String,
}

fn parse_header_line(line: &str) -> Option<HeaderLine> {
    let dot = line.find('.')?;
    let mnemonic = line[..dot].trim().to_string();
    let rest = &line[dot + 1..];
    // Unit runs from the period to the first whitespace or colon.
    let unit_end = rest
        .char_indices()
        .find(|(_, c)| c.is_whitespace() || *c == ':')
        .map(|(i, _)| i)
        .unwrap_or(rest.len());
    let unit = rest[..unit_end].trim().to_string();
    let tail = &rest[unit_end..];
    // Data sits between the unit and the last colon; the description after
    // the colon is ignored.
    let data = match tail.rfind(':') {
        Some(colon) => tail[..colon].trim().to_string(),
        None => tail.trim().to_string(),
    };
    Some(HeaderLine {
        mnemonic,
        unit,
        data,
    })
}

fn section_of(line: &str) -> Section {
    let tag = line
        .trim_start_matches('~')
        .chars()
        .next()
        .map(|c| c.to_ascii_uppercase());
    match tag {
        Some('V') => Section::Version,
        Some('W') => Section::Well,
        Some('C') => Section::Curve,
        Some('A') => Section::Data,
        _ => Section::Other,
    }
}

fn is_depth_mnemonic(name: &str) -> bool {
    let upper = name.to_ascii_uppercase();
    upper.starts_with("DEPT") || upper == "MD"
}

/// Parse an unwrapped LAS 2.0 document.
///
/// Rows whose depth is not strictly greater than the previous accepted row's
/// depth are dropped and counted in [`LasFile::dropped_rows`]; the NULL value
/// is read from the ~WELL section with [`DEFAULT_NULL`] as fallback.
pub fn parse_las(text: &str) -> Result<LasFile, LasError> {
    let mut section = Section::Other;
    let mut saw_curve = false;
    let mut saw_data = false;

    let mut null_value = DEFAULT_NULL;
    let mut api: Option<String> = None;
    let mut uwi: Option<String> = None;
    let mut well: Option<String> = None;
    let mut x: Option<f64> = None;
    let mut y: Option<f64> = None;

    let mut curve_names: Vec<String> = Vec::new();
    let mut curve_units: Vec<String> = Vec::new();

    let mut depth: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    let mut dropped_rows = 0usize;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('~') {
            section = section_of(line);
            match section {
                Section::Curve => saw_curve = true,
                Section::Data => {
                    saw_data = true;
                    if curve_names.is_empty() {
                        return Err(LasError::MissingSection("CURVE"));
                    }
                    if !is_depth_mnemonic(&curve_names[0]) {
                        return Err(LasError::NoDepthCurve(curve_names[0].clone()));
                    }
                    columns = vec![Vec::new(); curve_names.len() - 1];
                }
                _ => {}
            }
            continue;
        }

        match section {
            Section::Version => {
                if let Some(h) = parse_header_line(line) {
                    if h.mnemonic.eq_ignore_ascii_case("WRAP")
                        && h.data.to_ascii_uppercase().starts_with('Y')
                    {
                        return Err(LasError::WrappedMode);
                    }
                }
            }
            Section::Well => {
                if let Some(h) = parse_header_line(line) {
                    match h.mnemonic.to_ascii_uppercase().as_str() {
                        "NULL" => {
                            if let Ok(v) = h.data.parse::<f64>() {
                                null_value = v;
                            }
                        }
                        "API" => api = Some(h.data),
                        "UWI" => uwi = Some(h.data),
                        "WELL" => well = Some(h.data),
                        "XCOORD" | "XWELL" | "SURFX" | "X" => x = h.data.parse().ok(),
                        "YCOORD" | "YWELL" | "SURFY" | "Y" => y = h.data.parse().ok(),
                        _ => {}
                    }
                }
            }
            Section::Curve => {
                if let Some(h) = parse_header_line(line) {
                    curve_names.push(h.mnemonic);
                    curve_units.push(h.unit);
                }
            }
            Section::Data => {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != curve_names.len() {
                    return Err(LasError::RowArity {
                        line: idx + 1,
                        expected: curve_names.len(),
                        found: fields.len(),
                    });
                }
                let mut row = Vec::with_capacity(fields.len());
                for tok in &fields {
                    let v: f64 = tok.parse().map_err(|_| LasError::BadDatum {
                        line: idx + 1,
                        token: tok.to_string(),
                    })?;
                    row.push(v);
                }
                let d = row[0];
                // Strict monotonicity: a null or non-increasing depth drops the row.
                if d == null_value || !d.is_finite() || depth.last().is_some_and(|p| d <= *p) {
                    dropped_rows += 1;
                    continue;
                }
                depth.push(d);
                for (col, v) in columns.iter_mut().zip(row[1..].iter()) {
                    col.push(if *v == null_value { None } else { Some(*v) });
                }
            }
            Section::Other => {}
        }
    }

    if !saw_curve {
        return Err(LasError::MissingSection("CURVE"));
    }
    if !saw_data {
        return Err(LasError::MissingSection("ASCII"));
    }

    let curves = curve_names
        .into_iter()
        .zip(curve_units.iter())
        .skip(1)
        .zip(columns)
        .map(|((name, unit), values)| Curve {
            name,
            unit: unit.clone(),
            values,
        })
        .collect();

    Ok(LasFile {
        well_id: api.or(uwi).or(well).unwrap_or_default(),
        location: (x.unwrap_or(0.0), y.unwrap_or(0.0)),
        null_value,
        depth_unit: curve_units.first().cloned().unwrap_or_default(),
        depth,
        curves,
        dropped_rows,
    })
}

/// Serialize back to normalized LAS 2.0 text. Floats are written with the
/// shortest round-tripping representation, so `parse_las(write_las(f)) == f`
/// for files parsed without dropped rows.
pub fn write_las(file: &LasFile) -> String {
    let mut out = String::new();
    out.push_str("~VERSION INFORMATION\n");
    out.push_str(" VERS.   2.0 : CWLS LOG ASCII STANDARD - VERSION 2.0\n");
    out.push_str(" WRAP.   NO  : ONE LINE PER DEPTH STEP\n");
    out.push_str("~WELL INFORMATION\n");
    out.push_str(&format!(" WELL.   {} : WELL NAME\n", file.well_id));
    out.push_str(&format!(" API .   {} : WELL IDENTIFIER\n", file.well_id));
    out.push_str(&format!(" XCOORD.M   {} : SURFACE EASTING\n", file.location.0));
    out.push_str(&format!(" YCOORD.M   {} : SURFACE NORTHING\n", file.location.1));
    out.push_str(&format!(" NULL.   {} : NULL VALUE\n", file.null_value));
    out.push_str("~CURVE INFORMATION\n");
    out.push_str(&format!(" DEPT.{}   : MEASURED DEPTH\n", file.depth_unit));
    for c in &file.curves {
        out.push_str(&format!(" {}.{}   : {}\n", c.name, c.unit, c.name));
    }
    out.push_str("~ASCII\n");
    for (i, d) in file.depth.iter().enumerate() {
        out.push_str(&format!("{d}"));
        for c in &file.curves {
            match c.values[i] {
                Some(v) => out.push_str(&format!(" {v}")),
                None => out.push_str(&format!(" {}", file.null_value)),
            }
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Alias dictionary
// ---------------------------------------------------------------------------

/// Map from raw curve mnemonics (case-insensitive) to canonical property
/// aliases. Every canonical alias maps to itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasDictionary {
    /// Lowercased raw mnemonic -> canonical alias.
    entries: BTreeMap<String, String>,
    canonical: BTreeSet<String>,
}

impl AliasDictionary {
    pub fn lookup(&self, raw: &str) -> Option<&str> {
        self.entries.get(&raw.to_lowercase()).map(String::as_str)
    }

    pub fn canonical_set(&self) -> &BTreeSet<String> {
        &self.canonical
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Load an alias dictionary from CSV text with header `raw,alias`.
pub fn load_dictionary(text: &str) -> Result<AliasDictionary, LasError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() < 2
        || !headers[0].eq_ignore_ascii_case("raw")
        || !headers[1].eq_ignore_ascii_case("alias")
    {
        return Err(LasError::DictionaryHeader(headers.iter().collect::<Vec<_>>().join(",")));
    }

    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    let mut canonical: BTreeSet<String> = BTreeSet::new();
    let mut insert = |row: usize, raw: &str, alias: &str| -> Result<(), LasError> {
        let key = raw.to_lowercase();
        match entries.get(&key) {
            Some(existing) if existing != alias => Err(LasError::DuplicateRaw {
                row,
                raw: raw.to_string(),
                first: existing.clone(),
                second: alias.to_string(),
            }),
            _ => {
                entries.insert(key, alias.to_string());
                Ok(())
            }
        }
    };

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            continue;
        }
        let (raw, alias) = (&record[0], &record[1]);
        if raw.is_empty() || alias.is_empty() {
            continue;
        }
        insert(i + 2, raw, alias)?;
        canonical.insert(alias.to_string());
    }
    // Canonical aliases map to themselves; a conflicting raw entry for an
    // alias name is a genuine duplicate.
    for alias in canonical.clone() {
        insert(0, &alias, &alias)?;
    }
    Ok(AliasDictionary { entries, canonical })
}

/// Replace curve names with canonical aliases.
///
/// Curves without a dictionary entry are dropped and their raw names returned.
/// When several raw curves map to one alias, the curve with the fewest missing
/// samples wins (ties go to file order).
pub fn apply_dictionary(file: &LasFile, dict: &AliasDictionary) -> (LasFile, Vec<String>) {
    let mut skipped = Vec::new();
    // alias -> (file position, missing count, renamed curve)
    let mut kept: BTreeMap<String, (usize, usize, Curve)> = BTreeMap::new();

    for (pos, curve) in file.curves.iter().enumerate() {
        let Some(alias) = dict.lookup(&curve.name) else {
            skipped.push(curve.name.clone());
            continue;
        };
        let missing = curve.values.iter().filter(|v| v.is_none()).count();
        let candidate = Curve {
            name: alias.to_string(),
            unit: curve.unit.clone(),
            values: curve.values.clone(),
        };
        match kept.get(alias) {
            Some((_, best_missing, _)) if *best_missing <= missing => {}
            _ => {
                kept.insert(alias.to_string(), (pos, missing, candidate));
            }
        }
    }

    let mut winners: Vec<(usize, Curve)> = kept.into_values().map(|(p, _, c)| (p, c)).collect();
    winners.sort_by_key(|(p, _)| *p);

    let out = LasFile {
        curves: winners.into_iter().map(|(_, c)| c).collect(),
        ..file.clone()
    };
    (out, skipped)
}
