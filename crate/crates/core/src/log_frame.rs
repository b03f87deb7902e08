//! Depth-normalized standardized well-log frames.
//!
//! For one log property, each formation becomes an N x n block: every well's
//! log section over that formation resampled at n equally spaced depths
//! between the formation top and bottom. n is shared within a block so rows
//! are comparable position by position, but may differ across formations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formation::Formation3dMap;
use crate::las::LasFile;

/// Smallest allowed resample count.
pub const MIN_RESAMPLE: usize = 16;
/// Required overlap between the formation interval and the logged range,
/// as a fraction of interval thickness.
pub const MIN_COVERAGE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("empty sample-count list")]
    EmptyList,
    #[error("curve {0:?} absent")]
    CurveAbsent(String),
    #[error("insufficient coverage: {0}")]
    InsufficientCoverage(String),
    #[error("block csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("block csv row {row}: {message}")]
    BadRow { row: usize, message: String },
}

/// Resample count for a block: rounded mean of per-well sample counts,
/// clamped to at least [`MIN_RESAMPLE`].
pub fn choose_resample_count(n_list: &[usize]) -> Result<usize, FrameError> {
    if n_list.is_empty() {
        return Err(FrameError::EmptyList);
    }
    let mean = n_list.iter().sum::<usize>() as f64 / n_list.len() as f64;
    Ok((mean.round() as usize).max(MIN_RESAMPLE))
}

/// Resample one curve over `[top, bottom]` at `n` equally spaced depths.
///
/// Query depths are `top + k * (bottom - top) / (n - 1)`. Values come from
/// linear interpolation between the bracketing samples; queries outside the
/// logged range, or bracketed by a missing sample, yield missing. Sections
/// with more than 20% missing resampled values are rejected.
pub fn extract_log_section(
    file: &LasFile,
    curve: &str,
    interval: (f64, f64),
    n: usize,
) -> Result<Vec<Option<f64>>, FrameError> {
    let (top, bottom) = interval;
    assert!(n >= 2, "resample count must be at least 2");
    let c = file
        .curve(curve)
        .ok_or_else(|| FrameError::CurveAbsent(curve.to_string()))?;
    check_coverage(file, interval)?;

    let depth = &file.depth;
    let step = (bottom - top) / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // The final query hits `bottom` exactly rather than accumulating step error.
        let d = if k == n - 1 { bottom } else { top + k as f64 * step };
        out.push(sample_at(depth, &c.values, d));
    }
    let missing = out.iter().filter(|v| v.is_none()).count();
    if missing * 5 > n {
        return Err(FrameError::InsufficientCoverage(format!(
            "{missing} of {n} resampled values missing for {curve:?} in well {:?}",
            file.well_id
        )));
    }
    Ok(out)
}

fn check_coverage(file: &LasFile, (top, bottom): (f64, f64)) -> Result<(), FrameError> {
    let thickness = bottom - top;
    let (lo, hi) = match (file.depth.first(), file.depth.last()) {
        (Some(lo), Some(hi)) => (*lo, *hi),
        _ => (f64::INFINITY, f64::NEG_INFINITY),
    };
    let overlap = (bottom.min(hi) - top.max(lo)).max(0.0);
    if overlap < MIN_COVERAGE * thickness {
        return Err(FrameError::InsufficientCoverage(format!(
            "interval ({top}, {bottom}) overlaps logged range ({lo}, {hi}) by {overlap}",
        )));
    }
    Ok(())
}

fn sample_at(depth: &[f64], values: &[Option<f64>], d: f64) -> Option<f64> {
    let n = depth.len();
    if n == 0 || d < depth[0] || d > depth[n - 1] {
        return None;
    }
    let i = match depth.binary_search_by(|x| x.partial_cmp(&d).unwrap()) {
        Ok(i) => return values[i],
        Err(i) => i,
    };
    // d lies strictly between depth[i-1] and depth[i].
    let (d0, d1) = (depth[i - 1], depth[i]);
    let (v0, v1) = (values[i - 1]?, values[i]?);
    let t = (d - d0) / (d1 - d0);
    Some(v0 + t * (v1 - v0))
}

/// Fill remaining missing entries within one resampled row: interior gaps by
/// linear interpolation between the nearest finite neighbors, row ends by the
/// nearest finite value. Requires at least one finite entry.
fn fill_row_gaps(row: &mut [Option<f64>]) {
    let n = row.len();
    let mut i = 0;
    while i < n {
        if row[i].is_some() {
            i += 1;
            continue;
        }
        let gap_start = i;
        while i < n && row[i].is_none() {
            i += 1;
        }
        let left = gap_start.checked_sub(1).and_then(|j| row[j]);
        let right = (i < n).then(|| row[i]).flatten();
        for (offset, slot) in row[gap_start..i].iter_mut().enumerate() {
            *slot = Some(match (left, right) {
                (Some(l), Some(r)) => {
                    let span = (i - gap_start + 1) as f64;
                    l + (r - l) * (offset + 1) as f64 / span
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => unreachable!("row has no finite entries"),
            });
        }
    }
}

/// One formation's stacked sections: wells x resampled depths, gap-filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBlock {
    pub well_ids: Vec<String>,
    /// N rows of exactly `n` values each; first entry is at the formation
    /// top, last at the bottom.
    pub matrix: Vec<Vec<f64>>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub well_id: String,
    pub formation: String,
    pub reason: String,
}

/// Per-property standardized frame: one block per formation that retained
/// at least one well, plus provenance and rejection audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedLogFrame {
    pub property: String,
    pub blocks: BTreeMap<String, LogBlock>,
    /// Original in-interval sample count per (well, formation).
    pub provenance: BTreeMap<String, BTreeMap<String, usize>>,
    pub rejections: Vec<Rejection>,
    /// Formations where no well passed extraction.
    pub empty_blocks: Vec<String>,
}

/// Build the standardized frame for one property across target formations.
///
/// Wells enter a block in sorted id order. A well must carry the curve, cover
/// at least half the interval, and hold at least two in-interval samples to
/// participate; failures are recorded, never silently dropped.
pub fn build_standardized_frame(
    files: &[LasFile],
    map: &Formation3dMap,
    property: &str,
    targets: &[String],
) -> StandardizedLogFrame {
    let mut frame = StandardizedLogFrame {
        property: property.to_string(),
        blocks: BTreeMap::new(),
        provenance: BTreeMap::new(),
        rejections: Vec::new(),
        empty_blocks: Vec::new(),
    };
    let mut sorted: Vec<&LasFile> = files.iter().collect();
    sorted.sort_by(|a, b| a.well_id.cmp(&b.well_id));

    for formation in targets {
        // First pass: wells passing the static preconditions, with their
        // original in-interval sample counts.
        let mut candidates: Vec<(&LasFile, (f64, f64), usize)> = Vec::new();
        for file in &sorted {
            let Some(iv) = map.interval(&file.well_id, formation) else {
                continue;
            };
            let interval = (iv.top, iv.bottom);
            if !file.has_curve(property) {
                frame.rejections.push(Rejection {
                    well_id: file.well_id.clone(),
                    formation: formation.clone(),
                    reason: format!("curve {property:?} absent"),
                });
                continue;
            }
            if check_coverage(file, interval).is_err() {
                frame.rejections.push(Rejection {
                    well_id: file.well_id.clone(),
                    formation: formation.clone(),
                    reason: "interval covers less than half the logged range".into(),
                });
                continue;
            }
            let n_i = file
                .depth
                .iter()
                .filter(|d| **d >= interval.0 && **d <= interval.1)
                .count();
            if n_i < 2 {
                frame.rejections.push(Rejection {
                    well_id: file.well_id.clone(),
                    formation: formation.clone(),
                    reason: format!("only {n_i} samples inside the interval"),
                });
                continue;
            }
            candidates.push((file, interval, n_i));
        }

        if candidates.is_empty() {
            frame.empty_blocks.push(formation.clone());
            continue;
        }
        let counts: Vec<usize> = candidates.iter().map(|(_, _, n_i)| *n_i).collect();
        let n = choose_resample_count(&counts).expect("candidates non-empty");

        let mut well_ids = Vec::new();
        let mut matrix = Vec::new();
        for (file, interval, n_i) in candidates {
            match extract_log_section(file, property, interval, n) {
                Ok(mut row) => {
                    if row.iter().all(|v| v.is_none()) {
                        frame.rejections.push(Rejection {
                            well_id: file.well_id.clone(),
                            formation: formation.clone(),
                            reason: "no finite resampled values".into(),
                        });
                        continue;
                    }
                    fill_row_gaps(&mut row);
                    well_ids.push(file.well_id.clone());
                    matrix.push(row.into_iter().map(|v| v.unwrap()).collect());
                    frame
                        .provenance
                        .entry(file.well_id.clone())
                        .or_default()
                        .insert(formation.clone(), n_i);
                }
                Err(e) => frame.rejections.push(Rejection {
                    well_id: file.well_id.clone(),
                    formation: formation.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        if matrix.is_empty() {
            frame.empty_blocks.push(formation.clone());
        } else {
            frame
                .blocks
                .insert(formation.clone(), LogBlock { well_ids, matrix, n });
        }
    }
    frame
}

/// Serialize one block as CSV: `well_id,d0,...,d{n-1}`, rows in block order.
pub fn write_block_csv(block: &LogBlock) -> String {
    let mut out = String::from("well_id");
    for i in 0..block.n {
        out.push_str(&format!(",d{i}"));
    }
    out.push('\n');
    for (well, row) in block.well_ids.iter().zip(&block.matrix) {
        out.push_str(well);
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parse a block back from [`write_block_csv`] output.
pub fn read_block_csv(text: &str) -> Result<LogBlock, FrameError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let n = reader.headers()?.len().saturating_sub(1);
    let mut well_ids = Vec::new();
    let mut matrix = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(FrameError::BadRow {
                row: i + 2,
                message: format!("expected {} fields, found {}", n + 1, record.len()),
            });
        }
        well_ids.push(record[0].to_string());
        let mut row = Vec::with_capacity(n);
        for j in 1..=n {
            row.push(record[j].parse::<f64>().map_err(|_| FrameError::BadRow {
                row: i + 2,
                message: format!("{:?} is not a number", &record[j]),
            })?);
        }
        matrix.push(row);
    }
    Ok(LogBlock { well_ids, matrix, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::{build_formation_map, load_tops};
    use crate::las::{Curve, DEFAULT_NULL};
    use proptest::prelude::*;

    fn well(id: &str, depths: Vec<f64>, curves: Vec<(&str, Vec<Option<f64>>)>) -> LasFile {
        LasFile {
            well_id: id.to_string(),
            location: (0.0, 0.0),
            null_value: DEFAULT_NULL,
            depth_unit: "M".into(),
            depth: depths,
            curves: curves
                .into_iter()
                .map(|(name, values)| Curve {
                    name: name.to_string(),
                    unit: String::new(),
                    values,
                })
                .collect(),
            dropped_rows: 0,
        }
    }

    fn linear_well(id: &str, a: f64, b: f64) -> LasFile {
        let depths: Vec<f64> = (0..=200).map(|i| 1000.0 + i as f64).collect();
        let vals = depths.iter().map(|d| Some(a * d + b)).collect();
        well(id, depths, vec![("GR", vals)])
    }

    #[test]
    fn resample_count_is_clamped_mean() {
        assert_eq!(choose_resample_count(&[30, 50, 40]).unwrap(), 40);
        assert_eq!(choose_resample_count(&[5, 5, 5]).unwrap(), 16);
        assert_eq!(choose_resample_count(&[100]).unwrap(), 100);
        assert!(matches!(choose_resample_count(&[]), Err(FrameError::EmptyList)));
    }

    #[test]
    fn resampling_reproduces_depth_identity() {
        let w = linear_well("W1", 1.0, 0.0);
        let got = extract_log_section(&w, "GR", (1000.0, 1100.0), 5).unwrap();
        let got: Vec<f64> = got.into_iter().map(Option::unwrap).collect();
        assert_eq!(got, vec![1000.0, 1025.0, 1050.0, 1075.0, 1100.0]);
    }

    #[test]
    fn resampling_constant_and_midpoint() {
        let w = linear_well("W1", 0.0, 7.0);
        let got = extract_log_section(&w, "GR", (1010.0, 1090.0), 3).unwrap();
        assert_eq!(got, vec![Some(7.0); 3]);

        let w = well("W2", vec![1000.0, 1002.0], vec![("GR", vec![Some(2.0), Some(6.0)])]);
        let got = extract_log_section(&w, "GR", (1000.0, 1002.0), 3).unwrap();
        assert_eq!(got[1], Some(4.0));
    }

    #[test]
    fn missing_brackets_and_missing_budget() {
        // Middle sample missing: queries bracketed by it come back missing.
        let w = well(
            "W1",
            vec![1000.0, 1001.0, 1002.0, 1003.0, 1004.0],
            vec![("GR", vec![Some(1.0), None, Some(3.0), Some(4.0), Some(5.0)])],
        );
        let got = extract_log_section(&w, "GR", (1000.0, 1004.0), 5).unwrap();
        assert_eq!(got, vec![Some(1.0), None, Some(3.0), Some(4.0), Some(5.0)]);

        // More than 20% missing is rejected outright.
        let w = well(
            "W2",
            vec![1000.0, 1001.0, 1002.0, 1003.0, 1004.0],
            vec![("GR", vec![Some(1.0), None, None, None, Some(5.0)])],
        );
        assert!(matches!(
            extract_log_section(&w, "GR", (1000.0, 1004.0), 5),
            Err(FrameError::InsufficientCoverage(_))
        ));
    }

    #[test]
    fn coverage_precondition_is_enforced() {
        let w = linear_well("W1", 1.0, 0.0); // logged 1000..1200
        // Less than half the interval overlaps the logged range: static rejection.
        let err = extract_log_section(&w, "GR", (1150.0, 1400.0), 8).unwrap_err();
        assert!(err.to_string().contains("overlaps logged range"));
        // Exactly half overlaps: the static check passes, but the out-of-range
        // queries then blow the 20% missing budget.
        let err = extract_log_section(&w, "GR", (1100.0, 1300.0), 8).unwrap_err();
        assert!(err.to_string().contains("resampled values missing"));
    }

    fn simple_map(wells: &[&str]) -> Formation3dMap {
        let mut coords = String::from("well_id,x,y\n");
        let mut tops = String::from("well_id,formation,top_depth\n");
        for w in wells {
            coords.push_str(&format!("{w},0,0\n"));
            tops.push_str(&format!("{w},Alpha,1050\n{w},Beta,1150\n"));
        }
        let t = load_tops(&tops, &coords, "Alpha\nBeta\n").unwrap();
        build_formation_map(&t, &["Alpha".to_string()]).unwrap()
    }

    #[test]
    fn frame_collects_rows_and_reports_rejections() {
        let map = simple_map(&["W1", "W2", "W3"]);
        let files = vec![
            linear_well("W1", 2.0, 1.0),
            linear_well("W2", -1.0, 5.0),
            linear_well("W3", 0.5, 0.0),
        ];
        let frame = build_standardized_frame(&files, &map, "GR", &["Alpha".to_string()]);
        let block = &frame.blocks["Alpha"];
        assert_eq!(block.well_ids, vec!["W1", "W2", "W3"]);
        assert_eq!(block.matrix.len(), 3);
        assert!(block.matrix.iter().all(|r| r.len() == block.n));
        assert_eq!(frame.provenance["W1"]["Alpha"], 101);

        // One well lacks the curve entirely.
        let mut files = files;
        files[2].curves.clear();
        let frame = build_standardized_frame(&files, &map, "GR", &["Alpha".to_string()]);
        assert_eq!(frame.blocks["Alpha"].matrix.len(), 2);
        assert_eq!(frame.rejections.len(), 1);
        assert_eq!(frame.rejections[0].well_id, "W3");

        // Nobody has the curve: the block is absent and reported.
        let files: Vec<LasFile> = ["W1", "W2", "W3"]
            .iter()
            .map(|w| {
                let mut f = linear_well(w, 1.0, 0.0);
                f.curves[0].name = "RHOB".into();
                f
            })
            .collect();
        let frame = build_standardized_frame(&files, &map, "GR", &["Alpha".to_string()]);
        assert!(frame.blocks.is_empty());
        assert_eq!(frame.empty_blocks, vec!["Alpha".to_string()]);
    }

    #[test]
    fn gap_fill_interpolates_interior_and_extends_ends() {
        let mut row = vec![None, Some(2.0), None, None, Some(8.0), None];
        fill_row_gaps(&mut row);
        assert_eq!(
            row,
            vec![Some(2.0), Some(2.0), Some(4.0), Some(6.0), Some(8.0), Some(8.0)]
        );
    }

    #[test]
    fn block_csv_round_trips() {
        let map = simple_map(&["W1", "W2"]);
        let files = vec![linear_well("W1", 2.0, 1.0), linear_well("W2", -1.0, 5.0)];
        let frame = build_standardized_frame(&files, &map, "GR", &["Alpha".to_string()]);
        let block = &frame.blocks["Alpha"];
        let text = write_block_csv(block);
        assert_eq!(&read_block_csv(&text).unwrap(), block);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Affine curves resample exactly, and the row ends hit top/bottom.
        #[test]
        fn affine_resampling_is_exact(
            a in -5.0f64..5.0,
            b in -100.0f64..100.0,
            top in 1000.0f64..1080.0,
            thickness in 10.0f64..100.0,
            n in 2usize..40,
        ) {
            let w = linear_well("W", a, b);
            let bottom = (top + thickness).min(1200.0);
            let got = extract_log_section(&w, "GR", (top, bottom), n).unwrap();
            let step = (bottom - top) / (n - 1) as f64;
            for (k, v) in got.iter().enumerate() {
                let d = if k == n - 1 { bottom } else { top + k as f64 * step };
                let expect = a * d + b;
                let tol = 1e-9 * expect.abs().max(1.0);
                prop_assert!((v.unwrap() - expect).abs() <= tol);
            }
        }

        // Rebuilding the frame from the same inputs is bit-identical.
        #[test]
        fn frame_build_is_deterministic(seeds in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let map = simple_map(&["W1", "W2", "W3"]);
            let files: Vec<LasFile> = seeds
                .iter()
                .enumerate()
                .map(|(i, a)| linear_well(&format!("W{}", i + 1), *a, 1.0))
                .collect();
            let f1 = build_standardized_frame(&files, &map, "GR", &["Alpha".to_string()]);
            let f2 = build_standardized_frame(&files, &map, "GR", &["Alpha".to_string()]);
            prop_assert_eq!(f1, f2);
        }
    }
}
