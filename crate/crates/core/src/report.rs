//! Deterministic rendering of validation results: report JSON, a long-format
//! predictions CSV, and self-contained SVG scatter plots of predicted vs
//! observed production. All output is a pure function of the report value, so
//! reruns under the same config and seed are byte-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evaluation::{LooModelEntry, LooReport};

/// Pseudo-model name for the kriging-on-production baseline in CSV and SVG
/// output. Distinct from every registry model name.
pub const BASELINE_NAME: &str = "kriging_baseline";
/// Pseudo-model name for the composite path where each well is predicted by
/// its own inner-loop winner.
pub const INNER_SELECTED_NAME: &str = "inner_selected";

/// Everything one validate run produced, keyed by phase name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub horizon_months: u32,
    pub k: usize,
    pub b: usize,
    pub inner_b: usize,
    pub seed: u64,
    pub top_m: usize,
    pub phases: BTreeMap<String, LooReport>,
}

pub fn render_report_json(report: &ValidationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_report_json(text: &str) -> Result<ValidationReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// All entries a phase renders, in a fixed name order: finalists and inner
/// winners first (the report's own map), then the composite and the baseline.
fn phase_entries(loo: &LooReport) -> Vec<(String, &LooModelEntry)> {
    let mut out: Vec<(String, &LooModelEntry)> = loo
        .models
        .iter()
        .map(|(name, e)| (name.clone(), e))
        .collect();
    out.push((INNER_SELECTED_NAME.to_string(), &loo.inner_selected));
    if let Some(b) = &loo.baseline {
        out.push((BASELINE_NAME.to_string(), b));
    }
    out
}

/// Long-format per-well predictions: `phase,model,well_id,observed,predicted`.
pub fn predictions_csv(report: &ValidationReport) -> String {
    let mut out = String::from("phase,model,well_id,observed,predicted\n");
    for (phase, loo) in &report.phases {
        for (model, entry) in phase_entries(loo) {
            for (well, (obs, pred)) in &entry.predictions {
                out.push_str(&format!("{phase},{model},{well},{obs},{pred}\n"));
            }
        }
    }
    out
}

/// File name for one scatter plot; model names only contain path-safe
/// characters already, but guard anyway.
pub fn scatter_name(phase: &str, model: &str) -> String {
    let safe: String = model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("scatter_{phase}_{safe}.svg")
}

/// Tick and annotation formatting: fixed rules so output never depends on
/// locale or float printing quirks.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return "n/a".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e6).contains(&a) {
        return format!("{v:.2e}");
    }
    let digits = (3 - a.log10().floor() as i64).clamp(0, 6) as usize;
    let s = format!("{v:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 640.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 60.0;
const N_TICKS: usize = 5;

/// Scatter of predicted vs observed with a shared axis range, identity line,
/// and RMSE / Pearson annotations.
pub fn scatter_svg(phase: &str, model: &str, entry: &LooModelEntry) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (obs, pred) in entry.predictions.values() {
        for v in [*obs, *pred] {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let sx = |v: f64| MARGIN_L + (v - lo) / (hi - lo) * plot_w;
    let sy = |v: f64| MARGIN_T + plot_h - (v - lo) / (hi - lo) * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
    ));

    // Ticks and grid on both axes share the same values.
    for i in 0..N_TICKS {
        let v = lo + (hi - lo) * i as f64 / (N_TICKS - 1) as f64;
        let label = fmt_tick(v);
        let x = sx(v);
        let y = sy(v);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#ddd\" stroke-width=\"1\"/>\n",
            x, MARGIN_T, x, MARGIN_T + plot_h
        ));
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#ddd\" stroke-width=\"1\"/>\n",
            MARGIN_L, y, MARGIN_L + plot_w, y
        ));
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\">{label}</text>\n",
            x, MARGIN_T + plot_h + 18.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\" fill=\"#333\">{label}</text>\n",
            MARGIN_L - 8.0, y + 4.0
        ));
    }

    // Identity line: both axes share the range, so it spans corner to corner.
    s.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n",
        sx(lo), sy(lo), sx(hi), sy(hi)
    ));

    for (well, (obs, pred)) in &entry.predictions {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#1f77b4\" fill-opacity=\"0.65\"><title>{well}</title></circle>\n",
            sx(*obs), sy(*pred)
        ));
    }

    let r_text = match entry.pearson {
        Some(r) => format!("{r:.3}"),
        None => "n/a".to_string(),
    };
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"22\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\" fill=\"#111\">{phase} / {model}</text>\n",
        SVG_W / 2.0
    ));
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"40\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333\">RMSE {} ({} sd), r {}, n {}</text>\n",
        SVG_W / 2.0,
        fmt_tick(entry.rmse_raw),
        fmt_tick(entry.rmse_std),
        r_text,
        entry.predictions.len()
    ));
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">observed</text>\n",
        MARGIN_L + plot_w / 2.0,
        SVG_H - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"20\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 20 {:.2})\">predicted</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    ));
    s.push_str("</svg>\n");
    s
}

/// Every file a validate run emits, keyed by file name.
pub fn render_outputs(report: &ValidationReport) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    files.insert("report.json".to_string(), render_report_json(report));
    files.insert("predictions.csv".to_string(), predictions_csv(report));
    for (phase, loo) in &report.phases {
        for (model, entry) in phase_entries(loo) {
            files.insert(scatter_name(phase, &model), scatter_svg(phase, &model, entry));
        }
    }
    files
}

/// Human-readable summary for the terminal.
pub fn summary_text(report: &ValidationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "horizon {} months, K={} B={} seed {}, top_m {}\n",
        report.horizon_months, report.k, report.b, report.seed, report.top_m
    ));
    for (phase, loo) in &report.phases {
        out.push_str(&format!(
            "\n[{phase}] n={} finalists: {}\n",
            loo.n_wells,
            loo.finalists.join(", ")
        ));
        out.push_str(&format!(
            "  {:<22} {:>12} {:>10} {:>8}\n",
            "model", "LOO RMSE", "RMSE(sd)", "r"
        ));
        for (name, entry) in phase_entries(loo) {
            let r_txt = match entry.pearson {
                Some(r) => format!("{r:.3}"),
                None => "n/a".to_string(),
            };
            out.push_str(&format!(
                "  {:<22} {:>12} {:>10} {:>8}\n",
                name,
                fmt_tick(entry.rmse_raw),
                fmt_tick(entry.rmse_std),
                r_txt
            ));
        }
        if !loo.failed_wells.is_empty() {
            out.push_str(&format!("  failed wells: {}\n", loo.failed_wells.len()));
        }
    }
    out
}
