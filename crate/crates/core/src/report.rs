//! Base-rate report: validation accounting plus per-metric summaries and
//! boxplot data, rendered as JSON, aligned text tables, CSV and SVG.
//!
//! Every rendering is produced from one [`Report`] value, so output is a
//! pure function of the pipeline inputs.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;

use crate::ingest::Malformed;
use crate::stats::{BoxplotData, Metric, MetricSummary, ProjectYear};
use crate::validate::ValidationReport;

pub const NO_METRICS: &str = "no metrics computed";

/// Which project-years a metric was summarized over.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSection {
    pub scope: String,
    pub summary: MetricSummary<f64>,
    pub boxplot: BoxplotData<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestSection {
    pub metadata_records: usize,
    pub fact_records: usize,
    pub malformed: Vec<Malformed>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: serde_json::Value,
    pub ingest: IngestSection,
    pub validation: ValidationReport,
    pub metrics: Vec<MetricSection>,
    pub notes: Vec<String>,
}

pub fn build_report(
    config: serde_json::Value,
    ingest: IngestSection,
    validation: ValidationReport,
    metrics: Vec<MetricSection>,
    mut notes: Vec<String>,
) -> Report {
    if metrics.is_empty() {
        notes.push(NO_METRICS.to_string());
    }
    Report {
        config,
        ingest,
        validation,
        metrics,
        notes,
    }
}

/// Integer part with thousands separators, fraction rounded to three
/// places with trailing zeros dropped.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{:.3}", v);
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let (sign, digits) = match int.strip_prefix('-') {
        Some(d) => ("-", d),
        None => ("", int),
    };
    let mut grouped = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    let frac = frac.trim_end_matches('0');
    let sign = if grouped.chars().all(|c| c == '0' || c == ',') && frac.is_empty() { "" } else { sign };
    if frac.is_empty() {
        format!("{sign}{grouped}")
    } else {
        format!("{sign}{grouped}.{frac}")
    }
}

fn count(n: usize) -> String {
    format_number(n as f64)
}

/// Whole-percent rendering, e.g. `1,317 (13%)`.
pub fn format_outliers(outliers: usize, rate: f64) -> String {
    format!("{} ({}%)", count(outliers), (rate * 100.0).round() as i64)
}

fn format_attainers(attainers: &[ProjectYear]) -> String {
    let named: Vec<String> = attainers.iter().map(|a| format!("{} ({})", a.project, a.year)).collect();
    match named.len() {
        0 => "-".to_string(),
        1..=3 => named.join(", "),
        n => format!("{} and {} others", named[0], n - 1),
    }
}

#[derive(Clone, Copy)]
enum Align {
    Left,
    Right,
}

fn table(out: &mut String, header: &[&str], align: &[Align], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut String, cells: &[String]| {
        let rendered: Vec<String> = cells
            .iter()
            .zip(&widths)
            .zip(align)
            .map(|((c, &w), a)| match a {
                Align::Left => format!("{c:<w$}"),
                Align::Right => format!("{c:>w$}"),
            })
            .collect();
        let _ = writeln!(out, "{}", rendered.join("  ").trim_end());
    };
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    line(out, &header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in rows {
        line(out, row);
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "CONFIGURATION");
        if let serde_json::Value::Object(map) = &self.config {
            for (k, v) in map {
                let _ = writeln!(out, "  {k}: {v}");
            }
        }

        let _ = writeln!(out, "\nINGEST");
        let _ = writeln!(out, "  metadata records: {}", count(self.ingest.metadata_records));
        let _ = writeln!(out, "  fact records: {}", count(self.ingest.fact_records));
        let _ = writeln!(out, "  malformed records: {}", count(self.ingest.malformed.len()));
        for m in &self.ingest.malformed {
            let _ = writeln!(out, "    {}:{}: {}", m.file, m.line, m.reason);
        }

        let v = &self.validation;
        let _ = writeln!(out, "\nDATA SET SIZE (cut-off after {})", v.cutoff_year);
        let rows: Vec<Vec<String>> = [
            ("Projects collected", v.projects_collected),
            ("1. Projects excluded due to missing data", v.excluded_missing_data),
            ("2. Projects excluded due to improper SVN configuration", v.excluded_svn_config),
            ("Projects remaining", v.projects_remaining),
            ("Project months for the remaining projects", v.months_before_rule3),
            ("3. Project months excluded due to negative code size", v.excluded_negative_size),
            ("Project months remaining", v.months_remaining),
            ("Project years remaining", v.years_remaining),
            ("Projects remaining after cut-off", v.after_cutoff.projects),
            ("Project months remaining after cut-off", v.after_cutoff.months),
            ("Project years remaining after cut-off", v.after_cutoff.years),
        ]
        .iter()
        .map(|(label, n)| vec![label.to_string(), count(*n)])
        .collect();
        table(&mut out, &["Step", "Count"], &[Align::Left, Align::Right], &rows);

        let b = &v.months;
        let _ = writeln!(
            out,
            "  month buckets: input {}, missing data {}, svn config {}, negative size {}, after cut-off year {}, surviving {}",
            count(b.input),
            count(b.missing_data),
            count(b.svn_config),
            count(b.negative_size),
            count(b.after_cutoff_year),
            count(b.surviving)
        );
        if !v.diagnostics.is_empty() {
            let _ = writeln!(out, "  diagnostics:");
            for d in &v.diagnostics {
                let _ = writeln!(out, "    {d}");
            }
        }

        let _ = writeln!(out, "\nSUMMARY");
        if self.metrics.is_empty() {
            let _ = writeln!(out, "  {NO_METRICS}");
        } else {
            let rows: Vec<Vec<String>> = self
                .metrics
                .iter()
                .map(|m| {
                    let s = &m.summary;
                    vec![
                        s.metric.to_string(),
                        m.scope.clone(),
                        format_number(s.median),
                        format_attainers(&s.median_attainers),
                        format_number(s.iqr),
                        count(s.observations),
                        format_outliers(s.outliers, s.outlier_rate),
                        count(s.undefined_excluded),
                    ]
                })
                .collect();
            table(
                &mut out,
                &["Metric", "Scope", "Median", "Median project(s) (in year)", "IQR", "Observations", "Outliers (%)", "Undefined"],
                &[
                    Align::Left,
                    Align::Left,
                    Align::Right,
                    Align::Left,
                    Align::Right,
                    Align::Right,
                    Align::Right,
                    Align::Right,
                ],
                &rows,
            );

            let _ = writeln!(out, "\nBOXPLOTS");
            let rows: Vec<Vec<String>> = self
                .metrics
                .iter()
                .map(|m| {
                    let b = &m.boxplot;
                    let mut row = vec![m.summary.metric.to_string()];
                    row.extend([b.whisker_low, b.q1, b.median, b.q3, b.whisker_high].map(format_number));
                    row.push(count(b.outlier_values.len()));
                    row
                })
                .collect();
            let mut align = vec![Align::Left];
            align.extend([Align::Right; 6]);
            table(
                &mut out,
                &["Metric", "Whisker low", "Q1", "Median", "Q3", "Whisker high", "Outlier values"],
                &align,
                &rows,
            );
        }

        if !self.notes.is_empty() {
            let _ = writeln!(out, "\nNOTES");
            for n in &self.notes {
                let _ = writeln!(out, "  {n}");
            }
        }
        out
    }

    /// `metric,scope,median,median_attainers,q1,q3,iqr,observations,outliers,outlier_rate,undefined_excluded`
    pub fn write_summaries_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "metric",
            "scope",
            "median",
            "median_attainers",
            "q1",
            "q3",
            "iqr",
            "observations",
            "outliers",
            "outlier_rate",
            "undefined_excluded",
        ])?;
        for m in &self.metrics {
            let s = &m.summary;
            let attainers: Vec<String> = s.median_attainers.iter().map(|a| format!("{}:{}", a.project, a.year)).collect();
            w.write_record([
                s.metric.to_string(),
                m.scope.clone(),
                s.median.to_string(),
                attainers.join(";"),
                s.q1.to_string(),
                s.q3.to_string(),
                s.iqr.to_string(),
                s.observations.to_string(),
                s.outliers.to_string(),
                s.outlier_rate.to_string(),
                s.undefined_excluded.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `metric,q1,median,q3,whisker_low,whisker_high,outlier_values` with
    /// outlier values joined by `;`.
    pub fn write_boxplots_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "q1", "median", "q3", "whisker_low", "whisker_high", "outlier_values"])?;
        for m in &self.metrics {
            let b = &m.boxplot;
            let outliers: Vec<String> = b.outlier_values.iter().map(f64::to_string).collect();
            w.write_record([
                m.summary.metric.to_string(),
                b.q1.to_string(),
                b.median.to_string(),
                b.q3.to_string(),
                b.whisker_low.to_string(),
                b.whisker_high.to_string(),
                outliers.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

const SVG_W: f64 = 240.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 40.0;

/// Vertical boxplot zoomed so the whiskers fill the plot; outliers beyond
/// the visible range are not drawn.
pub fn render_svg(metric: Metric, scope: &str, b: &BoxplotData<f64>) -> String {
    let (lo, hi) = (b.whisker_low, b.whisker_high);
    let pad = if hi > lo { (hi - lo) * 0.05 } else { lo.abs().max(1.0) * 0.05 };
    let (view_lo, view_hi) = (lo - pad, hi + pad);
    let y = |v: f64| MARGIN + (view_hi - v) / (view_hi - view_lo) * (SVG_H - 2.0 * MARGIN);
    let (cx, half) = (SVG_W / 2.0 + 20.0, 40.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{} ({})</text>"#,
        SVG_W / 2.0,
        metric,
        scope
    );
    let _ = writeln!(
        s,
        r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
        y(hi),
        y(b.q3)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
        y(b.q1),
        y(lo)
    );
    for w in [lo, hi] {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            cx - half / 2.0,
            y(w),
            cx + half / 2.0,
            y(w)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="lightgrey" stroke="black"/>"#,
        cx - half,
        y(b.q3),
        2.0 * half,
        (y(b.q1) - y(b.q3)).max(0.0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
        cx - half,
        y(b.median),
        cx + half,
        y(b.median)
    );
    for &o in b.outlier_values.iter().filter(|&&o| o >= view_lo && o <= view_hi) {
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{:.2}" r="2" fill="none" stroke="black"/>"#, y(o));
    }
    for v in [lo, b.q1, b.median, b.q3, hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
            MARGIN + 20.0,
            y(v) + 3.0,
            format_number(v)
        );
    }
    s.push_str("</svg>\n");
    s
}
