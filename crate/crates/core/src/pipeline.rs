//! End-to-end analysis: ingest, join, validate, aggregate, summarize, report.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{join_facts, YearlyAggregate};
use crate::ingest::{self, IngestError, IngestReport, Malformed};
use crate::metrics::{aggregate_all, write_aggregates_csv, GrowthlessYearPolicy};
use crate::report::{build_report, render_svg, IngestSection, MetricSection, Report};
use crate::stats::{boxplot_data, summarize, Metric, Observation, StatsError};
use crate::validate::validate_dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub metadata: Vec<PathBuf>,
    pub facts: Vec<PathBuf>,
    pub cutoff_year: i32,
    #[serde(default)]
    pub growthless_year_policy: GrowthlessYearPolicy,
    /// Year whose project-years feed the CS summary; defaults to the cut-off year.
    #[serde(default)]
    pub cs_year: Option<i32>,
    #[serde(default)]
    pub svg: bool,
}

impl AnalyzeConfig {
    pub fn cs_year(&self) -> i32 {
        self.cs_year.unwrap_or(self.cutoff_year)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: Report,
    pub aggregates: Vec<YearlyAggregate<f64>>,
}

impl Analysis {
    /// True when at least one project survived validation.
    pub fn is_complete(&self) -> bool {
        self.report.validation.after_cutoff.projects > 0
    }
}

fn read_all_metadata(paths: &[PathBuf]) -> Result<(Vec<crate::facts::ProjectMeta>, IngestReport), IngestError> {
    let mut metas = Vec::new();
    let mut report = IngestReport::default();
    let mut names = BTreeSet::new();
    for path in paths {
        let (part, rep) = ingest::read_metadata(path)?;
        report.merge(rep);
        for meta in part {
            if names.insert(meta.name.clone()) {
                metas.push(meta);
            } else {
                report.projects_read -= 1;
                report.malformed.push(Malformed {
                    file: path.display().to_string(),
                    line: 0,
                    reason: format!("project `{}` already defined in an earlier metadata file", meta.name),
                });
            }
        }
    }
    Ok((metas, report))
}

fn section(metric: Metric, scope: String, observations: &[Observation<f64>]) -> Result<MetricSection, StatsError> {
    let summary = summarize(observations, metric)?;
    let values: Vec<f64> = observations.iter().filter_map(|o| o.value).collect();
    Ok(MetricSection {
        scope,
        summary,
        boxplot: boxplot_data(&values)?,
    })
}

/// Per-metric observations: CS over the configured year only, CGa and CGi
/// over every project-year.
pub fn observations(aggregates: &[YearlyAggregate<f64>], metric: Metric, cs_year: i32) -> Vec<Observation<f64>> {
    aggregates
        .iter()
        .filter(|a| metric != Metric::CodeSize || a.year == cs_year)
        .map(|a| {
            let value = match metric {
                Metric::CodeSize => Some(a.cs as f64),
                Metric::AbsoluteGrowth => a.cga.map(|v| v as f64),
                Metric::IndexedGrowth => a.cgi,
            };
            Observation::new(a.project.clone(), a.year, value)
        })
        .collect()
}

pub fn analyze(config: &AnalyzeConfig) -> Result<Analysis, PipelineError> {
    let (metas, meta_report) = read_all_metadata(&config.metadata)?;
    let (raw, facts_report) = ingest::read_facts_many(&config.facts)?;

    let mut malformed = meta_report.malformed;
    malformed.extend(facts_report.malformed);
    let ingest = IngestSection {
        metadata_records: meta_report.records_read,
        fact_records: facts_report.records_read,
        malformed,
    };

    let joined = join_facts(&raw.size, &raw.activity);
    let validated = validate_dataset(&metas, &joined, config.cutoff_year);
    let aggregates = aggregate_all::<f64>(&validated.facts, config.growthless_year_policy);

    let mut metrics = Vec::new();
    let mut notes = Vec::new();
    for metric in Metric::ALL {
        let scope = match metric {
            Metric::CodeSize => config.cs_year().to_string(),
            _ => "all years".to_string(),
        };
        match section(metric, scope, &observations(&aggregates, metric, config.cs_year())) {
            Ok(s) => metrics.push(s),
            Err(e) => notes.push(format!("{metric}: {e}")),
        }
    }

    let echo = serde_json::to_value(config).expect("config is serializable");
    Ok(Analysis {
        report: build_report(echo, ingest, validated.report, metrics, notes),
        aggregates,
    })
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<(), PipelineError> {
    fs::write(&path, bytes).map_err(|source| PipelineError::Write { path, source })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("in-memory CSV");
    buf
}

/// Writes `report.json`, `report.txt`, `yearly_aggregates.csv`,
/// `summaries.csv`, `boxplots.csv` and, with `svg`, one
/// `boxplot_<metric>.svg` per metric. Returns the written paths.
pub fn write_outputs(dir: &Path, analysis: &Analysis, svg: bool) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let report = &analysis.report;
    let mut files = vec![
        ("report.json".to_string(), report.to_json().into_bytes()),
        ("report.txt".to_string(), report.to_text().into_bytes()),
        (
            "yearly_aggregates.csv".to_string(),
            csv_bytes(|b| write_aggregates_csv(b, &analysis.aggregates)),
        ),
        ("summaries.csv".to_string(), csv_bytes(|b| report.write_summaries_csv(b))),
        ("boxplots.csv".to_string(), csv_bytes(|b| report.write_boxplots_csv(b))),
    ];
    if svg {
        for m in &report.metrics {
            let name = format!("boxplot_{}.svg", m.summary.metric.acronym().to_lowercase());
            files.push((name, render_svg(m.summary.metric, &m.scope, &m.boxplot).into_bytes()));
        }
    }
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write(path.clone(), &bytes)?;
        written.push(path);
    }
    Ok(written)
}
