//! Reading and writing the on-disk metadata and facts formats.
//!
//! Facts are UTF-8 CSV with the header [`FACTS_HEADER`], one row per
//! project-month. A row may carry only the size half
//! (`loc,comments,blanks`) or only the activity half
//! (`loc_added,loc_removed,commits,contributors`), leaving the other cells
//! empty.
//!
//! Metadata is JSON lines, one project per line:
//! `{"name": ..., "enlistments": [{"type": ..., "url": ...}], "tags": [...]}`.
//!
//! Both readers are strict per record and lenient per file: a bad record is
//! skipped and listed in the [`IngestReport`], only an unreadable file or a
//! wrong header is fatal.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::facts::{ActivityRecord, FactKey, ProjectMeta, SizeRecord, MIN_YEAR};

pub const FACTS_HEADER: &str = "project,year,month,loc,comments,blanks,loc_added,loc_removed,commits,contributors";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: expected header `{FACTS_HEADER}`, found `{found}`")]
    BadHeader { path: PathBuf, found: String },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Malformed {
    pub file: String,
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub projects_read: usize,
    pub records_read: usize,
    pub malformed: Vec<Malformed>,
}

impl IngestReport {
    pub fn malformed_records(&self) -> usize {
        self.malformed.len()
    }

    pub fn merge(&mut self, other: IngestReport) {
        self.projects_read += other.projects_read;
        self.records_read += other.records_read;
        self.malformed.extend(other.malformed);
    }
}

/// Raw size and activity records read from facts files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawFacts {
    pub size: Vec<SizeRecord>,
    pub activity: Vec<ActivityRecord>,
}

impl RawFacts {
    pub fn sort(&mut self) {
        self.size.sort_by(|a, b| a.key.cmp(&b.key));
        self.activity.sort_by(|a, b| a.key.cmp(&b.key));
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_metadata(path: &Path) -> Result<(Vec<ProjectMeta>, IngestReport), IngestError> {
    let file = open(path)?;
    parse_metadata(BufReader::new(file), &path.display().to_string()).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses JSON-lines metadata. Blank lines are ignored; empty or repeated
/// project names are malformed.
pub fn parse_metadata<R: BufRead>(reader: R, label: &str) -> io::Result<(Vec<ProjectMeta>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut metas = Vec::new();
    let mut names = BTreeSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.records_read += 1;
        let mut bad = |reason: String| {
            report.malformed.push(Malformed {
                file: label.to_string(),
                line: idx as u64 + 1,
                reason,
            })
        };
        let meta: ProjectMeta = match serde_json::from_str(&line) {
            Ok(m) => m,
            Err(e) => {
                bad(format!("invalid metadata record: {e}"));
                continue;
            }
        };
        if meta.name.trim().is_empty() {
            bad("empty project name".to_string());
            continue;
        }
        if !names.insert(meta.name.clone()) {
            bad(format!("duplicate project name `{}`", meta.name));
            continue;
        }
        metas.push(meta);
    }
    report.projects_read = metas.len();
    Ok((metas, report))
}

pub fn write_metadata<W: Write>(mut out: W, metas: &[ProjectMeta]) -> io::Result<()> {
    for meta in metas {
        serde_json::to_writer(&mut out, meta)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_facts(path: &Path) -> Result<(RawFacts, IngestReport), IngestError> {
    let file = open(path)?;
    parse_facts(file, &path.display().to_string()).map_err(|e| match e {
        ParseFailure::Header(found) => IngestError::BadHeader {
            path: path.to_path_buf(),
            found,
        },
        ParseFailure::Csv(source) => IngestError::Csv {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Reads several facts files in parallel and merges them in key order.
pub fn read_facts_many(paths: &[PathBuf]) -> Result<(RawFacts, IngestReport), IngestError> {
    let parts = paths
        .par_iter()
        .map(|p| read_facts(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut raw = RawFacts::default();
    let mut report = IngestReport::default();
    let mut projects = BTreeSet::new();
    for (part, rep) in parts {
        projects.extend(part.size.iter().map(|r| r.key.project.clone()));
        projects.extend(part.activity.iter().map(|r| r.key.project.clone()));
        raw.size.extend(part.size);
        raw.activity.extend(part.activity);
        report.merge(rep);
    }
    raw.sort();
    report.projects_read = projects.len();
    Ok((raw, report))
}

#[derive(Debug)]
pub enum ParseFailure {
    Header(String),
    Csv(csv::Error),
}

impl From<csv::Error> for ParseFailure {
    fn from(e: csv::Error) -> Self {
        ParseFailure::Csv(e)
    }
}

enum Row {
    Size(SizeRecord),
    Activity(ActivityRecord),
    Both(SizeRecord, ActivityRecord),
}

fn parse_int<T: std::str::FromStr>(field: &str, name: &str) -> Result<T, String> {
    field
        .trim()
        .parse()
        .map_err(|_| format!("field `{name}` is not a valid integer: `{field}`"))
}

fn parse_row(rec: &csv::StringRecord) -> Result<Row, String> {
    if rec.len() != 10 {
        return Err(format!("expected 10 fields, found {}", rec.len()));
    }
    let project = rec[0].trim();
    if project.is_empty() {
        return Err("empty project name".to_string());
    }
    let year: i32 = parse_int(&rec[1], "year")?;
    if year < MIN_YEAR {
        return Err(format!("year {year} is before {MIN_YEAR}"));
    }
    let month: u8 = parse_int(&rec[2], "month")?;
    if !(1..=12).contains(&month) {
        return Err(format!("month {month} outside 1-12"));
    }
    let key = FactKey::new(project, year, month);

    let half = |range: std::ops::Range<usize>| -> Result<bool, String> {
        let empty = range.clone().filter(|&i| rec[i].trim().is_empty()).count();
        match empty {
            0 => Ok(true),
            n if n == range.len() => Ok(false),
            _ => Err(format!("partially filled fields {range:?}")),
        }
    };
    let has_size = half(3..6)?;
    let has_activity = half(6..10)?;

    let size = if has_size {
        let comments: i64 = parse_int(&rec[4], "comments")?;
        let blanks: i64 = parse_int(&rec[5], "blanks")?;
        if comments < 0 || blanks < 0 {
            return Err("negative comment or blank count".to_string());
        }
        Some(SizeRecord {
            key: key.clone(),
            loc: parse_int(&rec[3], "loc")?,
            comments,
            blanks,
        })
    } else {
        None
    };
    let activity = if has_activity {
        Some(ActivityRecord {
            key,
            loc_added: parse_int(&rec[6], "loc_added")?,
            loc_removed: parse_int(&rec[7], "loc_removed")?,
            commits: parse_int(&rec[8], "commits")?,
            contributors: parse_int(&rec[9], "contributors")?,
        })
    } else {
        None
    };
    match (size, activity) {
        (Some(s), Some(a)) => Ok(Row::Both(s, a)),
        (Some(s), None) => Ok(Row::Size(s)),
        (None, Some(a)) => Ok(Row::Activity(a)),
        (None, None) => Err("row carries neither size nor activity facts".to_string()),
    }
}

/// Parses the canonical facts CSV. Negative `loc` is passed through.
pub fn parse_facts<R: Read>(reader: R, label: &str) -> Result<(RawFacts, IngestReport), ParseFailure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(h) => h?,
        None => return Err(ParseFailure::Header(String::new())),
    };
    let found = header.iter().collect::<Vec<_>>().join(",");
    if found != FACTS_HEADER {
        return Err(ParseFailure::Header(found));
    }

    let mut raw = RawFacts::default();
    let mut report = IngestReport::default();
    let mut projects = BTreeSet::new();
    for rec in records {
        let rec = rec?;
        report.records_read += 1;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        match parse_row(&rec) {
            Ok(row) => {
                match row {
                    Row::Size(s) => raw.size.push(s),
                    Row::Activity(a) => raw.activity.push(a),
                    Row::Both(s, a) => {
                        raw.size.push(s);
                        raw.activity.push(a);
                    }
                }
                projects.insert(rec[0].trim().to_string());
            }
            Err(reason) => report.malformed.push(Malformed {
                file: label.to_string(),
                line,
                reason,
            }),
        }
    }
    report.projects_read = projects.len();
    Ok((raw, report))
}

/// Writes records in the canonical facts format, one row per key.
pub fn write_facts<W: Write>(out: W, facts: &RawFacts) -> csv::Result<()> {
    use std::collections::BTreeMap;

    let mut rows: BTreeMap<&FactKey, (Option<&SizeRecord>, Option<&ActivityRecord>)> = BTreeMap::new();
    for s in &facts.size {
        rows.entry(&s.key).or_default().0 = Some(s);
    }
    for a in &facts.activity {
        rows.entry(&a.key).or_default().1 = Some(a);
    }

    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(FACTS_HEADER.split(','))?;
    for (key, (size, activity)) in rows {
        let mut rec = vec![key.project.clone(), key.year.to_string(), key.month.to_string()];
        match size {
            Some(s) => rec.extend([s.loc.to_string(), s.comments.to_string(), s.blanks.to_string()]),
            None => rec.extend(std::iter::repeat_n(String::new(), 3)),
        }
        match activity {
            Some(a) => rec.extend([
                a.loc_added.to_string(),
                a.loc_removed.to_string(),
                a.commits.to_string(),
                a.contributors.to_string(),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
