//! Exclusion rules for collected project data.
//!
//! Rules are applied in a fixed order and every exclusion is counted:
//!
//! 1. missing data: no metadata, duplicate keys, or no month carrying both
//!    size and activity facts;
//! 2. Subversion enlistments that point at a top-level directory instead of
//!    a trunk, branch or tag;
//! 3. individual months with a negative code size;
//!
//! and finally every month after the cut-off year is dropped.
//!
//! "Projects finally remaining" counts only projects that keep at least one
//! month after the cut-off.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::bytes::Regex;
use serde::Serialize;

use crate::facts::{by_project, JoinOutcome, MonthlyFacts, ProjectMeta};

/// Accepted shapes of a Subversion URL, matched case-insensitively against
/// the whole URL.
pub const SVN_PATTERNS: [&str; 6] = [
    r".*/trunk/?",
    r".*/head/?",
    r".*/sandbox/?",
    r".*/site/?",
    r".*/branches/\w+",
    r".*/tags/\w+",
];

fn svn_regexes() -> &'static [Regex] {
    static RE: OnceLock<Vec<Regex>> = OnceLock::new();
    RE.get_or_init(|| {
        SVN_PATTERNS
            .iter()
            // ASCII-only case folding and `\w`, full match.
            .map(|p| Regex::new(&format!("(?i-u)^(?:{p})$")).expect("static pattern"))
            .collect()
    })
}

pub fn svn_url_ok(url: &str) -> bool {
    svn_regexes().iter().any(|re| re.is_match(url.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvnCheck {
    pub offending: Vec<String>,
}

impl SvnCheck {
    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }
}

/// Checks every Subversion enlistment of a project. Projects without one pass.
pub fn check_svn_enlistments(meta: &ProjectMeta) -> SvnCheck {
    SvnCheck {
        offending: meta
            .enlistments
            .iter()
            .filter(|e| e.kind.is_svn() && !svn_url_ok(&e.url))
            .map(|e| e.url.clone())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SetSize {
    pub projects: usize,
    pub months: usize,
    pub years: usize,
}

/// Exclusion accounting, in rule order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub cutoff_year: i32,
    pub projects_collected: usize,
    pub excluded_missing_data: usize,
    pub excluded_svn_config: usize,
    pub projects_remaining: usize,
    pub months_before_rule3: usize,
    pub excluded_negative_size: usize,
    pub months_remaining: usize,
    pub years_remaining: usize,
    pub after_cutoff: SetSize,
    pub months: MonthBuckets,
    pub diagnostics: Vec<String>,
}

/// Where each joined input month ended up. The buckets partition the input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MonthBuckets {
    pub input: usize,
    pub missing_data: usize,
    pub svn_config: usize,
    pub negative_size: usize,
    pub after_cutoff_year: usize,
    pub surviving: usize,
}

impl MonthBuckets {
    pub fn is_partition(&self) -> bool {
        self.input == self.missing_data + self.svn_config + self.negative_size + self.after_cutoff_year + self.surviving
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectRule {
    MissingData,
    SvnConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome {
    pub facts: Vec<MonthlyFacts>,
    /// Projects with at least one surviving month, `first_active_year` filled in.
    pub projects: Vec<ProjectMeta>,
    pub report: ValidationReport,
}

pub fn validate_dataset(metas: &[ProjectMeta], joined: &JoinOutcome, cutoff_year: i32) -> ValidationOutcome {
    validate_dataset_ordered(metas, joined, cutoff_year, [ProjectRule::MissingData, ProjectRule::SvnConfig])
}

/// As [`validate_dataset`] with an explicit order for the two project-level
/// rules. The surviving set does not depend on the order; only the
/// attribution of projects failing both rules does.
pub fn validate_dataset_ordered(
    metas: &[ProjectMeta],
    joined: &JoinOutcome,
    cutoff_year: i32,
    order: [ProjectRule; 2],
) -> ValidationOutcome {
    let mut report = ValidationReport {
        cutoff_year,
        ..Default::default()
    };

    let meta_by_name: BTreeMap<&str, &ProjectMeta> = metas.iter().map(|m| (m.name.as_str(), m)).collect();
    let months_by_project: BTreeMap<&str, &[MonthlyFacts]> =
        by_project(&joined.facts).map(|run| (run[0].key.project.as_str(), run)).collect();

    let mut collected: BTreeSet<&str> = meta_by_name.keys().copied().collect();
    collected.extend(months_by_project.keys().copied());
    collected.extend(joined.rejected.keys().map(String::as_str));
    report.projects_collected = collected.len();
    report.months.input = joined.facts.len();

    let missing_data = |name: &str| -> Option<String> {
        if let Some(reason) = joined.rejected.get(name) {
            Some(format!("{name}: {reason}"))
        } else if !meta_by_name.contains_key(name) {
            Some(format!("{name}: no metadata"))
        } else if !months_by_project.contains_key(name) {
            Some(format!("{name}: no month with both size and activity facts"))
        } else {
            None
        }
    };
    let svn_config = |name: &str| -> Option<String> {
        let meta = meta_by_name.get(name)?;
        let check = check_svn_enlistments(meta);
        (!check.passed()).then(|| format!("{name}: improper SVN enlistment {}", check.offending.join(" ")))
    };

    let mut remaining = Vec::new();
    for &name in &collected {
        let months = months_by_project.get(name).map_or(0, |m| m.len());
        let mut excluded = false;
        for rule in order {
            let verdict = match rule {
                ProjectRule::MissingData => missing_data(name),
                ProjectRule::SvnConfig => svn_config(name),
            };
            if let Some(diag) = verdict {
                match rule {
                    ProjectRule::MissingData => {
                        report.excluded_missing_data += 1;
                        report.months.missing_data += months;
                    }
                    ProjectRule::SvnConfig => {
                        report.excluded_svn_config += 1;
                        report.months.svn_config += months;
                    }
                }
                report.diagnostics.push(diag);
                excluded = true;
                break;
            }
        }
        if !excluded {
            remaining.push(name);
        }
    }
    report.projects_remaining = remaining.len();

    let mut after_rule3: Vec<&MonthlyFacts> = Vec::new();
    for name in &remaining {
        let months = months_by_project.get(name).copied().unwrap_or_default();
        report.months_before_rule3 += months.len();
        for m in months {
            if m.loc < 0 {
                report.excluded_negative_size += 1;
            } else {
                after_rule3.push(m);
            }
        }
    }
    report.months.negative_size = report.excluded_negative_size;
    report.months_remaining = after_rule3.len();
    report.years_remaining = distinct_years(after_rule3.iter().copied());

    if !after_rule3.is_empty() && after_rule3.iter().all(|m| m.key.year > cutoff_year) {
        report
            .diagnostics
            .push(format!("warning: cut-off year {cutoff_year} precedes every year in the data"));
    }
    let facts: Vec<MonthlyFacts> = after_rule3
        .into_iter()
        .filter(|m| m.key.year <= cutoff_year)
        .cloned()
        .collect();
    report.months.after_cutoff_year = report.months_remaining - facts.len();
    report.months.surviving = facts.len();

    let mut first_year: BTreeMap<&str, i32> = BTreeMap::new();
    for m in &facts {
        let y = first_year.entry(m.key.project.as_str()).or_insert(m.key.year);
        *y = (*y).min(m.key.year);
    }
    report.after_cutoff = SetSize {
        projects: first_year.len(),
        months: facts.len(),
        years: distinct_years(facts.iter()),
    };

    let projects = first_year
        .iter()
        .map(|(name, &year)| {
            let mut meta = meta_by_name[name].clone();
            meta.first_active_year = Some(year);
            meta
        })
        .collect();

    ValidationOutcome {
        facts,
        projects,
        report,
    }
}

fn distinct_years<'a>(months: impl Iterator<Item = &'a MonthlyFacts>) -> usize {
    months
        .map(|m| (m.key.project.as_str(), m.key.year))
        .collect::<BTreeSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::{Enlistment, FactKey, VcsKind};

    fn meta(name: &str, enlistments: &[(&str, &str)]) -> ProjectMeta {
        ProjectMeta {
            name: name.into(),
            enlistments: enlistments
                .iter()
                .map(|(k, u)| Enlistment {
                    kind: VcsKind::parse(k),
                    url: u.to_string(),
                })
                .collect(),
            tags: vec![],
            first_active_year: None,
        }
    }

    fn month(p: &str, y: i32, m: u8, loc: i64) -> MonthlyFacts {
        MonthlyFacts {
            key: FactKey::new(p, y, m),
            loc,
            comments: 0,
            blanks: 0,
            loc_added: 0,
            loc_removed: 0,
            commits: 0,
            contributors: 0,
        }
    }

    #[test]
    fn svn_examples() {
        assert!(svn_url_ok("http://svn.example.org/repo/trunk"));
        assert!(svn_url_ok("http://svn.example.org/repo/trunk/"));
        assert!(!svn_url_ok("http://svn.example.org/repo"));
        assert!(svn_url_ok("http://svn.example.org/repo/TAGS/v1"));
        assert!(!svn_url_ok("http://svn.example.org/repo/tags/"));
        assert!(!svn_url_ok("http://svn.example.org/repo/trunk/src"));
        // \w is ASCII only
        assert!(!svn_url_ok("http://svn.example.org/repo/tags/é"));
        // Kelvin sign does not fold to k
        assert!(!svn_url_ok("http://svn.example.org/repo/trun\u{212A}"));
    }

    #[test]
    fn non_svn_enlistments_are_ignored() {
        assert!(check_svn_enlistments(&meta("g", &[("GitRepository", "git://x")])).passed());
        assert!(check_svn_enlistments(&meta("n", &[])).passed());
        let mixed = meta(
            "m",
            &[("SvnRepository", "http://x/trunk"), ("SvnSyncRepository", "http://y/repo")],
        );
        assert_eq!(check_svn_enlistments(&mixed).offending, vec!["http://y/repo".to_string()]);
    }

    #[test]
    fn clean_data_is_identity() {
        let metas = vec![meta("a", &[]), meta("b", &[("SvnRepository", "svn://b/trunk")])];
        let joined = JoinOutcome {
            facts: vec![month("a", 2010, 1, 5), month("a", 2011, 1, 6), month("b", 2012, 3, 7)],
            rejected: Default::default(),
        };
        let out = validate_dataset(&metas, &joined, 2020);
        assert_eq!(out.facts, joined.facts);
        let r = &out.report;
        assert_eq!(
            (r.excluded_missing_data, r.excluded_svn_config, r.excluded_negative_size),
            (0, 0, 0)
        );
        assert_eq!(r.years_remaining, 3);
        assert_eq!(out.projects[0].first_active_year, Some(2010));
        assert!(r.months.is_partition());
    }

    #[test]
    fn early_cutoff_warns_and_empties() {
        let metas = vec![meta("a", &[])];
        let joined = JoinOutcome {
            facts: vec![month("a", 2010, 1, 5)],
            rejected: Default::default(),
        };
        let out = validate_dataset(&metas, &joined, 2000);
        assert!(out.facts.is_empty());
        assert_eq!(out.report.after_cutoff.projects, 0);
        assert_eq!(out.report.projects_remaining, 1);
        assert!(out.report.diagnostics[0].starts_with("warning"));
        assert!(out.report.months.is_partition());
    }

    #[test]
    fn first_active_year_uses_surviving_months() {
        let metas = vec![meta("a", &[])];
        let joined = JoinOutcome {
            facts: vec![month("a", 2008, 5, -1), month("a", 2009, 1, 5)],
            rejected: Default::default(),
        };
        let out = validate_dataset(&metas, &joined, 2012);
        assert_eq!(out.projects[0].first_active_year, Some(2009));
    }
}
