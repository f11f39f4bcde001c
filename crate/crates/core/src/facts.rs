//! Domain types for project metadata and monthly/yearly facts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Version control system behind an enlistment.
///
/// Parsed from the repository type names used in project metadata
/// (`GitRepository`, `SvnSyncRepository`, ...). Unknown names are kept
/// verbatim in [`VcsKind::Other`] and never count as Subversion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VcsKind {
    Git,
    Mercurial,
    Bazaar,
    Svn,
    SvnSync,
    Cvs,
    Other(String),
}

impl VcsKind {
    pub fn parse(s: &str) -> Self {
        match s {
            "GitRepository" => VcsKind::Git,
            "HgRepository" => VcsKind::Mercurial,
            "BzrRepository" => VcsKind::Bazaar,
            "SvnRepository" => VcsKind::Svn,
            "SvnSyncRepository" => VcsKind::SvnSync,
            "CvsRepository" => VcsKind::Cvs,
            other => VcsKind::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            VcsKind::Git => "GitRepository",
            VcsKind::Mercurial => "HgRepository",
            VcsKind::Bazaar => "BzrRepository",
            VcsKind::Svn => "SvnRepository",
            VcsKind::SvnSync => "SvnSyncRepository",
            VcsKind::Cvs => "CvsRepository",
            VcsKind::Other(s) => s,
        }
    }

    pub fn is_svn(&self) -> bool {
        matches!(self, VcsKind::Svn | VcsKind::SvnSync)
    }
}

impl fmt::Display for VcsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for VcsKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for VcsKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(VcsKind::parse(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enlistment {
    #[serde(rename = "type")]
    pub kind: VcsKind,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub name: String,
    #[serde(default)]
    pub enlistments: Vec<Enlistment>,
    #[serde(default)]
    pub tags: Vec<String>,
    /// Earliest year among the project's validated months; set by validation.
    #[serde(skip)]
    pub first_active_year: Option<i32>,
}

/// Identifies one project-month. Ordering is (project, year, month).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FactKey {
    pub project: String,
    pub year: i32,
    pub month: u8,
}

pub const MIN_YEAR: i32 = 1950;

impl FactKey {
    pub fn new(project: impl Into<String>, year: i32, month: u8) -> Self {
        FactKey {
            project: project.into(),
            year,
            month,
        }
    }

    /// Calendar month preceding `(year, month)`; January rolls back to December.
    pub fn previous_month(year: i32, month: u8) -> (i32, u8) {
        if month == 1 {
            (year - 1, 12)
        } else {
            (year, month - 1)
        }
    }

    /// True if `self` is the calendar month directly after `prev` of the same project.
    pub fn directly_follows(&self, prev: &FactKey) -> bool {
        self.project == prev.project && Self::previous_month(self.year, self.month) == (prev.year, prev.month)
    }
}

impl fmt::Display for FactKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.project, self.year, self.month)
    }
}

/// Code, comment and blank line counts at the end of a month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub key: FactKey,
    pub loc: i64,
    pub comments: i64,
    pub blanks: i64,
}

/// Changes and activity during a month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub key: FactKey,
    pub loc_added: u64,
    pub loc_removed: u64,
    pub commits: u64,
    pub contributors: u64,
}

/// Size and activity facts joined on one [`FactKey`].
///
/// `loc` may be negative before validation; such months are dropped by the
/// negative-size rule rather than refused at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthlyFacts {
    pub key: FactKey,
    pub loc: i64,
    pub comments: i64,
    pub blanks: i64,
    pub loc_added: u64,
    pub loc_removed: u64,
    pub commits: u64,
    pub contributors: u64,
}

impl MonthlyFacts {
    pub fn from_parts(size: &SizeRecord, activity: &ActivityRecord) -> Self {
        debug_assert_eq!(size.key, activity.key);
        MonthlyFacts {
            key: size.key.clone(),
            loc: size.loc,
            comments: size.comments,
            blanks: size.blanks,
            loc_added: activity.loc_added,
            loc_removed: activity.loc_removed,
            commits: activity.commits,
            contributors: activity.contributors,
        }
    }
}

/// Month-over-month growth. Present only when the previous calendar month
/// has facts too; `indexed_growth` is `None` when that month had zero LOC.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyGrowth<T> {
    pub key: FactKey,
    pub abs_growth: i64,
    pub indexed_growth: Option<T>,
}

/// Per project-year code size (CS), absolute growth (CGa), indexed growth
/// (CGi) and age.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearlyAggregate<T> {
    pub project: String,
    pub year: i32,
    pub cs: i64,
    pub cga: Option<i64>,
    pub cgi: Option<T>,
    pub age: i32,
    pub months_present: u8,
    /// Months of the year carrying a growth record.
    pub growth_months: u8,
    /// Growth months left out of the CGi product because the previous month had zero LOC.
    pub undefined_ratios: u8,
}

/// Result of [`join_facts`]: joined months plus projects refused for
/// carrying duplicate keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JoinOutcome {
    pub facts: Vec<MonthlyFacts>,
    pub rejected: BTreeMap<String, String>,
}

impl JoinOutcome {
    /// Projects that have at least one joined month.
    pub fn projects(&self) -> BTreeSet<&str> {
        self.facts.iter().map(|f| f.key.project.as_str()).collect()
    }
}

fn duplicates<'a>(keys: impl Iterator<Item = &'a FactKey>, input: &str, out: &mut BTreeMap<String, String>) {
    let mut seen = BTreeSet::new();
    for key in keys {
        if !seen.insert(key) {
            out.entry(key.project.clone())
                .or_insert_with(|| format!("duplicate {input} facts for {key}"));
        }
    }
}

/// Inner join of size and activity records on their key.
///
/// Months present in only one input are dropped. A project with a repeated
/// key in either input is left out entirely and listed in
/// [`JoinOutcome::rejected`]. Output is sorted by (project, year, month).
pub fn join_facts(size: &[SizeRecord], activity: &[ActivityRecord]) -> JoinOutcome {
    let mut rejected = BTreeMap::new();
    duplicates(size.iter().map(|r| &r.key), "size", &mut rejected);
    duplicates(activity.iter().map(|r| &r.key), "activity", &mut rejected);

    let by_key: BTreeMap<&FactKey, &ActivityRecord> = activity
        .iter()
        .filter(|r| !rejected.contains_key(&r.key.project))
        .map(|r| (&r.key, r))
        .collect();

    let mut facts: Vec<MonthlyFacts> = size
        .iter()
        .filter(|r| !rejected.contains_key(&r.key.project))
        .filter_map(|s| by_key.get(&s.key).map(|a| MonthlyFacts::from_parts(s, a)))
        .collect();
    facts.sort_by(|a, b| a.key.cmp(&b.key));

    JoinOutcome { facts, rejected }
}

/// Splits facts sorted by key into per-project runs.
pub fn by_project(facts: &[MonthlyFacts]) -> impl Iterator<Item = &[MonthlyFacts]> {
    facts.chunk_by(|a, b| a.key.project == b.key.project)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn size(p: &str, y: i32, m: u8, loc: i64) -> SizeRecord {
        SizeRecord {
            key: FactKey::new(p, y, m),
            loc,
            comments: 0,
            blanks: 0,
        }
    }

    pub(crate) fn activity(p: &str, y: i32, m: u8) -> ActivityRecord {
        ActivityRecord {
            key: FactKey::new(p, y, m),
            loc_added: 1,
            loc_removed: 0,
            commits: 1,
            contributors: 1,
        }
    }

    #[test]
    fn join_keeps_only_shared_months() {
        let out = join_facts(
            &[size("p", 2010, 1, 10), size("p", 2010, 2, 20)],
            &[activity("p", 2010, 2), activity("p", 2010, 3)],
        );
        assert_eq!(out.facts.len(), 1);
        assert_eq!(out.facts[0].key, FactKey::new("p", 2010, 2));
        assert_eq!(out.facts[0].loc, 20);
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn join_with_empty_side_is_empty() {
        let out = join_facts(&[], &[activity("p", 2010, 1)]);
        assert!(out.facts.is_empty());
    }

    #[test]
    fn duplicate_key_rejects_project() {
        let out = join_facts(
            &[size("p", 2010, 1, 1), size("p", 2010, 1, 2), size("q", 2010, 1, 3)],
            &[activity("p", 2010, 1), activity("q", 2010, 1)],
        );
        assert_eq!(out.facts.len(), 1);
        assert_eq!(out.facts[0].key.project, "q");
        assert!(out.rejected["p"].contains("duplicate size"));
    }

    #[test]
    fn previous_month_wraps_year() {
        assert_eq!(FactKey::previous_month(2010, 1), (2009, 12));
        assert_eq!(FactKey::previous_month(2010, 7), (2010, 6));
        assert!(FactKey::new("p", 2010, 1).directly_follows(&FactKey::new("p", 2009, 12)));
        assert!(!FactKey::new("p", 2010, 3).directly_follows(&FactKey::new("p", 2010, 1)));
        assert!(!FactKey::new("p", 2010, 2).directly_follows(&FactKey::new("q", 2010, 1)));
    }

    #[test]
    fn vcs_kind_names_round_trip() {
        for name in ["GitRepository", "SvnRepository", "SvnSyncRepository", "HgRepository", "DarcsRepository"] {
            assert_eq!(VcsKind::parse(name).as_str(), name);
        }
        assert!(VcsKind::parse("SvnSyncRepository").is_svn());
        assert!(!VcsKind::parse("svn").is_svn());
    }
}
