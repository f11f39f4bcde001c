//! Monthly growth and yearly code size / growth aggregates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::facts::{by_project, MonthlyFacts, MonthlyGrowth, YearlyAggregate};
use crate::scalar::Scalar;

/// How to report CGa and CGi for a year that has facts but no growth month.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthlessYearPolicy {
    /// Leave both undefined: no evidence of change.
    #[default]
    Undefined,
    /// Report CGa = 0 and CGi = 1: no change.
    Zero,
}

impl std::str::FromStr for GrowthlessYearPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "undefined" => Ok(Self::Undefined),
            "zero" => Ok(Self::Zero),
            other => Err(format!("unknown growthless-year policy `{other}` (expected undefined|zero)")),
        }
    }
}

/// Growth of each month against the previous calendar month.
///
/// `facts` holds one project's months sorted by key. A missing month breaks
/// the chain: the month after a gap gets no growth record.
pub fn derive_monthly_growth<T: Scalar>(facts: &[MonthlyFacts]) -> Vec<MonthlyGrowth<T>> {
    facts
        .windows(2)
        .filter(|w| w[1].key.directly_follows(&w[0].key))
        .map(|w| {
            let (prev, cur) = (w[0].loc, w[1].loc);
            MonthlyGrowth {
                key: w[1].key.clone(),
                abs_growth: cur - prev,
                indexed_growth: (prev != 0).then(|| T::from_i64_lossy(cur) / T::from_i64_lossy(prev)),
            }
        })
        .collect()
}

/// Yearly aggregates for one project.
///
/// CS is the largest monthly LOC, CGa the sum of the year's monthly absolute
/// growth, CGi the product of its defined monthly ratios, and age the
/// distance to `first_active_year`. Growth of January counts towards its own
/// year even though it is measured from the previous December.
pub fn aggregate_years<T: Scalar>(
    facts: &[MonthlyFacts],
    growth: &[MonthlyGrowth<T>],
    first_active_year: i32,
    policy: GrowthlessYearPolicy,
) -> Vec<YearlyAggregate<T>> {
    let mut growth_by_year: BTreeMap<i32, Vec<&MonthlyGrowth<T>>> = BTreeMap::new();
    for g in growth {
        growth_by_year.entry(g.key.year).or_default().push(g);
    }

    facts
        .chunk_by(|a, b| a.key.year == b.key.year)
        .map(|months| {
            let year = months[0].key.year;
            let grown = growth_by_year.get(&year).map(Vec::as_slice).unwrap_or_default();
            let ratios: Vec<T> = grown.iter().filter_map(|g| g.indexed_growth).collect();

            let (cga, cgi) = if grown.is_empty() {
                match policy {
                    GrowthlessYearPolicy::Undefined => (None, None),
                    GrowthlessYearPolicy::Zero => (Some(0), Some(T::one())),
                }
            } else {
                let cga = grown.iter().map(|g| g.abs_growth).sum();
                let cgi = (!ratios.is_empty()).then(|| T::product(&ratios));
                (Some(cga), cgi)
            };

            YearlyAggregate {
                project: months[0].key.project.clone(),
                year,
                cs: months.iter().map(|m| m.loc).max().expect("non-empty chunk"),
                cga,
                cgi,
                age: year - first_active_year,
                months_present: months.len() as u8,
                growth_months: grown.len() as u8,
                undefined_ratios: (grown.len() - ratios.len()) as u8,
            }
        })
        .collect()
}

/// Aggregates every project of a validated, key-sorted fact list. The
/// first active year of each project is its earliest month in `facts`.
pub fn aggregate_all<T: Scalar>(facts: &[MonthlyFacts], policy: GrowthlessYearPolicy) -> Vec<YearlyAggregate<T>> {
    let runs: Vec<&[MonthlyFacts]> = by_project(facts).collect();
    runs.par_iter()
        .flat_map_iter(|run| {
            let growth = derive_monthly_growth::<T>(run);
            aggregate_years(run, &growth, run[0].key.year, policy)
        })
        .collect()
}

/// Aggregates as CSV: `project,year,cs,cga,cgi,age,months_present`, empty
/// cells for undefined values.
pub fn write_aggregates_csv<T: Scalar, W: std::io::Write>(out: W, aggregates: &[YearlyAggregate<T>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["project", "year", "cs", "cga", "cgi", "age", "months_present"])?;
    for a in aggregates {
        w.write_record([
            a.project.clone(),
            a.year.to_string(),
            a.cs.to_string(),
            a.cga.map(|v| v.to_string()).unwrap_or_default(),
            a.cgi.map(|v| v.to_string()).unwrap_or_default(),
            a.age.to_string(),
            a.months_present.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
