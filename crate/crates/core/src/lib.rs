//! Base rates for code size and growth of open-source projects.
//!
//! The pipeline reads monthly size and activity facts per project, drops
//! projects and months that fail the data-quality rules, derives yearly
//! code size (CS), absolute growth (CGa) and indexed growth (CGi), and
//! summarizes each metric with its median, IQR and Tukey outliers.
//! [`sloc`] produces size facts from source trees.
//!
//! Growth and statistics code is generic over [`Scalar`]; the aliases below
//! fix it to `f64` for the pipeline and to an exact rational for checks.

pub mod facts;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod sloc;
pub mod stats;
pub mod validate;

pub use scalar::Scalar;

/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i64>;

pub type Growth = facts::MonthlyGrowth<f64>;
pub type Aggregate = facts::YearlyAggregate<f64>;
pub type Summary = stats::MetricSummary<f64>;
pub type Boxplot = stats::BoxplotData<f64>;

pub type ExactGrowth = facts::MonthlyGrowth<Exact>;
pub type ExactAggregate = facts::YearlyAggregate<Exact>;
pub type ExactSummary = stats::MetricSummary<Exact>;
