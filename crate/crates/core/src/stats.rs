//! Robust summary statistics: quantiles, IQR, Tukey outliers, boxplot data,
//! and the base-rate posterior.
//!
//! Quantiles use linear interpolation between order statistics at 1-based
//! index `h = (n - 1) p + 1`, the default of R's `quantile`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

/// Multiple of the IQR beyond the quartiles at which a point is an outlier.
pub const FENCE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no defined observations")]
    Empty,
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitRange { name: &'static str, value: String },
    #[error("observations contain NaN")]
    NotComparable,
    #[error("test never fires positive: posterior undefined")]
    Uninformative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Metric {
    #[serde(rename = "CS")]
    CodeSize,
    #[serde(rename = "CGa")]
    AbsoluteGrowth,
    #[serde(rename = "CGi")]
    IndexedGrowth,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::CodeSize, Metric::AbsoluteGrowth, Metric::IndexedGrowth];

    pub fn acronym(self) -> &'static str {
        match self {
            Metric::CodeSize => "CS",
            Metric::AbsoluteGrowth => "CGa",
            Metric::IndexedGrowth => "CGi",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.acronym())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ProjectYear {
    pub project: String,
    pub year: i32,
}

/// One metric value for one project-year; `None` when undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub project: String,
    pub year: i32,
    pub value: Option<T>,
}

impl<T> Observation<T> {
    pub fn new(project: impl Into<String>, year: i32, value: Option<T>) -> Self {
        Observation {
            project: project.into(),
            year,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary<T> {
    pub metric: Metric,
    pub median: T,
    /// Project-years whose value equals the median, or, for an interpolated
    /// median, those at the two bracketing order statistics.
    pub median_attainers: Vec<ProjectYear>,
    pub q1: T,
    pub q3: T,
    pub iqr: T,
    pub observations: usize,
    pub outliers: usize,
    pub outlier_rate: f64,
    /// Observations left out because their value was undefined.
    pub undefined_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotData<T> {
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub whisker_low: T,
    pub whisker_high: T,
    pub outlier_values: Vec<T>,
}

fn check_unit<T: Scalar>(name: &'static str, value: T) -> Result<T, StatsError> {
    if value.is_comparable() && value >= T::zero() && value <= T::one() {
        Ok(value)
    } else {
        Err(StatsError::OutOfUnitRange {
            name,
            value: value.to_string(),
        })
    }
}

fn sorted<T: Scalar>(values: &[T]) -> Result<Vec<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_comparable()) {
        return Err(StatsError::NotComparable);
    }
    let mut xs = values.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
    Ok(xs)
}

/// Position of quantile `p` in 0-based order statistics: `(j, frac)` with
/// the quantile lying `frac` of the way from `x[j]` to `x[j + 1]`.
fn position<T: Scalar>(n: usize, p: T) -> (usize, T) {
    let h = T::from_usize(n - 1).expect("length fits") * p;
    let j = h.floor();
    (j.to_usize().expect("non-negative index"), h - j)
}

fn quantile_sorted<T: Scalar>(xs: &[T], p: T) -> T {
    let (j, frac) = position(xs.len(), p);
    if j + 1 >= xs.len() {
        xs[xs.len() - 1]
    } else {
        xs[j] + frac * (xs[j + 1] - xs[j])
    }
}

pub fn quantile<T: Scalar>(values: &[T], p: T) -> Result<T, StatsError> {
    let p = check_unit("p", p)?;
    Ok(quantile_sorted(&sorted(values)?, p))
}

struct Quartiles<T> {
    q1: T,
    median: T,
    q3: T,
    low_fence: T,
    high_fence: T,
}

impl<T: Scalar> Quartiles<T> {
    fn of_sorted(xs: &[T]) -> Self {
        let q1 = quantile_sorted(xs, T::from_f64_lossy(0.25));
        let median = quantile_sorted(xs, T::from_f64_lossy(0.5));
        let q3 = quantile_sorted(xs, T::from_f64_lossy(0.75));
        let reach = T::from_f64_lossy(FENCE_FACTOR) * (q3 - q1);
        Quartiles {
            q1,
            median,
            q3,
            low_fence: q1 - reach,
            high_fence: q3 + reach,
        }
    }

    fn is_outlier(&self, v: T) -> bool {
        v < self.low_fence || v > self.high_fence
    }
}

/// Indices (into `values`) of the points beyond 1.5 IQR from the quartiles.
pub fn outlier_indices<T: Scalar>(values: &[T]) -> Result<Vec<usize>, StatsError> {
    let q = Quartiles::of_sorted(&sorted(values)?);
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, v)| q.is_outlier(**v))
        .map(|(i, _)| i)
        .collect())
}

pub fn summarize<T: Scalar>(observations: &[Observation<T>], metric: Metric) -> Result<MetricSummary<T>, StatsError> {
    let defined: Vec<(&Observation<T>, T)> = observations
        .iter()
        .filter_map(|o| o.value.map(|v| (o, v)))
        .collect();
    let values: Vec<T> = defined.iter().map(|(_, v)| *v).collect();
    let xs = sorted(&values)?;
    let q = Quartiles::of_sorted(&xs);

    let attaining = |target: &[T]| -> Vec<ProjectYear> {
        let mut out: Vec<ProjectYear> = defined
            .iter()
            .filter(|(_, v)| target.contains(v))
            .map(|(o, _)| ProjectYear {
                project: o.project.clone(),
                year: o.year,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    };
    let mut median_attainers = attaining(&[q.median]);
    if median_attainers.is_empty() {
        let (j, _) = position(xs.len(), T::from_f64_lossy(0.5));
        median_attainers = attaining(&xs[j..(j + 2).min(xs.len())]);
    }

    let outliers = values.iter().filter(|v| q.is_outlier(**v)).count();
    Ok(MetricSummary {
        metric,
        median: q.median,
        median_attainers,
        q1: q.q1,
        q3: q.q3,
        iqr: q.q3 - q.q1,
        observations: values.len(),
        outliers,
        outlier_rate: outliers as f64 / values.len() as f64,
        undefined_excluded: observations.len() - values.len(),
    })
}

/// Tukey boxplot: whiskers at the most extreme points within the fences.
pub fn boxplot_data<T: Scalar>(values: &[T]) -> Result<BoxplotData<T>, StatsError> {
    let xs = sorted(values)?;
    let q = Quartiles::of_sorted(&xs);
    let inside = || xs.iter().copied().filter(|v| !q.is_outlier(*v));
    let lowest = inside().next().unwrap_or(q.q1);
    let highest = inside().last().unwrap_or(q.q3);
    Ok(BoxplotData {
        q1: q.q1,
        median: q.median,
        q3: q.q3,
        whisker_low: if lowest < q.q1 { lowest } else { q.q1 },
        whisker_high: if highest > q.q3 { highest } else { q.q3 },
        outlier_values: xs.iter().copied().filter(|v| q.is_outlier(*v)).collect(),
    })
}

/// Probability of the condition given a positive test:
/// `sens * prior / (sens * prior + (1 - spec) * (1 - prior))`.
pub fn base_rate_posterior<T: Scalar>(prior: T, sensitivity: T, specificity: T) -> Result<T, StatsError> {
    let prior = check_unit("prior", prior)?;
    let sensitivity = check_unit("sensitivity", sensitivity)?;
    let specificity = check_unit("specificity", specificity)?;
    let true_pos = sensitivity * prior;
    let denom = true_pos + (T::one() - specificity) * (T::one() - prior);
    if denom.is_zero() {
        return Err(StatsError::Uninformative);
    }
    Ok(true_pos / denom)
}
