#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use baserate::facts::{ActivityRecord, FactKey, MonthlyFacts, SizeRecord};
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn month(p: &str, y: i32, m: u8, loc: i64) -> MonthlyFacts {
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

/// Nested-loop inner join keys.
pub fn brute_force_join_keys(size: &[SizeRecord], activity: &[ActivityRecord]) -> BTreeSet<FactKey> {
    let mut out = BTreeSet::new();
    for s in size {
        for a in activity {
            if s.key == a.key {
                out.insert(s.key.clone());
            }
        }
    }
    out
}

/// Quantile following R's type 7 as written in its sources:
/// `(1 - h) * x[lo] + h * x[hi]`, 1-based `index = 1 + (n - 1) p`.
pub fn r_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let index = 1.0 + (n as f64 - 1.0) * p;
    let lo = index.floor() as usize;
    let hi = index.ceil() as usize;
    let h = index - lo as f64;
    let (xlo, xhi) = (sorted[lo - 1], sorted[hi - 1]);
    if h == 0.0 || xlo == xhi {
        xlo
    } else {
        (1.0 - h) * xlo + h * xhi
    }
}

/// Outlier positions by a direct scan against independently computed fences.
pub fn brute_force_outliers(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = r_type7(&sorted, 0.25);
    let q3 = r_type7(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let mut out = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if *v < lo || *v > hi {
            out.push(i);
        }
    }
    out
}

/// Hand-written matcher for the six accepted Subversion URL shapes.
pub fn svn_oracle(url: &str) -> bool {
    let u = url.to_ascii_lowercase();
    for dir in ["trunk", "head", "sandbox", "site"] {
        if u.ends_with(&format!("/{dir}")) || u.ends_with(&format!("/{dir}/")) {
            return true;
        }
    }
    for dir in ["/branches/", "/tags/"] {
        let mut start = 0;
        while let Some(at) = u[start..].find(dir) {
            let tail = &u[start + at + dir.len()..];
            if !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
                return true;
            }
            start += at + 1;
        }
    }
    false
}

/// A previous December plus twelve complete months of strictly positive LOC.
pub fn complete_year<R: Rng>(rng: &mut R, project: &str, year: i32) -> Vec<MonthlyFacts> {
    let mut out = vec![month(project, year - 1, 12, rng.gen_range(1..1_000_000))];
    for m in 1..=12 {
        out.push(month(project, year, m, rng.gen_range(1..1_000_000)));
    }
    out
}

/// Mix of heavily tied integer samples and continuous skewed samples.
pub fn random_sample<R: Rng>(rng: &mut R, max_n: usize) -> Vec<f64> {
    let n = rng.gen_range(1..=max_n);
    if rng.gen_bool(0.5) {
        let span = rng.gen_range(1..1000);
        (0..n).map(|_| rng.gen_range(0..span) as f64).collect()
    } else {
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(-3.0..3.0);
                (u * 2.5).exp() * 1000.0 - 50.0
            })
            .collect()
    }
}

pub fn continuous_sample<R: Rng>(rng: &mut R, max_n: usize) -> Vec<f64> {
    let n = rng.gen_range(4..=max_n);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(-2.0..4.0);
            u.exp() + rng.gen_range(0.0..1.0)
        })
        .collect()
}
