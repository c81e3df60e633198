//! Evaluation: relative deviation, spread, edge distance and population diversity.

use std::time::Duration;

use thiserror::Error;

use crate::landscape::Tour;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("reference length must be positive, got {0}")]
    NonPositiveReference(i64),
    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("tours have {0} and {1} cities")]
    SizeMismatch(usize, usize),
}

pub fn rpd(f: i64, f_star: i64) -> Result<f64, MetricsError> {
    if f_star <= 0 {
        return Err(MetricsError::NonPositiveReference(f_star));
    }
    Ok(100.0 * (f - f_star) as f64 / f_star as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdKind {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1.
    Sample,
}

pub fn sd_percent(values: &[i64], f_star: i64) -> Result<f64, MetricsError> {
    sd_percent_with(values, f_star, SdKind::Population)
}

pub fn sd_percent_with(values: &[i64], f_star: i64, kind: SdKind) -> Result<f64, MetricsError> {
    if f_star <= 0 {
        return Err(MetricsError::NonPositiveReference(f_star));
    }
    let need = match kind {
        SdKind::Population => 1,
        SdKind::Sample => 2,
    };
    if values.len() < need {
        return Err(MetricsError::TooFew {
            need,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let ss: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    let denom = match kind {
        SdKind::Population => n,
        SdKind::Sample => n - 1.0,
    };
    Ok(100.0 * (ss / denom).sqrt() / f_star as f64)
}

/// Number of undirected edges of `a` missing from `b`.
pub fn tour_distance(a: &Tour, b: &Tour) -> Result<usize, MetricsError> {
    if a.n() != b.n() {
        return Err(MetricsError::SizeMismatch(a.n(), b.n()));
    }
    let n = b.n();
    let mut around = vec![(0usize, 0usize); n];
    let pb = b.perm();
    for i in 0..n {
        around[pb[i]] = (pb[(i + n - 1) % n], pb[(i + 1) % n]);
    }
    let pa = a.perm();
    Ok((0..n)
        .filter(|&i| {
            let (x, y) = (pa[i], pa[(i + 1) % n]);
            let (p, s) = around[x];
            p != y && s != y
        })
        .count())
}

/// Mean pairwise [`tour_distance`] divided by the number of cities.
pub fn population_diversity(tours: &[Tour]) -> Result<f64, MetricsError> {
    if tours.len() < 2 {
        return Err(MetricsError::TooFew {
            need: 2,
            got: tours.len(),
        });
    }
    let mut total = 0usize;
    let mut pairs = 0usize;
    for i in 0..tours.len() {
        for j in (i + 1)..tours.len() {
            total += tour_distance(&tours[i], &tours[j])?;
            pairs += 1;
        }
    }
    Ok(total as f64 / pairs as f64 / tours[0].n() as f64)
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical distribution functions of `a` and `b`. Ties are handled by
/// stepping over each distinct value at once.
pub fn ks_statistic(a: &[i64], b: &[i64]) -> Result<f64, MetricsError> {
    for s in [a, b] {
        if s.is_empty() {
            return Err(MetricsError::TooFew { need: 1, got: 0 });
        }
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Large-sample critical value of [`ks_statistic`] at significance `alpha`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub instance: String,
    pub f_star: i64,
    pub runs: usize,
    /// Fraction of runs that reached `f_star`.
    pub best_ratio: f64,
    pub mean_rpd: f64,
    pub sd: f64,
    pub best: i64,
    pub worst: i64,
}

pub fn summarize(instance: &str, finals: &[i64], f_star: i64) -> Result<RunSummary, MetricsError> {
    if finals.is_empty() {
        return Err(MetricsError::TooFew { need: 1, got: 0 });
    }
    let hits = finals.iter().filter(|&&f| f <= f_star).count();
    let mean_len = finals.iter().map(|&f| f as f64).sum::<f64>() / finals.len() as f64;
    Ok(RunSummary {
        instance: instance.to_string(),
        f_star,
        runs: finals.len(),
        best_ratio: hits as f64 / finals.len() as f64,
        mean_rpd: 100.0 * (mean_len - f_star as f64) / f_star as f64,
        sd: sd_percent(finals, f_star)?,
        best: *finals.iter().min().unwrap(),
        worst: *finals.iter().max().unwrap(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub t: usize,
    pub f_gb: i64,
    pub diversity: f64,
    pub elapsed: Duration,
}

/// Per-cycle record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<CycleRecord>,
}

impl RunTrace {
    pub fn push(&mut self, rec: CycleRecord) {
        self.records.push(rec);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_length(&self) -> Option<i64> {
        self.records.last().map(|r| r.f_gb)
    }

    /// Mean diversity over cycles `from..=to`.
    pub fn mean_diversity(&self, from: usize, to: usize) -> Option<f64> {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.t >= from && r.t <= to)
            .map(|r| r.diversity)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Same records with timing dropped, for comparing runs.
    pub fn without_time(&self) -> Vec<(usize, i64, f64)> {
        self.records
            .iter()
            .map(|r| (r.t, r.f_gb, r.diversity))
            .collect()
    }
}
