//! Right-censored outcomes with covariates measured on a follow-up grid, and
//! the per-interval working datasets the interval networks are trained on.

use serde::{Deserialize, Serialize};

use crate::error::{HazardError, Result};

/// Measurement times `t_0 < t_1 < ... < t_M` plus the administrative horizon `tau`.
///
/// The grid splits follow-up into `M + 1` intervals. Interval `0` starts at
/// time zero (the first measurement only fixes where covariates are read),
/// interval `j > 0` starts at `t_j`, and the last interval ends at `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    tau: f64,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>, tau: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(HazardError::InvalidGrid("at least one measurement time is required".into()));
        }
        if points.iter().any(|t| !t.is_finite()) || !tau.is_finite() {
            return Err(HazardError::InvalidGrid("grid times must be finite".into()));
        }
        if points[0] < 0.0 {
            return Err(HazardError::InvalidGrid(format!("t_0 = {} is negative", points[0])));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HazardError::InvalidGrid("measurement times must be strictly increasing".into()));
        }
        let last = *points.last().unwrap();
        if tau <= last {
            return Err(HazardError::InvalidGrid(format!("tau = {tau} must exceed t_M = {last}")));
        }
        Ok(Self { points, tau })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of intervals, `M + 1`.
    pub fn n_intervals(&self) -> usize {
        self.points.len()
    }

    pub fn interval_start(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.points[j]
        }
    }

    pub fn interval_end(&self, j: usize) -> f64 {
        if j + 1 < self.points.len() {
            self.points[j + 1]
        } else {
            self.tau
        }
    }

    /// Index `J` of the interval with `start(J) <= t < start(J + 1)`; times at or
    /// beyond the horizon map to the last interval.
    pub fn interval_of(&self, t: f64) -> usize {
        self.points[1..].partition_point(|&p| p <= t)
    }

    /// Same grid with a different horizon.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.points.clone(), tau)
    }
}

/// One subject: observed time `X = min(T, C)`, event indicator and the
/// covariate vectors `Z(t_0), ..., Z(t_M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub id: String,
    pub time: f64,
    pub event: bool,
    pub covariates: Vec<Vec<f64>>,
}

impl SurvivalRecord {
    pub fn new(id: impl Into<String>, time: f64, event: bool, covariates: Vec<Vec<f64>>) -> Result<Self> {
        let id = id.into();
        if !time.is_finite() || time < 0.0 {
            return Err(HazardError::InvalidInput(format!("subject {id}: time {time} must be finite and >= 0")));
        }
        if covariates.is_empty() {
            return Err(HazardError::InvalidInput(format!("subject {id}: no covariate measurements")));
        }
        let p = covariates[0].len();
        if covariates.iter().any(|z| z.len() != p) {
            return Err(HazardError::InvalidInput(format!("subject {id}: covariate vectors differ in length")));
        }
        if covariates.iter().flatten().any(|v| !v.is_finite()) {
            return Err(HazardError::InvalidInput(format!("subject {id}: non-finite covariate value")));
        }
        Ok(Self { id, time, event, covariates })
    }

    pub fn dim(&self) -> usize {
        self.covariates[0].len()
    }
}

/// Checks that every record carries one covariate vector per grid point and
/// that all records share the covariate dimension. Returns that dimension.
pub fn check_records(records: &[SurvivalRecord], grid: &TimeGrid) -> Result<usize> {
    let first = records
        .first()
        .ok_or_else(|| HazardError::InvalidInput("no records".into()))?;
    let p = first.dim();
    for r in records {
        if r.covariates.len() != grid.n_intervals() {
            return Err(HazardError::InvalidInput(format!(
                "subject {}: {} covariate vectors for a grid of {} points",
                r.id,
                r.covariates.len(),
                grid.n_intervals()
            )));
        }
        if r.dim() != p {
            return Err(HazardError::DimensionMismatch { expected: p, got: r.dim() });
        }
    }
    Ok(p)
}

/// Administrative censoring: any follow-up reaching `tau` ends there as censored.
pub fn apply_horizon(records: &mut [SurvivalRecord], tau: f64) {
    for r in records.iter_mut() {
        if r.time >= tau {
            r.time = tau;
            r.event = false;
        }
    }
}

/// A record of the interval-`j` working dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingRecord {
    /// Index of the subject in the original record list.
    pub subject: usize,
    /// Time truncated at the interval end.
    pub time: f64,
    /// Event indicator, cleared for subjects who survive the interval.
    pub event: bool,
    /// `Z(t_j)` followed by the risks of intervals `0..j`.
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkingDataset {
    pub interval: usize,
    pub start: f64,
    pub end: f64,
    /// Sorted ascending by time; events before censorings at equal times, then by subject.
    pub records: Vec<WorkingRecord>,
    /// Size `n` of the full training set; the loss normalizes by it.
    pub n_total: usize,
}

impl WorkingDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn events(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.event).collect()
    }

    pub fn feature_dim(&self) -> usize {
        self.records.first().map_or(0, |r| r.features.len())
    }

    pub fn is_sorted(&self) -> bool {
        self.records.windows(2).all(|w| w[0].time <= w[1].time)
    }

    /// Number of records with `time >= t`.
    pub fn at_risk_count(&self, t: f64) -> Result<usize> {
        if !(self.start..=self.end).contains(&t) {
            return Err(HazardError::TimeOutOfRange { t, lo: self.start, hi: self.end });
        }
        Ok(at_risk_in_sorted(&self.records, t))
    }
}

fn at_risk_in_sorted(records: &[WorkingRecord], t: f64) -> usize {
    records.len() - records.partition_point(|r| r.time < t)
}

/// Builds the interval-`j` working dataset.
///
/// `prior_risks[i]` holds the risks `h_0, ..., h_{j-1}` of subject `i`; it may be
/// empty when `j == 0`. Subjects who left follow-up before the interval starts
/// are dropped, subjects who outlive it are censored at its end.
pub fn build_working_dataset(
    records: &[SurvivalRecord],
    grid: &TimeGrid,
    j: usize,
    prior_risks: &[Vec<f64>],
) -> Result<WorkingDataset> {
    if records.is_empty() {
        return Err(HazardError::InvalidInput("no records".into()));
    }
    if j >= grid.n_intervals() {
        return Err(HazardError::InvalidInput(format!(
            "interval {j} out of range for a grid with {} intervals",
            grid.n_intervals()
        )));
    }
    if j > 0 && prior_risks.len() != records.len() {
        return Err(HazardError::PriorRiskMismatch { interval: j, got: prior_risks.len() });
    }
    let start = grid.interval_start(j);
    let end = grid.interval_end(j);

    let mut out = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        if rec.time < start {
            continue;
        }
        let z = rec.covariates.get(j).ok_or_else(|| {
            HazardError::InvalidInput(format!("subject {}: no covariates for grid point {j}", rec.id))
        })?;
        let mut features = z.clone();
        if j > 0 {
            let prior = &prior_risks[i];
            if prior.len() != j {
                return Err(HazardError::PriorRiskMismatch { interval: j, got: prior.len() });
            }
            features.extend_from_slice(prior);
        }
        let (time, event) = if rec.time >= end { (end, false) } else { (rec.time, rec.event) };
        out.push(WorkingRecord { subject: i, time, event, features });
    }
    if out.is_empty() {
        return Err(HazardError::EmptyInterval { interval: j });
    }
    out.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(b.event.cmp(&a.event))
            .then(a.subject.cmp(&b.subject))
    });
    Ok(WorkingDataset { interval: j, start, end, records: out, n_total: records.len() })
}

/// Reads covariates off the grid: for each grid point returns the measurement
/// nearest in time, preferring the earlier one on exact ties.
pub fn align_to_grid(measured_times: &[f64], measured_values: &[Vec<f64>], grid_points: &[f64]) -> Result<Vec<Vec<f64>>> {
    if measured_times.is_empty() || measured_times.len() != measured_values.len() {
        return Err(HazardError::InvalidInput(
            "need a nonempty list of measurements with one value vector per time".into(),
        ));
    }
    if measured_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(HazardError::InvalidInput("measurement times must be sorted".into()));
    }
    Ok(grid_points
        .iter()
        .map(|&t| measured_values[nearest_index(measured_times, t)].clone())
        .collect())
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    let k = times.partition_point(|&s| s < t);
    if k == 0 {
        return 0;
    }
    if k == times.len() {
        return k - 1;
    }
    // earlier measurement wins ties
    if (t - times[k - 1]) <= (times[k] - t) {
        k - 1
    } else {
        k
    }
}
