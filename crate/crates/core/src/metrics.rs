//! Concordance, prediction error against a known truth, and the
//! proportional-hazards diagnostic.

use crate::error::{HazardError, Result};

/// Anything that can report `S(t)` for subject `i`.
pub trait SurvivalEvaluator {
    fn n_subjects(&self) -> usize;

    fn survival(&self, subject: usize, t: f64) -> Result<f64>;

    /// Survival at ascending `times`. Override when evaluating along a path is
    /// cheaper than independent calls.
    fn survival_many(&self, subject: usize, times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.survival(subject, t)).collect()
    }
}

/// Survival given directly as a closure.
pub struct FnEvaluator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(usize, f64) -> f64> FnEvaluator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(usize, f64) -> f64> SurvivalEvaluator for FnEvaluator<F> {
    fn n_subjects(&self) -> usize {
        self.n
    }

    fn survival(&self, subject: usize, t: f64) -> Result<f64> {
        Ok((self.f)(subject, t))
    }
}

fn check_outcomes(times: &[f64], events: &[bool]) -> Result<()> {
    if times.len() != events.len() {
        return Err(HazardError::DimensionMismatch { expected: times.len(), got: events.len() });
    }
    if times.len() < 2 {
        return Err(HazardError::InvalidInput("concordance needs at least 2 subjects".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(HazardError::InvalidInput("times must be finite".into()));
    }
    Ok(())
}

/// Time-dependent concordance: over pairs with `t_i < t_j, delta_i = 1` (or
/// `t_i = t_j, delta_i = 1, delta_j = 0`), the fraction where
/// `S_i(t_i) < S_j(t_i)`; equal survivals count one half.
pub fn c_index_td(times: &[f64], events: &[bool], eval: &dyn SurvivalEvaluator) -> Result<f64> {
    check_outcomes(times, events)?;
    let n = times.len();
    if eval.n_subjects() != n {
        return Err(HazardError::DimensionMismatch { expected: n, got: eval.n_subjects() });
    }
    let mut event_times: Vec<f64> = (0..n).filter(|&i| events[i]).map(|i| times[i]).collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();

    // row j holds S_j at every event time <= t_j
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let k = event_times.partition_point(|&e| e <= times[j]);
            eval.survival_many(j, &event_times[..k])
        })
        .collect::<Result<_>>()?;

    let (mut score, mut pairs) = (0.0, 0u64);
    for i in (0..n).filter(|&i| events[i]) {
        let k = event_times.partition_point(|&e| e < times[i]);
        let si = rows[i][k];
        for j in 0..n {
            let comparable = times[j] > times[i] || (times[j] == times[i] && !events[j]);
            if !comparable {
                continue;
            }
            let sj = rows[j][k];
            pairs += 1;
            if si < sj {
                score += 1.0;
            } else if si == sj {
                score += 0.5;
            }
        }
    }
    if pairs == 0 {
        return Err(HazardError::NoComparablePairs);
    }
    Ok(score / pairs as f64)
}

/// Harrell-type concordance of time-independent risk scores: a pair is
/// concordant when the subject failing first has the higher risk.
pub fn c_index_traditional(times: &[f64], events: &[bool], risks: &[f64]) -> Result<f64> {
    check_outcomes(times, events)?;
    if risks.len() != times.len() {
        return Err(HazardError::DimensionMismatch { expected: times.len(), got: risks.len() });
    }
    let (mut score, mut pairs) = (0.0, 0u64);
    for a in 0..times.len() {
        if !events[a] {
            continue;
        }
        for b in 0..times.len() {
            if times[b] > times[a] {
                pairs += 1;
                if risks[b] < risks[a] {
                    score += 1.0;
                } else if risks[b] == risks[a] {
                    score += 0.5;
                }
            }
        }
    }
    if pairs == 0 {
        return Err(HazardError::NoComparablePairs);
    }
    Ok(score / pairs as f64)
}

/// Time-averaged mean squared gap between two sets of survival curves on a
/// uniform grid of `grid_size` points over `[0, tau]`.
pub fn imspe(predicted: &dyn SurvivalEvaluator, truth: &dyn SurvivalEvaluator, tau: f64, grid_size: usize) -> Result<f64> {
    let n = predicted.n_subjects();
    if truth.n_subjects() != n || n == 0 {
        return Err(HazardError::DimensionMismatch { expected: n, got: truth.n_subjects() });
    }
    if !(tau > 0.0) || grid_size < 2 {
        return Err(HazardError::InvalidInput("imspe needs tau > 0 and at least 2 grid points".into()));
    }
    let step = tau / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|k| k as f64 * step).collect();
    let mut mean_sq = vec![0.0; grid_size];
    for i in 0..n {
        let a = predicted.survival_many(i, &grid)?;
        let b = truth.survival_many(i, &grid)?;
        for (m, (x, y)) in mean_sq.iter_mut().zip(a.iter().zip(&b)) {
            *m += (x - y).powi(2) / n as f64;
        }
    }
    let integral: f64 = mean_sq.windows(2).map(|w| 0.5 * step * (w[0] + w[1])).sum();
    Ok(integral / tau)
}

/// Nelson–Aalen cumulative hazard at the given sorted times.
fn nelson_aalen_at(times: &[f64], events: &[bool], at: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let n = order.len();
    let mut out = Vec::with_capacity(at.len());
    let (mut k, mut acc) = (0, 0.0);
    for &t in at {
        while k < n && times[order[k]] <= t {
            let u = times[order[k]];
            let at_risk = (n - k) as f64;
            let mut deaths = 0.0;
            while k < n && times[order[k]] == u {
                if events[order[k]] {
                    deaths += 1.0;
                }
                k += 1;
            }
            acc += deaths / at_risk;
        }
        out.push(acc);
    }
    out
}

/// Ratio `Lambda_A(t) / Lambda_B(t)` of group-wise Nelson–Aalen estimates
/// (`A` where `group` is true) at every event time with `Lambda_B(t) > 0`.
pub fn ph_diagnostic(times: &[f64], events: &[bool], group: &[bool]) -> Result<Vec<(f64, f64)>> {
    check_outcomes(times, events)?;
    if group.len() != times.len() {
        return Err(HazardError::DimensionMismatch { expected: times.len(), got: group.len() });
    }
    let split = |g: bool| -> (Vec<f64>, Vec<bool>) {
        (0..times.len()).filter(|&i| group[i] == g).map(|i| (times[i], events[i])).unzip()
    };
    let (ta, ea) = split(true);
    let (tb, eb) = split(false);
    if !ea.iter().any(|&e| e) {
        return Err(HazardError::GroupWithoutEvents("A".into()));
    }
    if !eb.iter().any(|&e| e) {
        return Err(HazardError::GroupWithoutEvents("B".into()));
    }
    let mut at: Vec<f64> = (0..times.len()).filter(|&i| events[i]).map(|i| times[i]).collect();
    at.sort_by(f64::total_cmp);
    at.dedup();
    let la = nelson_aalen_at(&ta, &ea, &at);
    let lb = nelson_aalen_at(&tb, &eb, &at);
    Ok(at
        .iter()
        .zip(la.iter().zip(&lb))
        .filter(|(_, (_, &b))| b > 0.0)
        .map(|(&t, (&a, &b))| (t, a / b))
        .collect())
}
