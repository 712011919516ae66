//! Least-squares hazard contrast restricted to one interval's risk sets.
//!
//! For a working dataset sorted by time `x_1 <= ... <= x_n` starting at `s`,
//! the risk-set mean `hbar(t)` only changes at the `x_r`, so the integral
//! over the interval reduces to a sum over the gaps `x_r - x_{r-1}` (with
//! `x_0 = s`). Everything here is evaluated in `O(n)` with suffix statistics.

use crate::data::{TimeGrid, WorkingDataset};
use crate::error::{HazardError, Result};
use crate::step::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub data_term: f64,
    pub penalty_term: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(data_term: f64, penalty_term: f64) -> Self {
        Self { data_term, penalty_term, total: data_term + penalty_term }
    }
}

/// Mean of `h` over the records still at risk at `t` (those with `time >= t`).
pub fn mean_risk_at(h: &[f64], ds: &WorkingDataset, t: f64) -> Result<f64> {
    check_len(h, ds)?;
    let at_risk = ds.at_risk_count(t)?;
    if at_risk == 0 {
        return Err(HazardError::EmptyRiskSet(t));
    }
    let first = ds.len() - at_risk;
    Ok(h[first..].iter().sum::<f64>() / at_risk as f64)
}

fn check_len(h: &[f64], ds: &WorkingDataset) -> Result<()> {
    if h.len() != ds.len() {
        return Err(HazardError::DimensionMismatch { expected: ds.len(), got: h.len() });
    }
    Ok(())
}

/// Per-index risk-set statistics over the sorted records.
struct RiskSets {
    /// First index of each record's tie group; the risk set at `x_r` is `group_start[r]..n`.
    group_start: Vec<usize>,
    /// Mean of `h` over the risk set at `x_r`.
    mean: Vec<f64>,
    /// Sum of squared deviations from that mean.
    sq_dev: Vec<f64>,
}

impl RiskSets {
    fn new(h: &[f64], times: &[f64]) -> Self {
        let n = h.len();
        let mut group_start = vec![0; n];
        for r in 1..n {
            group_start[r] = if times[r] == times[r - 1] { group_start[r - 1] } else { r };
        }
        // Welford updates over suffixes
        let mut suffix_mean = vec![0.0; n + 1];
        let mut suffix_m2 = vec![0.0; n + 1];
        let (mut mean, mut m2) = (0.0, 0.0);
        for (k, i) in (0..n).rev().enumerate() {
            let count = (k + 1) as f64;
            let d = h[i] - mean;
            mean += d / count;
            m2 += d * (h[i] - mean);
            suffix_mean[i] = mean;
            suffix_m2[i] = m2;
        }
        let mean = group_start.iter().map(|&g| suffix_mean[g]).collect();
        let sq_dev = group_start.iter().map(|&g| suffix_m2[g]).collect();
        Self { group_start, mean, sq_dev }
    }
}

fn validated_times(h: &[f64], ds: &WorkingDataset) -> Result<Vec<f64>> {
    check_len(h, ds)?;
    if !ds.is_sorted() {
        return Err(HazardError::Unsorted);
    }
    if ds.is_empty() {
        return Err(HazardError::EmptyInterval { interval: ds.interval });
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(HazardError::InvalidInput("non-finite risk value".into()));
    }
    Ok(ds.times())
}

/// Data term of the interval loss:
///
/// `(1/2n) sum_i sum_{r<=i} [h_i - hbar(x_r)]^2 (x_r - x_{r-1}) - (1/n) sum_i [h_i - hbar(x_i)] delta_i`
pub fn interval_loss(h: &[f64], ds: &WorkingDataset) -> Result<f64> {
    Ok(interval_loss_and_grad(h, ds)?.0)
}

/// Gradient of [`interval_loss`] with respect to every `h_i`, including the
/// dependence of each risk-set mean on the risks it averages.
pub fn interval_loss_grad(h: &[f64], ds: &WorkingDataset) -> Result<Vec<f64>> {
    Ok(interval_loss_and_grad(h, ds)?.1)
}

pub fn interval_loss_and_grad(h: &[f64], ds: &WorkingDataset) -> Result<(f64, Vec<f64>)> {
    let times = validated_times(h, ds)?;
    let n_total = ds.n_total as f64;
    let n = h.len();
    let sets = RiskSets::new(h, &times);

    let mut quad = 0.0;
    let mut grad = vec![0.0; n];
    // running sum of gap * hbar over gaps up to the current record
    let mut weighted_mean = 0.0;
    let mut prev = ds.start;
    for r in 0..n {
        let gap = times[r] - prev;
        prev = times[r];
        if gap > 0.0 {
            quad += gap * sets.sq_dev[r];
            weighted_mean += gap * sets.mean[r];
        }
        grad[r] = (h[r] * (times[r] - ds.start) - weighted_mean) / n_total;
    }
    quad /= 2.0 * n_total;

    let mut event = 0.0;
    let events = ds.events();
    // sum over events at or before x_k of 1 / |risk set|, accumulated per tie group
    let mut inverse_risk = 0.0;
    let mut r = 0;
    while r < n {
        let g = sets.group_start[r];
        let at_risk = (n - g) as f64;
        let mut end = r;
        while end < n && sets.group_start[end] == g {
            if events[end] {
                event += h[end] - sets.mean[end];
                inverse_risk += 1.0 / at_risk;
            }
            end += 1;
        }
        for k in r..end {
            let own = if events[k] { 1.0 } else { 0.0 };
            grad[k] -= (own - inverse_risk) / n_total;
        }
        r = end;
    }
    Ok((quad - event / n_total, grad))
}

/// The three parts of the full-sample contrast evaluated at `lambda0 + h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerms {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl GammaTerms {
    pub fn total(&self) -> f64 {
        self.gamma1 + self.gamma2 + self.gamma3
    }
}

/// Splits the least-squares contrast over `[0, tau]` into its baseline part,
/// its centered-risk part and the cross term, by exact integration of the
/// piecewise-constant integrands.
///
/// `risk_paths[i][j]` is subject `i`'s risk on interval `j`; it must cover
/// every interval the subject is followed into. `baseline_hazard` is the
/// instantaneous baseline as a step function.
pub fn gamma_decomposition(
    times: &[f64],
    events: &[bool],
    risk_paths: &[Vec<f64>],
    baseline_hazard: &StepFunction,
    grid: &TimeGrid,
) -> Result<GammaTerms> {
    let n = times.len();
    if events.len() != n || risk_paths.len() != n || n == 0 {
        return Err(HazardError::InvalidInput("times, events and risk paths must align and be nonempty".into()));
    }
    let tau = grid.tau();
    let follow: Vec<f64> = times.iter().map(|&t| t.min(tau)).collect();
    for (i, path) in risk_paths.iter().enumerate() {
        let need = grid.interval_of(follow[i]) + 1;
        if path.len() < need {
            return Err(HazardError::DimensionMismatch { expected: need, got: path.len() });
        }
    }
    let risk = |i: usize, t: f64| risk_paths[i][grid.interval_of(t)];

    let mut cuts: Vec<f64> = vec![0.0, tau];
    cuts.extend(follow.iter().copied());
    cuts.extend(grid.points().iter().copied().filter(|&p| p < tau));
    cuts.extend(baseline_hazard.knots.iter().copied().filter(|&k| k > 0.0 && k < tau));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let inv_n = 1.0 / n as f64;
    let (mut g1, mut g2, mut g3) = (0.0, 0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let at_risk: Vec<usize> = (0..n).filter(|&i| follow[i] > a).collect();
        if at_risk.is_empty() {
            continue;
        }
        let len = b - a;
        let hs: Vec<f64> = at_risk.iter().map(|&i| risk(i, mid)).collect();
        let hbar = hs.iter().sum::<f64>() / hs.len() as f64;
        let base = baseline_hazard.eval(mid) + hbar;
        g1 += 0.5 * inv_n * base * base * hs.len() as f64 * len;
        g2 += 0.5 * inv_n * hs.iter().map(|v| (v - hbar).powi(2)).sum::<f64>() * len;
        g3 += inv_n * hs.iter().map(|v| (v - hbar) * base).sum::<f64>() * len;
    }
    for i in 0..n {
        if !events[i] || times[i] > tau {
            continue;
        }
        let t = times[i];
        let at_risk: Vec<usize> = (0..n).filter(|&l| follow[l] >= t).collect();
        let hbar = at_risk.iter().map(|&l| risk(l, t)).sum::<f64>() / at_risk.len() as f64;
        g1 -= inv_n * (baseline_hazard.eval(t) + hbar);
        g2 -= inv_n * (risk(i, t) - hbar);
    }
    Ok(GammaTerms { gamma1: g1, gamma2: g2, gamma3: g3 })
}
