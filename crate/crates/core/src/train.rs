//! Sequential training of the interval networks and estimation of the
//! cumulative baseline hazard.

use std::collections::BTreeMap;

use log::{debug, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{apply_horizon, build_working_dataset, check_records, SurvivalRecord, TimeGrid, WorkingDataset};
use crate::error::{HazardError, Result};
use crate::loss::{interval_loss_and_grad, LossBreakdown};
use crate::nn::{IntervalNetwork, LayerSpec, Mode, Optimizer, OptimizerKind, Penalty};
use crate::step::StepFunction;

/// Settings that may differ from the shared config for a single interval.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Penalty>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub layers: Vec<LayerSpec>,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub penalty: Penalty,
    pub max_epochs: usize,
    /// Training stops once the relative change of the total loss between
    /// consecutive epochs drops below this value.
    pub early_stopping: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_interval: BTreeMap<usize, IntervalOverride>,
    /// Drop trailing grid points with fewer than two subjects at risk instead
    /// of failing on them.
    #[serde(default)]
    pub trim_grid: bool,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(HazardError::InvalidInput("max_epochs must be at least 1".into()));
        }
        if !(self.early_stopping >= 0.0) {
            return Err(HazardError::InvalidInput("early_stopping threshold must be >= 0".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(HazardError::InvalidInput("learning_rate must be positive".into()));
        }
        if !(self.penalty.lambda >= 0.0) {
            return Err(HazardError::InvalidInput("penalty lambda must be >= 0".into()));
        }
        Ok(())
    }

    /// The effective settings for interval `j`.
    pub fn for_interval(&self, j: usize) -> TrainConfig {
        let mut cfg = self.clone();
        cfg.per_interval.clear();
        if let Some(o) = self.per_interval.get(&j) {
            if let Some(l) = &o.layers {
                cfg.layers = l.clone();
            }
            if let Some(k) = o.optimizer {
                cfg.optimizer = k;
            }
            if let Some(lr) = o.learning_rate {
                cfg.learning_rate = lr;
            }
            if let Some(p) = o.penalty {
                cfg.penalty = p;
            }
        }
        cfg
    }
}

/// Result of training one interval network.
#[derive(Debug, Clone)]
pub struct IntervalFit {
    pub network: IntervalNetwork,
    /// Total loss (data + penalty) at every epoch that was evaluated.
    pub losses: Vec<LossBreakdown>,
}

impl IntervalFit {
    pub fn epochs(&self) -> usize {
        self.losses.len()
    }
}

/// Random stream for interval `j`: one ChaCha stream per interval off the run seed.
pub fn interval_rng(seed: u64, j: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    rng
}

/// Full-batch training of one network on one working dataset.
pub fn train_interval_network(ds: &WorkingDataset, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<IntervalFit> {
    cfg.validate()?;
    if ds.len() < 2 {
        return Err(HazardError::InvalidInput(format!(
            "interval {} has {} at-risk subject(s); at least 2 are needed to train, shorten the grid",
            ds.interval,
            ds.len()
        )));
    }
    let mut net = IntervalNetwork::new(ds.feature_dim(), &cfg.layers, rng)?;
    train_from(&mut net, ds, cfg, rng).map(|losses| IntervalFit { network: net, losses })
}

/// Trains `net` in place starting from its current parameters.
pub fn train_from(net: &mut IntervalNetwork, ds: &WorkingDataset, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Vec<LossBreakdown>> {
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, net.n_params())?;
    let mask = net.weight_mask();
    let mut losses: Vec<LossBreakdown> = Vec::with_capacity(cfg.max_epochs);
    let mut h = vec![0.0; ds.len()];
    let mut tapes = Vec::with_capacity(ds.len());
    let mut grad = vec![0.0; net.n_params()];
    for epoch in 0..cfg.max_epochs {
        tapes.clear();
        for (k, rec) in ds.records.iter().enumerate() {
            let (risk, tape) = net.forward(&rec.features, Mode::Train, rng)?;
            h[k] = risk;
            tapes.push(tape);
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(HazardError::Diverged { epoch, lr: cfg.learning_rate });
        }
        let (data, dh) = interval_loss_and_grad(&h, ds)?;
        let (pen, pen_grad) = cfg.penalty.masked_value_and_grad(net.params(), &mask);
        let loss = LossBreakdown::new(data, pen);
        if !loss.total.is_finite() {
            return Err(HazardError::Diverged { epoch, lr: cfg.learning_rate });
        }
        let stop = losses
            .last()
            .is_some_and(|prev| (loss.total - prev.total).abs() / (prev.total.abs() + 1e-12) < cfg.early_stopping);
        losses.push(loss);
        if stop {
            debug!("interval {}: early stop at epoch {epoch}", ds.interval);
            break;
        }
        grad.copy_from_slice(&pen_grad);
        for (tape, &up) in tapes.iter().zip(&dh) {
            net.backward(tape, up, &mut grad)?;
        }
        opt.step(net.params_mut(), &grad).map_err(|e| match e {
            HazardError::Diverged { lr, .. } => HazardError::Diverged { epoch, lr },
            other => other,
        })?;
    }
    Ok(losses)
}

/// How the risk integral in the baseline estimator is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineVariant {
    /// Integrate the mean risk up to `t`.
    #[default]
    UpToTime,
    /// Integrate the mean risk over the whole interval containing `t`.
    WholeInterval,
}

/// Exact evaluator of the cumulative baseline hazard estimator
///
/// `Lambda0(t) = sum_{X_l <= t} delta_l / r_l - int_0^t hbar(u) du`,
///
/// where `hbar(u)` is the mean current-interval risk of the subjects at risk at `u`.
#[derive(Debug, Clone)]
pub struct BaselineEstimator {
    grid: TimeGrid,
    /// Sorted unique event times and the Nelson–Aalen sum through each.
    event_times: Vec<f64>,
    na_cum: Vec<f64>,
    /// Integration pieces `[cuts[k], cuts[k+1])` with constant mean risk `slope[k]`.
    cuts: Vec<f64>,
    slope: Vec<f64>,
    integral_at_cut: Vec<f64>,
    /// Sorted unique follow-up times, the knots of the stored step function.
    follow_times: Vec<f64>,
}

impl BaselineEstimator {
    pub fn new(times: &[f64], events: &[bool], risk_paths: &[Vec<f64>], grid: &TimeGrid) -> Result<Self> {
        let n = times.len();
        if n == 0 || events.len() != n || risk_paths.len() != n {
            return Err(HazardError::InvalidInput("times, events and risk paths must align and be nonempty".into()));
        }
        let tau = grid.tau();
        let follow: Vec<f64> = times.iter().map(|&t| t.min(tau)).collect();
        for (i, p) in risk_paths.iter().enumerate() {
            let need = grid.interval_of(follow[i]) + 1;
            if p.len() < need {
                return Err(HazardError::DimensionMismatch { expected: need, got: p.len() });
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| follow[a].total_cmp(&follow[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| follow[i]).collect();

        // Nelson–Aalen part
        let mut event_times = Vec::new();
        let mut na_cum = Vec::new();
        let mut acc = 0.0;
        let mut k = 0;
        while k < n {
            let t = sorted[k];
            let at_risk = (n - k) as f64;
            let mut deaths = 0usize;
            while k < n && sorted[k] == t {
                let i = order[k];
                if events[i] && times[i] < tau {
                    deaths += 1;
                }
                k += 1;
            }
            if deaths > 0 {
                acc += deaths as f64 / at_risk;
                event_times.push(t);
                na_cum.push(acc);
            }
        }

        // suffix sums of each interval's risk over subjects sorted by follow-up
        let m = grid.n_intervals();
        let mut suffix = vec![vec![0.0; n + 1]; m];
        for (j, s) in suffix.iter_mut().enumerate() {
            for k in (0..n).rev() {
                let v = risk_paths[order[k]].get(j).copied().unwrap_or(0.0);
                s[k] = s[k + 1] + v;
            }
        }

        let mut cuts: Vec<f64> = vec![0.0];
        cuts.extend(sorted.iter().copied());
        cuts.extend(grid.points().iter().copied().filter(|&p| p > 0.0 && p < tau));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let last = *sorted.last().unwrap();
        cuts.retain(|&c| c <= last);

        let mut slope = Vec::with_capacity(cuts.len());
        let mut integral_at_cut = Vec::with_capacity(cuts.len());
        let mut integral = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            // subjects with follow-up > a are at risk on (a, b]
            let first = sorted.partition_point(|&f| f <= a);
            let j = grid.interval_of(0.5 * (a + b));
            let mean = suffix[j][first] / (n - first) as f64;
            integral_at_cut.push(integral);
            slope.push(mean);
            integral += mean * (b - a);
        }
        integral_at_cut.push(integral);
        slope.push(0.0);

        let mut follow_times = sorted;
        follow_times.dedup();
        Ok(Self { grid: grid.clone(), event_times, na_cum, cuts, slope, integral_at_cut, follow_times })
    }

    /// `int_0^t hbar(u) du`, flat after the last follow-up time.
    pub fn risk_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.cuts.partition_point(|&c| c <= t) - 1;
        let t = t.min(*self.cuts.last().unwrap());
        self.integral_at_cut[k] + self.slope[k] * (t - self.cuts[k])
    }

    pub fn nelson_aalen(&self, t: f64) -> f64 {
        let k = self.event_times.partition_point(|&e| e <= t);
        if k == 0 {
            0.0
        } else {
            self.na_cum[k - 1]
        }
    }

    pub fn eval(&self, t: f64, variant: BaselineVariant) -> f64 {
        match variant {
            BaselineVariant::UpToTime => self.nelson_aalen(t) - self.risk_integral(t),
            BaselineVariant::WholeInterval => {
                let end = self.grid.interval_end(self.grid.interval_of(t));
                self.nelson_aalen(t) - self.risk_integral(end)
            }
        }
    }

    /// The estimator sampled at every distinct follow-up time.
    pub fn to_step(&self, variant: BaselineVariant) -> StepFunction {
        let values = self.follow_times.iter().map(|&t| self.eval(t, variant)).collect();
        let mut knots = self.follow_times.clone();
        let mut values: Vec<f64> = values;
        // a knot at zero carries no mass
        if knots.first() == Some(&0.0) {
            knots.remove(0);
            values.remove(0);
        }
        StepFunction { knots, values }
    }
}

/// Cumulative baseline hazard on the training follow-up times.
pub fn baseline_cumhaz(times: &[f64], events: &[bool], risk_paths: &[Vec<f64>], grid: &TimeGrid) -> Result<StepFunction> {
    Ok(BaselineEstimator::new(times, events, risk_paths, grid)?.to_step(BaselineVariant::UpToTime))
}

/// The trained networks, the grid they belong to and the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepHazardModel {
    pub grid: TimeGrid,
    pub covariate_dim: usize,
    pub networks: Vec<IntervalNetwork>,
    /// `Lambda0` as a right-continuous step function with `Lambda0(0) = 0`.
    pub baseline: StepFunction,
    /// Training risks: row `i` holds `h_0 .. h_J` for the intervals subject `i` reached.
    pub training_risks: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalReport {
    pub interval: usize,
    pub at_risk: usize,
    pub events: usize,
    pub epochs: usize,
    pub final_loss: f64,
    pub final_data_loss: f64,
    #[serde(skip)]
    pub loss_curve: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_subjects: usize,
    pub intervals: Vec<IntervalReport>,
}

/// Keeps the longest grid prefix whose last point still has two subjects at
/// risk, and cuts the covariate lists to match.
fn trimmed_grid(records: &mut [SurvivalRecord], grid: &TimeGrid) -> Result<TimeGrid> {
    let at_risk = |t: f64| records.iter().filter(|r| r.time >= t).count();
    let keep = grid.points().iter().take_while(|&&t| at_risk(t) >= 2).count().max(1);
    if keep == grid.points().len() {
        return Ok(grid.clone());
    }
    warn!(
        "grid trimmed to {:?}: fewer than 2 subjects at risk from t = {}",
        &grid.points()[..keep],
        grid.points()[keep]
    );
    for r in records.iter_mut() {
        r.covariates.truncate(keep);
    }
    TimeGrid::new(grid.points()[..keep].to_vec(), grid.tau())
}

/// Trains networks `0..=M` in order. Network `j` sees `Z(t_j)` together with
/// the eval-mode outputs of networks `0..j` for every subject at risk at `t_j`.
pub fn fit(records: &[SurvivalRecord], grid: &TimeGrid, cfg: &TrainConfig) -> Result<(DeepHazardModel, TrainReport)> {
    cfg.validate()?;
    let covariate_dim = check_records(records, grid)?;
    let mut records = records.to_vec();
    apply_horizon(&mut records, grid.tau());
    let grid = &if cfg.trim_grid { trimmed_grid(&mut records, grid)? } else { grid.clone() };

    let mut risks: Vec<Vec<f64>> = vec![Vec::new(); records.len()];
    let mut networks = Vec::with_capacity(grid.n_intervals());
    let mut report = TrainReport { n_subjects: records.len(), intervals: Vec::new() };
    for j in 0..grid.n_intervals() {
        let ds = build_working_dataset(&records, grid, j, &risks)?;
        let local = cfg.for_interval(j);
        let mut rng = interval_rng(cfg.seed, j);
        let fitted = train_interval_network(&ds, &local, &mut rng)?;
        let last = *fitted.losses.last().expect("at least one epoch");
        info!(
            "interval {j}: n_j = {}, {} epochs, loss {:.6e}",
            ds.len(),
            fitted.epochs(),
            last.total
        );
        for rec in &ds.records {
            risks[rec.subject].push(fitted.network.predict(&rec.features)?);
        }
        report.intervals.push(IntervalReport {
            interval: j,
            at_risk: ds.len(),
            events: ds.records.iter().filter(|r| r.event).count(),
            epochs: fitted.epochs(),
            final_loss: last.total,
            final_data_loss: last.data_term,
            loss_curve: fitted.losses.iter().map(|l| l.total).collect(),
        });
        networks.push(fitted.network);
    }
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let events: Vec<bool> = records.iter().map(|r| r.event).collect();
    let baseline = baseline_cumhaz(&times, &events, &risks, grid)?;
    let model = DeepHazardModel { grid: grid.clone(), covariate_dim, networks, baseline, training_risks: risks };
    Ok((model, report))
}
