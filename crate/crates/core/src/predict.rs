//! Risk propagation and survival curves for new subjects.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{HazardError, Result};
use crate::metrics::SurvivalEvaluator;
use crate::nn::IntervalNetwork;
use crate::train::DeepHazardModel;

/// Interval risks `h_0 .. h_k` from the first `k+1` networks. Network `j`
/// receives `Z(t_j)` followed by the risks of the networks before it.
pub fn risk_path_with(networks: &[IntervalNetwork], covariates: &[Vec<f64>]) -> Result<Vec<f64>> {
    if covariates.len() < networks.len() {
        return Err(HazardError::DimensionMismatch { expected: networks.len(), got: covariates.len() });
    }
    let mut path = Vec::with_capacity(networks.len());
    let mut features = Vec::new();
    for (net, z) in networks.iter().zip(covariates) {
        features.clear();
        features.extend_from_slice(z);
        features.extend_from_slice(&path);
        path.push(net.predict(&features)?);
    }
    Ok(path)
}

/// `h_0 .. h_M` for one subject whose covariates are aligned to the model grid.
pub fn risk_path(model: &DeepHazardModel, covariates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = model.grid.points().len();
    if covariates.len() != m {
        return Err(HazardError::DimensionMismatch { expected: m, got: covariates.len() });
    }
    if let Some(z) = covariates.iter().find(|z| z.len() != model.covariate_dim) {
        return Err(HazardError::DimensionMismatch { expected: model.covariate_dim, got: z.len() });
    }
    risk_path_with(&model.networks, covariates)
}

/// `Lambda0(t) + int_0^t h(u) du` with `h` piecewise constant on the intervals.
pub fn cumulative_hazard(model: &DeepHazardModel, path: &[f64], t: f64) -> Result<f64> {
    let grid = &model.grid;
    if !(t >= 0.0) || t > grid.tau() {
        return Err(HazardError::TimeOutOfRange { t, lo: 0.0, hi: grid.tau() });
    }
    if path.len() != grid.n_intervals() {
        return Err(HazardError::DimensionMismatch { expected: grid.n_intervals(), got: path.len() });
    }
    let j = grid.interval_of(t);
    let mut acc = model.baseline.eval(t) + path[j] * (t - grid.interval_start(j));
    for (l, h) in path[..j].iter().enumerate() {
        acc += h * (grid.interval_end(l) - grid.interval_start(l));
    }
    Ok(acc)
}

/// Predicted survival at `t`, clamped to `[0, 1]` but not monotonized.
pub fn survival_at(model: &DeepHazardModel, path: &[f64], t: f64) -> Result<f64> {
    Ok((-cumulative_hazard(model, path, t)?).exp().clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub id: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Running minimum, so that `S(t) = min_{s <= t} S(s)`.
pub fn monotonize(curve: &SurvivalCurve) -> SurvivalCurve {
    let mut out = curve.clone();
    let mut low = f64::INFINITY;
    for v in out.values.iter_mut() {
        low = low.min(*v);
        *v = low;
    }
    out
}

/// Every time at which the survival of some subject can change direction:
/// the baseline knots, the grid points and the requested times.
fn union_grid(model: &DeepHazardModel, times: &[f64]) -> Vec<f64> {
    let tau = model.grid.tau();
    let mut all: Vec<f64> = std::iter::once(0.0)
        .chain(model.baseline.knots.iter().copied())
        .chain(model.grid.points().iter().copied())
        .chain(times.iter().copied())
        .filter(|&t| (0.0..=tau).contains(&t))
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Monotone survival curve at `times` (sorted on output).
pub fn survival_curve(model: &DeepHazardModel, id: &str, covariates: &[Vec<f64>], times: &[f64]) -> Result<SurvivalCurve> {
    let mut wanted = times.to_vec();
    wanted.sort_by(f64::total_cmp);
    if let Some(&t) = wanted.iter().find(|&&t| !(t >= 0.0) || t > model.grid.tau()) {
        return Err(HazardError::TimeOutOfRange { t, lo: 0.0, hi: model.grid.tau() });
    }
    let path = risk_path(model, covariates)?;
    let dense = DenseCurve::new(model, &path, &union_grid(model, &wanted))?;
    let values = wanted.iter().map(|&t| dense.eval(model, &path, t)).collect::<Result<_>>()?;
    Ok(SurvivalCurve { id: id.to_string(), times: wanted, values })
}

/// Monotonized survival on a union grid; exact at any time because between
/// consecutive grid times the raw survival is monotone.
#[derive(Debug, Clone)]
struct DenseCurve {
    times: Vec<f64>,
    running_min: Vec<f64>,
}

impl DenseCurve {
    fn new(model: &DeepHazardModel, path: &[f64], times: &[f64]) -> Result<Self> {
        let mut low: f64 = 1.0;
        let mut running_min = Vec::with_capacity(times.len());
        for &t in times {
            low = low.min(survival_at(model, path, t)?);
            running_min.push(low);
        }
        Ok(Self { times: times.to_vec(), running_min })
    }

    fn eval(&self, model: &DeepHazardModel, path: &[f64], t: f64) -> Result<f64> {
        let t = t.min(model.grid.tau());
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return Ok(1.0);
        }
        if self.times[k - 1] == t {
            return Ok(self.running_min[k - 1]);
        }
        Ok(self.running_min[k - 1].min(survival_at(model, path, t)?))
    }
}

/// Evaluator over a fitted model for a fixed set of subjects. Times past the
/// horizon are evaluated at the horizon.
pub struct ModelEvaluator<'a> {
    model: &'a DeepHazardModel,
    paths: Vec<Vec<f64>>,
    curves: Vec<DenseCurve>,
}

impl<'a> ModelEvaluator<'a> {
    /// `times` are added to the precomputed grid (typically the test event times).
    pub fn new(model: &'a DeepHazardModel, covariates: &[Vec<Vec<f64>>], times: &[f64]) -> Result<Self> {
        let grid = union_grid(model, times);
        let paths: Vec<Vec<f64>> = covariates.iter().map(|c| risk_path(model, c)).collect::<Result<_>>()?;
        let curves = paths.iter().map(|p| DenseCurve::new(model, p, &grid)).collect::<Result<_>>()?;
        Ok(Self { model, paths, curves })
    }

    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }
}

impl SurvivalEvaluator for ModelEvaluator<'_> {
    fn n_subjects(&self) -> usize {
        self.paths.len()
    }

    fn survival(&self, subject: usize, t: f64) -> Result<f64> {
        self.curves[subject].eval(self.model, &self.paths[subject], t)
    }
}

/// `Var(T) = int_0^tau 2 t S(t) dt - (int_0^tau S(t) dt)^2` by trapezoid on
/// the curve's times; the curve is held at 1 before its first time and flat
/// after its last. Small negative values from discretization are clamped.
pub fn conditional_variance(curve: &SurvivalCurve, tau: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for (&t, &s) in curve.times.iter().zip(&curve.values) {
        if t > 0.0 && t <= tau {
            pts.push((t, s));
        } else if t == 0.0 {
            pts[0].1 = s;
        }
    }
    let last = pts.last().unwrap().1;
    if pts.last().unwrap().0 < tau {
        pts.push((tau, last));
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for w in pts.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        m1 += 0.5 * (b - a) * (sa + sb);
        m2 += 0.5 * (b - a) * (2.0 * a * sa + 2.0 * b * sb);
    }
    let var = m2 - m1 * m1;
    if var < 0.0 {
        warn!("conditional variance {var:.3e} < 0 for subject {}, clamped to 0", curve.id);
        0.0
    } else {
        var
    }
}
