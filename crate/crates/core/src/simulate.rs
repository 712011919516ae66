//! Time-dependent survival data generation by inverse-transform sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalRecord;
use crate::error::{HazardError, Result};
use crate::metrics::SurvivalEvaluator;

/// Covariates grow like `sqrt(t)` until this time and stay flat afterwards.
pub const PLATEAU: f64 = 0.6;
const INTEGRATION_TOL: f64 = 1e-10;
const ROOT_TOL: f64 = 1e-10;
const HORIZON_CAP: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimModel {
    Model1,
    Model2,
    Model3,
    Model4,
    Model5,
    Model6,
    /// `lambda(t) = 4 t^3`, covariates ignored.
    PureBaseline,
    /// `lambda(t) = 1`, covariates ignored.
    ConstantHazard,
}

impl SimModel {
    pub fn from_id(id: u8) -> Result<Self> {
        Ok(match id {
            1 => Self::Model1,
            2 => Self::Model2,
            3 => Self::Model3,
            4 => Self::Model4,
            5 => Self::Model5,
            6 => Self::Model6,
            _ => return Err(HazardError::InvalidInput(format!("model id must be 1..=6, got {id}"))),
        })
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Model5 | Self::Model6 => 20,
            _ => 3,
        }
    }

    /// Bounds of the uniform law of each baseline covariate.
    pub fn covariate_bounds(self) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, 20.0); self.dim()];
        match self {
            Self::Model1 => {
                b[0] = (0.0, 10.0);
                b[2] = (0.0, 30.0);
            }
            Self::Model5 | Self::Model6 => {
                b[0] = (5.0, 20.0);
                b[18] = (3.0, 4.0);
                b[19] = (3.0, 4.0);
                for v in &mut b[15..18] {
                    *v = (0.0, 1.0);
                }
                if self == Self::Model6 {
                    b[3] = (3.0, 4.0);
                }
            }
            _ => {}
        }
        b
    }

    /// Total hazard `lambda0(t) + h(t, Z(t))` given the covariate value `z = Z(t)`.
    pub fn hazard(self, t: f64, z: &[f64]) -> f64 {
        let base = 4.0 * t.powi(3);
        let z = |k: usize| z[k - 1];
        let log1 = (t + 1.0).ln().abs();
        match self {
            Self::PureBaseline => base,
            Self::ConstantHazard => 1.0,
            Self::Model1 => base + z(1) * z(2) + z(1) * z(3) + z(1) * z(3) * z(2),
            Self::Model2 => base + t.cos() * z(1) * z(2) + log1 * z(1) * z(2) + t.powi(3) * z(3).powi(2),
            Self::Model3 => {
                base + t.cos() * z(1) * z(2)
                    + log1 * z(1) * z(2)
                    + t.powi(3) * z(3).powi(2)
                    + (z(1) * z(3)).cos()
                    + z(1) * z(3)
                    + (1.0 + t * t) / (t + 1.0) * z(1) * z(2)
                    + z(1).powi(3) * z(2).powi(4)
            }
            Self::Model4 => base + z(1) * z(2) / (t + 1.0) + 1.0 / (z(1) * z(2) * z(3).powi(2) + 1.0),
            Self::Model5 => {
                base + t.cos() * z(1) * z(2)
                    + log1 * z(1) * z(2)
                    + t.powi(3) * z(3).powi(2)
                    + 1.0 / (1.0 + z(20) * z(1) + t.sqrt())
            }
            Self::Model6 => {
                base + t.cos() * z(1) * z(2)
                    + log1 * z(3) * z(4)
                    + t.powi(3) * z(5).powi(2)
                    + (z(6) * z(7)).cos()
                    + z(8) * z(9)
                    + (1.0 + t * t) / (t + 1.0) * z(10) * z(11)
                    + z(12).powi(3) * z(13).powi(4)
                    + 1.0 / (1.0 + z(20) * z(14) + t.sqrt())
            }
        }
    }
}

/// `Z(t) = sqrt(min(t, 0.6)) z0`.
pub fn covariate_path(z0: &[f64], t: f64) -> Vec<f64> {
    let s = t.clamp(0.0, PLATEAU).sqrt();
    z0.iter().map(|v| s * v).collect()
}

fn hazard_along_path(model: SimModel, z0: &[f64], u: f64, buf: &mut Vec<f64>) -> Result<f64> {
    let s = u.clamp(0.0, PLATEAU).sqrt();
    buf.clear();
    buf.extend(z0.iter().map(|v| s * v));
    let value = model.hazard(u, buf);
    // the bare cos(Z6 Z7) term of Model 6 can push the total below zero on a
    // tiny set of draws; that model integrates the positive part
    if model == SimModel::Model6 && value.is_finite() && value < 0.0 {
        return Ok(0.0);
    }
    if !(value >= 0.0) {
        return Err(HazardError::NegativeHazard { u, value });
    }
    Ok(value)
}

fn simpson_rec<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    (a, fa): (f64, f64),
    (m, fm): (f64, f64),
    (b, fb): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // relative floor keeps very large integrals from chasing round-off
    if depth == 0 || delta.abs() <= 15.0 * tol.max(1e-14 * (left + right).abs()) {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_rec(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)?
        + simpson_rec(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)?)
}

fn adaptive_simpson<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, (a, fa), (m, fm), (b, fb), whole, tol, 48)
}

/// `int_a^b lambda(u | Z(u)) du` with a forced node at the covariate plateau.
pub fn hazard_integral(model: SimModel, z0: &[f64], a: f64, b: f64) -> Result<f64> {
    let mut buf = Vec::with_capacity(z0.len());
    let mut f = |u: f64| hazard_along_path(model, z0, u, &mut buf);
    if a < PLATEAU && PLATEAU < b {
        Ok(adaptive_simpson(&mut f, a, PLATEAU, INTEGRATION_TOL)? + adaptive_simpson(&mut f, PLATEAU, b, INTEGRATION_TOL)?)
    } else {
        adaptive_simpson(&mut f, a, b, INTEGRATION_TOL)
    }
}

pub fn cumulative_hazard_true(model: SimModel, z0: &[f64], t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(HazardError::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    hazard_integral(model, z0, 0.0, t)
}

/// Event time drawn by inverse transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventDraw {
    pub time: f64,
    /// The cumulative hazard never reached `-log(omega)` before the cap.
    pub beyond_support: bool,
}

/// Solves `exp(-Lambda(t)) = omega` by geometric bracketing and bisection.
pub fn sample_event_time(model: SimModel, z0: &[f64], omega: f64) -> Result<EventDraw> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(HazardError::InvalidInput(format!("omega must lie in (0, 1), got {omega}")));
    }
    let target = -omega.ln();
    let (mut lo, mut cum_lo) = (0.0, 0.0);
    let mut hi = 1.0;
    loop {
        let cum_hi = cum_lo + hazard_integral(model, z0, lo, hi)?;
        if cum_hi >= target {
            break;
        }
        if hi >= HORIZON_CAP {
            return Ok(EventDraw { time: HORIZON_CAP, beyond_support: true });
        }
        lo = hi;
        cum_lo = cum_hi;
        hi = (2.0 * hi).min(HORIZON_CAP);
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let cum_mid = cum_lo + hazard_integral(model, z0, lo, mid)?;
        if cum_mid < target {
            lo = mid;
            cum_lo = cum_mid;
        } else {
            hi = mid;
        }
    }
    Ok(EventDraw { time: 0.5 * (lo + hi), beyond_support: false })
}

/// Stream for subject `i`; the pilot sample uses streams past `PILOT_OFFSET`.
fn subject_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

const PILOT_OFFSET: u64 = 1 << 40;

fn draw_z0<R: Rng>(model: SimModel, rng: &mut R) -> Vec<f64> {
    model.covariate_bounds().into_iter().map(|(a, b)| rng.gen_range(a..b)).collect()
}

fn draw_omega<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let w: f64 = rng.gen();
        if w > 0.0 {
            return w;
        }
    }
}

/// Expected censored fraction under `C ~ U(0, c)` given event times.
fn expected_censoring(times: &[f64], c: f64) -> f64 {
    times.iter().map(|&t| (t / c).min(1.0)).sum::<f64>() / times.len() as f64
}

/// Upper bound `c` of the uniform censoring law giving the target censored
/// fraction on a pilot sample. Target 0 means no censoring (`c = inf`).
pub fn calibrate_censoring(model: SimModel, target: f64, n_pilot: usize, seed: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&target) {
        return Err(HazardError::InvalidInput(format!("censoring target must be in [0, 1), got {target}")));
    }
    if target == 0.0 {
        return Ok(f64::INFINITY);
    }
    if n_pilot == 0 {
        return Err(HazardError::InvalidInput("pilot sample must be nonempty".into()));
    }
    let pilot: Vec<f64> = (0..n_pilot as u64)
        .map(|i| {
            let mut rng = subject_rng(seed, PILOT_OFFSET + i);
            let z0 = draw_z0(model, &mut rng);
            sample_event_time(model, &z0, draw_omega(&mut rng)).map(|d| d.time)
        })
        .collect::<Result<_>>()?;
    // censored fraction decreases in c; bisect on log c
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e8f64.ln());
    let at = |lc: f64| expected_censoring(&pilot, lc.exp());
    if at(lo) < target || at(hi) > target {
        let achieved = if at(lo) < target { at(lo) } else { at(hi) };
        return Err(HazardError::CensoringUnattainable { target, achieved });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = (0.5 * (lo + hi)).exp();
    let achieved = expected_censoring(&pilot, c);
    if (achieved - target).abs() > 0.01 {
        return Err(HazardError::CensoringUnattainable { target, achieved });
    }
    Ok(c)
}

/// A simulated sample with everything needed for oracle evaluation.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub model: SimModel,
    pub seed: u64,
    pub records: Vec<SurvivalRecord>,
    pub z0: Vec<Vec<f64>>,
    /// Upper bound of the censoring law (infinite when uncensored).
    pub censoring_bound: f64,
    pub achieved_censoring: f64,
    pub beyond_support: usize,
}

impl SimOutput {
    pub fn truth(&self) -> TrueSurvival {
        TrueSurvival::new(self.model, self.z0.clone())
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn events(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.event).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub model: SimModel,
    pub n: usize,
    pub censoring: f64,
    pub n_pilot: usize,
    pub seed: u64,
}

/// Draws `n` subjects with covariates recorded at `grid_points`. Subject `i`
/// uses its own random stream, so the sample does not depend on generation order.
pub fn generate_dataset(settings: &SimSettings, grid_points: &[f64]) -> Result<SimOutput> {
    let SimSettings { model, n, censoring, n_pilot, seed } = *settings;
    if n == 0 {
        return Err(HazardError::InvalidInput("n must be at least 1".into()));
    }
    if grid_points.is_empty() || grid_points.iter().any(|&t| !(t >= 0.0)) {
        return Err(HazardError::InvalidGrid("measurement times must be nonempty and >= 0".into()));
    }
    let c = calibrate_censoring(model, censoring, n_pilot, seed)?;
    let mut records = Vec::with_capacity(n);
    let mut z0s = Vec::with_capacity(n);
    let mut beyond = 0;
    for i in 0..n {
        let mut rng = subject_rng(seed, i as u64);
        let z0 = draw_z0(model, &mut rng);
        let draw = sample_event_time(model, &z0, draw_omega(&mut rng))?;
        let u: f64 = rng.gen();
        beyond += draw.beyond_support as usize;
        let (time, event) = if c.is_finite() {
            let cens = u * c;
            if draw.time <= cens {
                (draw.time, !draw.beyond_support)
            } else {
                (cens, false)
            }
        } else {
            (draw.time, !draw.beyond_support)
        };
        let covariates = grid_points.iter().map(|&t| covariate_path(&z0, t)).collect();
        records.push(SurvivalRecord::new(format!("{}", i + 1), time, event, covariates)?);
        z0s.push(z0);
    }
    let achieved = records.iter().filter(|r| !r.event).count() as f64 / n as f64;
    Ok(SimOutput { model, seed, records, z0: z0s, censoring_bound: c, achieved_censoring: achieved, beyond_support: beyond })
}

/// The generating survival function `exp(-Lambda(t | z0))` for each subject.
#[derive(Debug, Clone)]
pub struct TrueSurvival {
    model: SimModel,
    z0: Vec<Vec<f64>>,
}

impl TrueSurvival {
    pub fn new(model: SimModel, z0: Vec<Vec<f64>>) -> Self {
        Self { model, z0 }
    }
}

impl SurvivalEvaluator for TrueSurvival {
    fn n_subjects(&self) -> usize {
        self.z0.len()
    }

    fn survival(&self, subject: usize, t: f64) -> Result<f64> {
        Ok((-cumulative_hazard_true(self.model, &self.z0[subject], t.max(0.0))?).exp())
    }

    /// Integrates once along the sorted times instead of from zero each time.
    fn survival_many(&self, subject: usize, times: &[f64]) -> Result<Vec<f64>> {
        let z0 = &self.z0[subject];
        let (mut prev, mut cum) = (0.0, 0.0);
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let t = t.max(0.0);
            if t < prev {
                return Err(HazardError::Unsorted);
            }
            cum += hazard_integral(self.model, z0, prev, t)?;
            prev = t;
            out.push((-cum).exp());
        }
        Ok(out)
    }
}
