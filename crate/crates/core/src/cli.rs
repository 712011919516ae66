//! Subcommand drivers behind the `deephazard` binary. Each command takes a
//! validated config and an output directory, writes its artifacts and a
//! manifest, and echoes the effective config next to them.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::data::TimeGrid;
use crate::error::{HazardError, Result};
use crate::io;
use crate::metrics::{c_index_td, c_index_traditional, imspe, ph_diagnostic, SurvivalEvaluator};
use crate::predict::{survival_curve, SurvivalCurve};
use crate::presets::preset;
use crate::simulate::{generate_dataset, SimModel, SimSettings, TrueSurvival};
use crate::train::{fit, TrainConfig};

fn default_pilot() -> usize {
    5000
}

fn default_grid_size() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: u8,
    pub n: usize,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub censoring: f64,
    #[serde(default = "default_pilot")]
    pub n_pilot: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub outcomes: PathBuf,
    pub covariates: PathBuf,
    pub grid: Vec<f64>,
    /// Horizon; defaults to just above the largest observed time.
    #[serde(default)]
    pub tau: Option<f64>,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub model: PathBuf,
    pub covariates: PathBuf,
    /// Observed times in this file are the default evaluation times.
    #[serde(default)]
    pub outcomes: Option<PathBuf>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub predictions: PathBuf,
    pub outcomes: PathBuf,
    #[serde(default)]
    pub truth: Option<PathBuf>,
    /// Defaults to true exactly when a truth file is given.
    #[serde(default)]
    pub imspe: Option<bool>,
    #[serde(default = "default_grid_size")]
    pub imspe_grid_size: usize,
    #[serde(default)]
    pub imspe_tau: Option<f64>,
    /// Time at which survival is turned into a static risk score for the
    /// traditional C-index; defaults to the median observed time.
    #[serde(default)]
    pub reference_time: Option<f64>,
    #[serde(default)]
    pub covariates: Option<PathBuf>,
    /// 1-based covariate columns to split on for the proportional-hazards ratio.
    #[serde(default)]
    pub ph_covariates: Vec<usize>,
}

/// Overlays `top` onto `base` key by key.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, t) => *b = t,
    }
}

/// Starting point for a subcommand config taken from a named preset.
pub fn preset_base(command: &str, name: &str) -> Result<Value> {
    let p = preset(name)?;
    let model_id = match p.model {
        SimModel::Model1 => 1,
        SimModel::Model2 => 2,
        SimModel::Model3 => 3,
        SimModel::Model4 => 4,
        SimModel::Model5 => 5,
        SimModel::Model6 => 6,
        _ => unreachable!("presets only use models 1 to 6"),
    };
    Ok(match command {
        "simulate" => json!({ "model": model_id, "n": p.n, "grid": p.grid, "censoring": p.censoring }),
        "train" => json!({ "grid": p.grid, "train": p.train }),
        _ => json!({}),
    })
}

pub fn parse_config<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| HazardError::InvalidInput(format!("config: {e}")))
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_manifest(out: &Path, command: &str, config: &impl Serialize, extra: Value) -> Result<()> {
    let config = serde_json::to_value(config)?;
    io::save_json(&out.join("config.json"), &config)?;
    let mut manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    merge(&mut manifest, extra);
    io::save_json(&out.join("manifest.json"), &manifest)
}

pub fn cmd_simulate(cfg: &SimulateConfig, out: &Path) -> Result<()> {
    let model = SimModel::from_id(cfg.model)?;
    if cfg.n == 0 {
        return Err(HazardError::InvalidInput("n must be at least 1".into()));
    }
    if cfg.grid.is_empty() || cfg.grid.windows(2).any(|w| w[0] >= w[1]) || cfg.grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(HazardError::InvalidGrid("grid must be nonempty, nonnegative and strictly increasing".into()));
    }
    if !(0.0..1.0).contains(&cfg.censoring) {
        return Err(HazardError::InvalidInput("censoring must be in [0, 1)".into()));
    }
    let settings = SimSettings { model, n: cfg.n, censoring: cfg.censoring, n_pilot: cfg.n_pilot, seed: cfg.seed };
    let sim = generate_dataset(&settings, &cfg.grid)?;
    prepare_out(out)?;
    io::write_outcomes(&out.join("outcomes.csv"), &sim.records)?;
    io::write_covariates(&out.join("covariates.csv"), &sim.records, &cfg.grid)?;
    io::save_json(&out.join("truth.json"), &io::TruthDoc::from(&sim))?;
    info!("simulated {} subjects, censored fraction {:.3}", cfg.n, sim.achieved_censoring);
    write_manifest(
        out,
        "simulate",
        cfg,
        json!({
            "seed": cfg.seed,
            "grid": cfg.grid,
            "achieved_censoring": sim.achieved_censoring,
            "censoring_bound": sim.censoring_bound.is_finite().then_some(sim.censoring_bound),
            "beyond_support": sim.beyond_support,
        }),
    )
}

pub fn cmd_train(cfg: &TrainRunConfig, out: &Path) -> Result<()> {
    cfg.train.validate()?;
    let outcomes = io::read_outcomes(&cfg.outcomes)?;
    let covariates = io::read_covariates(&cfg.covariates)?;
    let records = io::join_records(&outcomes, &covariates, &cfg.grid)?;
    let tau = match cfg.tau {
        Some(t) => t,
        None => records.iter().map(|r| r.time).fold(cfg.grid.last().copied().unwrap_or(0.0), f64::max).next_up(),
    };
    let grid = TimeGrid::new(cfg.grid.clone(), tau)?;
    let (model, report) = fit(&records, &grid, &cfg.train)?;
    prepare_out(out)?;
    io::save_model(&out.join("model.json"), &model)?;
    io::save_json(&out.join("report.json"), &report)?;
    let mut w = csv::Writer::from_path(out.join("loss_curves.csv"))?;
    w.write_record(["interval", "epoch", "loss"])?;
    for r in &report.intervals {
        for (e, l) in r.loss_curve.iter().enumerate() {
            w.write_record([r.interval.to_string(), e.to_string(), l.to_string()])?;
        }
    }
    w.flush()?;
    write_manifest(
        out,
        "train",
        cfg,
        json!({ "seed": cfg.train.seed, "tau": tau, "grid": model.grid.points(), "at_risk": report.intervals.iter().map(|r| r.at_risk).collect::<Vec<_>>() }),
    )
}

pub fn cmd_predict(cfg: &PredictConfig, out: &Path) -> Result<()> {
    let model = io::load_model(&cfg.model)?;
    let covariates = io::read_covariates(&cfg.covariates)?;
    let subjects = io::aligned_covariates(&covariates, model.grid.points())?;
    let mut times = match (&cfg.times, &cfg.outcomes) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => io::read_outcomes(path)?.iter().map(|o| o.time).collect(),
        (None, None) => return Err(HazardError::InvalidInput("predict needs either times or an outcomes file".into())),
    };
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(HazardError::InvalidInput("prediction times must be finite and >= 0".into()));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let tau = model.grid.tau();
    let beyond = times.iter().filter(|&&t| t > tau).count();
    if beyond > 0 {
        warn!("{beyond} requested time(s) exceed the horizon {tau}; survival is held at its value there");
    }
    let clamped: Vec<f64> = times.iter().map(|&t| t.min(tau)).collect();
    let curves = subjects
        .iter()
        .map(|(id, z)| {
            let c = survival_curve(&model, id, z, &clamped)?;
            Ok(SurvivalCurve { id: c.id, times: times.clone(), values: c.values })
        })
        .collect::<Result<Vec<_>>>()?;
    prepare_out(out)?;
    io::write_survival(&out.join("survival.csv"), &curves)?;
    write_manifest(out, "predict", cfg, json!({ "subjects": curves.len(), "times": times.len(), "tau": tau }))
}

/// Step interpolation of predicted curves: the value at the latest predicted
/// time not after `t`, and 1 before the first one.
pub struct CurveEvaluator {
    curves: Vec<SurvivalCurve>,
}

impl CurveEvaluator {
    pub fn new(curves: Vec<SurvivalCurve>) -> Self {
        Self { curves }
    }
}

impl SurvivalEvaluator for CurveEvaluator {
    fn n_subjects(&self) -> usize {
        self.curves.len()
    }

    fn survival(&self, subject: usize, t: f64) -> Result<f64> {
        let c = &self.curves[subject];
        let k = c.times.partition_point(|&s| s <= t);
        Ok(if k == 0 { 1.0 } else { c.values[k - 1] })
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn cmd_evaluate(cfg: &EvaluateConfig, out: &Path) -> Result<()> {
    let want_imspe = cfg.imspe.unwrap_or(cfg.truth.is_some());
    if want_imspe && cfg.truth.is_none() {
        return Err(HazardError::InvalidInput("IMSPE requested but no truth file given".into()));
    }
    if !cfg.ph_covariates.is_empty() && cfg.covariates.is_none() {
        return Err(HazardError::InvalidInput("ph_covariates needs a covariates file".into()));
    }
    let outcomes = io::read_outcomes(&cfg.outcomes)?;
    let mut curves = io::read_survival(&cfg.predictions)?;
    let by_id: std::collections::HashMap<String, usize> =
        curves.iter().enumerate().map(|(k, c)| (c.id.clone(), k)).collect();
    let ordered = outcomes
        .iter()
        .map(|o| {
            by_id
                .get(&o.id)
                .map(|&k| std::mem::replace(&mut curves[k], SurvivalCurve { id: String::new(), times: vec![], values: vec![] }))
                .ok_or_else(|| HazardError::InvalidInput(format!("no predictions for subject {}", o.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let pred = CurveEvaluator::new(ordered);
    let times: Vec<f64> = outcomes.iter().map(|o| o.time).collect();
    let events: Vec<bool> = outcomes.iter().map(|o| o.event).collect();

    let c_td = c_index_td(&times, &events, &pred)?;
    let reference = cfg.reference_time.unwrap_or_else(|| median(&times));
    let risks: Vec<f64> = (0..times.len()).map(|i| pred.survival(i, reference).map(|s| 1.0 - s)).collect::<Result<_>>()?;
    let c_trad = c_index_traditional(&times, &events, &risks)?;
    let mut report = json!({
        "n": times.len(),
        "events": events.iter().filter(|&&e| e).count(),
        "c_index_td": c_td,
        "c_index_traditional": c_trad,
        "traditional_reference_time": reference,
    });

    if let Some(path) = &cfg.truth {
        let truth: io::TruthDoc = io::load_json(path)?;
        let z0: std::collections::HashMap<&str, &Vec<f64>> = truth.subjects.iter().map(|s| (s.id.as_str(), &s.z0)).collect();
        let z = outcomes
            .iter()
            .map(|o| {
                z0.get(o.id.as_str())
                    .map(|v| (*v).clone())
                    .ok_or_else(|| HazardError::InvalidInput(format!("truth file has no subject {}", o.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let oracle = TrueSurvival::new(truth.model, z);
        report["c_index_td_oracle"] = json!(c_index_td(&times, &events, &oracle)?);
        if want_imspe {
            let tau = cfg.imspe_tau.unwrap_or_else(|| times.iter().copied().fold(0.0, f64::max));
            report["imspe"] = json!(imspe(&pred, &oracle, tau, cfg.imspe_grid_size)?);
            report["imspe_tau"] = json!(tau);
        }
    }

    prepare_out(out)?;
    if let Some(path) = &cfg.covariates {
        let covs = io::read_covariates(path)?;
        for &k in &cfg.ph_covariates {
            let column = outcomes
                .iter()
                .map(|o| {
                    let (_, z) = covs
                        .get(&o.id)
                        .ok_or_else(|| HazardError::InvalidInput(format!("subject {} has no covariate rows", o.id)))?;
                    z[0].get(k.wrapping_sub(1)).copied().ok_or(HazardError::DimensionMismatch { expected: k, got: z[0].len() })
                })
                .collect::<Result<Vec<f64>>>()?;
            let binary = column.iter().all(|&v| v == 0.0 || v == 1.0);
            let cut = if binary { 0.5 } else { median(&column) };
            let group: Vec<bool> = column.iter().map(|&v| v > cut).collect();
            let series = ph_diagnostic(&times, &events, &group)?;
            let mut w = csv::Writer::from_path(out.join(format!("ph_z{k}.csv")))?;
            w.write_record(["time", "ratio"])?;
            for (t, r) in &series {
                w.write_record([t.to_string(), r.to_string()])?;
            }
            w.flush()?;
        }
    }
    io::save_json(&out.join("metrics.json"), &report)?;
    write_manifest(out, "evaluate", cfg, json!({}))
}

/// Exit status for a finished command: 0, 2 for bad input, 3 otherwise.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_validation() => 2,
        Err(_) => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_overlays_nested_keys() {
        let mut base = json!({ "a": 1, "train": { "seed": 0, "max_epochs": 10 } });
        merge(&mut base, json!({ "train": { "seed": 5 }, "b": true }));
        assert_eq!(base, json!({ "a": 1, "b": true, "train": { "seed": 5, "max_epochs": 10 } }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let v = json!({ "model": 1, "n": 5, "grid": [0.0], "colour": "red" });
        let err = parse_config::<SimulateConfig>(v).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn presets_fill_simulate_and_train() {
        let sim: SimulateConfig = parse_config(preset_base("simulate", "ti4-model6-a").unwrap()).unwrap();
        assert_eq!(sim.model, 6);
        assert_eq!(sim.grid, vec![0.001, 0.1, 0.15, 0.2]);
        let mut v = preset_base("train", "ti1-model1").unwrap();
        merge(&mut v, json!({ "outcomes": "o.csv", "covariates": "c.csv" }));
        let tr: TrainRunConfig = parse_config(v).unwrap();
        assert_eq!(tr.train.layers.len(), 5);
    }

    #[test]
    fn simulate_validates_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let cfg = SimulateConfig { model: 1, n: 0, grid: vec![0.0], censoring: 0.0, n_pilot: 10, seed: 1 };
        let r = cmd_simulate(&cfg, &out);
        assert_eq!(exit_code(&r), 2);
        assert!(!out.exists());
    }
}
