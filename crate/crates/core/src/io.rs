//! CSV and JSON formats: outcomes, long-format covariates, survival
//! predictions, fitted models and simulation truth.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use crate::data::{align_to_grid, SurvivalRecord, TimeGrid};
use crate::error::{HazardError, Result};
use crate::nn::{IntervalNetwork, NetworkDoc};
use crate::predict::SurvivalCurve;
use crate::simulate::{SimModel, SimOutput};
use crate::step::StepFunction;
use crate::train::DeepHazardModel;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: String,
    pub time: f64,
    pub event: bool,
}

#[derive(Debug, Deserialize, Serialize)]
struct OutcomeRow {
    id: String,
    time: f64,
    event: u8,
}

pub fn write_outcomes(path: &Path, records: &[SurvivalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(OutcomeRow { id: r.id.clone(), time: r.time, event: r.event as u8 })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_outcomes(path: &Path) -> Result<Vec<Outcome>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rd.deserialize::<OutcomeRow>() {
        let row = row?;
        if row.event > 1 {
            return Err(HazardError::InvalidInput(format!("subject {}: event must be 0 or 1", row.id)));
        }
        out.push(Outcome { id: row.id, time: row.time, event: row.event == 1 });
    }
    if out.is_empty() {
        return Err(HazardError::InvalidInput(format!("{} has no rows", path.display())));
    }
    Ok(out)
}

/// Writes `id, measurement_time, z1..zp`, one row per subject and grid point.
pub fn write_covariates(path: &Path, records: &[SurvivalRecord], grid_points: &[f64]) -> Result<()> {
    let p = records.first().map_or(0, |r| r.dim());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string(), "measurement_time".to_string()];
    header.extend((1..=p).map(|k| format!("z{k}")));
    w.write_record(&header)?;
    for r in records {
        for (t, z) in grid_points.iter().zip(&r.covariates) {
            let mut row = vec![r.id.clone(), t.to_string()];
            row.extend(z.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Measurements per subject, sorted by time.
pub type Measurements = BTreeMap<String, (Vec<f64>, Vec<Vec<f64>>)>;

pub fn read_covariates(path: &Path) -> Result<Measurements> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    if headers.len() < 3 || &headers[0] != "id" || &headers[1] != "measurement_time" {
        return Err(HazardError::InvalidInput(format!(
            "{}: expected header id,measurement_time,z1..zp",
            path.display()
        )));
    }
    let p = headers.len() - 2;
    let mut rows: BTreeMap<String, Vec<(f64, Vec<f64>)>> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec?;
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| HazardError::InvalidInput(format!("not a number: '{s}'")))
        };
        let t = parse(&rec[1])?;
        let z = (2..2 + p).map(|k| parse(&rec[k])).collect::<Result<Vec<f64>>>()?;
        rows.entry(rec[0].to_string()).or_default().push((t, z));
    }
    Ok(rows
        .into_iter()
        .map(|(id, mut v)| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (t, z) = v.into_iter().unzip();
            (id, (t, z))
        })
        .collect())
}

/// Joins outcomes to covariates, aligning each subject's measurements to the
/// grid by nearest time.
pub fn join_records(outcomes: &[Outcome], covariates: &Measurements, grid: &[f64]) -> Result<Vec<SurvivalRecord>> {
    let mut realigned = 0;
    let records = outcomes
        .iter()
        .map(|o| {
            let (times, values) = covariates
                .get(&o.id)
                .ok_or_else(|| HazardError::InvalidInput(format!("subject {} has no covariate rows", o.id)))?;
            if times.as_slice() != grid {
                realigned += 1;
                info!("subject {}: measurements at {:?} aligned to grid {:?}", o.id, times, grid);
            }
            SurvivalRecord::new(o.id.clone(), o.time, o.event, align_to_grid(times, values, grid)?)
        })
        .collect::<Result<Vec<_>>>()?;
    if realigned > 0 {
        info!("{realigned} subject(s) realigned to the grid");
    }
    Ok(records)
}

/// Aligned covariates for subjects without outcomes (prediction input).
pub fn aligned_covariates(covariates: &Measurements, grid: &[f64]) -> Result<Vec<(String, Vec<Vec<f64>>)>> {
    covariates
        .iter()
        .map(|(id, (t, z))| {
            if t.as_slice() != grid {
                info!("subject {id}: measurements at {t:?} aligned to grid {grid:?}");
            }
            Ok((id.clone(), align_to_grid(t, z, grid)?))
        })
        .collect()
}

#[derive(Debug, Deserialize, Serialize)]
struct SurvivalRow {
    id: String,
    time: f64,
    survival: f64,
}

pub fn write_survival(path: &Path, curves: &[SurvivalCurve]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for c in curves {
        for (&time, &survival) in c.times.iter().zip(&c.values) {
            w.serialize(SurvivalRow { id: c.id.clone(), time, survival })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Curves in order of first appearance of each id.
pub fn read_survival(path: &Path) -> Result<Vec<SurvivalCurve>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut curves: Vec<SurvivalCurve> = Vec::new();
    for row in rd.deserialize::<SurvivalRow>() {
        let row = row?;
        let k = *index.entry(row.id.clone()).or_insert_with(|| {
            curves.push(SurvivalCurve { id: row.id.clone(), times: Vec::new(), values: Vec::new() });
            curves.len() - 1
        });
        curves[k].times.push(row.time);
        curves[k].values.push(row.survival);
    }
    for c in &curves {
        if c.times.windows(2).any(|w| w[0] > w[1]) {
            return Err(HazardError::InvalidInput(format!("survival rows for {} are not sorted by time", c.id)));
        }
    }
    Ok(curves)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub format_version: u32,
    pub grid: Vec<f64>,
    pub tau: f64,
    pub covariate_dim: usize,
    pub networks: Vec<NetworkDoc>,
    pub baseline_knots: Vec<f64>,
    pub baseline_values: Vec<f64>,
    pub training_risks: Vec<Vec<f64>>,
}

impl From<&DeepHazardModel> for ModelDoc {
    fn from(m: &DeepHazardModel) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            grid: m.grid.points().to_vec(),
            tau: m.grid.tau(),
            covariate_dim: m.covariate_dim,
            networks: m.networks.iter().map(NetworkDoc::from).collect(),
            baseline_knots: m.baseline.knots.clone(),
            baseline_values: m.baseline.values.clone(),
            training_risks: m.training_risks.clone(),
        }
    }
}

impl TryFrom<ModelDoc> for DeepHazardModel {
    type Error = HazardError;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(HazardError::InvalidInput(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        let grid = TimeGrid::new(doc.grid, doc.tau)?;
        if doc.networks.len() != grid.n_intervals() {
            return Err(HazardError::DimensionMismatch { expected: grid.n_intervals(), got: doc.networks.len() });
        }
        let networks = doc.networks.into_iter().map(IntervalNetwork::try_from).collect::<Result<Vec<_>>>()?;
        for (j, net) in networks.iter().enumerate() {
            if net.input_dim() != doc.covariate_dim + j {
                return Err(HazardError::DimensionMismatch { expected: doc.covariate_dim + j, got: net.input_dim() });
            }
        }
        Ok(DeepHazardModel {
            grid,
            covariate_dim: doc.covariate_dim,
            networks,
            baseline: StepFunction::new(doc.baseline_knots, doc.baseline_values)?,
            training_risks: doc.training_risks,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    read_json(path)
}

pub fn save_model(path: &Path, model: &DeepHazardModel) -> Result<()> {
    write_json(path, &ModelDoc::from(model))
}

pub fn load_model(path: &Path) -> Result<DeepHazardModel> {
    DeepHazardModel::try_from(read_json::<ModelDoc>(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSubject {
    pub id: String,
    pub z0: Vec<f64>,
}

/// Enough to rebuild the generating survival curves of a simulated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthDoc {
    pub model: SimModel,
    pub seed: u64,
    /// Upper bound of the uniform censoring law; absent when uncensored.
    pub censoring_bound: Option<f64>,
    pub subjects: Vec<TruthSubject>,
}

impl From<&SimOutput> for TruthDoc {
    fn from(s: &SimOutput) -> Self {
        Self {
            model: s.model,
            seed: s.seed,
            censoring_bound: s.censoring_bound.is_finite().then_some(s.censoring_bound),
            subjects: s.records.iter().zip(&s.z0).map(|(r, z)| TruthSubject { id: r.id.clone(), z0: z.clone() }).collect(),
        }
    }
}
