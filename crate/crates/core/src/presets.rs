//! Named experiment settings: simulation model, measurement grid, censoring
//! level and network hyperparameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{HazardError, Result};
use crate::nn::{Activation, LayerSpec, OptimizerKind, Penalty, PenaltyNorm};
use crate::simulate::SimModel;
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub model: SimModel,
    pub n: usize,
    pub grid: Vec<f64>,
    pub censoring: f64,
    pub train: TrainConfig,
}

const GRID_A: [f64; 4] = [0.001, 0.2, 0.4, 0.6];
const GRID_B: [f64; 4] = [0.001, 0.1, 0.2, 0.3];
const GRID_C: [f64; 4] = [0.001, 0.1, 0.15, 0.2];

fn layers(widths: &[usize], acts: &[Activation], dropouts: &[f64]) -> Vec<LayerSpec> {
    widths
        .iter()
        .enumerate()
        .map(|(k, &width)| LayerSpec {
            width,
            activation: acts[k.min(acts.len() - 1)],
            dropout: dropouts[k.min(dropouts.len() - 1)],
        })
        .collect()
}

fn train(optimizer: OptimizerKind, layers: Vec<LayerSpec>, lr: f64, lambda: f64, norm: PenaltyNorm) -> TrainConfig {
    TrainConfig {
        layers,
        optimizer,
        learning_rate: lr,
        penalty: Penalty { lambda, norm },
        max_epochs: 1000,
        early_stopping: 1e-5,
        seed: 0,
        per_interval: BTreeMap::new(),
        trim_grid: true,
    }
}

fn build(name: &str) -> Option<Preset> {
    use Activation::*;
    use OptimizerKind::{Adam, Sgd};
    use PenaltyNorm::{L1, L2};
    let elu = |alpha| Elu { alpha };
    let (model, n, grid, censoring, cfg) = match name {
        "ti1-model1-n1000" => (1, 1000, &GRID_A[..], 0.0, train(Adam, layers(&[10, 15, 20, 15, 10], &[elu(0.1)], &[0.2]), 1e-2, 1e-5, L2)),
        "ti1-model2-n1000" => (2, 1000, &GRID_A[..], 0.0, train(Adam, layers(&[10, 10], &[Relu], &[0.2]), 2e-2, 1e-3, L2)),
        "ti1-model3-n1000" => (3, 1000, &GRID_A[..], 0.0, train(Adam, layers(&[20, 20], &[elu(0.1), Selu], &[0.2]), 2e-1, 1e-5, L2)),
        "ti1-model4-n1000" => (4, 1000, &GRID_A[..], 0.0, train(Adam, layers(&[10, 10], &[Selu], &[0.2]), 2e-1, 1e-5, L2)),
        "ti1-model1-n200" => (1, 200, &GRID_A[..], 0.0, train(Adam, layers(&[10, 10], &[Selu], &[0.2]), 2e-1, 1e-2, L2)),
        "ti1-model2-n200" => (2, 200, &GRID_A[..], 0.0, train(Adam, layers(&[10, 10], &[Relu], &[0.2]), 2e-2, 0.41, L2)),
        "ti1-model3-n200" => (3, 200, &GRID_A[..], 0.0, train(Adam, layers(&[10, 15, 10], &[Selu], &[0.1]), 1e-3, 0.61, L2)),
        "ti1-model4-n200" => (4, 200, &GRID_A[..], 0.0, train(Adam, layers(&[10, 10], &[Relu], &[0.2]), 2e-1, 1e-4, L2)),
        "ti2-model5" => (5, 1000, &GRID_A[..], 0.0, train(Sgd, layers(&[20], &[elu(0.1)], &[0.2]), 2e-1, 0.56, L2)),
        "ti2-model6" => (6, 1000, &GRID_B[..], 0.0, train(Adam, layers(&[20], &[Selu], &[0.2]), 2e-1, 0.1, L2)),
        "ti3-model4-c10" => (4, 1000, &GRID_A[..], 0.10, train(Adam, layers(&[10, 10], &[Selu], &[0.2]), 2e-1, 1e-5, L2)),
        "ti3-model4-c20" => (4, 1000, &GRID_A[..], 0.20, train(Adam, layers(&[20], &[Selu], &[0.2]), 3e-3, 1e-4, L2)),
        "ti3-model5-c0" => (5, 1000, &GRID_B[..], 0.0, train(Sgd, layers(&[20, 20], &[elu(0.7)], &[0.1, 0.15]), 1e-2, 0.061, L1)),
        "ti3-model5-c15" => (5, 1000, &GRID_B[..], 0.15, train(Sgd, layers(&[20, 20], &[elu(0.7)], &[0.1, 0.15]), 1e-2, 0.061, L1)),
        "ti3-model5-c30" => (5, 1000, &GRID_B[..], 0.30, train(Sgd, layers(&[20, 20, 20], &[elu(0.7)], &[0.1, 0.15]), 1e-1, 0.05, L1)),
        "ti3-model6-c0" => (6, 1000, &GRID_C[..], 0.0, train(Sgd, layers(&[20, 20], &[elu(0.5)], &[0.1, 0.15]), 1e-2, 0.061, L1)),
        "ti3-model6-c15" => (6, 1000, &GRID_C[..], 0.15, train(Sgd, layers(&[20, 20], &[elu(0.5)], &[0.1, 0.15]), 1e-2, 0.061, L1)),
        "ti3-model6-c30" => (6, 1000, &GRID_C[..], 0.30, train(Sgd, layers(&[20, 20], &[elu(0.5)], &[0.1, 0.15]), 1e-2, 0.061, L1)),
        "ti4-model6-a" => (6, 1000, &GRID_C[..], 0.0, train(Adam, layers(&[20, 20], &[elu(0.5)], &[0.1, 0.15]), 1e-2, 0.061, L1)),
        "ti4-model6-b" => (6, 1000, &[0.001, 0.05, 0.08, 0.12][..], 0.0, train(Adam, layers(&[20, 20], &[elu(0.5)], &[0.1, 0.15]), 1e-2, 0.0007, L1)),
        "ti4-model6-c" => (6, 1000, &[0.001, 0.15, 0.2, 0.25][..], 0.0, train(Adam, layers(&[20, 20], &[elu(0.5)], &[0.1, 0.15]), 1e-2, 0.08, L1)),
        "ti4-model6-d" => (6, 1000, &[0.001, 0.05, 0.08, 0.12, 0.15, 0.2][..], 0.0, train(Adam, layers(&[20, 20], &[elu(1.5)], &[0.1, 0.15]), 1e-2, 0.0001, L1)),
        _ => return None,
    };
    Some(Preset {
        name: name.to_string(),
        model: SimModel::from_id(model).ok()?,
        n,
        grid: grid.to_vec(),
        censoring,
        train: cfg,
    })
}

pub const PRESET_NAMES: [&str; 22] = [
    "ti1-model1-n1000",
    "ti1-model2-n1000",
    "ti1-model3-n1000",
    "ti1-model4-n1000",
    "ti1-model1-n200",
    "ti1-model2-n200",
    "ti1-model3-n200",
    "ti1-model4-n200",
    "ti2-model5",
    "ti2-model6",
    "ti3-model4-c10",
    "ti3-model4-c20",
    "ti3-model5-c0",
    "ti3-model5-c15",
    "ti3-model5-c30",
    "ti3-model6-c0",
    "ti3-model6-c15",
    "ti3-model6-c30",
    "ti4-model6-a",
    "ti4-model6-b",
    "ti4-model6-c",
    "ti4-model6-d",
];

/// Looks up a preset; `ti1-modelK` is short for `ti1-modelK-n1000`.
pub fn preset(name: &str) -> Result<Preset> {
    let full = match name {
        "ti1-model1" | "ti1-model2" | "ti1-model3" | "ti1-model4" => format!("{name}-n1000"),
        _ => name.to_string(),
    };
    build(&full).ok_or_else(|| {
        HazardError::InvalidInput(format!("unknown preset '{name}'; known presets: {}", PRESET_NAMES.join(", ")))
    })
}
