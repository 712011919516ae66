use serde::{Deserialize, Serialize};

use crate::error::{HazardError, Result};

/// Right-continuous step function: `values[k]` on `[knots[k], knots[k+1])`,
/// zero before the first knot, last value held afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(HazardError::InvalidInput("step function needs one value per knot".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HazardError::InvalidInput("step function knots must be strictly increasing".into()));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(HazardError::InvalidInput("step function entries must be finite".into()));
        }
        Ok(Self { knots, values })
    }

    pub fn zero() -> Self {
        Self { knots: Vec::new(), values: Vec::new() }
    }

    pub fn constant(value: f64) -> Self {
        Self { knots: vec![0.0], values: vec![value] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }
}
