use serde::{Deserialize, Serialize};

use crate::aero::{MorelliCoefficients, STATE_DIM};
use crate::error::{invalid, Result};

/// Prior mean evaluated on raw (physical-unit) states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeanFunction {
    #[default]
    Zero,
    MorelliCm {
        coefficients: MorelliCoefficients,
    },
    Linear {
        intercept: f64,
        slopes: [f64; STATE_DIM],
    },
}

impl MeanFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            MeanFunction::Zero => Ok(()),
            MeanFunction::MorelliCm { coefficients } => coefficients.validate(),
            MeanFunction::Linear { intercept, slopes } => {
                if !intercept.is_finite() || slopes.iter().any(|s| !s.is_finite()) {
                    return invalid("linear mean coefficients must be finite");
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64; STATE_DIM]) -> f64 {
        match self {
            MeanFunction::Zero => 0.0,
            MeanFunction::MorelliCm { coefficients } => coefficients.eval(x),
            MeanFunction::Linear { intercept, slopes } => {
                intercept + slopes.iter().zip(x).map(|(s, v)| s * v).sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
        match self {
            MeanFunction::Zero => [0.0; STATE_DIM],
            MeanFunction::MorelliCm { coefficients } => coefficients.gradient(x),
            MeanFunction::Linear { slopes, .. } => *slopes,
        }
    }
}
