use serde::{Deserialize, Serialize};

use crate::aero::STATE_DIM;
use crate::error::{invalid, Result};
use crate::linalg::dot;

/// Clamp margin for the arcsine argument.
pub const ASIN_EPS: f64 = 1e-12;

/// Covariance functions on standardized inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Kernel {
    /// `asin(x·x' / sqrt((1 + |x|²/2)(1 + |x'|²/2)))`, argument clamped to
    /// `[-1 + ε, 1 - ε]`. Not positive semidefinite in general.
    NeuralNetwork,
    /// Arcsine kernel with bias and weight variances:
    /// `σ_f² asin(2(σ_b² + σ_w² x·x') / sqrt((1 + 2(σ_b² + σ_w²|x|²))(1 + 2(σ_b² + σ_w²|x'|²))))`.
    ArcSine {
        bias_variance: f64,
        weight_variance: f64,
        signal_variance: f64,
    },
    /// `σ_f² exp(-½ Σ (x_d - x'_d)² / ℓ_d²)`.
    SquaredExponential {
        length_scales: Vec<f64>,
        signal_variance: f64,
    },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::ArcSine {
            bias_variance: 0.1,
            weight_variance: 0.05,
            signal_variance: 1e-3,
        }
    }
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::NeuralNetwork => Ok(()),
            Kernel::ArcSine {
                bias_variance,
                weight_variance,
                signal_variance,
            } => {
                if !(*bias_variance >= 0.0 && bias_variance.is_finite()) {
                    return invalid("arc-sine bias_variance must be >= 0");
                }
                if !(*weight_variance > 0.0 && weight_variance.is_finite()) {
                    return invalid("arc-sine weight_variance must be > 0");
                }
                if !(*signal_variance > 0.0 && signal_variance.is_finite()) {
                    return invalid("arc-sine signal_variance must be > 0");
                }
                Ok(())
            }
            Kernel::SquaredExponential {
                length_scales,
                signal_variance,
            } => {
                if length_scales.len() != STATE_DIM {
                    return invalid(format!(
                        "squared-exponential needs {STATE_DIM} length scales, got {}",
                        length_scales.len()
                    ));
                }
                if length_scales.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return invalid("squared-exponential length scales must be > 0");
                }
                if !(*signal_variance > 0.0 && signal_variance.is_finite()) {
                    return invalid("squared-exponential signal_variance must be > 0");
                }
                Ok(())
            }
        }
    }

    /// Kernel value on standardized inputs.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Kernel::NeuralNetwork => {
                let u = dot(x, y) / ((1.0 + 0.5 * dot(x, x)) * (1.0 + 0.5 * dot(y, y))).sqrt();
                clamp_unit(u).asin()
            }
            Kernel::ArcSine {
                bias_variance: b,
                weight_variance: w,
                signal_variance: s,
            } => {
                let num = 2.0 * (b + w * dot(x, y));
                let a = 1.0 + 2.0 * (b + w * dot(x, x));
                let c = 1.0 + 2.0 * (b + w * dot(y, y));
                s * clamp_unit(num / (a * c).sqrt()).asin()
            }
            Kernel::SquaredExponential {
                length_scales,
                signal_variance,
            } => {
                let mut r2 = 0.0;
                for d in 0..x.len() {
                    let t = (x[d] - y[d]) / length_scales[d];
                    r2 += t * t;
                }
                signal_variance * (-0.5 * r2).exp()
            }
        }
    }

    /// Gradient of `k(x, y)` with respect to `x`, written to `out`.
    pub fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        match self {
            Kernel::NeuralNetwork => {
                let xy = dot(x, y);
                let a = 1.0 + 0.5 * dot(x, x);
                let c = 1.0 + 0.5 * dot(y, y);
                let root = (a * c).sqrt();
                let u = xy / root;
                if u.abs() >= 1.0 - ASIN_EPS {
                    out.iter_mut().for_each(|g| *g = 0.0);
                    return;
                }
                let scale = 1.0 / (root * (1.0 - u * u).sqrt());
                for d in 0..x.len() {
                    out[d] = scale * (y[d] - xy * x[d] / (2.0 * a));
                }
            }
            Kernel::ArcSine {
                bias_variance: b,
                weight_variance: w,
                signal_variance: s,
            } => {
                let num = 2.0 * (b + w * dot(x, y));
                let a = 1.0 + 2.0 * (b + w * dot(x, x));
                let c = 1.0 + 2.0 * (b + w * dot(y, y));
                let root = (a * c).sqrt();
                let u = num / root;
                if u.abs() >= 1.0 - ASIN_EPS {
                    out.iter_mut().for_each(|g| *g = 0.0);
                    return;
                }
                let scale = s / (root * (1.0 - u * u).sqrt());
                for d in 0..x.len() {
                    out[d] = scale * 2.0 * w * (y[d] - num * x[d] / a);
                }
            }
            Kernel::SquaredExponential { length_scales, .. } => {
                let k = self.eval(x, y);
                for d in 0..x.len() {
                    let l2 = length_scales[d] * length_scales[d];
                    out[d] = -k * (x[d] - y[d]) / l2;
                }
            }
        }
    }
}

#[inline]
fn clamp_unit(u: f64) -> f64 {
    u.clamp(-1.0 + ASIN_EPS, 1.0 - ASIN_EPS)
}
