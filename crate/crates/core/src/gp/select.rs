use serde::{Deserialize, Serialize};

use super::{FitOptions, GpModel, Kernel, MeanFunction};
use crate::aero::STATE_DIM;
use crate::error::{invalid, Error, Result};

/// Candidate hyperparameters for log-marginal-likelihood selection.
///
/// `signal_variances` and `scales` vary the base kernel: for the arc-sine
/// kernel `scales` are weight variances, for the squared-exponential kernel
/// they are a common length scale. Empty lists keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub noise_variances: Vec<f64>,
    #[serde(default)]
    pub signal_variances: Vec<f64>,
    #[serde(default)]
    pub scales: Vec<f64>,
}

impl GridSpec {
    /// Expands the grid into concrete kernels, in a fixed order.
    pub fn kernels(&self, base: &Kernel) -> Vec<Kernel> {
        let signals: Vec<Option<f64>> = if self.signal_variances.is_empty() {
            vec![None]
        } else {
            self.signal_variances.iter().copied().map(Some).collect()
        };
        let scales: Vec<Option<f64>> = if self.scales.is_empty() {
            vec![None]
        } else {
            self.scales.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for s in &scales {
            for sf in &signals {
                let k = match base {
                    Kernel::NeuralNetwork => Kernel::NeuralNetwork,
                    Kernel::ArcSine {
                        bias_variance,
                        weight_variance,
                        signal_variance,
                    } => Kernel::ArcSine {
                        bias_variance: *bias_variance,
                        weight_variance: s.unwrap_or(*weight_variance),
                        signal_variance: sf.unwrap_or(*signal_variance),
                    },
                    Kernel::SquaredExponential {
                        length_scales,
                        signal_variance,
                    } => Kernel::SquaredExponential {
                        length_scales: match s {
                            Some(l) => vec![*l; STATE_DIM],
                            None => length_scales.clone(),
                        },
                        signal_variance: sf.unwrap_or(*signal_variance),
                    },
                };
                if !out.contains(&k) {
                    out.push(k);
                }
            }
        }
        out
    }
}

/// One evaluated grid point; `lml` is `None` when the fit failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub kernel: Kernel,
    pub noise_variance: f64,
    pub lml: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub model: GpModel,
    pub table: Vec<GridPoint>,
}

/// Fits every grid candidate and keeps the one with the largest log marginal
/// likelihood. Ties go to the earliest candidate.
pub fn select(
    x_raw: &[[f64; STATE_DIM]],
    y: &[f64],
    mean: &MeanFunction,
    base: &Kernel,
    grid: &GridSpec,
    options: FitOptions,
) -> Result<Selection> {
    if grid.noise_variances.is_empty() {
        return invalid("grid needs at least one noise variance");
    }
    let kernels = grid.kernels(base);
    let mut table = Vec::with_capacity(kernels.len() * grid.noise_variances.len());
    let mut best: Option<(f64, GpModel)> = None;
    let mut last_err: Option<Error> = None;
    for k in &kernels {
        for &nu in &grid.noise_variances {
            match GpModel::fit_with(x_raw, y, mean.clone(), k.clone(), nu, options) {
                Ok(m) => {
                    let lml = m.log_marginal_likelihood();
                    table.push(GridPoint {
                        kernel: k.clone(),
                        noise_variance: nu,
                        lml: Some(lml),
                    });
                    if best.as_ref().map_or(true, |(b, _)| lml > *b) {
                        best = Some((lml, m));
                    }
                }
                Err(e) if e.is_numerical() => {
                    table.push(GridPoint {
                        kernel: k.clone(),
                        noise_variance: nu,
                        lml: None,
                    });
                    last_err = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
    }
    match best {
        Some((_, model)) => Ok(Selection { model, table }),
        None => Err(last_err.unwrap_or_else(|| Error::Invalid("empty grid".into()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_in_order() {
        let g = GridSpec {
            noise_variances: vec![1e-6],
            signal_variances: vec![1.0, 2.0],
            scales: vec![0.1, 0.2, 0.3],
        };
        let ks = g.kernels(&Kernel::default());
        assert_eq!(ks.len(), 6);
        assert_eq!(
            ks[1],
            Kernel::ArcSine {
                bias_variance: 0.1,
                weight_variance: 0.1,
                signal_variance: 2.0
            }
        );
        assert_eq!(g.kernels(&Kernel::NeuralNetwork).len(), 1);
    }

    #[test]
    fn picks_highest_lml() {
        let x: Vec<[f64; STATE_DIM]> = (0..40)
            .map(|i| {
                let t = i as f64 / 40.0;
                [0.7, 1e-3, 200.0, 0.0, (7.0 * t).sin() * 0.1, 0.0, 0.05 + 0.1 * t, -0.02 * t]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| -0.5 * r[6] - 0.07 * r[4] - 1.2 * r[7]).collect();
        let grid = GridSpec {
            noise_variances: vec![1e-10, 1e-6, 1e-2],
            signal_variances: vec![1e-3, 1.0],
            scales: vec![],
        };
        let sel = select(&x, &y, &MeanFunction::Zero, &Kernel::default(), &grid, FitOptions::default())
            .unwrap();
        let best = sel
            .table
            .iter()
            .filter_map(|p| p.lml)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(sel.model.log_marginal_likelihood(), best);
        assert!(sel.model.noise_variance() < 1e-2);
    }
}
