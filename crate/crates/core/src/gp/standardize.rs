use serde::{Deserialize, Serialize};

use crate::aero::STATE_DIM;

/// Per-dimension z-score transform. Zero-variance dimensions pass through
/// with unit scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardizer {
    pub mean: [f64; STATE_DIM],
    pub scale: [f64; STATE_DIM],
}

impl Default for Standardizer {
    fn default() -> Self {
        Self {
            mean: [0.0; STATE_DIM],
            scale: [1.0; STATE_DIM],
        }
    }
}

impl Standardizer {
    /// Population mean and standard deviation of each column.
    pub fn fit(rows: &[[f64; STATE_DIM]]) -> Self {
        if rows.is_empty() {
            return Self::default();
        }
        let n = rows.len() as f64;
        let mut mean = [0.0; STATE_DIM];
        for r in rows {
            for d in 0..STATE_DIM {
                mean[d] += r[d];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; STATE_DIM];
        for r in rows {
            for d in 0..STATE_DIM {
                let t = r[d] - mean[d];
                var[d] += t * t;
            }
        }
        let mut scale = [1.0; STATE_DIM];
        for d in 0..STATE_DIM {
            let sd = (var[d] / n).sqrt();
            // Spread at the rounding level of the mean counts as constant.
            if sd > 1e-12 * mean[d].abs().max(f64::MIN_POSITIVE) && sd.is_finite() {
                scale[d] = sd;
            }
        }
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
        let mut z = [0.0; STATE_DIM];
        for d in 0..STATE_DIM {
            z[d] = (x[d] - self.mean[d]) / self.scale[d];
        }
        z
    }

    pub fn invert(&self, z: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
        let mut x = [0.0; STATE_DIM];
        for d in 0..STATE_DIM {
            x[d] = z[d] * self.scale[d] + self.mean[d];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_column_passes_through() {
        let rows = vec![[1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.1, 0.2]; 5];
        let s = Standardizer::fit(&rows);
        assert_eq!(s.scale, [1.0; STATE_DIM]);
        assert_eq!(s.apply(&rows[0]), [0.0; STATE_DIM]);
    }

    proptest! {
        #[test]
        fn apply_invert_identity(rows in prop::collection::vec(prop::array::uniform8(-1e3..1e3f64), 2..20),
                                 x in prop::array::uniform8(-1e3..1e3f64)) {
            let s = Standardizer::fit(&rows);
            prop_assert!(s.scale.iter().all(|v| *v > 0.0));
            let back = s.invert(&s.apply(&x));
            for d in 0..STATE_DIM {
                let tol = 1e-12 * x[d].abs().max(s.mean[d].abs()).max(s.scale[d]);
                prop_assert!((back[d] - x[d]).abs() <= tol, "{} vs {}", back[d], x[d]);
            }
        }
    }
}
