use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Kernel, MeanFunction, Standardizer};
use crate::aero::{StateVector, STATE_DIM};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, LowerFactor};

/// Diagonal jitter added on the single retry after a failed factorization.
pub const JITTER: f64 = 1e-8;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Options beyond the core `(X, y, m, k, ν)` inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    /// Add the mean training residual `mean(y − m(X))` as a constant to the
    /// prior mean before conditioning.
    #[serde(default)]
    pub center_residual: bool,
}

/// Trained exact GP. Immutable; share freely across threads.
#[derive(Clone, Debug)]
pub struct GpModel {
    standardizer: Standardizer,
    kernel: Kernel,
    mean: MeanFunction,
    offset: f64,
    noise_variance: f64,
    jitter: f64,
    z: Vec<[f64; STATE_DIM]>,
    y: Vec<f64>,
    factor: Option<LowerFactor>,
    weights: Vec<f64>,
}

/// On-disk form of a [`GpModel`]; the factor is recomputed on load.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    standardizer: Standardizer,
    kernel: Kernel,
    mean: MeanFunction,
    offset: f64,
    noise_variance: f64,
    jitter: f64,
    x: Vec<[f64; STATE_DIM]>,
    y: Vec<f64>,
    a: Vec<f64>,
}

const FORMAT: &str = "aerogp-model-1";

fn check_rows(rows: &[[f64; STATE_DIM]]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if let Some(d) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: d });
        }
    }
    Ok(())
}

impl GpModel {
    /// Fits with default options (no residual centering).
    pub fn fit(
        x_raw: &[[f64; STATE_DIM]],
        y: &[f64],
        mean: MeanFunction,
        kernel: Kernel,
        noise_variance: f64,
    ) -> Result<Self> {
        Self::fit_with(x_raw, y, mean, kernel, noise_variance, FitOptions::default())
    }

    pub fn fit_with(
        x_raw: &[[f64; STATE_DIM]],
        y: &[f64],
        mean: MeanFunction,
        kernel: Kernel,
        noise_variance: f64,
        options: FitOptions,
    ) -> Result<Self> {
        if x_raw.len() != y.len() {
            return invalid(format!("{} input rows but {} observations", x_raw.len(), y.len()));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return invalid(format!("noise variance must be finite and >= 0, got {noise_variance}"));
        }
        kernel.validate()?;
        mean.validate()?;
        check_rows(x_raw)?;
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: STATE_DIM });
        }

        let standardizer = Standardizer::fit(x_raw);
        let z: Vec<_> = x_raw.iter().map(|x| standardizer.apply(x)).collect();
        let prior: Vec<f64> = x_raw.iter().map(|x| mean.eval(x)).collect();
        let offset = if options.center_residual && !y.is_empty() {
            y.iter().zip(&prior).map(|(a, b)| a - b).sum::<f64>() / y.len() as f64
        } else {
            0.0
        };
        let residual: Vec<f64> = y.iter().zip(&prior).map(|(a, b)| a - b - offset).collect();

        let (factor, jitter) = factorize(&kernel, &z, noise_variance)?;
        let weights = factor.solve(&residual);
        Ok(Self {
            standardizer,
            kernel,
            mean,
            offset,
            noise_variance,
            jitter,
            z,
            y: y.to_vec(),
            factor: Some(factor),
            weights,
        })
    }

    /// Model with no training data: predictions are the prior.
    pub fn prior(mean: MeanFunction, kernel: Kernel) -> Result<Self> {
        Self::fit(&[], &[], mean, kernel, 0.0)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mean_function(&self) -> &MeanFunction {
        &self.mean
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Diagonal jitter that was needed for the factorization (0 or [`JITTER`]).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Constant added to the mean function by residual centering.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub fn standardized_inputs(&self) -> &[[f64; STATE_DIM]] {
        &self.z
    }

    /// Training inputs in raw units.
    pub fn training_inputs(&self) -> Vec<[f64; STATE_DIM]> {
        self.z.iter().map(|z| self.standardizer.invert(z)).collect()
    }

    /// Lower factor `L` of `K + (ν + jitter) I` as a dense matrix.
    pub fn factor_matrix(&self) -> DMatrix<f64> {
        match &self.factor {
            Some(f) => f.to_dmatrix(),
            None => DMatrix::zeros(0, 0),
        }
    }

    /// `K(X, X) + (ν + jitter) I` as a dense matrix.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            let k = self.kernel.eval(&self.z[i], &self.z[j]);
            if i == j {
                k + self.noise_variance + self.jitter
            } else {
                k
            }
        })
    }

    fn prior_mean(&self, x: &[f64; STATE_DIM]) -> f64 {
        self.mean.eval(x) + self.offset
    }

    fn cross(&self, zs: &[f64; STATE_DIM]) -> Vec<f64> {
        self.z.iter().map(|zi| self.kernel.eval(zs, zi)).collect()
    }

    /// Posterior mean at one raw state.
    pub fn predict_mean(&self, x: &[f64; STATE_DIM]) -> f64 {
        let zs = self.standardizer.apply(x);
        let k = self.cross(&zs);
        self.prior_mean(x) + dot(&k, &self.weights)
    }

    pub fn predict_mean_state(&self, x: &StateVector) -> f64 {
        self.predict_mean(&x.to_array())
    }

    /// Posterior mean and covariance at the test inputs.
    pub fn predict(&self, x_star: &[[f64; STATE_DIM]]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        check_rows(x_star)?;
        let m = x_star.len();
        let zs: Vec<_> = x_star.iter().map(|x| self.standardizer.apply(x)).collect();
        let mut mu = Vec::with_capacity(m);
        let mut v = Vec::with_capacity(m);
        for (x, z) in x_star.iter().zip(&zs) {
            let mut k = self.cross(z);
            mu.push(self.prior_mean(x) + dot(&k, &self.weights));
            if let Some(f) = &self.factor {
                f.solve_lower_in_place(&mut k);
            }
            v.push(k);
        }
        let mut cov = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let c = self.kernel.eval(&zs[i], &zs[j]) - dot(&v[i], &v[j]);
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
            if cov[(i, i)] < 0.0 {
                cov[(i, i)] = 0.0;
            }
        }
        Ok((mu, cov))
    }

    /// Posterior mean and marginal variance, without the full covariance.
    pub fn predict_marginal(&self, x_star: &[[f64; STATE_DIM]]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_rows(x_star)?;
        let mut mu = Vec::with_capacity(x_star.len());
        let mut var = Vec::with_capacity(x_star.len());
        for x in x_star {
            let z = self.standardizer.apply(x);
            let mut k = self.cross(&z);
            mu.push(self.prior_mean(x) + dot(&k, &self.weights));
            if let Some(f) = &self.factor {
                f.solve_lower_in_place(&mut k);
            }
            var.push((self.kernel.eval(&z, &z) - dot(&k, &k)).max(0.0));
        }
        Ok((mu, var))
    }

    /// Gradient of the posterior mean with respect to the raw state.
    pub fn posterior_mean_gradient(&self, x: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
        let mut g = self.mean.gradient(x);
        let z = self.standardizer.apply(x);
        let mut acc = [0.0; STATE_DIM];
        let mut dk = [0.0; STATE_DIM];
        for (zi, a) in self.z.iter().zip(&self.weights) {
            self.kernel.grad_x(&z, zi, &mut dk);
            for d in 0..STATE_DIM {
                acc[d] += a * dk[d];
            }
        }
        for d in 0..STATE_DIM {
            g[d] += acc[d] / self.standardizer.scale[d];
        }
        g
    }

    /// `−½ rᵀA − Σ log L_ii − (n/2) log 2π`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n();
        if n == 0 {
            return 0.0;
        }
        let x_raw = self.training_inputs();
        let fit: f64 = self
            .y
            .iter()
            .zip(&x_raw)
            .zip(&self.weights)
            .map(|((y, x), a)| (y - self.prior_mean(x)) * a)
            .sum();
        let log_det_half = self.factor.as_ref().map_or(0.0, |f| f.log_det_half());
        -0.5 * fit - log_det_half - 0.5 * n as f64 * LN_2PI
    }

    /// Root-mean-square of `y − μ(X)` at the training inputs.
    pub fn training_rmse(&self) -> f64 {
        if self.n() == 0 {
            return 0.0;
        }
        let x_raw = self.training_inputs();
        let ss: f64 = x_raw
            .iter()
            .zip(&self.y)
            .map(|(x, y)| (self.predict_mean(x) - y).powi(2))
            .sum();
        (ss / self.n() as f64).sqrt()
    }

    pub fn save<W: Write>(&self, w: W) -> Result<()> {
        let file = ModelFile {
            format: FORMAT.to_string(),
            standardizer: self.standardizer.clone(),
            kernel: self.kernel.clone(),
            mean: self.mean.clone(),
            offset: self.offset,
            noise_variance: self.noise_variance,
            jitter: self.jitter,
            x: self.z.clone(),
            y: self.y.clone(),
            a: self.weights.clone(),
        };
        serde_json::to_writer_pretty(w, &file)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.save(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    /// Loads a saved model, refactorizes and checks the stored weights.
    pub fn load<R: Read>(r: R) -> Result<Self> {
        let f: ModelFile = serde_json::from_reader(r)?;
        if f.format != FORMAT {
            return Err(Error::Corrupt(format!("unknown model format `{}`", f.format)));
        }
        if f.x.len() != f.y.len() || f.y.len() != f.a.len() {
            return Err(Error::Corrupt("x, y, a lengths differ".into()));
        }
        if f.standardizer.scale.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Corrupt("standardizer scale must be positive".into()));
        }
        f.kernel.validate()?;
        f.mean.validate()?;
        check_rows(&f.x)?;
        if !(f.jitter == 0.0 || f.jitter == JITTER) {
            return Err(Error::Corrupt(format!("unexpected jitter {}", f.jitter)));
        }
        let factor = if f.x.is_empty() {
            None
        } else {
            let n = f.x.len();
            let gram = gram_lower(&f.kernel, &f.x, f.noise_variance + f.jitter);
            let factor = LowerFactor::new(gram, n).map_err(|e| {
                Error::Corrupt(format!(
                    "stored model does not factorize (pivot {:e} at {})",
                    e.pivot, e.index
                ))
            })?;
            Some(factor)
        };
        let model = Self {
            standardizer: f.standardizer,
            kernel: f.kernel,
            mean: f.mean,
            offset: f.offset,
            noise_variance: f.noise_variance,
            jitter: f.jitter,
            z: f.x,
            y: f.y,
            factor,
            weights: f.a,
        };
        model.verify_weights()?;
        Ok(model)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::load(s.as_bytes())
    }

    fn verify_weights(&self) -> Result<()> {
        let Some(f) = &self.factor else {
            return Ok(());
        };
        let x_raw = self.training_inputs();
        let residual: Vec<f64> = self
            .y
            .iter()
            .zip(&x_raw)
            .map(|(y, x)| y - self.prior_mean(x))
            .collect();
        let recomputed = f.solve(&residual);
        let scale = recomputed.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let worst = recomputed
            .iter()
            .zip(&self.weights)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if worst > 1e-6 * scale {
            return Err(Error::Corrupt(format!(
                "stored weights disagree with the refactorized model (max diff {worst:e})"
            )));
        }
        Ok(())
    }
}

fn gram_lower(kernel: &Kernel, z: &[[f64; STATE_DIM]], diag: f64) -> Vec<f64> {
    let n = z.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = kernel.eval(&z[i], &z[j]);
        }
        g[i * n + i] = kernel.eval(&z[i], &z[i]) + diag;
    }
    g
}

fn factorize(
    kernel: &Kernel,
    z: &[[f64; STATE_DIM]],
    noise_variance: f64,
) -> Result<(LowerFactor, f64)> {
    factorize_with_retry(gram_lower(kernel, z, noise_variance), z.len())
}

/// Factorizes, retrying once with [`JITTER`] on the diagonal.
fn factorize_with_retry(gram: Vec<f64>, n: usize) -> Result<(LowerFactor, f64)> {
    match LowerFactor::new(gram.clone(), n) {
        Ok(f) => Ok((f, 0.0)),
        Err(_) => {
            let mut g = gram;
            for i in 0..n {
                g[i * n + i] += JITTER;
            }
            LowerFactor::new(g, n)
                .map(|f| (f, JITTER))
                .map_err(|e| Error::NotPositiveDefinite {
                    index: e.index,
                    pivot: e.pivot,
                    jitter: JITTER,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aero::MorelliCoefficients;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rows(n: usize, seed: u64) -> Vec<[f64; STATE_DIM]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                [
                    rng.random_range(0.5..0.9),
                    rng.random_range(5e-4..1.5e-3),
                    rng.random_range(150.0..600.0),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.2..0.2),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(0.0..0.2),
                    rng.random_range(-0.1..0.05),
                ]
            })
            .collect()
    }

    fn arcsine() -> Kernel {
        Kernel::ArcSine {
            bias_variance: 0.5,
            weight_variance: 0.5,
            signal_variance: 1.0,
        }
    }

    fn se() -> Kernel {
        Kernel::SquaredExponential {
            length_scales: vec![1.5; STATE_DIM],
            signal_variance: 1.0,
        }
    }

    #[test]
    fn single_point_weight() {
        let x = rows(1, 1);
        let m = GpModel::fit(&x, &[0.5], MeanFunction::Zero, se(), 0.0).unwrap();
        let k = se().eval(&m.standardized_inputs()[0], &m.standardized_inputs()[0]);
        assert!((m.weights()[0] - 0.5 / k).abs() < 1e-15);
    }

    #[test]
    fn observations_on_mean_give_zero_weights() {
        let x = rows(20, 2);
        let c = MorelliCoefficients::from_array([0.01, -0.5, -0.07, -1.2, 0.1, 0.2, -0.3, 0.1, 0.2, 0.3]);
        let mean = MeanFunction::MorelliCm { coefficients: c };
        let y: Vec<f64> = x.iter().map(|r| mean.eval(r)).collect();
        let m = GpModel::fit(&x, &y, mean, arcsine(), 0.0).unwrap();
        assert!(m.weights().iter().all(|a| *a == 0.0));
    }

    #[test]
    fn linear_function_interpolated() {
        let x = rows(50, 3);
        let f = |r: &[f64; STATE_DIM]| 0.02 - 0.5 * r[6] - 1.2 * r[7] + 1e-4 * r[2];
        let y: Vec<f64> = x.iter().map(f).collect();
        let m = GpModel::fit(&x, &y, MeanFunction::Zero, arcsine(), 1e-6).unwrap();
        let (mu, _) = m.predict(&x).unwrap();
        let worst = mu.iter().zip(&y).fold(0.0f64, |w, (a, b)| w.max((a - b).abs()));
        assert!(worst < 1e-3, "{worst}");

        // Same weights by a direct dense solve.
        let k = m.gram_matrix();
        let a = k.lu().solve(&DVector::from_vec(y.clone())).unwrap();
        for (i, w) in m.weights().iter().enumerate() {
            assert!((w - a[i]).abs() <= 1e-6 * (1.0 + a[i].abs()));
        }
    }

    #[test]
    fn prior_recovery() {
        let x = rows(5, 4);
        let c = MorelliCoefficients::from_array([0.0, -0.4, -0.1, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let mean = MeanFunction::MorelliCm { coefficients: c };
        let m = GpModel::prior(mean.clone(), se()).unwrap();
        let (mu, cov) = m.predict(&x).unwrap();
        for i in 0..x.len() {
            assert_eq!(mu[i], mean.eval(&x[i]));
            for j in 0..x.len() {
                assert_eq!(cov[(i, j)], se().eval(&x[i], &x[j]));
            }
        }
        assert_eq!(m.log_marginal_likelihood(), 0.0);
    }

    #[test]
    fn noiseless_interpolation_and_variance() {
        let x = rows(15, 5);
        let y: Vec<f64> = x.iter().map(|r| (3.0 * r[6]).sin() + r[7]).collect();
        let m = GpModel::fit(&x, &y, MeanFunction::Zero, se(), 0.0).unwrap();
        let (mu, cov) = m.predict(&x).unwrap();
        for i in 0..x.len() {
            assert!((mu[i] - y[i]).abs() < 1e-8);
            assert!(cov[(i, i)] < 1e-8);
        }
    }

    #[test]
    fn data_improves_on_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = |r: &[f64; STATE_DIM]| 0.3 * r[6] * r[6] - 0.5 * r[6] + 0.2 * r[7] * r[7];
        let x = rows(20, 6);
        let y: Vec<f64> = x
            .iter()
            .map(|r| truth(r) + 0.01 * (rng.random::<f64>() - 0.5))
            .collect();
        let m = GpModel::fit(&x, &y, MeanFunction::Zero, se(), 1e-4).unwrap();
        let xt = rows(100, 7);
        let (mu, _) = m.predict(&xt).unwrap();
        let rmse = |p: &dyn Fn(usize) -> f64| {
            (xt.iter()
                .enumerate()
                .map(|(i, r)| (p(i) - truth(r)).powi(2))
                .sum::<f64>()
                / xt.len() as f64)
                .sqrt()
        };
        assert!(rmse(&|i| mu[i]) < rmse(&|_| 0.0));
    }

    #[test]
    fn lml_closed_form_single_point() {
        // k(x, x) = 0 at the origin of the standardized space.
        let x = rows(1, 8);
        let m = GpModel::fit(&x, &[0.0], MeanFunction::Zero, Kernel::NeuralNetwork, 1.0).unwrap();
        let want = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * 1.0f64.ln();
        assert!((m.log_marginal_likelihood() - want).abs() < 1e-15);
        assert!((m.log_marginal_likelihood() + 0.918_938_533).abs() < 1e-9);
    }

    #[test]
    fn lml_prefers_reasonable_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = rows(60, 11);
        let y: Vec<f64> = x
            .iter()
            .map(|r| -0.5 * r[6] + 0.001 * (rng.random::<f64>() - 0.5))
            .collect();
        let fit = |nu| {
            GpModel::fit(&x, &y, MeanFunction::Zero, arcsine(), nu)
                .unwrap()
                .log_marginal_likelihood()
        };
        assert!(fit(1e-7) > fit(1e-1));
        assert_eq!(fit(1e-4).to_bits(), fit(1e-4).to_bits());
    }

    #[test]
    fn factor_reconstructs_gram() {
        let x = rows(40, 12);
        let y: Vec<f64> = x.iter().map(|r| r[6]).collect();
        let m = GpModel::fit(&x, &y, MeanFunction::Zero, arcsine(), 1e-4).unwrap();
        let l = m.factor_matrix();
        let k = m.gram_matrix();
        assert!((&l * l.transpose() - &k).norm() / k.norm() < 1e-8);
    }

    #[test]
    fn rejects_non_finite_rows() {
        let mut x = rows(4, 13);
        x[2][5] = f64::NAN;
        match GpModel::fit(&x, &[0.0; 4], MeanFunction::Zero, se(), 1e-4) {
            Err(Error::NonFinite { row: 2, col: 5 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indefinite_gram_names_pivot() {
        // The printed kernel is indefinite on spread-out standardized data.
        let x = rows(200, 14);
        let y = vec![0.0; 200];
        match GpModel::fit(&x, &y, MeanFunction::Zero, Kernel::NeuralNetwork, 0.0) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert!(pivot <= 0.0),
            other => panic!("expected factorization failure, got {:?}", other.map(|m| m.n())),
        }
    }

    #[test]
    fn jitter_retry() {
        let (_, jitter) = factorize_with_retry(vec![1.0, 0.0, 1.0, 1.0 - 1e-9], 2).unwrap();
        assert_eq!(jitter, JITTER);
        let (_, jitter) = factorize_with_retry(vec![1.0, 0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(jitter, 0.0);
        match factorize_with_retry(vec![1.0, 0.0, 1.0, 0.5], 2) {
            Err(Error::NotPositiveDefinite { index: 1, pivot, .. }) => {
                assert!((pivot + 0.5).abs() < 1e-7)
            }
            other => panic!("{:?}", other.map(|f| f.1)),
        }
    }

    #[test]
    fn save_load_roundtrip() {
        let x = rows(30, 16);
        let y: Vec<f64> = x.iter().map(|r| -0.5 * r[6] + r[4]).collect();
        let c = MorelliCoefficients::from_array([0.01, -0.3, -0.05, -0.9, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0]);
        let m = GpModel::fit_with(
            &x,
            &y,
            MeanFunction::MorelliCm { coefficients: c },
            arcsine(),
            1e-5,
            FitOptions {
                center_residual: true,
            },
        )
        .unwrap();
        let s = m.to_json().unwrap();
        let back = GpModel::from_json(&s).unwrap();
        assert_eq!(back.to_json().unwrap(), s);
        let probe = rows(5, 17);
        for p in &probe {
            assert_eq!(m.predict_mean(p).to_bits(), back.predict_mean(p).to_bits());
        }
    }

    #[test]
    fn load_detects_tampered_weights() {
        let x = rows(10, 18);
        let y: Vec<f64> = x.iter().map(|r| r[6]).collect();
        let m = GpModel::fit(&x, &y, MeanFunction::Zero, se(), 1e-4).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["a"][0] = serde_json::json!(123.0);
        assert!(matches!(
            GpModel::from_json(&v.to_string()),
            Err(Error::Corrupt(_))
        ));
    }
}
