//! Run configuration. One TOML file drives every command; unknown keys are
//! rejected so typos fail loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aerogp::dynamics::SweepAtmosphere;
use aerogp::eval::{DEFAULT_MACH_TOL, DEFAULT_QBAR_TOL};
use aerogp::ingest::{Channel, LoadOptions, SmoothingConfig};
use aerogp::pipeline::GpSettings;
use aerogp::synth::{LinearCoefficients, REFERENCE_ALTITUDE_FT, REFERENCE_MACH};
use aerogp::trim::{validate_bins, DEFAULT_MACH_BINS};
use aerogp::{AircraftGeometry, MeanFunction, MorelliCoefficients, TrueLinearModel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Relative paths are taken relative to the config file.
    pub output_dir: PathBuf,
    pub geometry: AircraftGeometry,
    /// `θ29..θ38` of the `C_m` prior.
    pub morelli: MorelliCoefficients,
    #[serde(default)]
    pub cm_mean: CmMean,
    #[serde(default)]
    pub cm: GpSettings,
    #[serde(default)]
    pub cz: GpSettings,
    #[serde(default)]
    pub trim: TrimConfig,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
    #[serde(default)]
    pub sweep: SweepAtmosphere,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

/// Prior mean of the `C_m` GP. `C_Z` always uses a zero mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CmMean {
    #[default]
    Morelli,
    Zero,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrimConfig {
    /// Mach bins `[lo, hi)`.
    pub bins: Vec<(f64, f64)>,
}

impl Default for TrimConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_MACH_BINS.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestConfig {
    /// Logical channel → CSV header.
    pub columns: BTreeMap<String, String>,
    /// Logical channel → unit of the file's column (`deg`, `deg/s`, `kt`, ...).
    pub units: BTreeMap<String, String>,
    pub min_rows: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            columns: Channel::REQUIRED
                .into_iter()
                .map(|c| (c.name().to_string(), c.name().to_string()))
                .collect(),
            units: BTreeMap::new(),
            min_rows: 10,
        }
    }
}

/// Truth model of `synth`. Missing coefficients mean the built-in reference
/// aircraft; geometry comes from the top-level block.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub mach: f64,
    pub pressure_altitude_ft: f64,
    /// Standard day when absent.
    pub oat_c: Option<f64>,
    pub coefficients: Option<LinearCoefficients>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            mach: REFERENCE_MACH,
            pressure_altitude_ft: REFERENCE_ALTITUDE_FT,
            oat_c: None,
            coefficients: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub qbar_tol: f64,
    pub mach_tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            qbar_tol: DEFAULT_QBAR_TOL,
            mach_tol: DEFAULT_MACH_TOL,
        }
    }
}

/// A parsed and validated config plus what outputs need to cite it.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
    pub output_dir: PathBuf,
    pub load_options: LoadOptions,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let load_options = config.validate()?;
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        let output_dir = match path.parent() {
            Some(dir) if config.output_dir.is_relative() => dir.join(&config.output_dir),
            _ => config.output_dir.clone(),
        };
        Ok(Self {
            config,
            sha256,
            output_dir,
            load_options,
        })
    }

    /// First line of every CSV output.
    pub fn stamp(&self) -> String {
        format!("aerogp {} config-sha256={}", env!("CARGO_PKG_VERSION"), self.sha256)
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<LoadOptions, CliError> {
        let cfg = |e: aerogp::Error| CliError::Config(e.to_string());
        self.geometry.validate().map_err(cfg)?;
        self.morelli.validate().map_err(cfg)?;
        self.cm.validate().map_err(|e| CliError::Config(format!("[cm] {e}")))?;
        self.cz.validate().map_err(|e| CliError::Config(format!("[cz] {e}")))?;
        validate_bins(&self.trim.bins).map_err(cfg)?;
        self.smoothing.validate().map_err(cfg)?;
        if !(self.eval.qbar_tol >= 0.0 && self.eval.mach_tol >= 0.0) {
            return Err(CliError::Config("eval tolerances must be non-negative".into()));
        }
        if let SweepAtmosphere::FixedOat { oat_c } = self.sweep {
            if !oat_c.is_finite() {
                return Err(CliError::Config("sweep oat_c must be finite".into()));
            }
        }
        LoadOptions::from_maps(&self.ingest.columns, &self.ingest.units, self.ingest.min_rows).map_err(cfg)
    }

    pub fn cm_mean_function(&self) -> MeanFunction {
        match self.cm_mean {
            CmMean::Morelli => MeanFunction::MorelliCm {
                coefficients: self.morelli,
            },
            CmMean::Zero => MeanFunction::Zero,
        }
    }

    pub fn truth_model(&self) -> aerogp::Result<TrueLinearModel> {
        let s = &self.synth;
        let coefficients = match s.coefficients {
            Some(c) => c,
            None => TrueLinearModel::reference()?.coefficients,
        };
        let oat = s
            .oat_c
            .unwrap_or_else(|| aerogp::aero::standard_temperature_c(s.pressure_altitude_ft));
        TrueLinearModel::new(coefficients, self.geometry, s.mach, s.pressure_altitude_ft, oat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
output_dir = "out"

[geometry]
s = 170.0
cbar = 7.73
mass = 373.0
ix = 1600.0
iy = 28166.0
iz = 29500.0
ixz = 0.0

[morelli]
theta29 = 0.0
theta30 = -0.5
theta31 = -0.07
theta32 = -1.2
theta33 = 0.0
theta34 = 0.0
theta35 = 0.0
theta36 = 0.0
theta37 = 0.0
theta38 = 0.0
"#;

    fn write(text: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, text).unwrap();
        (dir, p)
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let (dir, p) = write(MINIMAL);
        let c = LoadedConfig::load(&p).unwrap();
        assert_eq!(c.output_dir, dir.path().join("out"));
        assert_eq!(c.config.trim.bins, DEFAULT_MACH_BINS.to_vec());
        assert_eq!(c.config.cm_mean, CmMean::Morelli);
        assert_eq!(c.sha256.len(), 64);
        assert!(c.stamp().starts_with("aerogp "));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let (_d, p) = write(&format!("{MINIMAL}\n[cm]\nnoise_varaince = 1e-4\n"));
        let e = LoadedConfig::load(&p).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        assert!(e.to_string().contains("noise_varaince"), "{e}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad_geom = MINIMAL.replace("mass = 373.0", "mass = -1.0");
        let (_d, p) = write(&bad_geom);
        assert!(LoadedConfig::load(&p).unwrap_err().to_string().contains("mass"));
        let (_d, p) = write(&format!("{MINIMAL}\n[trim]\nbins = [[0.6, 0.8], [0.7, 0.9]]\n"));
        assert!(LoadedConfig::load(&p).is_err());
        let (_d, p) = write(&format!("{MINIMAL}\n[ingest.columns]\nalpha = \"AOA\"\n"));
        assert!(LoadedConfig::load(&p).is_err(), "partial column map lacks required channels");
    }

    #[test]
    fn hash_tracks_bytes() {
        let (_d, p) = write(MINIMAL);
        let (_e, q) = write(&format!("{MINIMAL}\n"));
        let a = LoadedConfig::load(&p).unwrap().sha256;
        let b = LoadedConfig::load(&q).unwrap().sha256;
        assert_ne!(a, b);
        assert_eq!(a, LoadedConfig::load(&p).unwrap().sha256);
    }

    #[test]
    fn default_truth_model_is_reference() {
        let (_d, p) = write(MINIMAL);
        let c = LoadedConfig::load(&p).unwrap();
        let t = c.config.truth_model().unwrap();
        let r = TrueLinearModel::reference().unwrap();
        assert_eq!(t.coefficients, r.coefficients);
        assert!((t.condition.qbar - r.condition.qbar).abs() < 1e-9);
    }
}
