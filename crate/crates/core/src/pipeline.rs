//! The identification chain: derived series → coefficient observations →
//! GP fits → trim model → derivatives and short period.

use serde::{Deserialize, Serialize};

use crate::aero::{compute_cm_observations, compute_cz_observations, AircraftGeometry, STATE_DIM};
use crate::dynamics::{evaluate_point, SweepAtmosphere, SweepRow};
use crate::error::{invalid, Result};
use crate::gp::{select, FitOptions, GpModel, GridPoint, GridSpec, Kernel, MeanFunction};
use crate::ingest::{decimation_stride, derive_channels, DerivedFlightSeries, RawFlightSeries, SmoothingConfig};
use crate::synth::{simulate, ChannelNoise, ManeuverProfile, TrueLinearModel};
use crate::trim::{TrimModel, TrimShot, DEFAULT_MACH_BINS};

/// Largest training set the dense GP accepts.
pub const MAX_ROWS_LIMIT: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Cm,
    Cz,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Cm => "cm",
            Target::Cz => "cz",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cm" => Ok(Target::Cm),
            "cz" => Ok(Target::Cz),
            _ => invalid(format!("unknown target `{s}` (expected cm or cz)")),
        }
    }
}

/// Kernel, noise and training-set settings for one GP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSettings {
    #[serde(default)]
    pub kernel: Kernel,
    #[serde(default = "default_noise")]
    pub noise_variance: f64,
    #[serde(default)]
    pub center_residual: bool,
    #[serde(default = "default_max_rows")]
    pub max_rows: usize,
    /// When present, `(ν, kernel scales)` are chosen by log marginal
    /// likelihood and `noise_variance` is ignored.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn default_noise() -> f64 {
    1e-4
}

fn default_max_rows() -> usize {
    2000
}

impl Default for GpSettings {
    fn default() -> Self {
        Self {
            kernel: Kernel::default(),
            noise_variance: default_noise(),
            center_residual: false,
            max_rows: default_max_rows(),
            grid: None,
        }
    }
}

fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 10f64.powi(e)).collect()
}

impl GpSettings {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return invalid("noise_variance must be finite and >= 0");
        }
        if self.max_rows == 0 || self.max_rows > MAX_ROWS_LIMIT {
            return invalid(format!("max_rows must be in 1..={MAX_ROWS_LIMIT}, got {}", self.max_rows));
        }
        if let Some(g) = &self.grid {
            if g.noise_variances.is_empty() {
                return invalid("grid.noise_variances must not be empty");
            }
            let all = g.noise_variances.iter().chain(&g.signal_variances).chain(&g.scales);
            if all.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return invalid("grid values must be finite and >= 0");
            }
        }
        Ok(())
    }

    /// Settings for `C_m` used by the synthetic identification runs.
    pub fn synthetic_cm() -> Self {
        Self {
            kernel: Kernel::default(),
            noise_variance: 1e-6,
            center_residual: true,
            max_rows: 1000,
            grid: Some(GridSpec {
                noise_variances: decades(-9, -5),
                signal_variances: decades(-6, -2),
                scales: vec![0.003, 0.01, 0.05, 0.2],
            }),
        }
    }

    /// Settings for `C_Z`; coefficient magnitudes are larger, so the signal
    /// range extends one decade further.
    pub fn synthetic_cz() -> Self {
        Self {
            grid: Some(GridSpec {
                noise_variances: decades(-9, -5),
                signal_variances: decades(-6, -1),
                scales: vec![0.003, 0.01, 0.05, 0.2],
            }),
            ..Self::synthetic_cm()
        }
    }
}

/// What a fit did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target: Target,
    pub rows_in: usize,
    pub rows_used: usize,
    pub stride: usize,
    pub noise_variance: f64,
    pub kernel: Kernel,
    pub offset: f64,
    pub log_marginal_likelihood: f64,
    pub training_rmse: f64,
    pub grid: Vec<GridPoint>,
}

/// Coefficient observations from each series, concatenated in order.
pub fn observations(
    series: &[DerivedFlightSeries],
    geom: &AircraftGeometry,
    target: Target,
) -> Result<(Vec<[f64; STATE_DIM]>, Vec<f64>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for s in series {
        let obs = match target {
            Target::Cm => compute_cm_observations(s, geom)?,
            Target::Cz => compute_cz_observations(s, geom)?,
        };
        for (state, v) in obs {
            x.push(state.to_array());
            y.push(v);
        }
    }
    Ok((x, y))
}

/// Uniform stride decimation to at most `cap` rows.
pub fn decimate<T: Clone>(rows: &[T], cap: usize) -> (Vec<T>, usize) {
    let stride = decimation_stride(rows.len(), cap);
    (rows.iter().step_by(stride).cloned().collect(), stride)
}

/// Fits one target on observations already extracted.
pub fn fit_observations(
    x: &[[f64; STATE_DIM]],
    y: &[f64],
    target: Target,
    mean: &MeanFunction,
    settings: &GpSettings,
) -> Result<(GpModel, FitReport)> {
    settings.validate()?;
    if x.is_empty() {
        return invalid("no training rows");
    }
    let (xd, stride) = decimate(x, settings.max_rows);
    let (yd, _) = decimate(y, settings.max_rows);
    let options = FitOptions {
        center_residual: settings.center_residual,
    };
    let (model, grid) = match &settings.grid {
        Some(g) => {
            let sel = select(&xd, &yd, mean, &settings.kernel, g, options)?;
            (sel.model, sel.table)
        }
        None => (
            GpModel::fit_with(
                &xd,
                &yd,
                mean.clone(),
                settings.kernel.clone(),
                settings.noise_variance,
                options,
            )?,
            Vec::new(),
        ),
    };
    let report = FitReport {
        target,
        rows_in: x.len(),
        rows_used: xd.len(),
        stride,
        noise_variance: model.noise_variance(),
        kernel: model.kernel().clone(),
        offset: model.offset(),
        log_marginal_likelihood: model.log_marginal_likelihood(),
        training_rmse: model.training_rmse(),
        grid,
    };
    Ok((model, report))
}

pub fn fit_target(
    series: &[DerivedFlightSeries],
    geom: &AircraftGeometry,
    target: Target,
    mean: &MeanFunction,
    settings: &GpSettings,
) -> Result<(GpModel, FitReport)> {
    let (x, y) = observations(series, geom, target)?;
    fit_observations(&x, &y, target, mean, settings)
}

/// Everything the identification chain needs besides data.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationSettings {
    pub smoothing: SmoothingConfig,
    pub cm: GpSettings,
    pub cz: GpSettings,
    pub trim_bins: Vec<(f64, f64)>,
}

impl IdentificationSettings {
    /// Settings used for synthetic identification: a 0.5 s channel smoother
    /// and likelihood-selected hyperparameters.
    pub fn synthetic() -> Self {
        Self {
            smoothing: SmoothingConfig {
                dt: 0.02,
                qdot_window: 5,
                channel_window: 25,
            },
            cm: GpSettings::synthetic_cm(),
            cz: GpSettings::synthetic_cz(),
            trim_bins: DEFAULT_MACH_BINS.to_vec(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Identification {
    pub cm: GpModel,
    pub cz: GpModel,
    pub trim: TrimModel,
    pub cm_report: FitReport,
    pub cz_report: FitReport,
}

impl Identification {
    pub fn evaluate(
        &self,
        geom: &AircraftGeometry,
        mach: f64,
        qbar: f64,
        atmosphere: SweepAtmosphere,
    ) -> Result<SweepRow> {
        evaluate_point(&self.cm, &self.cz, &self.trim, geom, mach, qbar, atmosphere)
    }
}

/// Runs ingest derivation, both GP fits and the trim fit. The `C_Z` GP uses
/// a zero mean (with residual centering if configured).
pub fn identify(
    flights: &[RawFlightSeries],
    trim_shots: &[TrimShot],
    geom: &AircraftGeometry,
    cm_mean: &MeanFunction,
    settings: &IdentificationSettings,
) -> Result<Identification> {
    let derived: Vec<DerivedFlightSeries> = flights
        .iter()
        .map(|f| derive_channels(f, &settings.smoothing))
        .collect::<Result<_>>()?;
    let (cm, cm_report) = fit_target(&derived, geom, Target::Cm, cm_mean, &settings.cm)?;
    let (cz, cz_report) = fit_target(&derived, geom, Target::Cz, &MeanFunction::Zero, &settings.cz)?;
    let trim = TrimModel::fit(trim_shots, &settings.trim_bins)?;
    Ok(Identification {
        cm,
        cz,
        trim,
        cm_report,
        cz_report,
    })
}

/// Built-in synthetic maneuver sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// 0.05 Hz rollercoaster with a 1 s, 0.02 rad doublet at 30 s; 90 s.
    RollercoasterDoublet,
    /// The rollercoaster alone; 90 s.
    Rollercoaster,
    /// A single doublet at 2 s; 20 s.
    Doublet,
    /// 0.1 to 1.5 Hz sweep, 0.01 rad; 40 s.
    FrequencySweep,
}

impl Scenario {
    pub fn profile(self, noise: ChannelNoise) -> ManeuverProfile {
        use crate::synth::ManeuverInput;
        match self {
            Scenario::RollercoasterDoublet => ManeuverProfile::rollercoaster(90.0, noise).with_doublet(30.0, 1.0, 0.02),
            Scenario::Rollercoaster => ManeuverProfile::rollercoaster(90.0, noise),
            Scenario::Doublet => ManeuverProfile {
                inputs: vec![],
                duration: 20.0,
                dt: 0.02,
                noise,
                initial_alpha: 0.0,
                initial_q: 0.0,
            }
            .with_doublet(2.0, 1.0, 0.02),
            Scenario::FrequencySweep => ManeuverProfile {
                inputs: vec![ManeuverInput::FrequencySweep {
                    start: 2.0,
                    length: 36.0,
                    f0_hz: 0.1,
                    f1_hz: 1.5,
                    amplitude: 0.01,
                }],
                duration: 40.0,
                dt: 0.02,
                noise,
                initial_alpha: 0.0,
                initial_q: 0.0,
            },
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rollercoaster-doublet" => Ok(Scenario::RollercoasterDoublet),
            "rollercoaster" => Ok(Scenario::Rollercoaster),
            "doublet" => Ok(Scenario::Doublet),
            "frequency-sweep" => Ok(Scenario::FrequencySweep),
            _ => invalid(format!(
                "unknown scenario `{s}` (expected rollercoaster-doublet, rollercoaster, doublet, frequency-sweep)"
            )),
        }
    }
}

/// Dynamic pressures of the synthetic trim shots.
pub fn trim_shot_qbars() -> Vec<f64> {
    (0..15).map(|i| 120.0 + 50.0 * i as f64).collect()
}

/// One flight of `scenario` at the model's condition plus trim shots from
/// the true equilibrium, all with instrumentation noise.
pub fn synthetic_data(
    truth: &TrueLinearModel,
    scenario: Scenario,
    seed: u64,
) -> Result<(RawFlightSeries, Vec<TrimShot>)> {
    let noise = ChannelNoise::instrumentation();
    let flight = simulate(truth, &scenario.profile(noise), seed)?;
    let shots = truth.trim_shots(&trim_shot_qbars(), &noise, seed.wrapping_add(1))?;
    Ok((flight, shots))
}
