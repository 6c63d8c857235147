//! Linear two-degree-of-freedom short-period simulator and its closed-form
//! oracle.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::aero::{
    standard_day_from_qbar, standard_temperature_c, AircraftGeometry, FlightCondition,
    MorelliCoefficients, G0,
};
use crate::dynamics::ShortPeriodResult;
use crate::error::{invalid, Error, Result};
use crate::ingest::RawFlightSeries;
use crate::linalg::least_squares;
use crate::trim::TrimShot;

/// Total-coefficient linear aerodynamics:
/// `C_m = C_m0 + C_mα α + C_mQ Q + C_mδe δe`, `C_Z = C_Z0 + C_Zα α + C_Zδe δe`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearCoefficients {
    pub cm0: f64,
    pub cm_alpha: f64,
    /// Per rad/s.
    pub cm_q_raw: f64,
    pub cm_de: f64,
    pub cz0: f64,
    pub cz_alpha: f64,
    pub cz_de: f64,
}

impl LinearCoefficients {
    pub fn cm(&self, alpha: f64, q: f64, de: f64) -> f64 {
        self.cm0 + self.cm_alpha * alpha + self.cm_q_raw * q + self.cm_de * de
    }

    pub fn cz(&self, alpha: f64, de: f64) -> f64 {
        self.cz0 + self.cz_alpha * alpha + self.cz_de * de
    }

    /// The same model as Morelli coefficients (higher-order terms zero).
    pub fn morelli(&self) -> MorelliCoefficients {
        MorelliCoefficients::from_array([
            self.cm0,
            self.cm_alpha,
            self.cm_q_raw,
            self.cm_de,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ])
    }
}

/// Dimensional derivatives of the linear model at its flight condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearDimensional {
    pub m_alpha: f64,
    pub m_q: f64,
    pub m_de: f64,
    pub z_alpha: f64,
    pub z_de: f64,
    pub u1: f64,
}

impl LinearDimensional {
    fn derivative(&self, alpha: f64, q: f64, de: f64) -> (f64, f64) {
        (
            self.z_alpha / self.u1 * alpha + q + self.z_de / self.u1 * de,
            self.m_alpha * alpha + self.m_q * q + self.m_de * de,
        )
    }
}

/// Ground-truth aircraft flown at one constant-speed flight condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrueLinearModel {
    pub coefficients: LinearCoefficients,
    pub geometry: AircraftGeometry,
    pub condition: FlightCondition,
    pub pressure_altitude_ft: f64,
    pub oat_c: f64,
}

/// T-38-like reference quantities.
pub const REFERENCE_GEOMETRY: AircraftGeometry = AircraftGeometry {
    s: 170.0,
    cbar: 7.73,
    mass: 373.0,
    ix: 1600.0,
    iy: 28166.0,
    iz: 29500.0,
    ixz: 0.0,
};

pub const REFERENCE_MACH: f64 = 0.7;
pub const REFERENCE_ALTITUDE_FT: f64 = 32_000.0;
pub const REFERENCE_CM_ALPHA: f64 = -0.562;
pub const REFERENCE_CM_DE: f64 = -1.285;
/// Classical `(2U1/c̄)·∂C_m/∂Q`, per rad.
pub const REFERENCE_CMQ_CLASSICAL: f64 = -12.72;
pub const REFERENCE_CZ_ALPHA: f64 = -3.8;
pub const REFERENCE_CZ_DE: f64 = -0.4;
pub const REFERENCE_CM0: f64 = -0.01;
/// Trim angle of attack approached as q̄ grows without bound.
pub const REFERENCE_ALPHA_INF: f64 = 0.005;

impl TrueLinearModel {
    pub fn new(
        coefficients: LinearCoefficients,
        geometry: AircraftGeometry,
        mach: f64,
        pressure_altitude_ft: f64,
        oat_c: f64,
    ) -> Result<Self> {
        geometry.validate()?;
        let condition = FlightCondition::at_altitude(mach, pressure_altitude_ft, oat_c)?;
        let m = Self {
            coefficients,
            geometry,
            condition,
            pressure_altitude_ft,
            oat_c,
        };
        m.validate()?;
        Ok(m)
    }

    /// Same aircraft on a standard day at another pressure altitude.
    pub fn at_altitude(&self, mach: f64, pressure_altitude_ft: f64) -> Result<Self> {
        Self::new(
            self.coefficients,
            self.geometry,
            mach,
            pressure_altitude_ft,
            standard_temperature_c(pressure_altitude_ft),
        )
    }

    /// The acceptance aircraft: M 0.7 at 32,000 ft on a standard day.
    pub fn reference() -> Result<Self> {
        let geometry = REFERENCE_GEOMETRY;
        let oat = standard_temperature_c(REFERENCE_ALTITUDE_FT);
        let cond = FlightCondition::at_altitude(REFERENCE_MACH, REFERENCE_ALTITUDE_FT, oat)?;
        let cm_q_raw = REFERENCE_CMQ_CLASSICAL * geometry.cbar / (2.0 * cond.u1);
        // C_Z0 placing the trim angle of attack at REFERENCE_ALPHA_INF for
        // vanishing weight coefficient.
        let d = REFERENCE_CZ_ALPHA * REFERENCE_CM_DE - REFERENCE_CZ_DE * REFERENCE_CM_ALPHA;
        let cz0 = (REFERENCE_CZ_DE * REFERENCE_CM0 - REFERENCE_ALPHA_INF * d) / REFERENCE_CM_DE;
        let coefficients = LinearCoefficients {
            cm0: REFERENCE_CM0,
            cm_alpha: REFERENCE_CM_ALPHA,
            cm_q_raw,
            cm_de: REFERENCE_CM_DE,
            cz0,
            cz_alpha: REFERENCE_CZ_ALPHA,
            cz_de: REFERENCE_CZ_DE,
        };
        Self::new(coefficients, geometry, REFERENCE_MACH, REFERENCE_ALTITUDE_FT, oat)
    }

    /// Stable-short-period requirement of the oracle scenarios.
    pub fn validate(&self) -> Result<()> {
        let c = &self.coefficients;
        let all = [c.cm0, c.cm_alpha, c.cm_q_raw, c.cm_de, c.cz0, c.cz_alpha, c.cz_de];
        if all.iter().any(|v| !v.is_finite()) {
            return invalid("linear model coefficients must be finite");
        }
        self.condition.validate()
    }

    /// Requires `C_mα < 0` and `C_mQ < 0`.
    pub fn require_stable(&self) -> Result<()> {
        let c = &self.coefficients;
        if !(c.cm_alpha < 0.0 && c.cm_q_raw < 0.0) {
            return invalid(format!(
                "oracle scenario needs cm_alpha < 0 and cm_q_raw < 0 (got {}, {})",
                c.cm_alpha, c.cm_q_raw
            ));
        }
        Ok(())
    }

    pub fn dimensional(&self) -> LinearDimensional {
        let (g, cond, c) = (&self.geometry, &self.condition, &self.coefficients);
        let moment = cond.qbar * g.s * g.cbar / g.iy;
        let force = cond.qbar * g.s / g.mass;
        LinearDimensional {
            m_alpha: c.cm_alpha * moment,
            m_q: c.cm_q_raw * moment,
            m_de: c.cm_de * moment,
            z_alpha: c.cz_alpha * force,
            z_de: c.cz_de * force,
            u1: cond.u1,
        }
    }

    /// Equilibrium `(α, δe)` for 1-g level flight at `qbar`: `C_m = 0`,
    /// `C_Z = −m g0 / (q̄ S)`.
    pub fn equilibrium(&self, qbar: f64) -> Result<(f64, f64)> {
        let c = &self.coefficients;
        let det = c.cm_alpha * c.cz_de - c.cm_de * c.cz_alpha;
        if !(det.abs() > 1e-12) {
            return Err(Error::RankDeficient("trim equations are singular".into()));
        }
        let rhs_m = -c.cm0;
        let rhs_z = -self.geometry.mass * G0 / (qbar * self.geometry.s) - c.cz0;
        let alpha = (rhs_m * c.cz_de - c.cm_de * rhs_z) / det;
        let de = (c.cm_alpha * rhs_z - c.cz_alpha * rhs_m) / det;
        Ok((alpha, de))
    }

    /// Trim shots from the true equilibrium at standard-day conditions.
    pub fn trim_shots(&self, qbar_list: &[f64], noise: &ChannelNoise, seed: u64) -> Result<Vec<TrimShot>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mach = self.condition.mach;
        let mut out = Vec::with_capacity(qbar_list.len());
        for &q in qbar_list {
            let (alpha, de) = self.equilibrium(q)?;
            let cond = FlightCondition::standard_day(q, mach)?;
            let (_, oat) = standard_day_from_qbar(q, mach)?;
            let e1: f64 = StandardNormal.sample(&mut rng);
            let e2: f64 = StandardNormal.sample(&mut rng);
            out.push(TrimShot {
                qbar: q,
                mach,
                alpha: alpha + noise.alpha * e1,
                de: de + noise.de * e2,
                rho: cond.rho,
                oat,
            });
        }
        Ok(out)
    }

    /// `θ` of the correct model in Morelli form.
    pub fn true_theta(&self) -> MorelliCoefficients {
        self.coefficients.morelli()
    }

    /// A deliberately wrong prior: wrong magnitudes and spurious
    /// higher-order terms.
    pub fn perturbed_theta(&self) -> MorelliCoefficients {
        let c = &self.coefficients;
        MorelliCoefficients::from_array([
            1.5 * c.cm0 + 0.01,
            0.6 * c.cm_alpha,
            0.5 * c.cm_q_raw,
            0.7 * c.cm_de,
            0.1,
            0.2,
            -0.3,
            0.5,
            0.4,
            0.3,
        ])
    }
}

/// One component of the stabilator input, added to trim.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManeuverInput {
    /// `+amplitude` for `width` s from `start`, then `−amplitude` for `width` s.
    Doublet { start: f64, width: f64, amplitude: f64 },
    /// Linear chirp from `f0_hz` to `f1_hz` over `length` s.
    FrequencySweep {
        start: f64,
        length: f64,
        f0_hz: f64,
        f1_hz: f64,
        amplitude: f64,
    },
    /// Sinusoidal stabilator input whose amplitude is set from the model's
    /// frequency response so the steady-state peak α rate is `alpha_rate`
    /// (rad/s).
    Rollercoaster { frequency_hz: f64, alpha_rate: f64 },
}

impl ManeuverInput {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ManeuverInput::Doublet { start, width, amplitude } => {
                start.is_finite() && width > 0.0 && amplitude.is_finite()
            }
            ManeuverInput::FrequencySweep {
                start,
                length,
                f0_hz,
                f1_hz,
                amplitude,
            } => start.is_finite() && length > 0.0 && f0_hz >= 0.0 && f1_hz >= 0.0 && amplitude.is_finite(),
            ManeuverInput::Rollercoaster {
                frequency_hz,
                alpha_rate,
            } => frequency_hz > 0.0 && frequency_hz.is_finite() && alpha_rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("invalid maneuver input {self:?}"))
        }
    }
}

/// 1σ additive noise per channel, canonical units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelNoise {
    pub mach: f64,
    pub pressure_altitude: f64,
    pub oat: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub de: f64,
    pub nz: f64,
}

impl ChannelNoise {
    /// Instrumentation-grade levels used by the acceptance scenarios.
    pub fn instrumentation() -> Self {
        let deg = PI / 180.0;
        Self {
            mach: 0.001,
            pressure_altitude: 3.0,
            oat: 0.05,
            p: 0.02 * deg,
            q: 0.02 * deg,
            r: 0.02 * deg,
            alpha: 0.02 * deg,
            de: 0.01 * deg,
            nz: 0.005,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = [
            self.mach,
            self.pressure_altitude,
            self.oat,
            self.p,
            self.q,
            self.r,
            self.alpha,
            self.de,
            self.nz,
        ];
        if v.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return invalid("noise levels must be finite and >= 0");
        }
        Ok(())
    }
}

/// Stabilator inputs plus timing and noise. No inputs and zero initial
/// perturbation hold trim, which is how a trim-shot record is flown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManeuverProfile {
    #[serde(default)]
    pub inputs: Vec<ManeuverInput>,
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub noise: ChannelNoise,
    /// Initial α and Q perturbation from trim (rad, rad/s).
    #[serde(default)]
    pub initial_alpha: f64,
    #[serde(default)]
    pub initial_q: f64,
}

fn default_dt() -> f64 {
    0.02
}

impl ManeuverProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration >= 10.0 * self.dt && self.duration.is_finite()) {
            return invalid(format!(
                "duration {} must be at least 10 dt ({})",
                self.duration,
                10.0 * self.dt
            ));
        }
        if !(self.initial_alpha.is_finite() && self.initial_q.is_finite()) {
            return invalid("initial perturbation must be finite");
        }
        self.noise.validate()?;
        self.inputs.iter().try_for_each(ManeuverInput::validate)
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }

    /// 0.05 Hz rollercoaster at 1.3 deg/s peak α rate followed by nothing else.
    pub fn rollercoaster(duration: f64, noise: ChannelNoise) -> Self {
        Self {
            inputs: vec![ManeuverInput::Rollercoaster {
                frequency_hz: 0.05,
                alpha_rate: 1.3 * PI / 180.0,
            }],
            duration,
            dt: 0.02,
            noise,
            initial_alpha: 0.0,
            initial_q: 0.0,
        }
    }

    pub fn with_doublet(mut self, start: f64, width: f64, amplitude: f64) -> Self {
        self.inputs.push(ManeuverInput::Doublet {
            start,
            width,
            amplitude,
        });
        self
    }
}

/// Noise-free simulated record with the true coefficients evaluated along it.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub time: Vec<f64>,
    pub alpha: Vec<f64>,
    pub q: Vec<f64>,
    pub de: Vec<f64>,
    pub qdot: Vec<f64>,
    pub cm: Vec<f64>,
    pub cz: Vec<f64>,
    pub nz: Vec<f64>,
}

/// Steady-state `|α(jω)/δe(jω)|` of the 2-DOF model.
pub fn alpha_gain(d: &LinearDimensional, omega: f64) -> f64 {
    let zd = d.z_de / d.u1;
    let (nr, ni) = (-d.m_q * zd + d.m_de, omega * zd);
    let c1 = d.z_alpha / d.u1 + d.m_q;
    let c0 = d.z_alpha * d.m_q / d.u1 - d.m_alpha;
    let (dr, di) = (c0 - omega * omega, -c1 * omega);
    (nr.hypot(ni)) / (dr.hypot(di))
}

/// Stabilator amplitude giving a peak α rate of `alpha_rate` at `frequency_hz`.
pub fn rollercoaster_amplitude(d: &LinearDimensional, frequency_hz: f64, alpha_rate: f64) -> f64 {
    let w = 2.0 * PI * frequency_hz;
    alpha_rate / (w * alpha_gain(d, w))
}

struct InputSignal {
    parts: Vec<ManeuverInput>,
    rc_amplitudes: Vec<f64>,
}

impl InputSignal {
    fn new(profile: &ManeuverProfile, d: &LinearDimensional) -> Self {
        let rc_amplitudes = profile
            .inputs
            .iter()
            .map(|i| match *i {
                ManeuverInput::Rollercoaster {
                    frequency_hz,
                    alpha_rate,
                } => rollercoaster_amplitude(d, frequency_hz, alpha_rate),
                _ => 0.0,
            })
            .collect();
        Self {
            parts: profile.inputs.clone(),
            rc_amplitudes,
        }
    }

    fn at(&self, t: f64) -> f64 {
        let mut u = 0.0;
        for (part, rc) in self.parts.iter().zip(&self.rc_amplitudes) {
            u += match *part {
                ManeuverInput::Doublet {
                    start,
                    width,
                    amplitude,
                } => {
                    if t >= start && t < start + width {
                        amplitude
                    } else if t >= start + width && t < start + 2.0 * width {
                        -amplitude
                    } else {
                        0.0
                    }
                }
                ManeuverInput::FrequencySweep {
                    start,
                    length,
                    f0_hz,
                    f1_hz,
                    amplitude,
                } => {
                    let tau = t - start;
                    if (0.0..=length).contains(&tau) {
                        let phase = 2.0 * PI * (f0_hz * tau + 0.5 * (f1_hz - f0_hz) * tau * tau / length);
                        amplitude * phase.sin()
                    } else {
                        0.0
                    }
                }
                ManeuverInput::Rollercoaster { frequency_hz, .. } => {
                    rc * (2.0 * PI * frequency_hz * t).sin()
                }
            };
        }
        u
    }
}

/// Integrates the perturbation equations with fixed-step RK4, starting from
/// trim plus the profile's initial perturbation.
pub fn trajectory(model: &TrueLinearModel, profile: &ManeuverProfile) -> Result<Trajectory> {
    model.validate()?;
    profile.validate()?;
    let d = model.dimensional();
    let (alpha0, de0) = model.equilibrium(model.condition.qbar)?;
    let input = InputSignal::new(profile, &d);
    let n = profile.samples();
    let h = profile.dt;
    let mut out = Trajectory {
        time: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        de: Vec::with_capacity(n),
        qdot: Vec::with_capacity(n),
        cm: Vec::with_capacity(n),
        cz: Vec::with_capacity(n),
        nz: Vec::with_capacity(n),
    };
    let (mut a, mut q) = (profile.initial_alpha, profile.initial_q);
    let c = &model.coefficients;
    let weight_coef = model.condition.qbar * model.geometry.s / (model.geometry.mass * G0);
    for i in 0..n {
        let t = i as f64 * h;
        let u = input.at(t);
        let (alpha, de) = (alpha0 + a, de0 + u);
        let (_, qd) = d.derivative(a, q, u);
        let cz = c.cz(alpha, de);
        out.time.push(t);
        out.alpha.push(alpha);
        out.q.push(q);
        out.de.push(de);
        out.qdot.push(qd);
        out.cm.push(c.cm(alpha, q, de));
        out.cz.push(cz);
        out.nz.push(-cz * weight_coef);

        let um = input.at(t + 0.5 * h);
        let ue = input.at(t + h);
        let k1 = d.derivative(a, q, u);
        let k2 = d.derivative(a + 0.5 * h * k1.0, q + 0.5 * h * k1.1, um);
        let k3 = d.derivative(a + 0.5 * h * k2.0, q + 0.5 * h * k2.1, um);
        let k4 = d.derivative(a + h * k3.0, q + h * k3.1, ue);
        a += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        q += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    Ok(out)
}

/// Simulates the profile and returns telemetry with seeded additive noise.
/// Body rates P and R are zero before noise.
pub fn simulate(model: &TrueLinearModel, profile: &ManeuverProfile, seed: u64) -> Result<RawFlightSeries> {
    let tr = trajectory(model, profile)?;
    let n = tr.time.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = &profile.noise;
    let mut channel = |base: &dyn Fn(usize) -> f64, sigma: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                base(i) + sigma * e
            })
            .collect()
    };
    let mach = model.condition.mach;
    let h = model.pressure_altitude_ft;
    let oat = model.oat_c;
    let series = RawFlightSeries {
        time: tr.time.clone(),
        mach: channel(&|_| mach, noise.mach),
        pressure_altitude: channel(&|_| h, noise.pressure_altitude),
        oat: channel(&|_| oat, noise.oat),
        p: channel(&|_| 0.0, noise.p),
        q: channel(&|i| tr.q[i], noise.q),
        r: channel(&|_| 0.0, noise.r),
        alpha: channel(&|i| tr.alpha[i], noise.alpha),
        de: channel(&|i| tr.de[i], noise.de),
        nz: channel(&|i| tr.nz[i], noise.nz),
        tas: None,
        cg: None,
    };
    Ok(series)
}

/// Eigenvalues of `[[Z_α/U1, 1], [M_α, M_Q]]`: `ω = |λ|`, `ζ = −Re λ / |λ|`.
pub fn eigen_short_period(
    m_alpha: f64,
    m_q: f64,
    z_alpha: f64,
    cond: &FlightCondition,
) -> Result<ShortPeriodResult> {
    if !(cond.u1 > 0.0) {
        return invalid(format!("U1 must be positive, got {}", cond.u1));
    }
    let trace = z_alpha / cond.u1 + m_q;
    let det = z_alpha / cond.u1 * m_q - m_alpha;
    if !(trace * trace - 4.0 * det < 0.0) {
        return Err(Error::Overdamped { trace, det });
    }
    let omega = det.sqrt();
    Ok(ShortPeriodResult::new(omega, -trace / (2.0 * omega), *cond))
}

/// Oracle short period of the true model.
pub fn analytic_short_period(model: &TrueLinearModel) -> Result<ShortPeriodResult> {
    let d = model.dimensional();
    eigen_short_period(d.m_alpha, d.m_q, d.z_alpha, &model.condition)
}

/// Trim-function coefficients `α = a·exp(−b q̄)`, `δe = c + d ln q̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Multiplicative noise on α and additive noise on δe (rad).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrimNoise {
    pub alpha_relative: f64,
    pub de: f64,
}

/// Trim shots from exact trim functions, standard-day ρ and OAT.
pub fn generate_trim_shots(
    truth: TrimCoefficients,
    mach: f64,
    qbar_list: &[f64],
    noise: TrimNoise,
    seed: u64,
) -> Result<Vec<TrimShot>> {
    if !(truth.a > 0.0) {
        return invalid(format!("trim coefficient a must be positive, got {}", truth.a));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(qbar_list.len());
    for &q in qbar_list {
        let cond = FlightCondition::standard_day(q, mach)?;
        let (_, oat) = standard_day_from_qbar(q, mach)?;
        let e1: f64 = StandardNormal.sample(&mut rng);
        let e2: f64 = StandardNormal.sample(&mut rng);
        out.push(TrimShot {
            qbar: q,
            mach,
            alpha: truth.a * (-truth.b * q).exp() * (1.0 + noise.alpha_relative * e1),
            de: truth.c + truth.d * q.ln() + noise.de * e2,
            rho: cond.rho,
            oat,
        });
    }
    Ok(out)
}

/// Amplitude of the rate of the best-fit sinusoid `c + a sin ωt + b cos ωt`
/// to `(t, y)`, i.e. `ω·sqrt(a² + b²)`.
pub fn sinusoid_rate_amplitude(time: &[f64], y: &[f64], frequency_hz: f64) -> Result<f64> {
    if time.len() != y.len() || time.len() < 4 {
        return invalid("sinusoid fit needs at least 4 matching samples");
    }
    let w = 2.0 * PI * frequency_hz;
    let design = nalgebra::DMatrix::from_fn(time.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (w * time[i]).sin(),
        _ => (w * time[i]).cos(),
    });
    let beta = least_squares(&design, y)?;
    Ok(w * beta[1].hypot(beta[2]))
}
