//! State vector, atmosphere, Morelli `C_m` form, coefficient extraction and
//! dimensionalization. Imperial units throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ingest::DerivedFlightSeries;

/// Standard gravity, ft/s².
pub const G0: f64 = 32.174;
/// Ratio of specific heats for air.
pub const GAMMA: f64 = 1.4;
/// Gas constant for air, ft·lb/(slug·°R).
pub const R_AIR: f64 = 1716.49;
/// Sea-level standard pressure, lb/ft².
pub const P0: f64 = 2116.22;
/// Pressure-altitude lapse coefficient, 1/ft.
pub const PRESSURE_LAPSE: f64 = 6.87535e-6;
/// Pressure-altitude exponent.
pub const PRESSURE_EXPONENT: f64 = 5.2561;
/// Tropopause pressure altitude, ft.
pub const TROPOPAUSE_FT: f64 = 36_089.0;

pub const STATE_DIM: usize = 8;

/// Flight state `[M, ρ, q̄, P, Q, R, α, δe]`.
///
/// Units: ρ slug/ft³, q̄ lb/ft², rates rad/s, angles rad.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateVector {
    pub mach: f64,
    pub rho: f64,
    pub qbar: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub de: f64,
}

impl StateVector {
    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.mach, self.rho, self.qbar, self.p, self.q, self.r, self.alpha, self.de,
        ]
    }

    pub fn from_array(v: [f64; STATE_DIM]) -> Self {
        Self {
            mach: v[0],
            rho: v[1],
            qbar: v[2],
            p: v[3],
            q: v[4],
            r: v[5],
            alpha: v[6],
            de: v[7],
        }
    }

    pub fn get(&self, c: StateComponent) -> f64 {
        self.to_array()[c.index()]
    }

    pub fn with(&self, c: StateComponent, value: f64) -> Self {
        let mut v = self.to_array();
        v[c.index()] = value;
        Self::from_array(v)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.to_array().iter().position(|v| !v.is_finite()) {
            return invalid(format!(
                "state component {} is not finite",
                StateComponent::ALL[i]
            ));
        }
        if self.mach <= 0.0 || self.rho <= 0.0 || self.qbar <= 0.0 {
            return invalid(format!(
                "state requires M, rho, qbar > 0 (got {}, {}, {})",
                self.mach, self.rho, self.qbar
            ));
        }
        Ok(())
    }
}

/// Index into [`StateVector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateComponent {
    Mach,
    Rho,
    Qbar,
    P,
    Q,
    R,
    Alpha,
    De,
}

impl StateComponent {
    pub const ALL: [StateComponent; STATE_DIM] = [
        StateComponent::Mach,
        StateComponent::Rho,
        StateComponent::Qbar,
        StateComponent::P,
        StateComponent::Q,
        StateComponent::R,
        StateComponent::Alpha,
        StateComponent::De,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StateComponent::Mach => "mach",
            StateComponent::Rho => "rho",
            StateComponent::Qbar => "qbar",
            StateComponent::P => "p",
            StateComponent::Q => "q",
            StateComponent::R => "r",
            StateComponent::Alpha => "alpha",
            StateComponent::De => "de",
        }
    }
}

impl fmt::Display for StateComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        StateComponent::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown state component `{s}` (expected one of mach, rho, qbar, p, q, r, alpha, de)"
                ))
            })
    }
}

/// Coefficients θ29…θ38 of the Morelli pitching-moment polynomial.
///
/// `C_m = θ29 + θ30 α + θ31 Q + θ32 δe + θ33 αQ + θ34 α²Q + θ35 α²δe
///        + θ36 α³Q + θ37 α³δe + θ38 α⁴`
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorelliCoefficients {
    pub theta29: f64,
    pub theta30: f64,
    pub theta31: f64,
    pub theta32: f64,
    pub theta33: f64,
    pub theta34: f64,
    pub theta35: f64,
    pub theta36: f64,
    pub theta37: f64,
    pub theta38: f64,
}

impl MorelliCoefficients {
    pub fn from_array(t: [f64; 10]) -> Self {
        Self {
            theta29: t[0],
            theta30: t[1],
            theta31: t[2],
            theta32: t[3],
            theta33: t[4],
            theta34: t[5],
            theta35: t[6],
            theta36: t[7],
            theta37: t[8],
            theta38: t[9],
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.theta29,
            self.theta30,
            self.theta31,
            self.theta32,
            self.theta33,
            self.theta34,
            self.theta35,
            self.theta36,
            self.theta37,
            self.theta38,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match self.to_array().iter().position(|v| !v.is_finite()) {
            Some(i) => invalid(format!("theta{} is not finite", 29 + i)),
            None => Ok(()),
        }
    }

    /// Evaluates the polynomial on a raw state array.
    pub fn eval(&self, x: &[f64; STATE_DIM]) -> f64 {
        let (q, a, de) = (x[4], x[6], x[7]);
        let a2 = a * a;
        let a3 = a2 * a;
        self.theta29
            + self.theta30 * a
            + self.theta31 * q
            + self.theta32 * de
            + self.theta33 * a * q
            + self.theta34 * a2 * q
            + self.theta35 * a2 * de
            + self.theta36 * a3 * q
            + self.theta37 * a3 * de
            + self.theta38 * a2 * a2
    }

    /// Analytic gradient with respect to the raw state; only Q, α, δe are nonzero.
    pub fn gradient(&self, x: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
        let (q, a, de) = (x[4], x[6], x[7]);
        let a2 = a * a;
        let a3 = a2 * a;
        let mut g = [0.0; STATE_DIM];
        g[4] = self.theta31 + self.theta33 * a + self.theta34 * a2 + self.theta36 * a3;
        g[6] = self.theta30
            + self.theta33 * q
            + 2.0 * self.theta34 * a * q
            + 2.0 * self.theta35 * a * de
            + 3.0 * self.theta36 * a2 * q
            + 3.0 * self.theta37 * a2 * de
            + 4.0 * self.theta38 * a3;
        g[7] = self.theta32 + self.theta35 * a2 + self.theta37 * a3;
        g
    }
}

pub fn morelli_cm_mean(coeffs: &MorelliCoefficients, x: &StateVector) -> f64 {
    coeffs.eval(&x.to_array())
}

/// Reference quantities: S ft², c̄ ft, mass slug, inertias slug·ft².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftGeometry {
    pub s: f64,
    pub cbar: f64,
    pub mass: f64,
    pub ix: f64,
    pub iy: f64,
    pub iz: f64,
    pub ixz: f64,
}

impl AircraftGeometry {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("s", self.s),
            ("cbar", self.cbar),
            ("mass", self.mass),
            ("ix", self.ix),
            ("iy", self.iy),
            ("iz", self.iz),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("geometry `{name}` must be positive, got {v}"));
            }
        }
        if !self.ixz.is_finite() {
            return invalid("geometry `ixz` must be finite");
        }
        Ok(())
    }
}

/// Trim flight condition: q̄ lb/ft², Mach, U1 ft/s, ρ slug/ft³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightCondition {
    pub qbar: f64,
    pub mach: f64,
    pub u1: f64,
    pub rho: f64,
}

impl FlightCondition {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("qbar", self.qbar),
            ("mach", self.mach),
            ("u1", self.u1),
            ("rho", self.rho),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("flight condition `{name}` must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Condition at a pressure altitude and outside air temperature.
    pub fn at_altitude(mach: f64, pressure_altitude_ft: f64, oat_c: f64) -> Result<Self> {
        let rho = air_density(pressure_altitude_ft, oat_c)?;
        let cond = Self {
            qbar: dynamic_pressure(rho, mach, oat_c),
            mach,
            u1: mach * speed_of_sound(oat_c),
            rho,
        };
        cond.validate()?;
        Ok(cond)
    }

    /// Standard-day condition that produces `qbar` at `mach`.
    pub fn standard_day(qbar: f64, mach: f64) -> Result<Self> {
        let (_, oat) = standard_day_from_qbar(qbar, mach)?;
        Self::fixed_oat(qbar, mach, oat)
    }

    /// Condition at `qbar` and `mach` with a fixed outside air temperature.
    pub fn fixed_oat(qbar: f64, mach: f64, oat_c: f64) -> Result<Self> {
        let p = static_pressure_from_qbar(qbar, mach)?;
        let t = celsius_to_rankine(oat_c);
        if t <= 0.0 {
            return invalid(format!("temperature {oat_c} C is below absolute zero"));
        }
        let cond = Self {
            qbar,
            mach,
            u1: mach * speed_of_sound(oat_c),
            rho: p / (R_AIR * t),
        };
        cond.validate()?;
        Ok(cond)
    }
}

pub fn celsius_to_rankine(c: f64) -> f64 {
    (c + 273.15) * 1.8
}

/// Static pressure (lb/ft²) at a pressure altitude (ft).
pub fn pressure_at_altitude(h_ft: f64) -> f64 {
    P0 * (1.0 - PRESSURE_LAPSE * h_ft).powf(PRESSURE_EXPONENT)
}

/// Inverse of [`pressure_at_altitude`].
pub fn pressure_altitude_from_pressure(p: f64) -> f64 {
    (1.0 - (p / P0).powf(1.0 / PRESSURE_EXPONENT)) / PRESSURE_LAPSE
}

/// Standard-day temperature (°C): 15 °C lapsing 1.98 °C/1000 ft to the
/// tropopause, isothermal above.
pub fn standard_temperature_c(h_ft: f64) -> f64 {
    15.0 - 0.0019812 * h_ft.min(TROPOPAUSE_FT)
}

fn static_pressure_from_qbar(qbar: f64, mach: f64) -> Result<f64> {
    if !(qbar > 0.0 && mach > 0.0) {
        return invalid(format!("qbar and mach must be positive (got {qbar}, {mach})"));
    }
    Ok(qbar / (0.5 * GAMMA * mach * mach))
}

/// Standard-day pressure altitude (ft) and temperature (°C) giving `qbar` at `mach`.
pub fn standard_day_from_qbar(qbar: f64, mach: f64) -> Result<(f64, f64)> {
    let p = static_pressure_from_qbar(qbar, mach)?;
    let h = pressure_altitude_from_pressure(p);
    Ok((h, standard_temperature_c(h)))
}

/// Air density from pressure altitude (ft) and outside air temperature (°C).
pub fn air_density(pressure_altitude_ft: f64, oat_c: f64) -> Result<f64> {
    if !(-1000.0..=60_000.0).contains(&pressure_altitude_ft) {
        return invalid(format!(
            "pressure altitude {pressure_altitude_ft} ft outside [-1000, 60000]"
        ));
    }
    if !(-80.0..=60.0).contains(&oat_c) {
        return invalid(format!("OAT {oat_c} C outside [-80, 60]"));
    }
    Ok(pressure_at_altitude(pressure_altitude_ft) / (R_AIR * celsius_to_rankine(oat_c)))
}

/// Speed of sound (ft/s) at an outside air temperature (°C).
pub fn speed_of_sound(oat_c: f64) -> f64 {
    (GAMMA * R_AIR * celsius_to_rankine(oat_c)).sqrt()
}

/// Dynamic pressure (lb/ft²).
pub fn dynamic_pressure(rho: f64, mach: f64, oat_c: f64) -> f64 {
    let v = mach * speed_of_sound(oat_c);
    0.5 * rho * v * v
}

/// Pitching-moment coefficient from the moment equation, per sample.
pub fn compute_cm_observations(
    series: &DerivedFlightSeries,
    geom: &AircraftGeometry,
) -> Result<Vec<(StateVector, f64)>> {
    geom.validate()?;
    series
        .states
        .iter()
        .zip(&series.qdot)
        .zip(&series.time)
        .map(|((x, &qdot), &t)| {
            if !(x.qbar > 0.0) {
                return Err(Error::NonPositiveQbar { t, qbar: x.qbar });
            }
            let moment = geom.iy * qdot
                + (geom.ix - geom.iz) * x.p * x.r
                + geom.ixz * (x.p * x.p - x.r * x.r);
            Ok((*x, moment / (x.qbar * geom.s * geom.cbar)))
        })
        .collect()
}

/// Normal-force coefficient `C_Z = −n_z m g0 / (q̄ S)`, body z down.
pub fn compute_cz_observations(
    series: &DerivedFlightSeries,
    geom: &AircraftGeometry,
) -> Result<Vec<(StateVector, f64)>> {
    geom.validate()?;
    series
        .states
        .iter()
        .zip(&series.nz)
        .zip(&series.time)
        .map(|((x, &nz), &t)| {
            if !(x.qbar > 0.0) {
                return Err(Error::NonPositiveQbar { t, qbar: x.qbar });
            }
            Ok((*x, cz_from_load_factor(nz, x.qbar, geom)))
        })
        .collect()
}

pub fn cz_from_load_factor(nz: f64, qbar: f64, geom: &AircraftGeometry) -> f64 {
    -nz * geom.mass * G0 / (qbar * geom.s)
}

/// Dimensional derivatives: M_α 1/s², M_Q 1/s, Z_α ft/s², plus the
/// classical non-dimensional pitch damping `C_mq` per rad.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionalDerivatives {
    pub m_alpha: f64,
    pub m_q: f64,
    pub z_alpha: f64,
    pub cmq_classical: f64,
}

pub fn dimensionalize(
    cm_alpha: f64,
    cm_q_raw: f64,
    cz_alpha: f64,
    geom: &AircraftGeometry,
    cond: &FlightCondition,
) -> DimensionalDerivatives {
    let moment = cond.qbar * geom.s * geom.cbar / geom.iy;
    DimensionalDerivatives {
        m_alpha: cm_alpha * moment,
        m_q: cm_q_raw * moment,
        z_alpha: cz_alpha * cond.qbar * geom.s / geom.mass,
        cmq_classical: 2.0 * cond.u1 / geom.cbar * cm_q_raw,
    }
}

/// Inverse of [`dimensionalize`]: returns `(C_mα, C_mQ_raw, C_Zα)`.
pub fn nondimensionalize(
    d: &DimensionalDerivatives,
    geom: &AircraftGeometry,
    cond: &FlightCondition,
) -> (f64, f64, f64) {
    let moment = cond.qbar * geom.s * geom.cbar / geom.iy;
    (
        d.m_alpha / moment,
        d.m_q / moment,
        d.z_alpha * geom.mass / (cond.qbar * geom.s),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom() -> AircraftGeometry {
        AircraftGeometry {
            s: 170.0,
            cbar: 7.73,
            mass: 373.0,
            ix: 1600.0,
            iy: 30000.0,
            iz: 31000.0,
            ixz: 0.0,
        }
    }

    fn series(states: Vec<StateVector>, qdot: Vec<f64>, nz: Vec<f64>) -> DerivedFlightSeries {
        let n = states.len();
        DerivedFlightSeries {
            time: (0..n).map(|i| i as f64 * 0.02).collect(),
            states,
            qdot,
            nz,
            warnings: vec![],
        }
    }

    fn state(p: f64, r: f64) -> StateVector {
        StateVector {
            mach: 0.5,
            rho: 2e-3,
            qbar: 300.0,
            p,
            q: 0.0,
            r,
            alpha: 0.05,
            de: 0.0,
        }
    }

    #[test]
    fn morelli_examples() {
        let x = StateVector {
            alpha: 0.1,
            ..state(0.3, -0.2)
        };
        assert_eq!(morelli_cm_mean(&MorelliCoefficients::default(), &x), 0.0);
        let c = MorelliCoefficients {
            theta29: 1.0,
            ..Default::default()
        };
        assert_eq!(morelli_cm_mean(&c, &x), 1.0);
        let c = MorelliCoefficients {
            theta30: -0.5,
            ..Default::default()
        };
        assert!((morelli_cm_mean(&c, &x) + 0.05).abs() < 1e-15);
    }

    #[test]
    fn cm_examples() {
        let g = geom();
        let s = series(vec![state(0.0, 0.0)], vec![0.0], vec![1.0]);
        assert_eq!(compute_cm_observations(&s, &g).unwrap()[0].1, 0.0);

        let s = series(vec![state(0.0, 0.0)], vec![0.1], vec![1.0]);
        let cm = compute_cm_observations(&s, &g).unwrap()[0].1;
        assert!((cm - 3000.0 / 394_230.0).abs() < 1e-12);
        assert!((cm - 7.6097e-3).abs() < 1e-7);

        let g2 = AircraftGeometry {
            ix: 20000.0,
            iz: 20000.0,
            ixz: 0.0,
            ..g
        };
        let s = series(vec![state(1.0, 1.0)], vec![0.0], vec![1.0]);
        assert_eq!(compute_cm_observations(&s, &g2).unwrap()[0].1, 0.0);
    }

    #[test]
    fn cm_rejects_nonpositive_qbar() {
        let mut x = state(0.0, 0.0);
        x.qbar = 0.0;
        let s = series(vec![state(0.0, 0.0), x], vec![0.0, 0.0], vec![1.0, 1.0]);
        match compute_cm_observations(&s, &geom()) {
            Err(Error::NonPositiveQbar { t, .. }) => assert_eq!(t, 0.02),
            other => panic!("{other:?}"),
        }
        assert!(compute_cz_observations(&s, &geom()).is_err());
    }

    #[test]
    fn cz_examples() {
        let g = AircraftGeometry {
            mass: 373.0,
            ..geom()
        };
        let s = series(vec![state(0.0, 0.0)], vec![0.0], vec![0.0]);
        assert_eq!(compute_cz_observations(&s, &g).unwrap()[0].1, 0.0);
        let s = series(vec![state(0.0, 0.0)], vec![0.0], vec![1.0]);
        let cz = compute_cz_observations(&s, &g).unwrap()[0].1;
        assert!((cz + 373.0 * 32.174 / 51000.0).abs() < 1e-14);
        assert!((cz + 0.23532).abs() < 1e-5);
        let mut x = state(0.0, 0.0);
        x.qbar = 600.0;
        let s2 = series(vec![x], vec![0.0], vec![1.0]);
        let cz2 = compute_cz_observations(&s2, &g).unwrap()[0].1;
        assert!((cz2 - cz / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dimensionalize_examples() {
        let cond = FlightCondition {
            qbar: 203.0,
            mach: 0.71,
            u1: 700.0,
            rho: 8.9e-4,
        };
        let g = AircraftGeometry {
            iy: 28166.0,
            ..geom()
        };
        let z = dimensionalize(0.0, 0.0, 0.0, &g, &cond);
        assert_eq!((z.m_alpha, z.m_q, z.z_alpha, z.cmq_classical), (0.0, 0.0, 0.0, 0.0));
        let d = dimensionalize(-0.562, 0.0, 0.0, &g, &cond);
        let hand = -0.562 * 203.0 * 170.0 * 7.73 / 28166.0;
        assert!((d.m_alpha - hand).abs() < 1e-12);
        assert!((d.m_alpha + 5.323).abs() < 5e-4);
        let d1 = dimensionalize(0.0, -0.07, 0.0, &g, &cond);
        let d2 = dimensionalize(0.0, -0.14, 0.0, &g, &cond);
        assert!((d2.m_q - 2.0 * d1.m_q).abs() < 1e-15);
        assert!((d2.cmq_classical - 2.0 * d1.cmq_classical).abs() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let rho0 = air_density(0.0, 15.0).unwrap();
        assert!((rho0 - 2116.22 / (1716.49 * 518.67)).abs() < 1e-9);
        assert!((rho0 - 2.3769e-3).abs() < 1e-7);
        assert!(air_density(5000.0, 30.0).unwrap() < air_density(5000.0, 10.0).unwrap());
        let rho20 = air_density(20000.0, -24.6).unwrap();
        assert!((rho20 / 1.2673e-3 - 1.0).abs() < 0.01);
        assert!(air_density(70000.0, -56.5).is_err());
        assert!(air_density(0.0, -90.0).is_err());
    }

    #[test]
    fn density_matches_standard_table() {
        // 1976 standard atmosphere, slug/ft³.
        let table = [
            (0.0, 2.3769e-3),
            (10_000.0, 1.7556e-3),
            (20_000.0, 1.2673e-3),
            (30_000.0, 8.9068e-4),
            (40_000.0, 5.8727e-4),
        ];
        for (h, rho) in table {
            let got = air_density(h, standard_temperature_c(h)).unwrap();
            assert!((got / rho - 1.0).abs() < 0.01, "h {h}: {got} vs {rho}");
        }
    }

    #[test]
    fn dynamic_pressure_examples() {
        assert_eq!(dynamic_pressure(2.3769e-3, 0.0, 15.0), 0.0);
        assert!((speed_of_sound(15.0) - 1116.45).abs() < 0.05);
        let q = dynamic_pressure(2.3769e-3, 0.5, 15.0);
        assert!((q - 370.3).abs() < 0.5, "{q}");
        let q2 = dynamic_pressure(2.3769e-3, 1.0, 15.0);
        assert!((q2 / q - 4.0).abs() < 1e-12);
    }

    #[test]
    fn standard_day_roundtrip() {
        let c = FlightCondition::at_altitude(0.7, 32_000.0, standard_temperature_c(32_000.0))
            .unwrap();
        let back = FlightCondition::standard_day(c.qbar, 0.7).unwrap();
        assert!((back.rho / c.rho - 1.0).abs() < 1e-10);
        assert!((back.u1 / c.u1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn component_parse() {
        assert_eq!("alpha".parse::<StateComponent>().unwrap(), StateComponent::Alpha);
        assert_eq!("Q".parse::<StateComponent>().unwrap(), StateComponent::Q);
        assert!("beta".parse::<StateComponent>().is_err());
    }

    fn arb_state() -> impl Strategy<Value = [f64; STATE_DIM]> {
        (
            0.2..1.2f64,
            3e-4..2.4e-3f64,
            50.0..900.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -1.0..1.0f64,
            -0.3..0.5f64,
            -0.3..0.3f64,
        )
            .prop_map(|(a, b, c, d, e, f, g, h)| [a, b, c, d, e, f, g, h])
    }

    proptest! {
        #[test]
        fn morelli_gradient_matches_fd(x in arb_state(), t in prop::array::uniform10(-2.0..2.0f64)) {
            let c = MorelliCoefficients::from_array(t);
            let g = c.gradient(&x);
            for d in 0..STATE_DIM {
                let h = 1e-6;
                let mut xp = x; xp[d] += h;
                let mut xm = x; xm[d] -= h;
                let fd = (c.eval(&xp) - c.eval(&xm)) / (2.0 * h);
                prop_assert!((fd - g[d]).abs() <= 1e-8 * (1.0 + g[d].abs()), "d {}: {} vs {}", d, fd, g[d]);
            }
        }

        #[test]
        fn dimensionalize_roundtrip(cma in -2.0..2.0f64, cmq in -1.0..1.0f64, cza in -8.0..0.0f64,
                                    qbar in 50.0..900.0f64, u1 in 300.0..1200.0f64) {
            let cond = FlightCondition { qbar, mach: 0.7, u1, rho: 1e-3 };
            let d = dimensionalize(cma, cmq, cza, &geom(), &cond);
            let (a, q, z) = nondimensionalize(&d, &geom(), &cond);
            prop_assert!((a - cma).abs() <= 1e-12 * (1.0 + cma.abs()));
            prop_assert!((q - cmq).abs() <= 1e-12 * (1.0 + cmq.abs()));
            prop_assert!((z - cza).abs() <= 1e-12 * (1.0 + cza.abs()));
        }

        #[test]
        fn density_decreases_with_temperature(h in -1000.0..60000.0f64, t1 in -80.0..60.0f64, dt in 0.1..20.0f64) {
            let t2 = (t1 + dt).min(60.0);
            prop_assume!(t2 > t1);
            prop_assert!(air_density(h, t2).unwrap() < air_density(h, t1).unwrap());
        }
    }
}
