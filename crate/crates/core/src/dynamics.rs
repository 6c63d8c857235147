//! Stability derivatives from trained GPs and short-period characteristics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::aero::{
    dimensionalize, AircraftGeometry, FlightCondition, StateComponent, StateVector, STATE_DIM,
};
use crate::error::{invalid, Error, Result};
use crate::gp::GpModel;
use crate::trim::{trim_state, TrimModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityDerivatives {
    pub cm_alpha: f64,
    /// ∂C_m/∂Q with Q in rad/s.
    pub cm_q_raw: f64,
    /// `(2 U1 / c̄) · cm_q_raw`.
    pub cmq_classical: f64,
    pub cm_de: f64,
    pub cz_alpha: f64,
    pub m_alpha: f64,
    pub m_q: f64,
    pub z_alpha: f64,
    pub condition: FlightCondition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortPeriodResult {
    pub omega_rad: f64,
    pub omega_hz: f64,
    pub zeta: f64,
    pub condition: FlightCondition,
}

impl ShortPeriodResult {
    pub fn new(omega_rad: f64, zeta: f64, condition: FlightCondition) -> Self {
        Self {
            omega_rad,
            omega_hz: omega_rad / (2.0 * PI),
            zeta,
            condition,
        }
    }
}

/// Differentiates the C_m and C_Z posterior means at a zero-rate trim state.
pub fn stability_derivatives(
    cm_model: &GpModel,
    cz_model: &GpModel,
    x_trim: &StateVector,
    geom: &AircraftGeometry,
    cond: &FlightCondition,
) -> Result<StabilityDerivatives> {
    x_trim.validate()?;
    geom.validate()?;
    cond.validate()?;
    if x_trim.p != 0.0 || x_trim.q != 0.0 || x_trim.r != 0.0 {
        return invalid("trim state must have zero body rates");
    }
    let x = x_trim.to_array();
    let gm = cm_model.posterior_mean_gradient(&x);
    let gz = cz_model.posterior_mean_gradient(&x);
    if let Some(i) = gm.iter().chain(&gz).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: 0,
            col: i % STATE_DIM,
        });
    }
    let cm_alpha = gm[StateComponent::Alpha.index()];
    let cm_q_raw = gm[StateComponent::Q.index()];
    let cm_de = gm[StateComponent::De.index()];
    let cz_alpha = gz[StateComponent::Alpha.index()];
    let d = dimensionalize(cm_alpha, cm_q_raw, cz_alpha, geom, cond);
    Ok(StabilityDerivatives {
        cm_alpha,
        cm_q_raw,
        cmq_classical: d.cmq_classical,
        cm_de,
        cz_alpha,
        m_alpha: d.m_alpha,
        m_q: d.m_q,
        z_alpha: d.z_alpha,
        condition: *cond,
    })
}

/// Two-degree-of-freedom short-period approximation with `M_α̇ ≈ M_Q / 3`:
///
/// `ω = sqrt(−Z_α M_Q / U1 − M_α)`, `ζ = −(M_Q + M_Q/3 + Z_α/U1) / (2ω)`.
pub fn short_period(
    m_alpha: f64,
    m_q: f64,
    z_alpha: f64,
    cond: &FlightCondition,
) -> Result<ShortPeriodResult> {
    let u1 = cond.u1;
    if !(u1 > 0.0 && u1.is_finite()) {
        return invalid(format!("U1 must be positive, got {u1}"));
    }
    if !(m_alpha.is_finite() && m_q.is_finite() && z_alpha.is_finite()) {
        return invalid("dimensional derivatives must be finite");
    }
    let radicand = -z_alpha * m_q / u1 - m_alpha;
    if !(radicand > 0.0) {
        return Err(Error::Degenerate { radicand });
    }
    let omega = radicand.sqrt();
    let zeta = -(m_q + m_q / 3.0 + z_alpha / u1) / (2.0 * omega);
    Ok(ShortPeriodResult::new(omega, zeta, *cond))
}

/// How the sweep derives ρ and U1 from `(q̄, M)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepAtmosphere {
    /// Standard-day temperature at the pressure altitude implied by `(q̄, M)`.
    #[default]
    Standard,
    FixedOat { oat_c: f64 },
}

impl SweepAtmosphere {
    pub fn condition(&self, qbar: f64, mach: f64) -> Result<FlightCondition> {
        match *self {
            SweepAtmosphere::Standard => FlightCondition::standard_day(qbar, mach),
            SweepAtmosphere::FixedOat { oat_c } => FlightCondition::fixed_oat(qbar, mach, oat_c),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub qbar: f64,
    pub trim: StateVector,
    pub derivatives: StabilityDerivatives,
    /// Short-period result, or the error message for this grid point.
    pub short_period: std::result::Result<ShortPeriodResult, String>,
}

/// Derivatives and short period at one `(q̄, M)` point.
pub fn evaluate_point(
    cm_model: &GpModel,
    cz_model: &GpModel,
    tm: &TrimModel,
    geom: &AircraftGeometry,
    mach: f64,
    qbar: f64,
    atmosphere: SweepAtmosphere,
) -> Result<SweepRow> {
    let cond = atmosphere.condition(qbar, mach)?;
    let trim = trim_state(tm, qbar, mach, cond.rho)?;
    let derivatives = stability_derivatives(cm_model, cz_model, &trim, geom, &cond)?;
    let sp = short_period(derivatives.m_alpha, derivatives.m_q, derivatives.z_alpha, &cond)
        .map_err(|e| e.to_string());
    Ok(SweepRow {
        qbar,
        trim,
        derivatives,
        short_period: sp,
    })
}

/// Sweeps dynamic pressure at fixed Mach. Points where the short-period
/// formula fails are kept with their error message.
pub fn sweep_qbar(
    cm_model: &GpModel,
    cz_model: &GpModel,
    tm: &TrimModel,
    geom: &AircraftGeometry,
    mach: f64,
    qbar_grid: &[f64],
    atmosphere: SweepAtmosphere,
) -> Result<Vec<SweepRow>> {
    if qbar_grid.is_empty() {
        return invalid("qbar grid is empty");
    }
    for (i, q) in qbar_grid.iter().enumerate() {
        if !(*q > 0.0 && q.is_finite()) {
            return invalid(format!("qbar grid entry {i} is not positive: {q}"));
        }
        if i > 0 && !(*q > qbar_grid[i - 1]) {
            return invalid(format!("qbar grid is not ascending at entry {i}"));
        }
    }
    tm.fit_for(mach)?;
    qbar_grid
        .iter()
        .map(|&q| evaluate_point(cm_model, cz_model, tm, geom, mach, q, atmosphere))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub sigma: f64,
}

const SURFACE_BATCH: usize = 1024;

/// Posterior mean and standard deviation over a 2-D grid of two state
/// components, other components held at `x_base`. Rows are ordered with
/// `grid_a` outer.
pub fn export_surface(
    model: &GpModel,
    x_base: &StateVector,
    dim_a: StateComponent,
    dim_b: StateComponent,
    grid_a: &[f64],
    grid_b: &[f64],
) -> Result<Vec<SurfacePoint>> {
    if dim_a == dim_b {
        return invalid(format!("surface dimensions must differ (both {dim_a})"));
    }
    if grid_a.is_empty() || grid_b.is_empty() {
        return invalid("surface grids must be non-empty");
    }
    if grid_a.iter().chain(grid_b).any(|v| !v.is_finite()) {
        return invalid("surface grids must be finite");
    }
    let base = x_base.to_array();
    let (ia, ib) = (dim_a.index(), dim_b.index());
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(grid_a.len() * grid_b.len());
    for &a in grid_a {
        for &b in grid_b {
            points.push((a, b));
        }
    }
    let mut out = Vec::with_capacity(points.len());
    for chunk in points.chunks(SURFACE_BATCH) {
        let xs: Vec<[f64; STATE_DIM]> = chunk
            .iter()
            .map(|&(a, b)| {
                let mut x = base;
                x[ia] = a;
                x[ib] = b;
                x
            })
            .collect();
        let (mu, var) = model.predict_marginal(&xs)?;
        for (k, &(a, b)) in chunk.iter().enumerate() {
            out.push(SurfacePoint {
                a,
                b,
                mu: mu[k],
                sigma: var[k].max(0.0).sqrt(),
            });
        }
    }
    Ok(out)
}
