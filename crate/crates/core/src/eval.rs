//! Linear-regression baseline and comparison against historical
//! short-period measurements.

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::aero::{StateVector, STATE_DIM};
use crate::error::{invalid, Error, Result};
use crate::linalg::least_squares;

/// Ordinary least squares `y = β0 + Σ β_d x_d` over the state components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearBaseline {
    pub intercept: f64,
    pub slopes: [f64; STATE_DIM],
}

pub const BASELINE_MIN_ROWS: usize = STATE_DIM + 1;

impl LinearBaseline {
    pub fn fit(states: &[StateVector], y: &[f64]) -> Result<Self> {
        if states.len() != y.len() {
            return invalid(format!("{} states but {} observations", states.len(), y.len()));
        }
        if states.len() < BASELINE_MIN_ROWS {
            return invalid(format!(
                "linear baseline needs at least {BASELINE_MIN_ROWS} rows, got {}",
                states.len()
            ));
        }
        let rows: Vec<[f64; STATE_DIM]> = states.iter().map(StateVector::to_array).collect();
        let design = DMatrix::from_fn(rows.len(), STATE_DIM + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                rows[i][j - 1]
            }
        });
        let beta = least_squares(&design, y)?;
        let mut slopes = [0.0; STATE_DIM];
        slopes.copy_from_slice(&beta[1..]);
        Ok(Self {
            intercept: beta[0],
            slopes,
        })
    }

    pub fn predict(&self, x: &StateVector) -> f64 {
        self.intercept
            + self
                .slopes
                .iter()
                .zip(x.to_array())
                .map(|(s, v)| s * v)
                .sum::<f64>()
    }

    pub fn residual_rms(&self, states: &[StateVector], y: &[f64]) -> f64 {
        let ss: f64 = states
            .iter()
            .zip(y)
            .map(|(x, v)| (v - self.predict(x)).powi(2))
            .sum();
        (ss / y.len().max(1) as f64).sqrt()
    }
}

/// One published short-period measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoricalPoint {
    pub source: String,
    pub altitude_ft: f64,
    pub mach: f64,
    pub qbar_psf: f64,
    pub omega_hz: f64,
    pub zeta: f64,
    pub excluded: bool,
}

pub const HISTORICAL_HEADER: [&str; 7] = [
    "source",
    "altitude_ft",
    "mach",
    "qbar_psf",
    "omega_hz",
    "zeta",
    "excluded",
];

const BUNDLED: &str = include_str!("../data/historical_short_period.csv");

/// The bundled comparison set. The 31,753 ft point carries a damping ratio of
/// 29, almost certainly a transcription slip, and ships excluded.
pub fn bundled_historical() -> Vec<HistoricalPoint> {
    read_historical(BUNDLED.as_bytes()).expect("bundled dataset is well formed")
}

pub fn bundled_historical_csv() -> &'static str {
    BUNDLED
}

pub fn read_historical<R: Read>(r: R) -> Result<Vec<HistoricalPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    for h in HISTORICAL_HEADER {
        if !headers.iter().any(|x| x == h) {
            return Err(Error::MissingColumn(h.to_string()));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let p: HistoricalPoint = rec?;
        out.push(p);
    }
    Ok(out)
}

/// Writes in the bundled file's fixed-precision layout.
pub fn write_historical<W: Write>(w: W, points: &[HistoricalPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(HISTORICAL_HEADER)?;
    for p in points {
        wtr.write_record([
            p.source.clone(),
            format!("{:.0}", p.altitude_ft),
            format!("{:.2}", p.mach),
            format!("{:.0}", p.qbar_psf),
            format!("{:.2}", p.omega_hz),
            format!("{:.2}", p.zeta),
            p.excluded.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Model prediction at a flight condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionPoint {
    pub qbar: f64,
    pub mach: f64,
    pub omega_hz: f64,
    pub zeta: f64,
}

impl PredictionPoint {
    fn key(&self) -> [f64; 4] {
        [self.qbar, self.mach, self.omega_hz, self.zeta]
    }
}

/// Reads `qbar, mach, omega_hz, zeta` columns; other columns are ignored.
/// Rows with an empty `omega_hz` or `zeta` cell carry no prediction and are
/// skipped.
pub fn read_predictions<R: Read>(r: R) -> Result<Vec<PredictionPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    for h in ["qbar", "mach", "omega_hz", "zeta"] {
        if !headers.iter().any(|x| x == h) {
            return Err(Error::MissingColumn(h.to_string()));
        }
    }
    let idx: Vec<usize> = ["qbar", "mach", "omega_hz", "zeta"]
        .iter()
        .map(|h| headers.iter().position(|x| x == *h).unwrap())
        .collect();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if [idx[2], idx[3]].iter().any(|&i| rec.get(i).map_or(true, str::is_empty)) {
            continue;
        }
        let mut v = [0.0; 4];
        for (k, &i) in idx.iter().enumerate() {
            let cell = rec.get(i).unwrap_or("");
            v[k] = cell.parse().map_err(|_| Error::Parse {
                row: row + 1,
                col: headers[i].to_string(),
                value: cell.to_string(),
            })?;
        }
        out.push(PredictionPoint {
            qbar: v[0],
            mach: v[1],
            omega_hz: v[2],
            zeta: v[3],
        });
    }
    Ok(out)
}

/// Mach families used to split the comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Low,
    Moderate,
    High,
    Supersonic,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Low, Region::Moderate, Region::High, Region::Supersonic];

    /// Low below 0.6, moderate to 0.8, high to 1.0, supersonic above.
    pub fn of(mach: f64) -> Self {
        if mach < 0.6 {
            Region::Low
        } else if mach < 0.8 {
            Region::Moderate
        } else if mach < 1.0 {
            Region::High
        } else {
            Region::Supersonic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Low => "low",
            Region::Moderate => "moderate",
            Region::High => "high",
            Region::Supersonic => "supersonic",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn cmp_hist(a: &HistoricalPoint, b: &HistoricalPoint) -> Ordering {
    let ka = [a.qbar_psf, a.mach, a.omega_hz, a.zeta, a.altitude_ft];
    let kb = [b.qbar_psf, b.mach, b.omega_hz, b.zeta, b.altitude_ft];
    ka.iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.source.cmp(&b.source))
        .then_with(|| a.excluded.cmp(&b.excluded))
}

/// Historical points of one region whose dynamic pressures chain together
/// within the tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoricalGroup {
    pub region: Region,
    pub members: Vec<HistoricalPoint>,
}

impl HistoricalGroup {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }

    /// RMS spread of ω and ζ about the group means.
    pub fn spread(&self) -> (f64, f64) {
        let n = self.members.len() as f64;
        let mw = self.members.iter().map(|p| p.omega_hz).sum::<f64>() / n;
        let mz = self.members.iter().map(|p| p.zeta).sum::<f64>() / n;
        let sw = self.members.iter().map(|p| (p.omega_hz - mw).powi(2)).sum::<f64>() / n;
        let sz = self.members.iter().map(|p| (p.zeta - mz).powi(2)).sum::<f64>() / n;
        (sw.sqrt(), sz.sqrt())
    }
}

/// Splits the non-excluded points by Mach region, then single-linkage
/// clusters each region on q̄: sorted neighbours closer than `qbar_tol` join.
/// Output is canonical (independent of input order).
pub fn group_historical(historical: &[HistoricalPoint], qbar_tol: f64) -> Vec<HistoricalGroup> {
    let mut groups = Vec::new();
    for region in Region::ALL {
        let mut pts: Vec<HistoricalPoint> = historical
            .iter()
            .filter(|p| !p.excluded && Region::of(p.mach) == region)
            .cloned()
            .collect();
        pts.sort_by(cmp_hist);
        let mut current: Vec<HistoricalPoint> = Vec::new();
        for p in pts {
            if let Some(last) = current.last() {
                if p.qbar_psf - last.qbar_psf > qbar_tol {
                    groups.push(HistoricalGroup {
                        region,
                        members: std::mem::take(&mut current),
                    });
                }
            }
            current.push(p);
        }
        if !current.is_empty() {
            groups.push(HistoricalGroup {
                region,
                members: current,
            });
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub region: Region,
    pub points: usize,
    pub groups: usize,
    /// Groups with a single point; their dataset spread is zero.
    pub singleton_groups: usize,
    pub matched: usize,
    pub unmatched: usize,
    pub omega_rmse_prediction: Option<f64>,
    pub omega_rmse_dataset: f64,
    pub zeta_rmse_prediction: Option<f64>,
    pub zeta_rmse_dataset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupingReport {
    pub regions: Vec<RegionMetrics>,
    pub excluded: usize,
    pub qbar_tol: f64,
    pub mach_tol: f64,
}

impl GroupingReport {
    pub fn region(&self, r: Region) -> Option<&RegionMetrics> {
        self.regions.iter().find(|m| m.region == r)
    }

    /// Aligned text table.
    pub fn to_text(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        let mut s = format!(
            "{:<11} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10}\n",
            "mach", "points", "groups", "w_pred", "w_data", "z_pred", "z_data"
        );
        for m in &self.regions {
            s.push_str(&format!(
                "{:<11} {:>6} {:>6} {:>10} {:>10.3} {:>10} {:>10.3}\n",
                m.region.name(),
                m.points,
                m.groups,
                fmt_opt(m.omega_rmse_prediction),
                m.omega_rmse_dataset,
                fmt_opt(m.zeta_rmse_prediction),
                m.zeta_rmse_dataset
            ));
        }
        s.push_str(&format!("excluded rows: {}\n", self.excluded));
        s
    }
}

fn nearest<'a>(
    p: &HistoricalPoint,
    predictions: &'a [PredictionPoint],
    qbar_tol: f64,
    mach_tol: f64,
) -> Option<&'a PredictionPoint> {
    let dist = |c: &PredictionPoint| {
        let dq = (c.qbar - p.qbar_psf) / qbar_tol;
        let dm = (c.mach - p.mach) / mach_tol;
        dq * dq + dm * dm
    };
    predictions
        .iter()
        .filter(|c| (c.qbar - p.qbar_psf).abs() <= qbar_tol && (c.mach - p.mach).abs() <= mach_tol)
        .min_by(|a, b| {
            // Equidistant candidates are alternative predictions at the same
            // condition; the one closest to the measurement is scored.
            let off = |c: &PredictionPoint| (c.omega_hz - p.omega_hz).powi(2) + (c.zeta - p.zeta).powi(2);
            dist(a).total_cmp(&dist(b)).then_with(|| off(a).total_cmp(&off(b))).then_with(|| {
                a.key()
                    .iter()
                    .zip(&b.key())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
        })
}

/// Per-region prediction error against the historical points and the
/// within-group spread of the historical points themselves.
///
/// Each non-excluded point is matched to the nearest prediction within both
/// tolerances; unmatched points are counted, not scored. Region dataset
/// figures are the mean of the group spreads.
pub fn rmse_grouping(
    predictions: &[PredictionPoint],
    historical: &[HistoricalPoint],
    qbar_tol: f64,
    mach_tol: f64,
) -> Result<GroupingReport> {
    if !(qbar_tol >= 0.0 && mach_tol >= 0.0) {
        return invalid("tolerances must be non-negative");
    }
    if predictions.is_empty() {
        return invalid("no predictions to evaluate");
    }
    let excluded = historical.iter().filter(|p| p.excluded).count();
    if historical.len() == excluded {
        return invalid("historical set is empty after exclusions");
    }
    let groups = group_historical(historical, qbar_tol);
    let mut regions = Vec::new();
    for region in Region::ALL {
        let rg: Vec<&HistoricalGroup> = groups.iter().filter(|g| g.region == region).collect();
        if rg.is_empty() {
            continue;
        }
        let (mut sw, mut sz) = (0.0, 0.0);
        for g in &rg {
            let (w, z) = g.spread();
            sw += w;
            sz += z;
        }
        let (mut ew, mut ez, mut matched, mut points) = (0.0, 0.0, 0usize, 0usize);
        for p in rg.iter().flat_map(|g| &g.members) {
            points += 1;
            if let Some(c) = nearest(p, predictions, qbar_tol, mach_tol) {
                ew += (c.omega_hz - p.omega_hz).powi(2);
                ez += (c.zeta - p.zeta).powi(2);
                matched += 1;
            }
        }
        let rm = |s: f64| (matched > 0).then(|| (s / matched as f64).sqrt());
        regions.push(RegionMetrics {
            region,
            points,
            groups: rg.len(),
            singleton_groups: rg.iter().filter(|g| g.is_singleton()).count(),
            matched,
            unmatched: points - matched,
            omega_rmse_prediction: rm(ew),
            omega_rmse_dataset: sw / rg.len() as f64,
            zeta_rmse_prediction: rm(ez),
            zeta_rmse_dataset: sz / rg.len() as f64,
        });
    }
    Ok(GroupingReport {
        regions,
        excluded,
        qbar_tol,
        mach_tol,
    })
}

pub const DEFAULT_QBAR_TOL: f64 = 40.0;
pub const DEFAULT_MACH_TOL: f64 = 0.02;
