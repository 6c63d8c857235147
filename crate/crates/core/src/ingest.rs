//! Telemetry CSV loading, resampling and derived channels.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aero::{air_density, dynamic_pressure, StateVector};
use crate::error::{invalid, Error, Result};

/// Logical channels of a flight record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Time,
    Mach,
    PressureAltitude,
    Oat,
    P,
    Q,
    R,
    Alpha,
    De,
    Nz,
    Tas,
    Cg,
}

impl Channel {
    pub const REQUIRED: [Channel; 10] = [
        Channel::Time,
        Channel::Mach,
        Channel::PressureAltitude,
        Channel::Oat,
        Channel::P,
        Channel::Q,
        Channel::R,
        Channel::Alpha,
        Channel::De,
        Channel::Nz,
    ];

    pub const OPTIONAL: [Channel; 2] = [Channel::Tas, Channel::Cg];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Time => "time",
            Channel::Mach => "mach",
            Channel::PressureAltitude => "pressure_altitude",
            Channel::Oat => "oat",
            Channel::P => "p",
            Channel::Q => "q",
            Channel::R => "r",
            Channel::Alpha => "alpha",
            Channel::De => "de",
            Channel::Nz => "nz",
            Channel::Tas => "tas",
            Channel::Cg => "cg",
        }
    }

    /// Unit the loader converts this channel to.
    pub fn canonical_unit(self) -> Unit {
        match self {
            Channel::Time => Unit::Second,
            Channel::Mach | Channel::Cg => Unit::Dimensionless,
            Channel::PressureAltitude => Unit::Foot,
            Channel::Oat => Unit::Celsius,
            Channel::P | Channel::Q | Channel::R => Unit::RadPerSecond,
            Channel::Alpha | Channel::De => Unit::Radian,
            Channel::Nz => Unit::G,
            Channel::Tas => Unit::FootPerSecond,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::REQUIRED
            .into_iter()
            .chain(Channel::OPTIONAL)
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown channel `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Second,
    Dimensionless,
    Foot,
    Meter,
    Celsius,
    Fahrenheit,
    Kelvin,
    Radian,
    Degree,
    RadPerSecond,
    DegPerSecond,
    G,
    FootPerSecond,
    Knot,
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "s" => Unit::Second,
            "" | "1" | "-" | "none" => Unit::Dimensionless,
            "ft" => Unit::Foot,
            "m" => Unit::Meter,
            "C" | "degC" => Unit::Celsius,
            "F" | "degF" => Unit::Fahrenheit,
            "K" => Unit::Kelvin,
            "rad" => Unit::Radian,
            "deg" => Unit::Degree,
            "rad/s" => Unit::RadPerSecond,
            "deg/s" => Unit::DegPerSecond,
            "g" => Unit::G,
            "ft/s" => Unit::FootPerSecond,
            "kt" | "knots" => Unit::Knot,
            other => return invalid(format!("unknown unit `{other}`")),
        })
    }
}

impl Unit {
    /// Converter from `self` into `target`, if the two are commensurable.
    fn converter(self, target: Unit) -> Option<fn(f64) -> f64> {
        use Unit::*;
        let f: fn(f64) -> f64 = match (self, target) {
            (a, b) if a == b => |v| v,
            (Meter, Foot) => |v| v / 0.3048,
            (Fahrenheit, Celsius) => |v| (v - 32.0) / 1.8,
            (Kelvin, Celsius) => |v| v - 273.15,
            (Degree, Radian) => |v| v.to_radians(),
            (DegPerSecond, RadPerSecond) => |v| v.to_radians(),
            (Knot, FootPerSecond) => |v| v * 1852.0 / 0.3048 / 3600.0,
            _ => return None,
        };
        Some(f)
    }
}

/// Channel mapping and cleaning rules for [`load_flight_csv`].
#[derive(Clone, Debug, PartialEq)]
pub struct LoadOptions {
    /// Logical channel → CSV header name. Required channels must be present.
    pub columns: BTreeMap<Channel, String>,
    /// Logical channel → unit of the file's column. Missing entries mean the
    /// canonical unit.
    pub units: BTreeMap<Channel, Unit>,
    pub min_rows: usize,
}

impl LoadOptions {
    /// Identity mapping: headers equal the logical channel names.
    pub fn identity() -> Self {
        Self {
            columns: Channel::REQUIRED
                .into_iter()
                .map(|c| (c, c.name().to_string()))
                .collect(),
            units: BTreeMap::new(),
            min_rows: 10,
        }
    }

    /// Builds options from string maps as found in a config file.
    pub fn from_maps(
        columns: &BTreeMap<String, String>,
        units: &BTreeMap<String, String>,
        min_rows: usize,
    ) -> Result<Self> {
        let mut cols = BTreeMap::new();
        for (k, v) in columns {
            cols.insert(k.parse::<Channel>()?, v.clone());
        }
        let mut us = BTreeMap::new();
        for (k, v) in units {
            us.insert(k.parse::<Channel>()?, v.parse::<Unit>()?);
        }
        let opts = Self {
            columns: cols,
            units: us,
            min_rows,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn validate(&self) -> Result<()> {
        for c in Channel::REQUIRED {
            if !self.columns.contains_key(&c) {
                return invalid(format!("column map lacks required channel `{c}`"));
            }
        }
        for (c, u) in &self.units {
            if u.converter(c.canonical_unit()).is_none() {
                return invalid(format!("unit {u:?} is not valid for channel `{c}`"));
            }
        }
        Ok(())
    }
}

/// Flight record in canonical units: s, ft, °C, rad/s, rad, g, ft/s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawFlightSeries {
    pub time: Vec<f64>,
    pub mach: Vec<f64>,
    pub pressure_altitude: Vec<f64>,
    pub oat: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub de: Vec<f64>,
    pub nz: Vec<f64>,
    pub tas: Option<Vec<f64>>,
    pub cg: Option<Vec<f64>>,
}

impl RawFlightSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn channel(&self, c: Channel) -> Option<&[f64]> {
        Some(match c {
            Channel::Time => &self.time,
            Channel::Mach => &self.mach,
            Channel::PressureAltitude => &self.pressure_altitude,
            Channel::Oat => &self.oat,
            Channel::P => &self.p,
            Channel::Q => &self.q,
            Channel::R => &self.r,
            Channel::Alpha => &self.alpha,
            Channel::De => &self.de,
            Channel::Nz => &self.nz,
            Channel::Tas => return self.tas.as_deref(),
            Channel::Cg => return self.cg.as_deref(),
        })
    }

    fn channel_mut(&mut self, c: Channel) -> &mut Vec<f64> {
        match c {
            Channel::Time => &mut self.time,
            Channel::Mach => &mut self.mach,
            Channel::PressureAltitude => &mut self.pressure_altitude,
            Channel::Oat => &mut self.oat,
            Channel::P => &mut self.p,
            Channel::Q => &mut self.q,
            Channel::R => &mut self.r,
            Channel::Alpha => &mut self.alpha,
            Channel::De => &mut self.de,
            Channel::Nz => &mut self.nz,
            Channel::Tas => self.tas.get_or_insert_with(Vec::new),
            Channel::Cg => self.cg.get_or_insert_with(Vec::new),
        }
    }

    /// Checks lengths, finiteness and strictly increasing time.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for c in Channel::REQUIRED.into_iter().chain(Channel::OPTIONAL) {
            if let Some(v) = self.channel(c) {
                if v.len() != n {
                    return invalid(format!("channel `{c}` has {} samples, time has {n}", v.len()));
                }
                if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: c as usize });
                }
            }
        }
        for i in 1..n {
            if !(self.time[i] > self.time[i - 1]) {
                return Err(Error::NonMonotoneTime { row: i, t: self.time[i] });
            }
        }
        Ok(())
    }

    /// Writes the record with the identity header layout.
    pub fn write_csv<W: std::io::Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        let mut out = w;
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        let mut chans: Vec<Channel> = Channel::REQUIRED.to_vec();
        chans.extend(Channel::OPTIONAL.into_iter().filter(|c| self.channel(*c).is_some()));
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(chans.iter().map(|c| c.name()))?;
        for i in 0..self.len() {
            wtr.write_record(chans.iter().map(|c| format_value(self.channel(*c).unwrap()[i])))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal representation.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

/// Row accounting of a load.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_in: usize,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub dropped_non_finite: usize,
    pub dropped_duplicate_time: usize,
}

#[derive(Clone, Debug)]
pub struct LoadedSeries {
    pub series: RawFlightSeries,
    pub report: LoadReport,
}

pub fn load_flight_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<LoadedSeries> {
    let file = std::fs::File::open(path.as_ref())?;
    read_flight_csv(file, options)
}

/// Parses a telemetry CSV. Lines starting with `#` are comments.
pub fn read_flight_csv<R: Read>(reader: R, options: &LoadOptions) -> Result<LoadedSeries> {
    options.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::TooFewRows {
            found: 0,
            min: options.min_rows,
        });
    }
    let mut cols: Vec<(Channel, usize, fn(f64) -> f64)> = Vec::new();
    for (&c, name) in &options.columns {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        let unit = options.units.get(&c).copied().unwrap_or(c.canonical_unit());
        let conv = unit
            .converter(c.canonical_unit())
            .expect("validated above");
        cols.push((c, idx, conv));
    }

    let mut series = RawFlightSeries::default();
    for (c, _, _) in &cols {
        series.channel_mut(*c);
    }
    let mut report = LoadReport::default();
    let mut values = vec![0.0; cols.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        report.rows_in += 1;
        let mut finite = true;
        for (k, (_, idx, conv)) in cols.iter().enumerate() {
            let cell = rec.get(*idx).unwrap_or("");
            let v = if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: row + 1,
                    col: headers[*idx].to_string(),
                    value: cell.to_string(),
                })?
            };
            let v = conv(v);
            finite &= v.is_finite();
            values[k] = v;
        }
        if !finite {
            report.dropped_non_finite += 1;
            continue;
        }
        let t = values[cols.iter().position(|c| c.0 == Channel::Time).unwrap()];
        if let Some(&last) = series.time.last() {
            if t == last {
                report.dropped_duplicate_time += 1;
                continue;
            }
            if t < last {
                return Err(Error::NonMonotoneTime { row: row + 1, t });
            }
        }
        for (k, (c, _, _)) in cols.iter().enumerate() {
            series.channel_mut(*c).push(values[k]);
        }
    }
    report.rows_used = series.len();
    report.rows_dropped = report.dropped_non_finite + report.dropped_duplicate_time;
    if report.rows_used < options.min_rows {
        return Err(Error::TooFewRows {
            found: report.rows_used,
            min: options.min_rows,
        });
    }
    Ok(LoadedSeries { series, report })
}

/// Resampling and smoothing settings for [`derive_channels`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingConfig {
    /// Uniform sample interval after resampling, s.
    pub dt: f64,
    /// Centered moving-average window applied to Q before differentiation
    /// (odd, 1 disables).
    pub qdot_window: usize,
    /// Centered moving-average window applied to every channel after
    /// resampling (odd, 1 disables).
    pub channel_window: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            qdot_window: 5,
            channel_window: 1,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        for (name, w) in [
            ("qdot_window", self.qdot_window),
            ("channel_window", self.channel_window),
        ] {
            if w == 0 || w % 2 == 0 {
                return invalid(format!("{name} must be odd and >= 1, got {w}"));
            }
        }
        Ok(())
    }
}

/// Per-sample state, pitch acceleration and load factor on a uniform time base.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DerivedFlightSeries {
    pub time: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Pitch acceleration, rad/s².
    pub qdot: Vec<f64>,
    /// Normal load factor, g.
    pub nz: Vec<f64>,
    pub warnings: Vec<String>,
}

impl DerivedFlightSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub const HEADER: [&'static str; 11] = [
        "time", "mach", "rho", "qbar", "p", "q", "r", "alpha", "de", "qdot", "nz",
    ];

    pub fn write_csv<W: std::io::Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        let mut out = w;
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(Self::HEADER)?;
        for i in 0..self.len() {
            let s = self.states[i].to_array();
            let mut rec = vec![format_value(self.time[i])];
            rec.extend(s.iter().map(|v| format_value(*v)));
            rec.push(format_value(self.qdot[i]));
            rec.push(format_value(self.nz[i]));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr.headers()?.clone();
        let mut idx = [0usize; 11];
        for (k, name) in Self::HEADER.iter().enumerate() {
            idx[k] = headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        }
        let mut out = Self::default();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut v = [0.0; 11];
            for k in 0..11 {
                let cell = rec.get(idx[k]).unwrap_or("");
                v[k] = cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: row + 1,
                    col: Self::HEADER[k].to_string(),
                    value: cell.to_string(),
                })?;
                if !v[k].is_finite() {
                    return Err(Error::NonFinite { row: row + 1, col: k });
                }
            }
            out.time.push(v[0]);
            out.states.push(StateVector::from_array([
                v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8],
            ]));
            out.qdot.push(v[9]);
            out.nz.push(v[10]);
        }
        Ok(out)
    }
}

/// Resamples to a uniform grid, smooths, and derives ρ, q̄ and Q̇.
pub fn derive_channels(raw: &RawFlightSeries, smoothing: &SmoothingConfig) -> Result<DerivedFlightSeries> {
    smoothing.validate()?;
    raw.validate()?;
    if raw.len() < 2 {
        return Err(Error::TooFewRows {
            found: raw.len(),
            min: 2,
        });
    }
    let dt = smoothing.dt;
    let t0 = raw.time[0];
    let span = raw.time[raw.len() - 1] - t0;
    let m = (span / dt + 1e-9).floor() as usize + 1;
    let time: Vec<f64> = (0..m).map(|k| t0 + k as f64 * dt).collect();
    let mut warnings = Vec::new();

    let resample = |v: &[f64]| interpolate(&raw.time, v, &time);
    let smooth_all = |v: Vec<f64>, warnings: &mut Vec<String>, name: &str| {
        if smoothing.channel_window <= 1 {
            v
        } else if v.len() < smoothing.channel_window {
            warnings.push(format!(
                "channel smoothing skipped for `{name}`: {} samples < window {}",
                v.len(),
                smoothing.channel_window
            ));
            v
        } else {
            moving_average(&v, smoothing.channel_window)
        }
    };
    let mut ch = |c: Channel| smooth_all(resample(raw.channel(c).unwrap()), &mut warnings, c.name());
    let mach = ch(Channel::Mach);
    let h = ch(Channel::PressureAltitude);
    let oat = ch(Channel::Oat);
    let p = ch(Channel::P);
    let q = ch(Channel::Q);
    let r = ch(Channel::R);
    let alpha = ch(Channel::Alpha);
    let de = ch(Channel::De);
    let nz = ch(Channel::Nz);

    let q_smooth = if smoothing.qdot_window <= 1 {
        q.clone()
    } else if q.len() < smoothing.qdot_window {
        warnings.push(format!(
            "Q smoothing skipped: {} samples < window {}",
            q.len(),
            smoothing.qdot_window
        ));
        q.clone()
    } else {
        moving_average(&q, smoothing.qdot_window)
    };
    let qdot = differentiate(&q_smooth, dt);

    let mut states = Vec::with_capacity(m);
    for i in 0..m {
        let rho = air_density(h[i], oat[i])?;
        let qbar = dynamic_pressure(rho, mach[i], oat[i]);
        let s = StateVector {
            mach: mach[i],
            rho,
            qbar,
            p: p[i],
            q: q[i],
            r: r[i],
            alpha: alpha[i],
            de: de[i],
        };
        s.validate()
            .map_err(|e| Error::Invalid(format!("at t = {}: {e}", time[i])))?;
        states.push(s);
    }
    Ok(DerivedFlightSeries {
        time,
        states,
        qdot,
        nz,
        warnings,
    })
}

/// Linear interpolation of `(t, v)` at `at`; `t` strictly increasing and
/// `at` inside `[t[0], t[n-1]]` up to rounding.
pub fn interpolate(t: &[f64], v: &[f64], at: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut j = 0;
    at.iter()
        .map(|&x| {
            while j + 2 < n && t[j + 1] <= x {
                j += 1;
            }
            if n == 1 {
                return v[0];
            }
            let (t0, t1) = (t[j], t[j + 1]);
            if x <= t0 {
                return v[j];
            }
            if x >= t1 {
                return v[j + 1];
            }
            let w = (x - t0) / (t1 - t0);
            v[j] + w * (v[j + 1] - v[j])
        })
        .collect()
}

/// Centered moving average with a window that shrinks symmetrically at the ends.
pub fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let n = v.len();
    let half = window / 2;
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            if h == 0 {
                return v[i];
            }
            v[i - h..=i + h].iter().sum::<f64>() / (2 * h + 1) as f64
        })
        .collect()
}

/// Fourth-order finite differences: 5-point central in the interior,
/// 5-point one-sided near the ends; lower order for very short series.
pub fn differentiate(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2..=4 => (0..n)
            .map(|i| {
                if i == 0 {
                    (v[1] - v[0]) / dt
                } else if i == n - 1 {
                    (v[n - 1] - v[n - 2]) / dt
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * dt)
                }
            })
            .collect(),
        _ => (0..n)
            .map(|i| {
                if i >= 2 && i + 2 < n {
                    (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dt)
                } else if i < 2 {
                    let f = &v[i..i + 5];
                    if i == 0 {
                        (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4])
                            / (12.0 * dt)
                    } else {
                        // Stencil offsets -1..3 around i.
                        let f = &v[i - 1..i + 4];
                        (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * dt)
                    }
                } else if i == n - 1 {
                    let f = &v[n - 5..n];
                    (25.0 * f[4] - 48.0 * f[3] + 36.0 * f[2] - 16.0 * f[1] + 3.0 * f[0]) / (12.0 * dt)
                } else {
                    let f = &v[n - 5..n];
                    (3.0 * f[4] + 10.0 * f[3] - 18.0 * f[2] + 6.0 * f[1] - f[0]) / (12.0 * dt)
                }
            })
            .collect(),
    }
}

/// Stride that brings `n` samples to at most `cap`.
pub fn decimation_stride(n: usize, cap: usize) -> usize {
    if cap == 0 || n <= cap {
        1
    } else {
        n.div_ceil(cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const HEADER: &str = "t,M,hp,oat,p,q,r,aoa,de,nz\n";

    fn opts() -> LoadOptions {
        let names = [
            (Channel::Time, "t"),
            (Channel::Mach, "M"),
            (Channel::PressureAltitude, "hp"),
            (Channel::Oat, "oat"),
            (Channel::P, "p"),
            (Channel::Q, "q"),
            (Channel::R, "r"),
            (Channel::Alpha, "aoa"),
            (Channel::De, "de"),
            (Channel::Nz, "nz"),
        ];
        LoadOptions {
            columns: names.iter().map(|(c, n)| (*c, n.to_string())).collect(),
            units: BTreeMap::new(),
            min_rows: 3,
        }
    }

    fn row(t: f64, aoa: f64) -> String {
        format!("{t},0.7,20000,-24.6,0,0.01,0,{aoa},-0.02,1.0\n")
    }

    #[test]
    fn three_rows() {
        let text = format!("{HEADER}{}{}{}", row(0.0, 0.05), row(0.02, 0.06), row(0.04, 0.07));
        let l = read_flight_csv(text.as_bytes(), &opts()).unwrap();
        assert_eq!(l.series.len(), 3);
        assert_eq!(l.report.rows_in, 3);
        assert_eq!(l.report.rows_dropped, 0);
    }

    #[test]
    fn default_minimum_rows() {
        let text = format!("{HEADER}{}{}{}", row(0.0, 0.05), row(0.02, 0.06), row(0.04, 0.07));
        let mut o = opts();
        o.min_rows = 10;
        assert!(matches!(
            read_flight_csv(text.as_bytes(), &o),
            Err(Error::TooFewRows { found: 3, min: 10 })
        ));
    }

    #[test]
    fn degrees_converted() {
        let text = format!("{HEADER}{}{}{}", row(0.0, 5.0), row(0.02, 6.0), row(0.04, 7.0));
        let mut o = opts();
        o.units.insert(Channel::Alpha, Unit::Degree);
        let l = read_flight_csv(text.as_bytes(), &o).unwrap();
        assert!((l.series.alpha[0] - 5.0 / (180.0 / PI)).abs() < 1e-15);
    }

    #[test]
    fn knots_converted() {
        assert!((Unit::Knot.converter(Unit::FootPerSecond).unwrap()(1.0) - 1.687_809_857).abs() < 1e-8);
        assert!(Unit::Knot.converter(Unit::Radian).is_none());
    }

    #[test]
    fn missing_column_named() {
        let mut o = opts();
        o.columns.insert(Channel::Nz, "load_factor".into());
        let text = format!("{HEADER}{}", row(0.0, 0.05));
        match read_flight_csv(text.as_bytes(), &o) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "load_factor"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unparseable_cell_reported() {
        let text = format!("{HEADER}{}0.02,0.7,20000,-24.6,0,zz,0,0.05,-0.02,1.0\n", row(0.0, 0.05));
        match read_flight_csv(text.as_bytes(), &opts()) {
            Err(Error::Parse { row, col, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(col, "q");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nan_and_duplicates_accounted() {
        let text = format!(
            "{HEADER}{}{}0.04,0.7,20000,-24.6,0,,0,0.05,-0.02,1.0\n0.06,NaN,20000,-24.6,0,0,0,0.05,-0.02,1.0\n{}{}",
            row(0.0, 0.05),
            row(0.0, 0.05),
            row(0.08, 0.05),
            row(0.10, 0.05)
        );
        let l = read_flight_csv(text.as_bytes(), &opts()).unwrap();
        let r = &l.report;
        assert_eq!(r.rows_in, 6);
        assert_eq!(r.dropped_non_finite, 2);
        assert_eq!(r.dropped_duplicate_time, 1);
        assert_eq!(r.rows_in, r.rows_used + r.rows_dropped);
        assert_eq!(l.series.time, vec![0.0, 0.08, 0.10]);
    }

    #[test]
    fn decreasing_time_rejected() {
        let text = format!("{HEADER}{}{}{}", row(0.0, 0.05), row(0.04, 0.05), row(0.02, 0.05));
        assert!(matches!(
            read_flight_csv(text.as_bytes(), &opts()),
            Err(Error::NonMonotoneTime { .. })
        ));
    }

    #[test]
    fn empty_file_rejected() {
        assert!(read_flight_csv("".as_bytes(), &opts()).is_err());
        assert!(read_flight_csv(HEADER.as_bytes(), &opts()).is_err());
    }

    fn series_from(time: Vec<f64>, q: Vec<f64>) -> RawFlightSeries {
        let n = time.len();
        RawFlightSeries {
            time,
            mach: vec![0.7; n],
            pressure_altitude: vec![20000.0; n],
            oat: vec![-24.6; n],
            p: vec![0.0; n],
            q,
            r: vec![0.0; n],
            alpha: vec![0.05; n],
            de: vec![-0.02; n],
            nz: vec![1.0; n],
            tas: None,
            cg: None,
        }
    }

    #[test]
    fn constant_q_gives_zero_qdot() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.02).collect();
        let d = derive_channels(&series_from(t, vec![0.03; 100]), &SmoothingConfig::default()).unwrap();
        assert!(d.qdot.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sine_derivative_within_tolerance() {
        let t: Vec<f64> = (0..=250).map(|i| i as f64 * 0.02).collect();
        let q = t.iter().map(|t| 0.1 * (2.0 * PI * t).sin()).collect();
        let cfg = SmoothingConfig {
            qdot_window: 1,
            ..Default::default()
        };
        let d = derive_channels(&series_from(t.clone(), q), &cfg).unwrap();
        let worst = d
            .time
            .iter()
            .zip(&d.qdot)
            .map(|(t, v)| (v - 0.2 * PI * (2.0 * PI * t).cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn smoothing_default_error_at_one_hz() {
        // RMS relative error of the default smoother + differentiator at 1 Hz.
        let t: Vec<f64> = (0..=500).map(|i| i as f64 * 0.02).collect();
        let q = t.iter().map(|t| 0.1 * (2.0 * PI * t).sin()).collect();
        let d = derive_channels(&series_from(t, q), &SmoothingConfig::default()).unwrap();
        let (mut se, mut ss) = (0.0, 0.0);
        for (t, v) in d.time.iter().zip(&d.qdot).skip(10).take(480) {
            let want = 0.2 * PI * (2.0 * PI * t).cos();
            se += (v - want).powi(2);
            ss += want * want;
        }
        let rel = (se / ss).sqrt();
        assert!(rel < 0.02, "{rel}");
    }

    #[test]
    fn short_series_skips_smoothing() {
        let t: Vec<f64> = (0..3).map(|i| i as f64 * 0.02).collect();
        let d = derive_channels(&series_from(t, vec![0.0, 0.1, 0.2]), &SmoothingConfig::default())
            .unwrap();
        assert_eq!(d.warnings.len(), 1);
        assert!((d.qdot[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn resampling_preserves_mean() {
        let mut t = Vec::new();
        let mut x = 0.0;
        for i in 0..2000 {
            t.push(x);
            x += 0.013 + 0.01 * ((i * 7919) % 13) as f64 / 13.0;
        }
        let q: Vec<f64> = t
            .iter()
            .map(|t| 0.05 + 0.1 * (2.0 * PI * 0.3 * t).sin() + 0.02 * (2.0 * PI * 1.1 * t).cos())
            .collect();
        let raw_mean = {
            // Time-weighted mean of the irregular record.
            let mut s = 0.0;
            for i in 1..t.len() {
                s += 0.5 * (q[i] + q[i - 1]) * (t[i] - t[i - 1]);
            }
            s / (t[t.len() - 1] - t[0])
        };
        let d = derive_channels(&series_from(t, q), &SmoothingConfig::default()).unwrap();
        let m = d.states.iter().map(|s| s.q).sum::<f64>() / d.len() as f64;
        assert!((m / raw_mean - 1.0).abs() < 0.01, "{m} vs {raw_mean}");
    }

    #[test]
    fn stencils_exact_on_quartic() {
        let dt = 0.1;
        let v: Vec<f64> = (0..9).map(|i| (i as f64 * dt).powi(4) - 2.0 * (i as f64 * dt)).collect();
        let d = differentiate(&v, dt);
        for (i, g) in d.iter().enumerate() {
            let x = i as f64 * dt;
            assert!((g - (4.0 * x.powi(3) - 2.0)).abs() < 1e-10, "i {i}: {g}");
        }
    }

    #[test]
    fn moving_average_keeps_lines() {
        let v: Vec<f64> = (0..20).map(|i| 3.0 - 0.5 * i as f64).collect();
        let s = moving_average(&v, 7);
        for (a, b) in s.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stride() {
        assert_eq!(decimation_stride(100, 20000), 1);
        assert_eq!(decimation_stride(4501, 1000), 5);
        assert_eq!(decimation_stride(20001, 20000), 2);
    }

    #[test]
    fn derived_csv_roundtrip() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.02).collect();
        let q = t.iter().map(|t| 0.1 * t.sin()).collect();
        let d = derive_channels(&series_from(t, q), &SmoothingConfig::default()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, Some("test")).unwrap();
        let back = DerivedFlightSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.states, d.states);
        assert_eq!(back.qdot, d.qdot);
    }
}
