//! Trim functions `α = a·exp(−b q̄)` and `δe = c + d ln q̄` per Mach bin.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::aero::StateVector;
use crate::error::{invalid, Error, Result};

pub const MIN_SHOTS: usize = 3;

/// Steady, zero-rate flight measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimShot {
    pub qbar: f64,
    pub mach: f64,
    pub alpha: f64,
    pub de: f64,
    pub rho: f64,
    pub oat: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTrimFit {
    pub a: f64,
    pub b: f64,
    /// RMS of `α − a·exp(−b q̄)`, rad.
    pub residual_rms: f64,
    pub n: usize,
    /// Whether the Gauss-Newton pass on the exponential model was kept.
    pub refined: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaTrimFit {
    pub c: f64,
    pub d: f64,
    /// RMS of `δe − (c + d ln q̄)`, rad.
    pub residual_rms: f64,
    pub n: usize,
}

/// Simple linear regression `y = β0 + β1 x` on centered data.
fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if !(sxx > n * (1e-12 * scale).powi(2)) {
        return Err(Error::RankDeficient(
            "all trim shots share the same dynamic pressure".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

fn check_count(shots: &[TrimShot]) -> Result<()> {
    if shots.len() < MIN_SHOTS {
        return invalid(format!(
            "trim fit needs at least {MIN_SHOTS} shots, got {}",
            shots.len()
        ));
    }
    for (i, s) in shots.iter().enumerate() {
        if !(s.qbar > 0.0 && s.qbar.is_finite()) {
            return invalid(format!("trim shot {i} has non-positive qbar {}", s.qbar));
        }
        if !s.alpha.is_finite() || !s.de.is_finite() {
            return invalid(format!("trim shot {i} has non-finite alpha or de"));
        }
    }
    Ok(())
}

fn alpha_rms(shots: &[TrimShot], a: f64, b: f64) -> f64 {
    let ss: f64 = shots
        .iter()
        .map(|s| (s.alpha - a * (-b * s.qbar).exp()).powi(2))
        .sum();
    (ss / shots.len() as f64).sqrt()
}

/// Log-linear fit of `ln α = ln a − b q̄`, followed by a Gauss-Newton pass on
/// the exponential form that is kept only if it lowers the residual RMS.
pub fn fit_alpha_trim(shots: &[TrimShot]) -> Result<AlphaTrimFit> {
    check_count(shots)?;
    if let Some(i) = shots.iter().position(|s| !(s.alpha > 0.0)) {
        return invalid(format!(
            "trim shot {i} has alpha {} <= 0; the log-linear fit needs alpha > 0",
            shots[i].alpha
        ));
    }
    let q: Vec<f64> = shots.iter().map(|s| s.qbar).collect();
    let ln_alpha: Vec<f64> = shots.iter().map(|s| s.alpha.ln()).collect();
    let (ln_a, slope) = line_fit(&q, &ln_alpha)?;
    let (a0, b0) = (ln_a.exp(), -slope);
    let rms0 = alpha_rms(shots, a0, b0);

    let (a1, b1) = gauss_newton(shots, a0, b0);
    let rms1 = alpha_rms(shots, a1, b1);
    let refined = rms1.is_finite() && rms1 < rms0;
    let (a, b, rms) = if refined { (a1, b1, rms1) } else { (a0, b0, rms0) };
    Ok(AlphaTrimFit {
        a,
        b,
        residual_rms: rms,
        n: shots.len(),
        refined,
    })
}

fn gauss_newton(shots: &[TrimShot], mut a: f64, mut b: f64) -> (f64, f64) {
    for _ in 0..50 {
        // Normal equations of the 2-parameter problem.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in shots {
            let e = (-b * s.qbar).exp();
            let r = s.alpha - a * e;
            let da = e;
            let db = -a * s.qbar * e;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let det = jaa * jbb - jab * jab;
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let step_a = (jbb * ga - jab * gb) / det;
        let step_b = (jaa * gb - jab * ga) / det;
        a += step_a;
        b += step_b;
        if step_a.abs() <= 1e-15 * a.abs() && step_b.abs() <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
    }
    (a, b)
}

/// Ordinary least squares of `δe` on `ln q̄`.
pub fn fit_delta_trim(shots: &[TrimShot]) -> Result<DeltaTrimFit> {
    check_count(shots)?;
    let lnq: Vec<f64> = shots.iter().map(|s| s.qbar.ln()).collect();
    let de: Vec<f64> = shots.iter().map(|s| s.de).collect();
    let (c, d) = line_fit(&lnq, &de)?;
    let ss: f64 = lnq
        .iter()
        .zip(&de)
        .map(|(l, y)| (y - c - d * l).powi(2))
        .sum();
    Ok(DeltaTrimFit {
        c,
        d,
        residual_rms: (ss / shots.len() as f64).sqrt(),
        n: shots.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimFit {
    pub alpha: AlphaTrimFit,
    pub de: DeltaTrimFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimBin {
    pub mach_lo: f64,
    pub mach_hi: f64,
    pub shots: usize,
    pub fit: Option<TrimFit>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TrimBin {
    pub fn contains(&self, mach: f64) -> bool {
        mach >= self.mach_lo && mach < self.mach_hi
    }
}

/// Trim functions for a set of Mach bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimModel {
    pub bins: Vec<TrimBin>,
}

pub const DEFAULT_MACH_BINS: [(f64, f64); 4] = [(0.4, 0.6), (0.6, 0.8), (0.8, 1.0), (1.0, 1.2)];

pub fn validate_bins(edges: &[(f64, f64)]) -> Result<()> {
    if edges.is_empty() {
        return invalid("at least one Mach bin is required");
    }
    for (i, &(lo, hi)) in edges.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return invalid(format!("Mach bin {i} [{lo}, {hi}) is empty or not finite"));
        }
        if i > 0 && lo < edges[i - 1].1 {
            return invalid(format!("Mach bin {i} overlaps or is out of order"));
        }
    }
    Ok(())
}

impl TrimModel {
    /// Assigns shots to bins and fits each bin with at least three shots.
    pub fn fit(shots: &[TrimShot], edges: &[(f64, f64)]) -> Result<Self> {
        validate_bins(edges)?;
        let mut bins = Vec::with_capacity(edges.len());
        for &(lo, hi) in edges {
            let members: Vec<TrimShot> = shots
                .iter()
                .copied()
                .filter(|s| s.mach >= lo && s.mach < hi)
                .collect();
            let mut bin = TrimBin {
                mach_lo: lo,
                mach_hi: hi,
                shots: members.len(),
                fit: None,
                warnings: Vec::new(),
            };
            if members.len() >= MIN_SHOTS {
                let alpha = fit_alpha_trim(&members)?;
                let de = fit_delta_trim(&members)?;
                if !(alpha.b > 0.0) {
                    bin.warnings
                        .push(format!("b = {} is not positive; alpha_trim does not decay", alpha.b));
                }
                bin.fit = Some(TrimFit { alpha, de });
            }
            bins.push(bin);
        }
        Ok(Self { bins })
    }

    /// Model with given coefficients in a single bin.
    pub fn single(mach_lo: f64, mach_hi: f64, a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            bins: vec![TrimBin {
                mach_lo,
                mach_hi,
                shots: 0,
                fit: Some(TrimFit {
                    alpha: AlphaTrimFit {
                        a,
                        b,
                        residual_rms: 0.0,
                        n: 0,
                        refined: false,
                    },
                    de: DeltaTrimFit {
                        c,
                        d,
                        residual_rms: 0.0,
                        n: 0,
                    },
                }),
                warnings: Vec::new(),
            }],
        }
    }

    pub fn edges(&self) -> Vec<(f64, f64)> {
        self.bins.iter().map(|b| (b.mach_lo, b.mach_hi)).collect()
    }

    pub fn bin_for(&self, mach: f64) -> Result<&TrimBin> {
        self.bins
            .iter()
            .find(|b| b.contains(mach))
            .ok_or_else(|| Error::MachOutsideBins {
                mach,
                edges: self.edges(),
            })
    }

    pub fn fit_for(&self, mach: f64) -> Result<&TrimFit> {
        let bin = self.bin_for(mach)?;
        bin.fit.as_ref().ok_or(Error::UnfittedBin {
            lo: bin.mach_lo,
            hi: bin.mach_hi,
            shots: bin.shots,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        validate_bins(&m.edges())?;
        Ok(m)
    }
}

/// Trim state at `(q̄, M, ρ)`: zero rates, α and δe from the bin's functions.
pub fn trim_state(tm: &TrimModel, qbar: f64, mach: f64, rho: f64) -> Result<StateVector> {
    if !(qbar > 0.0) {
        return invalid(format!("qbar must be positive, got {qbar}"));
    }
    let f = tm.fit_for(mach)?;
    let s = StateVector {
        mach,
        rho,
        qbar,
        p: 0.0,
        q: 0.0,
        r: 0.0,
        alpha: f.alpha.a * (-f.alpha.b * qbar).exp(),
        de: f.de.c + f.de.d * qbar.ln(),
    };
    s.validate()?;
    Ok(s)
}

pub const TRIM_CSV_HEADER: [&str; 6] = ["qbar", "mach", "alpha", "de", "rho", "oat"];

/// Reads trim shots from CSV with columns `qbar, mach, alpha, de, rho, oat`
/// (lb/ft², -, rad, rad, slug/ft³, °C). `#` lines are comments.
pub fn read_trim_shots<R: Read>(r: R) -> Result<Vec<TrimShot>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    for h in TRIM_CSV_HEADER {
        if !headers.iter().any(|x| x == h) {
            return Err(Error::MissingColumn(h.to_string()));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let shot: TrimShot = rec?;
        out.push(shot);
    }
    Ok(out)
}

pub fn write_trim_shots<W: std::io::Write>(w: W, shots: &[TrimShot], comment: Option<&str>) -> Result<()> {
    let mut out = w;
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(TRIM_CSV_HEADER)?;
    for s in shots {
        wtr.write_record([s.qbar, s.mach, s.alpha, s.de, s.rho, s.oat].map(crate::ingest::format_value))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn shots(a: f64, b: f64, c: f64, d: f64, qs: &[f64]) -> Vec<TrimShot> {
        qs.iter()
            .map(|&q| TrimShot {
                qbar: q,
                mach: 0.7,
                alpha: a * (-b * q).exp(),
                de: c + d * q.ln(),
                rho: 1e-3,
                oat: -30.0,
            })
            .collect()
    }

    fn grid() -> Vec<f64> {
        (1..=8).map(|i| 100.0 * i as f64).collect()
    }

    #[test]
    fn noiseless_alpha_recovery() {
        let f = fit_alpha_trim(&shots(0.2, 0.002, 0.0, 0.0, &grid())).unwrap();
        assert!((f.a / 0.2 - 1.0).abs() < 1e-10);
        assert!((f.b / 0.002 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn noisy_alpha_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let qs: Vec<f64> = (0..50).map(|i| 100.0 + 14.0 * i as f64).collect();
        let mut s = shots(0.15, 0.003, 0.0, 0.0, &qs);
        for shot in &mut s {
            shot.alpha *= 1.0 + noise.sample(&mut rng);
        }
        let f = fit_alpha_trim(&s).unwrap();
        assert!((f.a / 0.15 - 1.0).abs() < 0.05, "{}", f.a);
        assert!((f.b / 0.003 - 1.0).abs() < 0.05, "{}", f.b);
    }

    #[test]
    fn two_shots_rejected() {
        let s = shots(0.2, 0.002, 0.0, 0.0, &[100.0, 200.0]);
        assert!(fit_alpha_trim(&s).is_err());
        assert!(fit_delta_trim(&s).is_err());
    }

    #[test]
    fn nonpositive_alpha_named() {
        let mut s = shots(0.2, 0.002, 0.0, 0.0, &grid());
        s[3].alpha = -0.01;
        let e = fit_alpha_trim(&s).unwrap_err().to_string();
        assert!(e.contains("shot 3"), "{e}");
    }

    #[test]
    fn equal_qbar_rank_deficient() {
        let s = shots(0.2, 0.002, 0.0, 0.0, &[300.0; 5]);
        assert!(matches!(fit_alpha_trim(&s), Err(Error::RankDeficient(_))));
        assert!(matches!(fit_delta_trim(&s), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn delta_examples() {
        let f = fit_delta_trim(&shots(0.1, 0.0, -0.05, 0.01, &grid())).unwrap();
        assert!((f.c + 0.05).abs() < 1e-12 && (f.d - 0.01).abs() < 1e-12);
        let f = fit_delta_trim(&shots(0.1, 0.0, -0.03, 0.0, &grid())).unwrap();
        assert!((f.c + 0.03).abs() < 1e-15 && f.d.abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.002).unwrap();
        let qs: Vec<f64> = (0..50).map(|i| 100.0 + 14.0 * i as f64).collect();
        let mut s = shots(0.1, 0.0, -0.2, 0.03, &qs);
        for shot in &mut s {
            shot.de += noise.sample(&mut rng);
        }
        let f = fit_delta_trim(&s).unwrap();
        assert!((f.c / -0.2 - 1.0).abs() < 0.05, "{}", f.c);
        assert!((f.d / 0.03 - 1.0).abs() < 0.05, "{}", f.d);
    }

    #[test]
    fn trim_state_examples() {
        let tm = TrimModel::single(0.6, 0.8, 0.2, 0.0, 0.1, 0.0);
        for q in [100.0, 400.0] {
            let s = trim_state(&tm, q, 0.7, 1e-3).unwrap();
            assert_eq!((s.alpha, s.de), (0.2, 0.1));
            assert_eq!((s.p, s.q, s.r), (0.0, 0.0, 0.0));
        }
        let tm = TrimModel::single(0.6, 0.8, 0.2, 0.002, 0.0, 0.0);
        let s = trim_state(&tm, 500.0, 0.7, 1e-3).unwrap();
        assert!((s.alpha - 0.073_576).abs() < 1e-6);
        match trim_state(&tm, 500.0, 0.9, 1e-3) {
            Err(Error::MachOutsideBins { edges, .. }) => assert_eq!(edges, vec![(0.6, 0.8)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn model_roundtrip_and_bins() {
        let mut s = shots(0.2, 0.002, -0.05, 0.01, &grid());
        s.extend(shots(0.1, 0.001, -0.02, 0.005, &grid()).into_iter().map(|mut x| {
            x.mach = 0.9;
            x
        }));
        let tm = TrimModel::fit(&s, &DEFAULT_MACH_BINS).unwrap();
        assert_eq!(tm.bins.len(), 4);
        let f = tm.fit_for(0.7).unwrap();
        assert!((f.alpha.a / 0.2 - 1.0).abs() < 1e-10 && (f.alpha.b / 0.002 - 1.0).abs() < 1e-10);
        assert!((f.de.c + 0.05).abs() < 1e-10 && (f.de.d - 0.01).abs() < 1e-10);
        let g = tm.fit_for(0.9).unwrap();
        assert!((g.alpha.a / 0.1 - 1.0).abs() < 1e-10);
        assert!(matches!(tm.fit_for(0.5), Err(Error::UnfittedBin { shots: 0, .. })));
        let back = TrimModel::from_json(&tm.to_json().unwrap()).unwrap();
        assert_eq!(back, tm);
    }

    #[test]
    fn increasing_alpha_flags_warning() {
        let s = shots(0.05, -0.001, 0.0, 0.0, &grid());
        let tm = TrimModel::fit(&s, &[(0.6, 0.8)]).unwrap();
        assert_eq!(tm.bins[0].warnings.len(), 1);
    }

    #[test]
    fn overlapping_bins_rejected() {
        assert!(validate_bins(&[(0.4, 0.7), (0.6, 0.8)]).is_err());
        assert!(validate_bins(&[]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let s = shots(0.2, 0.002, -0.05, 0.01, &grid());
        let mut buf = Vec::new();
        write_trim_shots(&mut buf, &s, Some("x")).unwrap();
        assert_eq!(read_trim_shots(buf.as_slice()).unwrap(), s);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn refit_roundtrip(a in 0.02..0.4f64, b in 1e-4..5e-3f64, c in -0.2..0.1f64, d in -0.05..0.05f64) {
                let s = shots(a, b, c, d, &grid());
                let tm = TrimModel::fit(&s, &[(0.6, 0.8)]).unwrap();
                let f = tm.fit_for(0.7).unwrap();
                prop_assert!((f.alpha.a / a - 1.0).abs() < 1e-10);
                prop_assert!((f.alpha.b / b - 1.0).abs() < 1e-10);
                prop_assert!((f.de.c - c).abs() < 1e-10 * (1.0 + c.abs()));
                prop_assert!((f.de.d - d).abs() < 1e-10 * (1.0 + d.abs()));
                let mut last = f64::INFINITY;
                for q in [100.0, 200.0, 400.0, 800.0] {
                    let st = trim_state(&tm, q, 0.7, 1e-3).unwrap();
                    prop_assert!(st.validate().is_ok());
                    prop_assert!(st.alpha < last);
                    last = st.alpha;
                }
            }
        }
    }
}
