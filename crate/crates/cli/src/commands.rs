use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aerogp::dynamics::{export_surface, short_period, sweep_qbar, ShortPeriodResult, SweepRow};
use aerogp::eval::{bundled_historical, read_historical, read_predictions, rmse_grouping, GroupingReport};
use aerogp::ingest::{derive_channels, format_value, load_flight_csv, LoadReport};
use aerogp::pipeline::{fit_target, synthetic_data, FitReport, Scenario, Target};
use aerogp::synth::{analytic_short_period, ChannelNoise, LinearDimensional};
use aerogp::trim::{read_trim_shots, trim_state, write_trim_shots};
use aerogp::{
    DerivedFlightSeries, GpModel, MeanFunction, MorelliCoefficients, StateComponent, StateVector, TrimModel,
    TrueLinearModel, STATE_DIM,
};
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::CliError;

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(aerogp::Error::from)?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string())
}

/// `lo:hi:n` gives n evenly spaced points including both ends; anything
/// else is read as a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::Input(format!("grid `{spec}`: {what}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = if parts.len() == 3 {
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count must be a positive integer"))?;
        match n {
            0 => return Err(bad("count must be a positive integer")),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else if parts.len() == 1 {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(bad("expected lo:hi:n or a comma list"));
    };
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(grid)
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    config_sha256: &'a str,
}

fn provenance(cfg: &LoadedConfig) -> Provenance<'_> {
    Provenance {
        tool: "aerogp",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: &cfg.sha256,
    }
}

#[derive(Serialize)]
struct IngestEntry {
    input: String,
    output: String,
    rows: LoadReport,
    samples: usize,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct IngestReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    files: Vec<IngestEntry>,
}

pub fn ingest(cfg: &LoadedConfig, inputs: &[PathBuf]) -> Result<(), CliError> {
    let mut names: Vec<String> = inputs.iter().map(|p| format!("{}.derived.csv", stem(p))).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Input(format!("two inputs would both write {}", w[0])));
    }

    let mut files = Vec::new();
    for path in inputs {
        let loaded = load_flight_csv(path, &cfg.load_options)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let derived = derive_channels(&loaded.series, &cfg.config.smoothing)?;
        let name = format!("{}.derived.csv", stem(path));
        let out = cfg.output(&name);
        let mut w = create(&out)?;
        derived.write_csv(&mut w, Some(&cfg.stamp()))?;
        w.flush().map_err(io_err(&out))?;
        let r = &loaded.report;
        println!(
            "{}: {} rows in, {} used, {} dropped ({} non-finite, {} duplicate time) -> {} samples",
            path.display(),
            r.rows_in,
            r.rows_used,
            r.rows_dropped,
            r.dropped_non_finite,
            r.dropped_duplicate_time,
            derived.len()
        );
        for warning in &derived.warnings {
            eprintln!("warning: {}: {warning}", path.display());
        }
        files.push(IngestEntry {
            input: path.display().to_string(),
            output: name,
            rows: loaded.report,
            samples: derived.len(),
            warnings: derived.warnings,
        });
    }
    write_json(
        &cfg.output("ingest_report.json"),
        &IngestReport {
            provenance: provenance(cfg),
            files,
        },
    )
}

#[derive(Serialize)]
struct FitFileReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    target: Target,
    prior_only: bool,
    inputs: Vec<String>,
    fit: Option<FitReport>,
    notes: Vec<String>,
}

pub fn fit(cfg: &LoadedConfig, target: &str, prior_only: bool, inputs: &[PathBuf]) -> Result<(), CliError> {
    let target: Target = target.parse()?;
    let (mean, settings) = match target {
        Target::Cm => (cfg.config.cm_mean_function(), &cfg.config.cm),
        Target::Cz => (MeanFunction::Zero, &cfg.config.cz),
    };
    let mut notes = Vec::new();
    let (model, report) = if prior_only {
        if !inputs.is_empty() {
            return Err(CliError::Input("--prior-only takes no input files".into()));
        }
        (GpModel::prior(mean, settings.kernel.clone())?, None)
    } else {
        let series = inputs
            .iter()
            .map(|p| {
                DerivedFlightSeries::read_csv(open(p)?)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (model, report) = fit_target(&series, &cfg.config.geometry, target, &mean, settings)?;
        if report.stride > 1 {
            notes.push(format!(
                "decimated {} rows to {} (stride {}) to respect max_rows = {}",
                report.rows_in, report.rows_used, report.stride, settings.max_rows
            ));
        }
        println!(
            "{}: n = {} (of {}), noise variance {:e}, log marginal likelihood {:.6}, training RMSE {:.3e}",
            target.name(),
            report.rows_used,
            report.rows_in,
            report.noise_variance,
            report.log_marginal_likelihood,
            report.training_rmse
        );
        (model, Some(report))
    };
    for n in &notes {
        eprintln!("note: {n}");
    }

    let model_path = cfg.output(&format!("model_{}.json", target.name()));
    let mut w = create(&model_path)?;
    model.save(&mut w)?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&model_path))?;
    write_json(
        &cfg.output(&format!("fit_report_{}.json", target.name())),
        &FitFileReport {
            provenance: provenance(cfg),
            target,
            prior_only,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            fit: report,
            notes,
        },
    )
}

pub fn fit_trim(cfg: &LoadedConfig, inputs: &[PathBuf]) -> Result<(), CliError> {
    let mut shots = Vec::new();
    for p in inputs {
        let s = read_trim_shots(open(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        shots.extend(s);
    }
    let tm = TrimModel::fit(&shots, &cfg.config.trim.bins)?;
    for bin in &tm.bins {
        match &bin.fit {
            Some(f) => println!(
                "[{}, {}): {} shots, alpha = {:.6} exp(-{:.6e} qbar), de = {:.6} + {:.6} ln qbar",
                bin.mach_lo,
                bin.mach_hi,
                bin.shots,
                f.alpha.a,
                f.alpha.b,
                f.de.c,
                f.de.d
            ),
            None => println!("[{}, {}): {} shots, not fitted", bin.mach_lo, bin.mach_hi, bin.shots),
        }
        for w in &bin.warnings {
            eprintln!("warning: [{}, {}): {w}", bin.mach_lo, bin.mach_hi);
        }
    }
    let path = cfg.output("trim_model.json");
    let mut w = create(&path)?;
    w.write_all(tm.to_json()?.as_bytes())
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(io_err(&path))
}

fn load_model(path: &Path) -> Result<GpModel, CliError> {
    GpModel::load(std::io::BufReader::new(open(path)?)).map_err(|e| match e {
        e if e.is_numerical() => CliError::Core(e),
        e => CliError::Input(format!("{}: {e}", path.display())),
    })
}

fn load_trim(path: &Path) -> Result<TrimModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    TrimModel::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub const SWEEP_HEADER: [&str; 18] = [
    "qbar",
    "mach",
    "rho",
    "u1",
    "alpha_trim",
    "de_trim",
    "cm_alpha",
    "cm_q",
    "cmq_classical",
    "cm_de",
    "cz_alpha",
    "m_alpha",
    "m_q",
    "z_alpha",
    "omega_rad",
    "omega_hz",
    "zeta",
    "error",
];

fn sweep_record(row: &SweepRow) -> Vec<String> {
    let d = &row.derivatives;
    let c = &d.condition;
    let mut rec: Vec<String> = [
        row.qbar,
        c.mach,
        c.rho,
        c.u1,
        row.trim.alpha,
        row.trim.de,
        d.cm_alpha,
        d.cm_q_raw,
        d.cmq_classical,
        d.cm_de,
        d.cz_alpha,
        d.m_alpha,
        d.m_q,
        d.z_alpha,
    ]
    .into_iter()
    .map(format_value)
    .collect();
    match &row.short_period {
        Ok(sp) => {
            rec.extend([sp.omega_rad, sp.omega_hz, sp.zeta].map(format_value));
            rec.push(String::new());
        }
        Err(msg) => {
            rec.extend([String::new(), String::new(), String::new()]);
            rec.push(msg.clone());
        }
    }
    rec
}

pub fn shortperiod(
    cfg: &LoadedConfig,
    cm: &Path,
    cz: &Path,
    trim: &Path,
    mach: f64,
    qbar_grid: &str,
) -> Result<(), CliError> {
    let grid = parse_grid(qbar_grid)?;
    let (cm, cz, tm) = (load_model(cm)?, load_model(cz)?, load_trim(trim)?);
    let rows = sweep_qbar(&cm, &cz, &tm, &cfg.config.geometry, mach, &grid, cfg.config.sweep)?;

    let path = cfg.output(&format!("shortperiod_m{mach:.3}.csv"));
    let mut out = create(&path)?;
    writeln!(out, "# {}", cfg.stamp()).map_err(io_err(&path))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(aerogp::Error::from)?;
    for row in &rows {
        w.write_record(sweep_record(row)).map_err(aerogp::Error::from)?;
    }
    w.flush().map_err(io_err(&path))?;

    let failed = rows.iter().filter(|r| r.short_period.is_err()).count();
    println!("{}: {} rows", path.display(), rows.len());
    if failed > 0 {
        eprintln!("warning: {failed} of {} grid points have no short-period solution", rows.len());
    }
    Ok(())
}

pub enum SurfaceBase {
    State(String),
    Trim { path: PathBuf, mach: f64, qbar: f64 },
}

pub fn surface(
    cfg: &LoadedConfig,
    model: &Path,
    dims: &str,
    grid_a: &str,
    grid_b: &str,
    base: SurfaceBase,
) -> Result<(), CliError> {
    let names: Vec<&str> = dims.split(',').collect();
    if names.len() != 2 {
        return Err(CliError::Input(format!("--dims needs two components, got `{dims}`")));
    }
    let (da, db): (StateComponent, StateComponent) = (names[0].parse()?, names[1].parse()?);
    let (ga, gb) = (parse_grid(grid_a)?, parse_grid(grid_b)?);
    let gp = load_model(model)?;
    let x_base = match base {
        SurfaceBase::State(s) => {
            let v = parse_grid(&s)?;
            let arr: [f64; STATE_DIM] = v.try_into().map_err(|v: Vec<f64>| {
                CliError::Input(format!("--base needs {STATE_DIM} values, got {}", v.len()))
            })?;
            StateVector::from_array(arr)
        }
        SurfaceBase::Trim { path, mach, qbar } => {
            let tm = load_trim(&path)?;
            let cond = cfg.config.sweep.condition(qbar, mach)?;
            trim_state(&tm, qbar, mach, cond.rho)?
        }
    };
    let points = export_surface(&gp, &x_base, da, db, &ga, &gb)?;

    let path = cfg.output(&format!("surface_{}_{da}_{db}.csv", stem(model)));
    let mut out = create(&path)?;
    writeln!(out, "# {}", cfg.stamp()).map_err(io_err(&path))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "b", "mu", "sigma"]).map_err(aerogp::Error::from)?;
    for p in &points {
        w.write_record([p.a, p.b, p.mu, p.sigma].map(format_value))
            .map_err(aerogp::Error::from)?;
    }
    w.flush().map_err(io_err(&path))?;
    println!("{}: {} rows", path.display(), points.len());
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "lowercase")]
enum Outcome {
    Ok(ShortPeriodResult),
    Error(String),
}

impl From<aerogp::Result<ShortPeriodResult>> for Outcome {
    fn from(r: aerogp::Result<ShortPeriodResult>) -> Self {
        match r {
            Ok(sp) => Outcome::Ok(sp),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Oracle<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    scenario: Scenario,
    seed: u64,
    truth: TrueLinearModel,
    dimensional: LinearDimensional,
    true_theta: MorelliCoefficients,
    perturbed_theta: MorelliCoefficients,
    /// Eigenvalues of the 2-DOF system matrix.
    short_period: Outcome,
    /// The closed-form approximation applied to the true derivatives.
    short_period_formula: Outcome,
    noise: ChannelNoise,
}

pub fn synth(cfg: &LoadedConfig, scenario: &str) -> Result<(), CliError> {
    let scenario: Scenario = scenario.parse()?;
    let truth = cfg.config.truth_model()?;
    truth.require_stable()?;
    let seed = cfg.config.seed;
    let (flight, shots) = synthetic_data(&truth, scenario, seed)?;
    let name = serde_json::to_value(scenario)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| "synth".to_string());

    let flight_path = cfg.output(&format!("synth_{name}.csv"));
    let mut w = create(&flight_path)?;
    flight.write_csv(&mut w, Some(&cfg.stamp()))?;
    w.flush().map_err(io_err(&flight_path))?;

    let trim_path = cfg.output(&format!("synth_{name}_trim.csv"));
    let mut w = create(&trim_path)?;
    write_trim_shots(&mut w, &shots, Some(&cfg.stamp()))?;
    w.flush().map_err(io_err(&trim_path))?;

    let d = truth.dimensional();
    let oracle = Oracle {
        provenance: provenance(cfg),
        scenario,
        seed,
        truth,
        dimensional: d,
        true_theta: truth.true_theta(),
        perturbed_theta: truth.perturbed_theta(),
        short_period: analytic_short_period(&truth).into(),
        short_period_formula: short_period(d.m_alpha, d.m_q, d.z_alpha, &truth.condition).into(),
        noise: ChannelNoise::instrumentation(),
    };
    write_json(&cfg.output(&format!("synth_{name}_oracle.json")), &oracle)?;
    println!(
        "{}: {} samples, {} trim shots",
        flight_path.display(),
        flight.len(),
        shots.len()
    );
    Ok(())
}

pub const EVAL_HEADER: [&str; 10] = [
    "region",
    "points",
    "groups",
    "singleton_groups",
    "matched",
    "unmatched",
    "omega_rmse_prediction",
    "omega_rmse_dataset",
    "zeta_rmse_prediction",
    "zeta_rmse_dataset",
];

fn write_eval_csv(path: &Path, stamp: &str, report: &GroupingReport) -> Result<(), CliError> {
    let opt = |v: Option<f64>| v.map(format_value).unwrap_or_default();
    let mut out = create(path)?;
    writeln!(out, "# {stamp}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVAL_HEADER).map_err(aerogp::Error::from)?;
    for m in &report.regions {
        w.write_record([
            m.region.name().to_string(),
            m.points.to_string(),
            m.groups.to_string(),
            m.singleton_groups.to_string(),
            m.matched.to_string(),
            m.unmatched.to_string(),
            opt(m.omega_rmse_prediction),
            format_value(m.omega_rmse_dataset),
            opt(m.zeta_rmse_prediction),
            format_value(m.zeta_rmse_dataset),
        ])
        .map_err(aerogp::Error::from)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn eval(cfg: &LoadedConfig, predictions: &Path, historical: Option<&Path>) -> Result<(), CliError> {
    let preds =
        read_predictions(open(predictions)?).map_err(|e| CliError::Input(format!("{}: {e}", predictions.display())))?;
    let hist = match historical {
        Some(p) => read_historical(open(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => bundled_historical(),
    };
    let report = rmse_grouping(&preds, &hist, cfg.config.eval.qbar_tol, cfg.config.eval.mach_tol)?;
    let text = report.to_text();
    print!("{text}");

    let txt_path = cfg.output("eval_report.txt");
    let mut w = create(&txt_path)?;
    write!(w, "# {}\n{text}", cfg.stamp())
        .and_then(|_| w.flush())
        .map_err(io_err(&txt_path))?;
    write_eval_csv(&cfg.output("eval_report.csv"), &cfg.stamp(), &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("5:9:1").unwrap(), vec![5.0]);
        assert_eq!(parse_grid("0.1, 0.2,0.4").unwrap(), vec![0.1, 0.2, 0.4]);
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1,inf").is_err());
        let g = parse_grid("125:800:28").unwrap();
        assert_eq!(g.len(), 28);
        assert_eq!(*g.last().unwrap(), 800.0);
    }
}
