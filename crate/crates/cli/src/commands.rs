use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::info;
use logiq::circuit::perturbation_check;
use logiq::code::StabilizerCode;
use logiq::fit::{fit_all, pool_fits, DecaySeries, FitModel, FitReport, PooledFit, Skipped};
use logiq::model::{rotated_grassl_state, ModelKind, T2Convention};
use logiq::noise::{EngineKind, MonteCarloSettings, NoiseConfig, NoiseKind, RICHARDSON_TOL};
use logiq::observables::{monte_carlo_record, Observable, ObservableRecord, ObservableSet, CSV_HEADER};
use logiq::state::DensityMatrix;
use serde::Serialize;

use crate::config::{EngineEntry, Settings};
use crate::error::{CliError, CliResult};
use crate::CommonArgs;

/// Allowed deviation between two deterministic engines.
pub const DETERMINISTIC_TOL: f64 = 1e-6;
/// Monte-Carlo deviations may reach this many combined standard errors.
pub const MC_SIGMAS: f64 = 4.0;

/// One evolved time point, with standard errors when the engine is stochastic.
#[derive(Clone, Debug)]
pub struct Sample {
    pub record: ObservableRecord,
    pub std_errors: Option<[f64; 8]>,
    pub purity_bias: f64,
}

/// Observables of `rho0` evolved under `noise` at each of `times` (ascending).
pub fn evolve_records(
    rho0: &DensityMatrix,
    code: &StabilizerCode,
    noise: &NoiseConfig,
    times: &[f64],
) -> CliResult<Vec<Sample>> {
    let engine_err = |source| CliError::Engine { engine: engine_name(noise), source };
    let channel = noise.channel()?;
    let set = ObservableSet::new(code);
    let deterministic = |rho: &DensityMatrix, t| -> CliResult<Sample> {
        Ok(Sample { record: set.measure(rho, t)?, std_errors: None, purity_bias: 0.0 })
    };
    let mut out = Vec::with_capacity(times.len());
    match noise.engine {
        EngineKind::Analytic => {
            for &t in times {
                let rho = channel.apply(rho0, t).map_err(engine_err)?;
                out.push(deterministic(&rho, t)?);
            }
        }
        EngineKind::Lindblad => {
            let mut rho = rho0.clone();
            let mut t_prev = 0.0;
            for &t in times {
                rho = channel.apply(&rho, t - t_prev).map_err(engine_err)?;
                t_prev = t;
                out.push(deterministic(&rho, t)?);
            }
        }
        EngineKind::MonteCarlo => {
            if noise.kind != NoiseKind::Dephasing {
                return Err(CliError::Config("the Monte-Carlo engine only samples dephasing".into()));
            }
            for &t in times {
                let settings = MonteCarloSettings {
                    gamma: noise.gamma,
                    t,
                    n_traj: noise.n_traj,
                    seed: noise.seed,
                    correlation: noise.correlation,
                };
                let s = monte_carlo_record(rho0, code, &settings).map_err(engine_err)?;
                out.push(Sample { record: s.record, std_errors: Some(s.std_errors), purity_bias: s.purity_bias });
            }
        }
    }
    Ok(out)
}

fn engine_name(noise: &NoiseConfig) -> String {
    let engine = match noise.engine {
        EngineKind::Analytic => "analytic",
        EngineKind::Lindblad => "lindblad",
        EngineKind::MonteCarlo => "monte_carlo",
    };
    match noise.kind {
        NoiseKind::Dephasing => engine.to_string(),
        NoiseKind::AmplitudeDamping => format!("{engine} (amplitude damping)"),
    }
}

/// CSV text: header plus one row per record.
pub fn to_csv<'a>(
    records: impl IntoIterator<Item = &'a ObservableRecord>,
    gamma: f64,
    convention: T2Convention,
    with_purity: bool,
) -> String {
    let t2 = convention.t2(gamma);
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in records {
        writeln!(text, "{}", r.csv_row(gamma, t2, with_purity)).expect("string write");
    }
    text
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
            info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    emit(out, &text)
}

fn initial_state(settings: &Settings, code: &StabilizerCode) -> CliResult<DensityMatrix> {
    Ok(settings.state.prepare(code)?.to_density())
}

pub fn simulate(args: &CommonArgs) -> CliResult<()> {
    let settings = Settings::resolve(args)?;
    let [entry] = settings.engines.as_slice() else {
        return Err(CliError::Config(format!(
            "simulate runs one engine per output, got {}; use compare for several",
            settings.engines.len()
        )));
    };
    let code = settings.code.resolve()?;
    let rho0 = initial_state(&settings, &code)?;
    let noise = entry.apply(&settings.noise);
    let times = settings.times()?;
    info!("simulate {} with {} at {} times", code.name(), engine_name(&noise), times.len());
    let samples = evolve_records(&rho0, &code, &noise, &times)?;
    let csv = to_csv(samples.iter().map(|s| &s.record), noise.gamma, settings.t2_convention, true);
    emit(settings.out.as_deref(), &csv)
}

fn model_kind(args: &CommonArgs, settings: &Settings) -> CliResult<ModelKind> {
    match args.model {
        Some(m) => Ok(m.into()),
        None => Ok(ModelKind::for_code(settings.code.name())?),
    }
}

pub fn predict(args: &CommonArgs, delta: Option<f64>) -> CliResult<()> {
    let settings = Settings::resolve(args)?;
    let model = model_kind(args, &settings)?;
    let (theta, phi) = match delta {
        Some(d) => rotated_grassl_state(d),
        None => settings.state.angles()?,
    };
    let gamma = settings.noise.gamma;
    let records: Vec<ObservableRecord> =
        settings.times()?.into_iter().map(|t| model.record(theta, phi, gamma, t)).collect();
    emit(settings.out.as_deref(), &to_csv(&records, gamma, settings.t2_convention, false))
}

#[derive(Clone, Debug, Serialize)]
pub struct Deviation {
    pub max_abs_dev: f64,
    /// Time of the largest deviation.
    pub at_t: f64,
    /// Largest `deviation / tolerance` over the grid.
    pub worst_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub engine: String,
    pub observables: BTreeMap<String, Deviation>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub code: String,
    pub reference: String,
    pub deterministic_tolerance: f64,
    pub mc_sigmas: f64,
    pub richardson_tolerance: f64,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
}

/// Per-observable deviations of `other` from `reference` on a shared grid.
pub fn compare_samples(reference: &[Sample], other: &[Sample]) -> BTreeMap<String, Deviation> {
    let mut table = BTreeMap::new();
    for (k, o) in Observable::ALL.into_iter().enumerate() {
        let mut dev = Deviation { max_abs_dev: 0.0, at_t: 0.0, worst_ratio: 0.0, pass: true };
        for (a, b) in reference.iter().zip(other) {
            let d = (a.record.get(o) - b.record.get(o)).abs();
            let se = |s: &Sample| s.std_errors.map_or(0.0, |e| e[k]);
            let stochastic = a.std_errors.is_some() || b.std_errors.is_some();
            let tol = if stochastic {
                let bias = if o == Observable::Purity { a.purity_bias + b.purity_bias } else { 0.0 };
                MC_SIGMAS * se(a).hypot(se(b)) + bias + 1e-12
            } else {
                DETERMINISTIC_TOL
            };
            if !d.is_finite() {
                dev.pass = false;
                dev.max_abs_dev = f64::NAN;
                dev.worst_ratio = f64::INFINITY;
                continue;
            }
            if d > dev.max_abs_dev {
                dev.max_abs_dev = d;
                dev.at_t = a.record.t;
            }
            dev.worst_ratio = dev.worst_ratio.max(d / tol);
            dev.pass &= d <= tol;
        }
        table.insert(o.name().to_string(), dev);
    }
    table
}

pub fn compare(args: &CommonArgs) -> CliResult<()> {
    let settings = Settings::resolve(args)?;
    if settings.engines.len() < 2 {
        return Err(CliError::Config("compare needs at least two engines".into()));
    }
    let code = settings.code.resolve()?;
    let rho0 = initial_state(&settings, &code)?;
    let times = settings.times()?;
    let configs: Vec<NoiseConfig> = settings.engines.iter().map(|e: &EngineEntry| e.apply(&settings.noise)).collect();
    let runs = configs
        .iter()
        .map(|n| evolve_records(&rho0, &code, n, &times))
        .collect::<CliResult<Vec<_>>>()?;
    let comparisons: Vec<Comparison> = configs[1..]
        .iter()
        .zip(&runs[1..])
        .map(|(n, run)| {
            let observables = compare_samples(&runs[0], run);
            let pass = observables.values().all(|d| d.pass);
            Comparison { engine: engine_name(n), observables, pass }
        })
        .collect();
    let pass = comparisons.iter().all(|c| c.pass);
    let report = CompareReport {
        code: code.name().to_string(),
        reference: engine_name(&configs[0]),
        deterministic_tolerance: DETERMINISTIC_TOL,
        mc_sigmas: MC_SIGMAS,
        richardson_tolerance: RICHARDSON_TOL,
        comparisons,
        pass,
    };
    emit_json(settings.out.as_deref(), &report)?;
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.comparisons.iter().filter(|c| !c.pass).map(|c| c.engine.as_str()).collect();
        Err(CliError::Comparison(format!("{} disagrees with {}", failed.join(", "), report.reference)))
    }
}

/// Columns of a CSV file keyed by header name; empty or unparsable cells become NaN.
pub fn read_columns(path: &Path) -> CliResult<BTreeMap<String, Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (col, cell) in columns.iter_mut().zip(row.iter()) {
            col.push(cell.trim().parse().unwrap_or(f64::NAN));
        }
    }
    Ok(headers.into_iter().zip(columns).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PooledReport {
    #[serde(flatten)]
    pub pooled: PooledFit,
    #[serde(rename = "T2_convention_A")]
    pub t2_convention_a: f64,
    #[serde(rename = "T2_convention_B")]
    pub t2_convention_b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitOutput {
    pub t2_convention: T2Convention,
    pub fits: Vec<FitReport>,
    pub skipped: Vec<Skipped>,
    /// Absent when fewer than two fits converged.
    pub pooled: Option<PooledReport>,
    /// Pooled coherence time under the selected convention.
    #[serde(rename = "T2")]
    pub t2: Option<f64>,
}

pub fn fit(args: &CommonArgs, input: &Path, observables: &[Observable]) -> CliResult<()> {
    let settings = Settings::resolve(args)?;
    let model = model_kind(args, &settings)?;
    let (theta, phi) = settings.state.angles()?;
    let columns = read_columns(input)?;
    let t = columns.get("t").ok_or_else(|| CliError::Config(format!("{} has no t column", input.display())))?;
    let selected: &[Observable] = if observables.is_empty() { &Observable::MODELLED } else { observables };
    let mut items = Vec::new();
    for &o in selected {
        let values = columns
            .get(o.name())
            .ok_or_else(|| CliError::Config(format!("{} has no {} column", input.display(), o.name())))?;
        let (ts, ys): (Vec<f64>, Vec<f64>) =
            t.iter().zip(values).filter(|(t, y)| t.is_finite() && y.is_finite()).map(|(&t, &y)| (t, y)).unzip();
        let series = DecaySeries::from_values(o, &ts, &ys)?;
        items.push((series, FitModel::new(model, o, theta, phi)?));
    }
    let (fits, skipped) = fit_all(&items)?;
    for s in &skipped {
        info!("skipped {}: {}", s.model, s.reason);
    }
    let pooled = if fits.iter().filter(|f| f.converged).count() >= 2 { Some(pool_fits(&fits)?) } else { None };
    let output = FitOutput {
        t2_convention: settings.t2_convention,
        fits: fits.iter().map(|f| f.report()).collect(),
        skipped,
        t2: pooled.as_ref().map(|p| p.t2(settings.t2_convention)),
        pooled: pooled.map(|p| PooledReport {
            t2_convention_a: p.t2(T2Convention::Main),
            t2_convention_b: p.t2(T2Convention::Appendix),
            pooled: p,
        }),
    };
    emit_json(settings.out.as_deref(), &output)
}

pub fn prep_check(args: &CommonArgs, deltas: &[f64]) -> CliResult<()> {
    let out = match &args.config {
        Some(_) => Settings::resolve(args)?.out,
        None => args.out.clone(),
    };
    let report = perturbation_check(deltas)?;
    emit_json(out.as_deref(), &report)
}
