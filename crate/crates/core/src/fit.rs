//! Least-squares fits of observable time series to `contrast * f(gamma, t)`.
//!
//! Levenberg-Marquardt over `(gamma, contrast)` with a central-difference
//! Jacobian, box bounds `gamma >= 0`, `0 <= contrast <= 1.2`, and starts at
//! `gamma in {0.1, 1, 10} / t_max`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::model::{ModelKind, T2Convention};
use crate::observables::Observable;
use crate::{Error, Result};

pub const MAX_CONTRAST: f64 = 1.2;
pub const MAX_ITERATIONS: usize = 500;
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub t: f64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub observable: Observable,
    pub points: Vec<DataPoint>,
}

impl DecaySeries {
    pub fn new(observable: Observable, points: Vec<DataPoint>) -> Result<Self> {
        let s = DecaySeries { observable, points };
        s.validate()?;
        Ok(s)
    }

    pub fn from_values(observable: Observable, t: &[f64], values: &[f64]) -> Result<Self> {
        if t.len() != values.len() {
            return Err(Error::LengthMismatch { left: t.len(), right: values.len() });
        }
        let points = t.iter().zip(values).map(|(&t, &value)| DataPoint { t, value, sigma: None }).collect();
        DecaySeries::new(observable, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(Error::InvalidSeries(format!("{} points, need at least 4", self.points.len())));
        }
        let mut last = f64::NEG_INFINITY;
        for p in &self.points {
            if !(p.t >= 0.0 && p.t.is_finite()) || !p.value.is_finite() {
                return Err(Error::InvalidSeries(format!("bad point t={} value={}", p.t, p.value)));
            }
            if p.t <= last {
                return Err(Error::InvalidSeries("times must be strictly increasing".into()));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidSeries(format!("sigma must be positive, got {s}")));
                }
            }
            last = p.t;
        }
        Ok(())
    }

    fn t_max(&self) -> f64 {
        self.points.last().map(|p| p.t).unwrap_or(0.0)
    }
}

/// Closed-form curve with the initial state held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub kind: ModelKind,
    pub observable: Observable,
    pub theta: f64,
    pub phi: f64,
}

impl FitModel {
    pub fn new(kind: ModelKind, observable: Observable, theta: f64, phi: f64) -> Result<Self> {
        if observable == Observable::Purity {
            return Err(Error::Unsupported("purity has no closed-form decay model".into()));
        }
        Ok(FitModel { kind, observable, theta, phi })
    }

    pub fn eval(&self, gamma: f64, t: f64) -> f64 {
        self.kind
            .observable(self.observable, self.theta, self.phi, gamma, t)
            .expect("purity rejected at construction")
    }

    pub fn id(&self) -> String {
        format!("{}:{}", self.kind.name(), self.observable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub observable: Observable,
    pub gamma: f64,
    pub gamma_stderr: f64,
    pub contrast: f64,
    pub contrast_stderr: f64,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn t2(&self, convention: T2Convention) -> f64 {
        convention.t2(self.gamma)
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            model: self.model.clone(),
            gamma: self.gamma,
            gamma_stderr: self.gamma_stderr,
            t2_convention_a: self.t2(T2Convention::Main),
            t2_convention_b: self.t2(T2Convention::Appendix),
            contrast: self.contrast,
            contrast_stderr: self.contrast_stderr,
            rss: self.rss,
            converged: self.converged,
        }
    }
}

/// JSON fit report; convention A is `T2 = 2/gamma`, convention B is `T2 = 1/(2 gamma)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub gamma: f64,
    pub gamma_stderr: f64,
    #[serde(rename = "T2_convention_A")]
    pub t2_convention_a: f64,
    #[serde(rename = "T2_convention_B")]
    pub t2_convention_b: f64,
    pub contrast: f64,
    pub contrast_stderr: f64,
    pub rss: f64,
    pub converged: bool,
}

struct Problem<'a> {
    model: &'a FitModel,
    t: Vec<f64>,
    y: Vec<f64>,
    sqrt_w: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, p: Vector2<f64>) -> Vec<f64> {
        self.t
            .iter()
            .zip(&self.y)
            .zip(&self.sqrt_w)
            .map(|((&t, &y), &w)| w * (y - p[1] * self.model.eval(p[0], t)))
            .collect()
    }

    fn rss(&self, p: Vector2<f64>) -> f64 {
        self.residuals(p).iter().map(|r| r * r).sum()
    }

    /// Jacobian of the weighted model values `sqrt(w) c f(gamma, t)`, one row per point.
    fn jacobian(&self, p: Vector2<f64>) -> Vec<[f64; 2]> {
        let hg = 1e-6 * p[0].abs().max(1e-3);
        let hc = 1e-6 * p[1].abs().max(1e-3);
        let value = |g: f64, c: f64, t: f64| c * self.model.eval(g, t);
        self.t
            .iter()
            .zip(&self.sqrt_w)
            .map(|(&t, &w)| {
                let dg = (value(p[0] + hg, p[1], t) - value((p[0] - hg).max(0.0), p[1], t))
                    / (p[0] + hg - (p[0] - hg).max(0.0));
                let dc = (value(p[0], p[1] + hc, t) - value(p[0], p[1] - hc, t)) / (2.0 * hc);
                [w * dg, w * dc]
            })
            .collect()
    }

    fn normal_equations(&self, p: Vector2<f64>) -> (Matrix2<f64>, Vector2<f64>) {
        let r = self.residuals(p);
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (row, ri) in self.jacobian(p).iter().zip(&r) {
            let j = Vector2::new(row[0], row[1]);
            jtj += j * j.transpose();
            jtr += j * *ri;
        }
        (jtj, jtr)
    }
}

fn clamp(p: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(p[0].max(0.0), p[1].clamp(0.0, MAX_CONTRAST))
}

/// Best contrast for a fixed `gamma`, clamped to the bounds.
fn linear_contrast(problem: &Problem, gamma: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((&t, &y), &w) in problem.t.iter().zip(&problem.y).zip(&problem.sqrt_w) {
        let f = w * problem.model.eval(gamma, t);
        num += f * w * y;
        den += f * f;
    }
    if den > 0.0 { (num / den).clamp(0.0, MAX_CONTRAST) } else { 1.0 }
}

/// Returns `(params, rss, iterations)` or `None` if the iteration cap was hit.
fn levenberg_marquardt(problem: &Problem, start: Vector2<f64>) -> Option<(Vector2<f64>, f64, usize)> {
    let mut p = clamp(start);
    let mut rss = problem.rss(p);
    let mut lambda = 1e-3;
    for iter in 1..=MAX_ITERATIONS {
        let (jtj, jtr) = problem.normal_equations(p);
        let mut improved = false;
        while lambda < 1e16 {
            let damped = jtj + Matrix2::from_diagonal(&(jtj.diagonal() * lambda + Vector2::repeat(1e-300)));
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = clamp(p + step);
            let trial_rss = problem.rss(trial);
            if trial_rss <= rss {
                let small_step = (trial - p).norm() <= 1e-12 * (p.norm() + 1e-12);
                let small_gain = rss - trial_rss <= 1e-15 * rss.max(1e-300);
                p = trial;
                rss = trial_rss;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if small_step || small_gain || rss == 0.0 {
                    return Some((p, rss, iter));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: stationary within the bounds
            return Some((p, rss, iter));
        }
    }
    None
}

/// Degenerate when the curve vanishes or ignores `gamma` over the sampled times.
fn check_identifiable(model: &FitModel, t: &[f64], t_max: f64) -> Result<()> {
    let gammas = [0.1, 1.0, 10.0].map(|g| g / t_max);
    let curves: Vec<Vec<f64>> = gammas.iter().map(|&g| t.iter().map(|&ti| model.eval(g, ti)).collect()).collect();
    let largest = curves.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if largest < DEGENERACY_TOL {
        return Err(Error::DegenerateModel(format!("{} is identically zero for this state", model.id())));
    }
    let spread = curves[1..]
        .iter()
        .flat_map(|c| c.iter().zip(&curves[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0f64, f64::max);
    if spread < DEGENERACY_TOL {
        return Err(Error::DegenerateModel(format!("{} does not depend on gamma for this state", model.id())));
    }
    Ok(())
}

pub fn fit_observable(series: &DecaySeries, model: &FitModel) -> Result<FitResult> {
    series.validate()?;
    if series.observable != model.observable {
        return Err(Error::InvalidSeries(format!(
            "series holds {} but the model describes {}",
            series.observable, model.observable
        )));
    }
    let t_max = series.t_max();
    if !(t_max > 0.0) {
        return Err(Error::InvalidSeries("time span is zero".into()));
    }
    let t: Vec<f64> = series.points.iter().map(|p| p.t).collect();
    check_identifiable(model, &t, t_max)?;
    let problem = Problem {
        model,
        y: series.points.iter().map(|p| p.value).collect(),
        sqrt_w: series.points.iter().map(|p| p.sigma.map_or(1.0, |s| 1.0 / s)).collect(),
        t,
    };

    let mut best: Option<(Vector2<f64>, f64, usize)> = None;
    for g0 in [0.1, 1.0, 10.0].map(|g| g / t_max) {
        let start = Vector2::new(g0, linear_contrast(&problem, g0));
        if let Some(run) = levenberg_marquardt(&problem, start) {
            if best.as_ref().map_or(true, |b| run.1 < b.1) {
                best = Some(run);
            }
        }
    }
    let (p, rss, iterations) = best.ok_or_else(|| {
        Error::NonConvergence(format!("{}: no start converged in {MAX_ITERATIONS} iterations", model.id()))
    })?;

    let (jtj, _) = problem.normal_equations(p);
    let dof = (problem.t.len() as f64 - 2.0).max(1.0);
    let s2 = rss / dof;
    let (gamma_stderr, contrast_stderr) = match jtj.try_inverse() {
        Some(cov) => ((s2 * cov[(0, 0)]).max(0.0).sqrt(), (s2 * cov[(1, 1)]).max(0.0).sqrt()),
        None => (f64::INFINITY, f64::INFINITY),
    };
    log::debug!("fit {}: gamma {:.6} contrast {:.6} rss {:.3e} after {iterations} iterations", model.id(), p[0], p[1], rss);
    Ok(FitResult {
        model: model.id(),
        observable: model.observable,
        gamma: p[0],
        gamma_stderr,
        contrast: p[1],
        contrast_stderr,
        rss,
        converged: true,
        iterations,
    })
}

/// `J^T r` at the given parameters, for optimality checks.
pub fn gradient(series: &DecaySeries, model: &FitModel, gamma: f64, contrast: f64) -> [f64; 2] {
    let problem = Problem {
        model,
        t: series.points.iter().map(|p| p.t).collect(),
        y: series.points.iter().map(|p| p.value).collect(),
        sqrt_w: series.points.iter().map(|p| p.sigma.map_or(1.0, |s| 1.0 / s)).collect(),
    };
    let (_, jtr) = problem.normal_equations(Vector2::new(gamma, contrast));
    [jtr[0], jtr[1]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledFit {
    pub mean_gamma: f64,
    pub gamma_sem: f64,
    pub mean_contrast: f64,
    pub contrast_sem: f64,
    pub used: usize,
    pub excluded: usize,
}

impl PooledFit {
    pub fn t2(&self, convention: T2Convention) -> f64 {
        convention.t2(self.mean_gamma)
    }
}

fn mean_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and standard error of the mean over the converged fits.
pub fn pool_fits(results: &[FitResult]) -> Result<PooledFit> {
    let used: Vec<&FitResult> = results.iter().filter(|r| r.converged).collect();
    if used.len() < 2 {
        return Err(Error::NonConvergence(format!("{} converged fits, need at least 2", used.len())));
    }
    let (mean_gamma, gamma_sem) = mean_sem(&used.iter().map(|r| r.gamma).collect::<Vec<_>>());
    let (mean_contrast, contrast_sem) = mean_sem(&used.iter().map(|r| r.contrast).collect::<Vec<_>>());
    Ok(PooledFit { mean_gamma, gamma_sem, mean_contrast, contrast_sem, used: used.len(), excluded: results.len() - used.len() })
}

/// A fit that was not attempted, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub model: String,
    pub reason: String,
}

/// Fit every series against its model; degenerate models are collected instead of failing.
pub fn fit_all(items: &[(DecaySeries, FitModel)]) -> Result<(Vec<FitResult>, Vec<Skipped>)> {
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for (series, model) in items {
        match fit_observable(series, model) {
            Ok(r) => fits.push(r),
            Err(e @ Error::DegenerateModel(_)) => skipped.push(Skipped { model: model.id(), reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    Ok((fits, skipped))
}
