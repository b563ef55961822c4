//! Browser bindings. Each export takes plain numbers and strings and returns JSON.
//! The `*_json` functions hold the logic so they can be tested off the browser.

use std::collections::BTreeMap;

use logiq::circuit::{echo_series, grassl_expectations, prepare_grassl, GrasslTarget, PERTURBED};
use logiq::code::{builtin, logical_state};
use logiq::model::ModelKind;
use logiq::noise::{Channel, Correlation, NoiseKind, NoiseParams};
use logiq::observables::{Observable, ObservableSet};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const MAX_POINTS: usize = 2001;

#[derive(Debug, Serialize)]
pub struct Curves {
    pub gt: Vec<f64>,
    pub series: BTreeMap<String, Vec<f64>>,
}

fn grid(gt_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in 2..={MAX_POINTS}"));
    }
    if !(gt_max > 0.0 && gt_max.is_finite()) {
        return Err("gamma t range must be positive".into());
    }
    Ok((0..points).map(|k| gt_max * k as f64 / (points - 1) as f64).collect())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Closed-form curves for `model` (`physical`, `three_qubit`, `grassl`, `grassl_dfs`) with gamma = 1.
pub fn predict_json(model: &str, theta: f64, phi: f64, gt_max: f64, points: usize) -> Result<String, String> {
    let kind = ModelKind::for_code(model).map_err(|e| e.to_string())?;
    let gt = grid(gt_max, points)?;
    let mut series = BTreeMap::new();
    for o in Observable::MODELLED {
        let v = gt.iter().map(|&t| kind.observable(o, theta, phi, 1.0, t).expect("modelled")).collect();
        series.insert(o.name().to_string(), v);
    }
    Ok(to_json(&Curves { gt, series }))
}

/// One observable of a built-in code under global and under local dephasing, evolved exactly.
pub fn correlation_json(code: &str, observable: &str, theta: f64, phi: f64, gt_max: f64, points: usize) -> Result<String, String> {
    let code = builtin(code).map_err(|e| e.to_string())?;
    let o = Observable::parse(observable).map_err(|e| e.to_string())?;
    let gt = grid(gt_max, points)?;
    let rho = logical_state(&code, theta, phi).to_density();
    let set = ObservableSet::new(&code);
    let mut series = BTreeMap::new();
    for (label, corr) in [("global", Correlation::Global), ("local", Correlation::Local)] {
        let channel = Channel::analytic(NoiseParams { gamma: 1.0, correlation: corr, kind: NoiseKind::Dephasing });
        let v = gt
            .iter()
            .map(|&t| Ok(set.measure(&channel.apply(&rho, t)?, t)?.get(o)))
            .collect::<logiq::Result<Vec<f64>>>()
            .map_err(|e| e.to_string())?;
        series.insert(label.to_string(), v);
    }
    Ok(to_json(&Curves { gt, series }))
}

#[derive(Debug, Serialize)]
pub struct EchoScan {
    pub delta: Vec<f64>,
    pub quantities: Vec<String>,
    pub exact: Vec<[f64; 6]>,
    pub series: Vec<[f64; 6]>,
}

/// Four-qubit `|0_L>` preparation with an echo over-rotation swept over `[-delta_max, delta_max]`.
pub fn echo_scan_json(delta_max: f64, points: usize) -> Result<String, String> {
    if !(delta_max > 0.0 && delta_max <= 0.3) {
        return Err("delta_max must be in (0, 0.3]".into());
    }
    let delta: Vec<f64> = grid(2.0 * delta_max, points)?.into_iter().map(|d| d - delta_max).collect();
    let exact = delta
        .iter()
        .map(|&d| grassl_expectations(&prepare_grassl(GrasslTarget::Zero, d, 0.0)?))
        .collect::<logiq::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let series = delta.iter().map(|&d| echo_series(d)).collect();
    Ok(to_json(&EchoScan { quantities: PERTURBED.iter().map(|s| s.to_string()).collect(), delta, exact, series }))
}

#[wasm_bindgen]
pub fn predict(model: &str, theta: f64, phi: f64, gt_max: f64, points: usize) -> Result<String, JsError> {
    predict_json(model, theta, phi, gt_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn correlation(code: &str, observable: &str, theta: f64, phi: f64, gt_max: f64, points: usize) -> Result<String, JsError> {
    correlation_json(code, observable, theta, phi, gt_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn echo_scan(delta_max: f64, points: usize) -> Result<String, JsError> {
    echo_scan_json(delta_max, points).map_err(|e| JsError::new(&e))
}
