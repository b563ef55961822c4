//! Closed-form predictions for global dephasing.
//!
//! These are written out directly in terms of `(theta, phi, gamma t)` and share
//! no code with the evolution engines.

use serde::{Deserialize, Serialize};

use crate::observables::{Observable, ObservableRecord, MIN_POPULATION};
use crate::{Error, Result};

/// Bloch vector of a single physical qubit under dephasing.
pub fn physical_bloch(theta: f64, phi: f64, gamma: f64, t: f64) -> [f64; 3] {
    let d = (-0.5 * gamma * t).exp();
    [d * theta.sin() * phi.cos(), d * theta.sin() * phi.sin(), theta.cos()]
}

/// `[R_x, R_y, R_z, p, p_x, p_y, p_z]` for the three-qubit code under global dephasing.
pub fn three_qubit_observables(theta: f64, phi: f64, gamma: f64, t: f64) -> [f64; 7] {
    let gt = gamma * t;
    let (sx, sy) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
    let (c2, s2) = ((theta / 2.0).cos().powi(2), (theta / 2.0).sin().powi(2));
    let e = |k: f64| (-k * gt).exp();
    let in_code = e(1.25) * (0.75 * gt).cosh();
    [
        e(2.0) * sx,
        e(0.5) * sy,
        0.5 * e(4.5) * (theta.cos() + 2.0 * (4.0 * gt).exp() * c2 - 1.0),
        0.5 * (e(0.5) * c2 + e(4.5) * s2 + 1.0),
        in_code * sx,
        in_code * sy,
        0.5 * (theta.cos() - e(4.5) * s2 + e(0.5) * c2),
    ]
}

/// `[R_x, R_y, R_z, p, p_x, p_y, p_z]` for the four-qubit code under global dephasing.
pub fn four_qubit_observables(theta: f64, phi: f64, gamma: f64, t: f64) -> [f64; 7] {
    let gt = gamma * t;
    let (sx, sy) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
    let e2 = (-2.0 * gt).exp();
    let e8 = (-8.0 * gt).exp();
    [
        sx,
        e2 * sy,
        e2 * theta.cos(),
        0.25 * (3.0 + e8 + (e8 - 1.0) * sx),
        0.25 * (e8 - 1.0 + (e8 + 3.0) * sx),
        e2 * sy,
        e2 * theta.cos(),
    ]
}

/// A code inside a decoherence-free subspace: nothing moves.
pub fn decoherence_free_observables(theta: f64, phi: f64) -> [f64; 7] {
    let r = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    [r[0], r[1], r[2], 1.0, r[0], r[1], r[2]]
}

/// `(theta, phi)` of `cos(delta)|0_L> + sin(delta)|1_L>`.
///
/// The amplitudes use the full angle `delta`, so the Bloch polar angle is `2 delta`.
pub fn rotated_grassl_state(delta: f64) -> (f64, f64) {
    (2.0 * delta, 0.0)
}

/// Generic exponential relaxation `eq - e^{-t/T} (eq - init)`; `time_constant` must be positive.
pub fn relaxation_model(t: f64, time_constant: f64, eq_value: f64, init_value: f64) -> f64 {
    eq_value - (-t / time_constant).exp() * (eq_value - init_value)
}

/// How a coherence time is derived from the dephasing rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum T2Convention {
    /// `T2 = 2/gamma`: the 1/e time of a physical qubit's coherence `e^{-gamma t/2}`.
    #[default]
    Main,
    /// `T2 = 1/(2 gamma)`.
    Appendix,
}

impl T2Convention {
    pub fn t2(self, gamma: f64) -> f64 {
        match self {
            T2Convention::Main => 2.0 / gamma,
            T2Convention::Appendix => 1.0 / (2.0 * gamma),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            T2Convention::Main => "main",
            T2Convention::Appendix => "appendix",
        }
    }
}

impl std::str::FromStr for T2Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "main" | "a" => Ok(T2Convention::Main),
            "appendix" | "b" => Ok(T2Convention::Appendix),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// Which closed form applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// A bare qubit; `p = 1` and the in-code values equal the Bloch vector.
    Physical,
    ThreeQubit,
    Grassl,
    GrasslDfs,
}

impl ModelKind {
    /// Model for a built-in code name, or `physical`.
    pub fn for_code(name: &str) -> Result<Self> {
        match name {
            "physical" => Ok(ModelKind::Physical),
            "three_qubit" => Ok(ModelKind::ThreeQubit),
            "grassl" => Ok(ModelKind::Grassl),
            "grassl_dfs" => Ok(ModelKind::GrasslDfs),
            other => Err(Error::UnknownName(format!("no closed form for code {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Physical => "physical",
            ModelKind::ThreeQubit => "three_qubit",
            ModelKind::Grassl => "grassl",
            ModelKind::GrasslDfs => "grassl_dfs",
        }
    }

    pub fn evaluate(self, theta: f64, phi: f64, gamma: f64, t: f64) -> [f64; 7] {
        match self {
            ModelKind::Physical => {
                let r = physical_bloch(theta, phi, gamma, t);
                [r[0], r[1], r[2], 1.0, r[0], r[1], r[2]]
            }
            ModelKind::ThreeQubit => three_qubit_observables(theta, phi, gamma, t),
            ModelKind::Grassl => four_qubit_observables(theta, phi, gamma, t),
            ModelKind::GrasslDfs => decoherence_free_observables(theta, phi),
        }
    }

    /// Single observable; `None` for purity, which has no closed form here.
    pub fn observable(self, o: Observable, theta: f64, phi: f64, gamma: f64, t: f64) -> Option<f64> {
        let k = Observable::MODELLED.iter().position(|&m| m == o)?;
        Some(self.evaluate(theta, phi, gamma, t)[k])
    }

    /// Record with `purity = NaN`.
    pub fn record(self, theta: f64, phi: f64, gamma: f64, t: f64) -> ObservableRecord {
        let v = self.evaluate(theta, phi, gamma, t);
        let p_vec = [v[4], v[5], v[6]];
        ObservableRecord {
            t,
            r: [v[0], v[1], v[2]],
            p: v[3],
            p_vec,
            purity: f64::NAN,
            r_cond: (v[3] >= MIN_POPULATION).then(|| p_vec.map(|x| x / v[3])),
        }
    }
}
