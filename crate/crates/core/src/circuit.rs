//! Gate-level preparation of the logical eigenstates and coherent calibration errors.
//!
//! Gates, with `S_x = sum X_k`:
//!
//! * `MS(theta) = exp(-i theta/4 S_x^2)`
//! * `U_x(theta) = exp(-i theta/2 S_x)`
//! * `U_z^(k)(theta) = exp(-i theta/2 Z_k)`, `U_y^(k)(theta) = exp(-i theta/2 Y_k)`
//!
//! The pulse sequences below are pinned by requiring the outputs to equal the
//! code's logical eigenstates; every preparation is verified by fidelity.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::code::{builtin, eigenstate, LogicalAxis, StabilizerCode};
use crate::observables::logical_bloch;
use crate::pauli::{Letter, PauliString, Phase};
use crate::state::{expectation, PureState};
use crate::{c, check_register, CMatrix, Error, Result};

const UNITARY_TOL: f64 = 1e-10;
/// Required fidelity defect of an ideal preparation.
pub const PREP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateOp {
    Ms { theta: f64 },
    CollectiveX { theta: f64 },
    CollectiveZ { theta: f64 },
    /// `site` is 1-based.
    SingleZ { theta: f64, site: usize },
    SingleY { theta: f64, site: usize },
}

fn single(letter: Letter, site: usize, n: usize) -> Result<CMatrix> {
    PauliString::from_sites(Phase::ONE, &[(letter, site)], n)?.realize()
}

fn collective(letter: Letter, n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    (1..=n).try_fold(CMatrix::zeros(dim, dim), |acc, k| Ok(acc + single(letter, k, n)?))
}

/// `exp(-i generator)` with a unitarity check.
fn unitary(generator: CMatrix) -> Result<CMatrix> {
    let u = (generator * c(0.0, -1.0)).exp();
    let defect = (&u * u.adjoint() - CMatrix::identity(u.nrows(), u.ncols())).camax();
    if !(defect <= UNITARY_TOL) {
        return Err(Error::Verification(format!("gate is not unitary (defect {defect:.2e})")));
    }
    Ok(u)
}

pub fn realize_gate(g: GateOp, n: usize) -> Result<CMatrix> {
    check_register(n)?;
    let generator = match g {
        GateOp::Ms { theta } => {
            let sx = collective(Letter::X, n)?;
            &sx * &sx * c(theta / 4.0, 0.0)
        }
        GateOp::CollectiveX { theta } => collective(Letter::X, n)? * c(theta / 2.0, 0.0),
        GateOp::CollectiveZ { theta } => collective(Letter::Z, n)? * c(theta / 2.0, 0.0),
        GateOp::SingleZ { theta, site } => single(Letter::Z, site, n)? * c(theta / 2.0, 0.0),
        GateOp::SingleY { theta, site } => single(Letter::Y, site, n)? * c(theta / 2.0, 0.0),
    };
    unitary(generator)
}

/// Apply `gates` in order to `|0...0>`.
pub fn run_circuit(gates: &[GateOp], n: usize) -> Result<PureState> {
    let mut psi = PureState::basis(0, n)?.into_amplitudes();
    for &g in gates {
        psi = realize_gate(g, n)? * psi;
    }
    PureState::normalized(psi)
}

fn verify(psi: &PureState, code: &StabilizerCode, axis: LogicalAxis) -> Result<f64> {
    let fidelity = psi.fidelity(&eigenstate(code, axis))?;
    if !((1.0 - fidelity).abs() <= PREP_TOL) {
        return Err(Error::Verification(format!(
            "{} circuit for {axis:?} reached fidelity {fidelity:.12}",
            code.name()
        )));
    }
    Ok(fidelity)
}

/// Encoding rotation `U_E(theta)` acts on this site. The circuit also brackets the
/// entangling block with `U_z^(3)(-pi/2)` and `U_z^(3)(+pi/2)`.
pub const THREE_QUBIT_ENCODE_SITE: usize = 3;

/// Gate sequence for the three-qubit code; `theta` is 0, pi, pi/2 for -Z_L, +Z_L, +X_L.
pub fn three_qubit_circuit(theta: f64) -> Vec<GateOp> {
    let site = THREE_QUBIT_ENCODE_SITE;
    vec![
        GateOp::SingleY { theta, site },
        GateOp::SingleZ { theta: -FRAC_PI_2, site },
        GateOp::Ms { theta: FRAC_PI_2 },
        GateOp::CollectiveX { theta: FRAC_PI_2 },
        GateOp::SingleZ { theta: FRAC_PI_2, site },
    ]
}

pub fn prepare_three_qubit(target: LogicalAxis) -> Result<PureState> {
    let theta = match target {
        LogicalAxis::MinusZ => 0.0,
        LogicalAxis::PlusZ => PI,
        LogicalAxis::PlusX => FRAC_PI_2,
        other => return Err(Error::Unsupported(format!("no three-qubit circuit for {other:?}"))),
    };
    let psi = run_circuit(&three_qubit_circuit(theta), 3)?;
    verify(&psi, &builtin("three_qubit")?, target)?;
    Ok(psi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrasslTarget {
    Zero,
    Plus,
}

impl GrasslTarget {
    pub fn axis(self) -> LogicalAxis {
        match self {
            GrasslTarget::Zero => LogicalAxis::PlusZ,
            GrasslTarget::Plus => LogicalAxis::PlusX,
        }
    }
}

/// Echo angle on sites 1 and 2 between the two half-entangling gates.
pub const GRASSL_ECHO_ANGLE: f64 = -PI;
/// Final phase correction on sites 1 and 3 of the `|0>_L` sequence.
pub const GRASSL_ZERO_CORRECTION: f64 = FRAC_PI_2;
/// Phase correction on site 1 of the `|+>_L` sequence.
pub const GRASSL_PLUS_CORRECTION: f64 = -FRAC_PI_2;

/// Four-qubit sequences. `delta_z` over-rotates the echo pulses (`|angle| -> |angle| + delta_z`),
/// `delta_ms` adds to every MS angle. The `|+>_L` sequence has no echo, so `delta_z` is unused there.
pub fn grassl_circuit(target: GrasslTarget, delta_z: f64, delta_ms: f64) -> Vec<GateOp> {
    match target {
        GrasslTarget::Zero => {
            let echo = GRASSL_ECHO_ANGLE + delta_z * GRASSL_ECHO_ANGLE.signum();
            let half = GateOp::Ms { theta: FRAC_PI_4 + delta_ms };
            vec![
                half,
                GateOp::SingleZ { theta: echo, site: 1 },
                GateOp::SingleZ { theta: echo, site: 2 },
                half,
                GateOp::SingleZ { theta: GRASSL_ZERO_CORRECTION, site: 1 },
                GateOp::SingleZ { theta: GRASSL_ZERO_CORRECTION, site: 3 },
            ]
        }
        GrasslTarget::Plus => vec![
            GateOp::Ms { theta: FRAC_PI_2 + delta_ms },
            GateOp::SingleZ { theta: GRASSL_PLUS_CORRECTION, site: 1 },
        ],
    }
}

/// Verified against the code basis when both deltas vanish.
pub fn prepare_grassl(target: GrasslTarget, delta_z: f64, delta_ms: f64) -> Result<PureState> {
    let psi = run_circuit(&grassl_circuit(target, delta_z, delta_ms), 4)?;
    if delta_z == 0.0 && delta_ms == 0.0 {
        verify(&psi, &builtin("grassl")?, target.axis())?;
    }
    Ok(psi)
}

/// Fidelities of every ideal preparation: `(label, fidelity)`.
pub fn preparation_fidelities() -> Result<Vec<(String, f64)>> {
    let three = builtin("three_qubit")?;
    let grassl = builtin("grassl")?;
    let mut out = Vec::new();
    for axis in [LogicalAxis::PlusX, LogicalAxis::PlusZ, LogicalAxis::MinusZ] {
        let psi = run_circuit(&three_qubit_circuit(match axis {
            LogicalAxis::MinusZ => 0.0,
            LogicalAxis::PlusZ => PI,
            _ => FRAC_PI_2,
        }), 3)?;
        out.push((format!("three_qubit {axis:?}"), psi.fidelity(&eigenstate(&three, axis))?));
    }
    for target in [GrasslTarget::Zero, GrasslTarget::Plus] {
        let psi = run_circuit(&grassl_circuit(target, 0.0, 0.0), 4)?;
        out.push((format!("grassl {target:?}"), psi.fidelity(&eigenstate(&grassl, target.axis()))?));
    }
    Ok(out)
}

/// Quantities compared in [`perturbation_check`], in order.
pub const PERTURBED: [&str; 6] = ["Rx", "Ry", "Rz", "S1", "S2", "S3"];

/// Truncated series for an echo over-rotation `delta`.
pub fn echo_series(delta: f64) -> [f64; 6] {
    let d2 = delta * delta;
    [
        -delta * std::f64::consts::FRAC_1_SQRT_2 - d2 / 4.0,
        0.0,
        1.0 - 0.75 * d2,
        1.0 - 0.75 * d2,
        1.0 - 0.5 * d2,
        1.0 - 0.5 * d2,
    ]
}

/// `(R_x, R_y, R_z, <S_1>, <S_2>, <S_3>)` of a prepared four-qubit state.
pub fn grassl_expectations(psi: &PureState) -> Result<[f64; 6]> {
    let code = builtin("grassl")?;
    let rho = psi.to_density();
    let r = logical_bloch(&rho, &code)?;
    let s = code.generator_matrices();
    Ok([r[0], r[1], r[2], expectation(&s[0], &rho)?, expectation(&s[1], &rho)?, expectation(&s[2], &rho)?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoEntry {
    pub delta: f64,
    pub exact: [f64; 6],
    pub series: [f64; 6],
    pub residual: [f64; 6],
    /// `(theta, phi)` of the rotated logical state with the same `delta`.
    pub rotated_state: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsEntry {
    pub delta: f64,
    pub rx: f64,
    pub series: f64,
    pub residual: f64,
}

/// Ratio `residual(to) / residual(from)` per quantity for a pair of deltas with `to = 2 from`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub from: f64,
    pub to: f64,
    pub ratios: [f64; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub quantities: Vec<String>,
    pub fidelities: Vec<(String, f64)>,
    pub echo: Vec<EchoEntry>,
    pub ms: Vec<MsEntry>,
    pub scaling: Vec<Scaling>,
    pub max_residual: f64,
}

pub fn perturbation_check(deltas: &[f64]) -> Result<PerturbationReport> {
    if let Some(d) = deltas.iter().find(|d| !(d.abs() <= 0.3)) {
        return Err(Error::InvalidParameter(format!("delta {d} outside [-0.3, 0.3]")));
    }
    let mut echo = Vec::new();
    let mut ms = Vec::new();
    for &delta in deltas {
        let exact = grassl_expectations(&prepare_grassl(GrasslTarget::Zero, delta, 0.0)?)?;
        let series = echo_series(delta);
        let residual = std::array::from_fn(|k| (exact[k] - series[k]).abs());
        echo.push(EchoEntry { delta, exact, series, residual, rotated_state: crate::model::rotated_grassl_state(delta) });

        let rx = grassl_expectations(&prepare_grassl(GrasslTarget::Zero, 0.0, delta)?)?[0];
        let series = 4.0 * delta * delta;
        ms.push(MsEntry { delta, rx, series, residual: (rx - series).abs() });
    }
    let mut scaling = Vec::new();
    for a in &echo {
        for b in &echo {
            if a.delta != 0.0 && (b.delta - 2.0 * a.delta).abs() < 1e-12 {
                scaling.push(Scaling {
                    from: a.delta,
                    to: b.delta,
                    ratios: std::array::from_fn(|k| b.residual[k] / a.residual[k]),
                });
            }
        }
    }
    let max_residual = echo.iter().flat_map(|e| e.residual).fold(0.0, f64::max);
    Ok(PerturbationReport {
        quantities: PERTURBED.iter().map(|s| s.to_string()).collect(),
        fidelities: preparation_fidelities()?,
        echo,
        ms,
        scaling,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::index_of;
    use crate::code::code_projector;

    #[test]
    fn gates_are_unitary_and_match_definitions() {
        let ms = realize_gate(GateOp::Ms { theta: FRAC_PI_2 }, 2).unwrap();
        let out = &ms.column(0);
        // (|00> - i|11>)/sqrt2 up to a global phase
        let phase = out[0] / out[0].norm();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] / phase - c(s, 0.0)).norm() < 1e-12);
        assert!((out[3] / phase - c(0.0, -s)).norm() < 1e-12);
        assert!(out[1].norm() < 1e-12 && out[2].norm() < 1e-12);

        let full = realize_gate(GateOp::CollectiveX { theta: 2.0 * PI }, 3).unwrap();
        let g = full[(0, 0)];
        assert!((&full - CMatrix::identity(8, 8) * g).camax() < 1e-12);
        assert!((g.norm() - 1.0).abs() < 1e-12);

        let z = realize_gate(GateOp::SingleZ { theta: PI, site: 1 }, 2).unwrap();
        for k in 0..4 {
            let expected = if k < 2 { c(0.0, -1.0) } else { c(0.0, 1.0) };
            assert!((z[(k, k)] - expected).norm() < 1e-12);
        }
        assert!(realize_gate(GateOp::SingleY { theta: 1.0, site: 4 }, 3).is_err());
        let cz = realize_gate(GateOp::CollectiveZ { theta: 0.4 }, 2).unwrap();
        assert!((cz[(0, 0)] - c(0.0, -0.4).exp()).norm() < 1e-12);
    }

    #[test]
    fn three_qubit_preparations() {
        let code = builtin("three_qubit").unwrap();
        for (axis, expected) in [
            (LogicalAxis::PlusX, [1.0, 0.0, 0.0]),
            (LogicalAxis::PlusZ, [0.0, 0.0, 1.0]),
            (LogicalAxis::MinusZ, [0.0, 0.0, -1.0]),
        ] {
            let rho = prepare_three_qubit(axis).unwrap().to_density();
            let r = logical_bloch(&rho, &code).unwrap();
            for k in 0..3 {
                assert!((r[k] - expected[k]).abs() < 1e-10, "{axis:?}");
            }
            assert!((expectation(code_projector(&code), &rho).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(matches!(prepare_three_qubit(LogicalAxis::PlusY), Err(Error::Unsupported(_))));
    }

    #[test]
    fn grassl_preparations() {
        let zero = prepare_grassl(GrasslTarget::Zero, 0.0, 0.0).unwrap();
        let s = 0.5;
        let mut v = crate::CVector::zeros(16);
        for label in ["0000", "0011", "1100", "1111"] {
            v[index_of(label).unwrap()] = c(s, 0.0);
        }
        assert!((zero.fidelity(&PureState::new(v).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        prepare_grassl(GrasslTarget::Plus, 0.0, 0.0).unwrap();
        for (_, f) in preparation_fidelities().unwrap() {
            assert!((f - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn echo_over_rotation() {
        let r = grassl_expectations(&prepare_grassl(GrasslTarget::Zero, 0.16, 0.0).unwrap()).unwrap();
        assert!((r[0] + 0.16 * std::f64::consts::FRAC_1_SQRT_2).abs() < 0.16f64.powi(2));
        assert!((r[2] - 0.9808).abs() < 0.16f64.powi(3));
        let r = grassl_expectations(&prepare_grassl(GrasslTarget::Zero, 0.0, 0.1).unwrap()).unwrap();
        assert!(r[0] > 0.0 && (r[0] - 0.04).abs() < 1e-3);
    }

    #[test]
    fn report() {
        let rep = perturbation_check(&[0.0, 0.05, 0.1, 0.2]).unwrap();
        assert!(rep.echo[0].residual.iter().all(|r| *r < 1e-12));
        assert!(rep.ms[0].residual < 1e-12);
        assert_eq!(rep.scaling.len(), 2);
        for s in &rep.scaling {
            assert!((s.ratios[0] - 8.0).abs() < 1.5, "{s:?}");
        }
        assert!(rep.echo[2].residual[0] < 0.1f64.powi(3));
        assert!(perturbation_check(&[0.5]).is_err());
    }
}
