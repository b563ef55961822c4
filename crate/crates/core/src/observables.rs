//! Logical observables of a register state relative to a code.
//!
//! `R = (<X_L>, <Y_L>, <Z_L>)`, the code population `p = <P_c>`, the in-code
//! expectations `p_L = <(L P_c + P_c L)/2>`, the purity and the conditional
//! Bloch vector `R^c = p_vec / p`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::code::{eigenstate, LogicalAxis, StabilizerCode};
use crate::noise::{monte_carlo_estimate, Channel, MonteCarloSettings};
use crate::state::{expectation, purity, DensityMatrix};
use crate::{c, CMatrix, Error, Result};

/// Smallest code population for which the conditional Bloch vector is defined.
pub const MIN_POPULATION: f64 = 1e-12;

/// Column order of [`ObservableRecord::csv_row`].
pub const CSV_HEADER: &str = "t,gt,t_over_T2,Rx,Ry,Rz,p,px,py,pz,purity,Rxc,Ryc,Rzc";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    Rx,
    Ry,
    Rz,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "px")]
    Px,
    #[serde(rename = "py")]
    Py,
    #[serde(rename = "pz")]
    Pz,
    #[serde(rename = "purity")]
    Purity,
}

impl Observable {
    pub const ALL: [Observable; 8] = [
        Observable::Rx,
        Observable::Ry,
        Observable::Rz,
        Observable::P,
        Observable::Px,
        Observable::Py,
        Observable::Pz,
        Observable::Purity,
    ];

    /// The seven observables with closed-form predictions.
    pub const MODELLED: [Observable; 7] = [
        Observable::Rx,
        Observable::Ry,
        Observable::Rz,
        Observable::P,
        Observable::Px,
        Observable::Py,
        Observable::Pz,
    ];

    /// CSV column name.
    pub fn name(self) -> &'static str {
        match self {
            Observable::Rx => "Rx",
            Observable::Ry => "Ry",
            Observable::Rz => "Rz",
            Observable::P => "p",
            Observable::Px => "px",
            Observable::Py => "py",
            Observable::Pz => "pz",
            Observable::Purity => "purity",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        Observable::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownName(text.to_string()))
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub r: [f64; 3],
    pub p: f64,
    pub p_vec: [f64; 3],
    pub purity: f64,
    pub r_cond: Option<[f64; 3]>,
}

impl ObservableRecord {
    pub fn get(&self, o: Observable) -> f64 {
        match o {
            Observable::Rx => self.r[0],
            Observable::Ry => self.r[1],
            Observable::Rz => self.r[2],
            Observable::P => self.p,
            Observable::Px => self.p_vec[0],
            Observable::Py => self.p_vec[1],
            Observable::Pz => self.p_vec[2],
            Observable::Purity => self.purity,
        }
    }

    /// One CSV line (no newline) in [`CSV_HEADER`] order, with 17 significant digits.
    /// `t2` is the coherence time used for the `t_over_T2` column; `purity` may be
    /// omitted for curves that do not define it.
    pub fn csv_row(&self, gamma: f64, t2: f64, with_purity: bool) -> String {
        let mut row = String::new();
        let t_over = if t2.is_finite() && t2 > 0.0 { self.t / t2 } else { f64::NAN };
        let mut fields = vec![Some(self.t), Some(gamma * self.t), Some(t_over)];
        fields.extend(self.r.iter().map(|&x| Some(x)));
        fields.push(Some(self.p));
        fields.extend(self.p_vec.iter().map(|&x| Some(x)));
        fields.push(with_purity.then_some(self.purity));
        match self.r_cond {
            Some(rc) => fields.extend(rc.iter().map(|&x| Some(x))),
            None => fields.extend([None, None, None]),
        }
        for (k, f) in fields.into_iter().enumerate() {
            if k > 0 {
                row.push(',');
            }
            if let Some(x) = f {
                write!(row, "{}", format_f64(x)).expect("string write");
            }
        }
        row
    }
}

/// `x` with 17 significant digits; `NaN` for non-finite values.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

fn check_dim(rho: &DensityMatrix, code: &StabilizerCode) -> Result<()> {
    if rho.dim() != code.dim() {
        return Err(Error::DimensionMismatch { expected: code.dim(), got: rho.dim() });
    }
    Ok(())
}

pub fn logical_bloch(rho: &DensityMatrix, code: &StabilizerCode) -> Result<[f64; 3]> {
    check_dim(rho, code)?;
    let [x, y, z] = code.logical_matrices();
    Ok([expectation(x, rho)?, expectation(y, rho)?, expectation(z, rho)?])
}

pub fn code_population(rho: &DensityMatrix, code: &StabilizerCode) -> Result<f64> {
    check_dim(rho, code)?;
    expectation(code.projector(), rho)
}

fn symmetrized(l: &CMatrix, p: &CMatrix) -> CMatrix {
    (l * p + p * l) * c(0.5, 0.0)
}

pub fn in_code_expectations(rho: &DensityMatrix, code: &StabilizerCode) -> Result<[f64; 3]> {
    check_dim(rho, code)?;
    let p = code.projector();
    let mut out = [0.0; 3];
    for (o, l) in out.iter_mut().zip(code.logical_matrices()) {
        *o = expectation(&symmetrized(l, p), rho)?;
    }
    Ok(out)
}

fn conditional(p_vec: [f64; 3], p: f64) -> Result<[f64; 3]> {
    if !(p >= MIN_POPULATION) {
        return Err(Error::VanishingPopulation(p));
    }
    Ok(p_vec.map(|x| x / p))
}

pub fn conditional_bloch(rho: &DensityMatrix, code: &StabilizerCode) -> Result<[f64; 3]> {
    conditional(in_code_expectations(rho, code)?, code_population(rho, code)?)
}

/// The seven operators `X_L, Y_L, Z_L, P_c` and the symmetrized in-code products.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    ops: Vec<CMatrix>,
}

impl ObservableSet {
    pub fn new(code: &StabilizerCode) -> Self {
        let p = code.projector();
        let [x, y, z] = code.logical_matrices();
        let ops = vec![
            x.clone(),
            y.clone(),
            z.clone(),
            p.clone(),
            symmetrized(x, p),
            symmetrized(y, p),
            symmetrized(z, p),
        ];
        ObservableSet { ops }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn measure(&self, rho: &DensityMatrix, t: f64) -> Result<ObservableRecord> {
        let dim = self.ops[0].nrows();
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: rho.dim() });
        }
        let v = self.ops.iter().map(|op| expectation(op, rho)).collect::<Result<Vec<_>>>()?;
        Ok(record_from(t, &v, purity(rho)))
    }
}

fn record_from(t: f64, v: &[f64], purity: f64) -> ObservableRecord {
    let p_vec = [v[4], v[5], v[6]];
    ObservableRecord {
        t,
        r: [v[0], v[1], v[2]],
        p: v[3],
        p_vec,
        purity,
        r_cond: conditional(p_vec, v[3]).ok(),
    }
}

pub fn measure(rho: &DensityMatrix, code: &StabilizerCode, t: f64) -> Result<ObservableRecord> {
    check_dim(rho, code)?;
    ObservableSet::new(code).measure(rho, t)
}

/// A Monte-Carlo record with one standard error per entry of [`Observable::ALL`].
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticRecord {
    pub record: ObservableRecord,
    pub std_errors: [f64; 8],
    /// Upper bound on the positive bias of the purity estimate.
    pub purity_bias: f64,
}

impl StochasticRecord {
    pub fn std_error(&self, o: Observable) -> f64 {
        self.std_errors[Observable::ALL.iter().position(|&x| x == o).expect("listed")]
    }
}

pub fn monte_carlo_record(
    rho0: &DensityMatrix,
    code: &StabilizerCode,
    settings: &MonteCarloSettings,
) -> Result<StochasticRecord> {
    check_dim(rho0, code)?;
    let set = ObservableSet::new(code);
    let est = monte_carlo_estimate(rho0, settings, set.operators())?;
    let means: Vec<f64> = est.probes.iter().map(|s| s.mean).collect();
    let mut std_errors = [0.0; 8];
    for (e, s) in std_errors.iter_mut().zip(&est.probes) {
        *e = s.std_error;
    }
    std_errors[7] = est.purity.std_error;
    Ok(StochasticRecord {
        record: record_from(settings.t, &means, est.purity.mean),
        std_errors,
        purity_bias: est.purity_bias,
    })
}

/// `|det M|` of the affine map on conditional Bloch vectors after time `t`.
///
/// The probes `+X_L, +Y_L, +Z_L, -Z_L` are evolved; the image of the origin is
/// taken as the midpoint of the `+-Z_L` images and `M` has columns
/// `R^c(+a) - centre` for `a = x, y, z`.
pub fn volume_element(channel: &Channel, code: &StabilizerCode, t: f64) -> Result<f64> {
    let image = |axis| -> Result<[f64; 3]> {
        let rho = channel.apply(&eigenstate(code, axis).to_density(), t)?;
        conditional_bloch(&rho, code)
    };
    let [px, py, pz, mz] = [LogicalAxis::PlusX, LogicalAxis::PlusY, LogicalAxis::PlusZ, LogicalAxis::MinusZ]
        .map(image);
    let (px, py, pz, mz) = (px?, py?, pz?, mz?);
    let centre: [f64; 3] = std::array::from_fn(|k| 0.5 * (pz[k] + mz[k]));
    let m = nalgebra::Matrix3::from_fn(|row, col| [px, py, pz][col][row] - centre[row]);
    Ok(m.determinant().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{builtin, logical_state};
    use crate::noise::{global_dephasing_map, local_dephasing_map, Correlation, Engine, NoiseKind, NoiseParams};
    use crate::state::PureState;
    use crate::CVector;
    use proptest::prelude::*;

    fn dephased(code: &str, axis: LogicalAxis, gt: f64) -> (StabilizerCode, DensityMatrix) {
        let code = builtin(code).unwrap();
        let rho = global_dephasing_map(&eigenstate(&code, axis).to_density(), 1.0, gt).unwrap();
        (code, rho)
    }

    #[test]
    fn fresh_states_give_ideal_records() {
        for name in ["three_qubit", "grassl", "grassl_dfs"] {
            let code = builtin(name).unwrap();
            for (theta, phi) in [(0.3, 1.1), (2.0, 4.0), (std::f64::consts::FRAC_PI_2, 0.0)] {
                let rec = measure(&logical_state(&code, theta, phi).to_density(), &code, 0.0).unwrap();
                let ideal = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                for k in 0..3 {
                    assert!((rec.r[k] - ideal[k]).abs() < 1e-12);
                    assert!((rec.p_vec[k] - ideal[k]).abs() < 1e-12);
                    assert!((rec.r_cond.unwrap()[k] - ideal[k]).abs() < 1e-12);
                }
                assert!((rec.p - 1.0).abs() < 1e-12);
                assert!((rec.purity - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn three_qubit_values() {
        let (code, rho) = dephased("three_qubit", LogicalAxis::PlusX, 0.5);
        let r = logical_bloch(&rho, &code).unwrap();
        assert!((r[0] - (-1.0f64).exp()).abs() < 1e-12);
        assert!((r[0] - 0.3679).abs() < 1e-4);
        let peak = 9f64.ln() / 4.0;
        let (code, rho) = dephased("three_qubit", LogicalAxis::PlusX, peak);
        let r = logical_bloch(&rho, &code).unwrap();
        assert!((r[2] - 4.0 / 9.0 * 9f64.powf(-0.125)).abs() < 1e-12);
        assert!((r[2] - 0.3377).abs() < 1e-4);

        let (code, rho) = dephased("three_qubit", LogicalAxis::MinusZ, 1.0);
        let p = code_population(&rho, &code).unwrap();
        assert!((p - 0.5 * ((-4.5f64).exp() + 1.0)).abs() < 1e-12);
        assert!((p - 0.5056).abs() < 1e-4);

        let (code, rho) = dephased("three_qubit", LogicalAxis::PlusZ, 0.8);
        let pz = in_code_expectations(&rho, &code).unwrap()[2];
        assert!((pz - 0.5 * (1.0 + (-0.4f64).exp())).abs() < 1e-12);

        let (code, rho) = dephased("three_qubit", LogicalAxis::PlusX, 1.0);
        let rc = conditional_bloch(&rho, &code).unwrap();
        let p = 0.5 * (0.5 * (-0.5f64).exp() + 0.5 * (-4.5f64).exp() + 1.0);
        let expected = (-1.25f64).exp() * 0.75f64.cosh() / p;
        assert!((rc[0] - expected).abs() < 1e-12);
        assert!((rc[0] - 0.5668).abs() < 1e-4);
    }

    #[test]
    fn grassl_values() {
        let (code, rho) = dephased("grassl", LogicalAxis::PlusX, 40.0);
        assert!((code_population(&rho, &code).unwrap() - 0.5).abs() < 1e-12);
        for gt in [0.1, 1.0, 3.0] {
            let (code, rho) = dephased("grassl", LogicalAxis::PlusX, gt);
            let rc = conditional_bloch(&rho, &code).unwrap();
            assert!((rc[0] - 1.0).abs() < 1e-12);
        }
        let (code, rho) = dephased("grassl", LogicalAxis::PlusZ, 40.0);
        assert!((in_code_expectations(&rho, &code).unwrap()[0] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let code = builtin("three_qubit").unwrap();
        let small = PureState::basis(0, 2).unwrap().to_density();
        assert!(matches!(logical_bloch(&small, &code), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(code_population(&small, &code), Err(Error::DimensionMismatch { .. })));
        // |000> + |111> lies entirely outside the code
        let mut v = CVector::zeros(8);
        v[0] = c(1.0, 0.0);
        v[7] = c(1.0, 0.0);
        let out = PureState::normalized(v).unwrap().to_density();
        assert!(code_population(&out, &code).unwrap().abs() < 1e-15);
        assert!(matches!(conditional_bloch(&out, &code), Err(Error::VanishingPopulation(_))));
        assert_eq!(measure(&out, &code, 0.0).unwrap().r_cond, None);
    }

    #[test]
    fn csv_layout() {
        let (code, rho) = dephased("three_qubit", LogicalAxis::PlusX, 0.5);
        let rec = measure(&rho, &code, 0.5).unwrap();
        let row = rec.csv_row(1.0, 2.0, true);
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), CSV_HEADER.split(',').count());
        assert_eq!(cols[0], "5.0000000000000000e-1");
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.25);
        assert_eq!(cols[3].parse::<f64>().unwrap(), rec.r[0]);
        let bare = ObservableRecord { r_cond: None, ..rec }.csv_row(1.0, 2.0, false);
        assert!(bare.ends_with(",,,,"));
        assert_eq!(Observable::parse("PX").unwrap(), Observable::Px);
        assert!(Observable::parse("q").is_err());
    }

    #[test]
    fn volume_element_behaviour() {
        let code = builtin("three_qubit").unwrap();
        let channel = Channel::analytic(NoiseParams::new(1.0, Correlation::Global, NoiseKind::Dephasing).unwrap());
        assert!((volume_element(&channel, &code, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let values: Vec<f64> = (0..=12).map(|k| volume_element(&channel, &code, 0.25 * k as f64).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        assert!(volume_element(&channel, &code, 40.0).unwrap() < 1e-6);
        let mc = Channel { engine: Engine::MonteCarlo { n_traj: 0, seed: 0 }, ..channel };
        assert!(volume_element(&mc, &code, 1.0).is_err());
    }

    #[test]
    fn monte_carlo_record_tracks_exact_values() {
        let code = builtin("three_qubit").unwrap();
        let rho = eigenstate(&code, LogicalAxis::PlusX).to_density();
        let settings = MonteCarloSettings { gamma: 1.0, t: 0.5, n_traj: 20_000, seed: 5, correlation: Correlation::Global };
        let mc = monte_carlo_record(&rho, &code, &settings).unwrap();
        let exact = measure(&global_dephasing_map(&rho, 1.0, 0.5).unwrap(), &code, 0.5).unwrap();
        for o in Observable::ALL {
            let bias = if o == Observable::Purity { mc.purity_bias } else { 0.0 };
            let tol = 4.0 * mc.std_error(o) + bias + 1e-12;
            assert!((mc.record.get(o) - exact.get(o)).abs() <= tol, "{o}");
        }
    }

    fn random_state(seed: &[f64]) -> DensityMatrix {
        let a = CMatrix::from_fn(8, 8, |i, j| c(seed[(3 * i + j) % seed.len()], seed[(i + 5 * j + 1) % seed.len()]));
        let m = &a * a.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(m * c(1.0 / tr, 0.0)).unwrap()
    }

    proptest! {
        #[test]
        fn in_code_bounded_by_population(seed in proptest::collection::vec(-1.0f64..1.0, 29), gt in 0.0f64..4.0) {
            let code = builtin("three_qubit").unwrap();
            let rho = random_state(&seed);
            for state in [global_dephasing_map(&rho, 1.0, gt).unwrap(), local_dephasing_map(&rho, 1.0, gt).unwrap()] {
                let rec = measure(&state, &code, gt).unwrap();
                prop_assert!(rec.p >= -1e-12 && rec.p <= 1.0 + 1e-9);
                let norm = rec.p_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!(norm <= rec.p + 1e-9);
                for x in rec.r {
                    prop_assert!(x.abs() <= 1.0 + 1e-9);
                }
                if let Some(rc) = rec.r_cond {
                    prop_assert!(rc.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 + 1e-9);
                }
            }
        }
    }
}
