//! Stabilizer codes with one logical qubit.
//!
//! A [`CodeSpec`] lists generators and the logical `X`/`Z` words; [`validate_code`]
//! checks the algebra with explicit matrices and produces a [`StabilizerCode`]
//! carrying the logical basis, `Y_L = i X_L Z_L` and the code-space projector.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::index_of;
use crate::pauli::{PauliString, PauliText, Phase};
use crate::state::PureState;
use crate::{c, check_register, CMatrix, CVector, Error, Result};

const CODE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    pub name: String,
    pub n: usize,
    pub generators: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub basis_zero: Option<CVector>,
    pub basis_one: Option<CVector>,
}

/// JSON form of a code, e.g.
/// `{"name": "three_qubit", "n": 3, "generators": ["+YXY", "+XYY"], "logical_x": "-YYZ", "logical_z": "+XXX"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeConfig {
    pub name: String,
    pub n: usize,
    pub generators: Vec<PauliText>,
    pub logical_x: PauliText,
    pub logical_z: PauliText,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_zero: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_one: Option<Vec<[f64; 2]>>,
}

impl CodeConfig {
    pub fn to_spec(&self) -> Result<CodeSpec> {
        check_register(self.n)?;
        let amps = |v: &Option<Vec<[f64; 2]>>| {
            v.as_ref()
                .map(|a| CVector::from_iterator(a.len(), a.iter().map(|[re, im]| c(*re, *im))))
        };
        Ok(CodeSpec {
            name: self.name.clone(),
            n: self.n,
            generators: self
                .generators
                .iter()
                .map(|g| g.resolve(self.n))
                .collect::<Result<_>>()?,
            logical_x: self.logical_x.resolve(self.n)?,
            logical_z: self.logical_z.resolve(self.n)?,
            basis_zero: amps(&self.basis_zero),
            basis_one: amps(&self.basis_one),
        })
    }
}

impl From<&CodeSpec> for CodeConfig {
    fn from(spec: &CodeSpec) -> Self {
        let amps = |v: &Option<CVector>| v.as_ref().map(|a| a.iter().map(|z| [z.re, z.im]).collect());
        CodeConfig {
            name: spec.name.clone(),
            n: spec.n,
            generators: spec.generators.iter().map(PauliText::from).collect(),
            logical_x: (&spec.logical_x).into(),
            logical_z: (&spec.logical_z).into(),
            basis_zero: amps(&spec.basis_zero),
            basis_one: amps(&spec.basis_one),
        }
    }
}

/// A validated code. Immutable; realized operators are cached.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    generators: Vec<PauliString>,
    logical_x: PauliString,
    logical_y: PauliString,
    logical_z: PauliString,
    basis_zero: PureState,
    basis_one: PureState,
    projector: CMatrix,
    x_matrix: CMatrix,
    y_matrix: CMatrix,
    z_matrix: CMatrix,
    generator_matrices: Vec<CMatrix>,
}

impl StabilizerCode {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        1 << self.n
    }
    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }
    pub fn generator_matrices(&self) -> &[CMatrix] {
        &self.generator_matrices
    }
    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }
    pub fn logical_y(&self) -> &PauliString {
        &self.logical_y
    }
    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }
    /// Realized `[X_L, Y_L, Z_L]`.
    pub fn logical_matrices(&self) -> [&CMatrix; 3] {
        [&self.x_matrix, &self.y_matrix, &self.z_matrix]
    }
    pub fn basis_zero(&self) -> &PureState {
        &self.basis_zero
    }
    pub fn basis_one(&self) -> &PureState {
        &self.basis_one
    }
    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }
}

/// `prod_k (I + S_k)/2` over the given generators.
pub fn projector_from_generators(generators: &[CMatrix], dim: usize) -> CMatrix {
    let id = CMatrix::identity(dim, dim);
    generators
        .iter()
        .fold(id.clone(), |acc, s| acc * ((&id + s) * c(0.5, 0.0)))
}

pub fn code_projector(code: &StabilizerCode) -> &CMatrix {
    code.projector()
}

fn is_eigenvector(op: &CMatrix, v: &CVector, eigenvalue: f64) -> bool {
    (op * v - v * c(eigenvalue, 0.0)).camax() <= CODE_TOL
}

/// Make the largest-magnitude amplitude (first one on ties) real and positive.
fn fix_global_phase(v: CVector) -> CVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .find(|z| z.norm() >= max - 1e-12)
        .copied()
        .unwrap_or(c(1.0, 0.0));
    let rot = pivot.conj() / pivot.norm();
    v * rot
}

pub fn validate_code(spec: &CodeSpec) -> Result<StabilizerCode> {
    let n = spec.n;
    check_register(n)?;
    let invalid = |msg: String| Err(Error::InvalidCode(msg));

    let words = spec
        .generators
        .iter()
        .chain([&spec.logical_x, &spec.logical_z]);
    for w in words {
        if w.len() != n {
            return Err(Error::LengthMismatch { left: w.len(), right: n });
        }
        if !w.is_hermitian() {
            return invalid(format!("{w} has an imaginary phase"));
        }
    }
    if spec.generators.is_empty() {
        return invalid("no generators".into());
    }
    for (i, a) in spec.generators.iter().enumerate() {
        for b in &spec.generators[i + 1..] {
            if !a.commutes_with(b) {
                return invalid(format!("generators {a} and {b} do not commute"));
            }
        }
        for logical in [&spec.logical_x, &spec.logical_z] {
            if !logical.commutes_with(a) {
                return invalid(format!("logical {logical} does not commute with generator {a}"));
            }
        }
    }
    if spec.logical_x.commutes_with(&spec.logical_z) {
        return invalid("logical X and Z commute".into());
    }

    let dim = 1usize << n;
    let generator_matrices = spec
        .generators
        .iter()
        .map(PauliString::realize)
        .collect::<Result<Vec<_>>>()?;
    let projector = projector_from_generators(&generator_matrices, dim);
    let code_dim = projector.trace().re;
    if (code_dim - 2.0).abs() > 1e-8 {
        return invalid(format!("code space has dimension {code_dim:.3}, expected 2"));
    }
    if (&projector * &projector - &projector).camax() > CODE_TOL
        || (&projector - projector.adjoint()).camax() > CODE_TOL
    {
        return invalid("projector is not an orthogonal projector".into());
    }

    let logical_y = spec.logical_x.product(&spec.logical_z)?.scaled(Phase::I);
    let x_matrix = spec.logical_x.realize()?;
    let y_matrix = logical_y.realize()?;
    let z_matrix = spec.logical_z.realize()?;

    let zero = match &spec.basis_zero {
        Some(v) => PureState::new(v.clone())?.into_amplitudes(),
        None => {
            let id = CMatrix::identity(dim, dim);
            let p0 = &projector * ((&id + &z_matrix) * c(0.5, 0.0));
            let col = (0..dim)
                .max_by(|&a, &b| p0.column(a).norm().total_cmp(&p0.column(b).norm()))
                .expect("non-empty");
            let v: CVector = p0.column(col).into_owned();
            if v.norm() < 1e-8 {
                return invalid("logical Z has no +1 eigenvector in the code space".into());
            }
            fix_global_phase(v.unscale(v.norm()))
        }
    };
    let one = match &spec.basis_one {
        Some(v) => PureState::new(v.clone())?.into_amplitudes(),
        None => &x_matrix * &zero,
    };

    for (k, s) in generator_matrices.iter().enumerate() {
        if !is_eigenvector(s, &zero, 1.0) || !is_eigenvector(s, &one, 1.0) {
            return invalid(format!(
                "basis states are not stabilized by {}",
                spec.generators[k]
            ));
        }
    }
    if !is_eigenvector(&z_matrix, &zero, 1.0) || !is_eigenvector(&z_matrix, &one, -1.0) {
        return invalid("basis states are not Z_L eigenstates with eigenvalues +1, -1".into());
    }
    if (&x_matrix * &zero - &one).camax() > CODE_TOL {
        return invalid("X_L |0_L> differs from |1_L>".into());
    }

    Ok(StabilizerCode {
        name: spec.name.clone(),
        n,
        generators: spec.generators.clone(),
        logical_x: spec.logical_x.clone(),
        logical_y,
        logical_z: spec.logical_z.clone(),
        basis_zero: PureState::new(zero)?,
        basis_one: PureState::new(one)?,
        projector,
        x_matrix,
        y_matrix,
        z_matrix,
        generator_matrices,
    })
}

/// `cos(theta/2)|0_L> + e^{i phi} sin(theta/2)|1_L>`.
pub fn logical_state(code: &StabilizerCode, theta: f64, phi: f64) -> PureState {
    let a = c((theta / 2.0).cos(), 0.0);
    let b = Complex64::from_polar((theta / 2.0).sin(), phi);
    let v = code.basis_zero().amplitudes() * a + code.basis_one().amplitudes() * b;
    PureState::normalized(v).expect("logical basis is orthonormal")
}

/// Named eigenstates of the logical Paulis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalAxis {
    #[serde(rename = "+X")]
    PlusX,
    #[serde(rename = "-X")]
    MinusX,
    #[serde(rename = "+Y")]
    PlusY,
    #[serde(rename = "-Y")]
    MinusY,
    #[serde(rename = "+Z")]
    PlusZ,
    #[serde(rename = "-Z")]
    MinusZ,
}

impl LogicalAxis {
    /// Bloch angles `(theta, phi)` of the eigenstate.
    pub fn angles(self) -> (f64, f64) {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            LogicalAxis::PlusX => (FRAC_PI_2, 0.0),
            LogicalAxis::MinusX => (FRAC_PI_2, PI),
            LogicalAxis::PlusY => (FRAC_PI_2, FRAC_PI_2),
            LogicalAxis::MinusY => (FRAC_PI_2, 3.0 * FRAC_PI_2),
            LogicalAxis::PlusZ => (0.0, 0.0),
            LogicalAxis::MinusZ => (PI, 0.0),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_uppercase().trim_end_matches("_L") {
            "+X" | "X" => Ok(LogicalAxis::PlusX),
            "-X" => Ok(LogicalAxis::MinusX),
            "+Y" | "Y" => Ok(LogicalAxis::PlusY),
            "-Y" => Ok(LogicalAxis::MinusY),
            "+Z" | "Z" => Ok(LogicalAxis::PlusZ),
            "-Z" => Ok(LogicalAxis::MinusZ),
            _ => Err(Error::UnknownName(text.to_string())),
        }
    }
}

pub fn eigenstate(code: &StabilizerCode, axis: LogicalAxis) -> PureState {
    let (theta, phi) = axis.angles();
    logical_state(code, theta, phi)
}

fn ket_sum(n: usize, terms: &[(f64, &str)]) -> CVector {
    let mut v = CVector::zeros(1 << n);
    for &(amp, label) in terms {
        v[index_of(label).expect("static label")] += c(amp, 0.0);
    }
    v
}

fn word(text: &str, n: usize) -> PauliString {
    PauliString::parse(text, n).expect("static Pauli word")
}

/// The built-in codes: `three_qubit`, `grassl`, and its dephasing-free variant `grassl_dfs`.
pub fn builtin_codes() -> BTreeMap<&'static str, CodeSpec> {
    let h = FRAC_1_SQRT_2;
    let mut codes = BTreeMap::new();
    codes.insert(
        "three_qubit",
        CodeSpec {
            name: "three_qubit".into(),
            n: 3,
            generators: vec![word("YXY", 3), word("XYY", 3)],
            logical_x: word("-YYZ", 3),
            logical_z: word("XXX", 3),
            basis_zero: Some(ket_sum(3, &[(h, "001"), (h, "110")])),
            basis_one: Some(ket_sum(3, &[(h, "000"), (-h, "111")])),
        },
    );
    // |0_L> = |Phi+>|Phi+>, |1_L> = |Phi->|Phi->
    codes.insert(
        "grassl",
        CodeSpec {
            name: "grassl".into(),
            n: 4,
            generators: vec![word("XXXX", 4), word("IIZZ", 4), word("ZZII", 4)],
            logical_x: word("ZIZI", 4),
            logical_z: word("XXII", 4),
            basis_zero: Some(ket_sum(4, &[(0.5, "0000"), (0.5, "0011"), (0.5, "1100"), (0.5, "1111")])),
            basis_one: Some(ket_sum(4, &[(0.5, "0000"), (-0.5, "0011"), (-0.5, "1100"), (0.5, "1111")])),
        },
    );
    // |0_L> = |Psi+>|Psi+>, |1_L> = |Psi->|Psi->; conjugating the Grassl code by X_2 X_4
    // flips the signs of both ZZ generators.
    codes.insert(
        "grassl_dfs",
        CodeSpec {
            name: "grassl_dfs".into(),
            n: 4,
            generators: vec![word("XXXX", 4), word("-IIZZ", 4), word("-ZZII", 4)],
            logical_x: word("ZIZI", 4),
            logical_z: word("XXII", 4),
            basis_zero: Some(ket_sum(4, &[(0.5, "0101"), (0.5, "0110"), (0.5, "1001"), (0.5, "1010")])),
            basis_one: Some(ket_sum(4, &[(0.5, "0101"), (-0.5, "0110"), (-0.5, "1001"), (0.5, "1010")])),
        },
    );
    codes
}

/// Look up and validate a built-in code by name.
pub fn builtin(name: &str) -> Result<StabilizerCode> {
    let codes = builtin_codes();
    let spec = codes.get(name).ok_or_else(|| Error::UnknownName(name.to_string()))?;
    validate_code(spec)
}
