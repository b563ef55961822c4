//! Pure states, density matrices and the scalar functionals on them.

use crate::{c, check_register, CMatrix, CVector, Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-8;
pub const IMAG_TOL: f64 = 1e-10;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^n with n >= 1")));
    }
    let n = dim.trailing_zeros() as usize;
    check_register(n)?;
    Ok(n)
}

/// Normalized state vector of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm2} differs from 1")));
        }
        Ok(PureState { amplitudes })
    }

    /// Rescale to unit norm first; fails only on a zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        PureState::new(amplitudes.unscale(norm))
    }

    pub fn basis(index: usize, n: usize) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Ok(PureState { amplitudes: v })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite `2^n x 2^n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, trace and positivity.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let rho = DensityMatrix::from_entries_unchecked(entries)?;
        rho.check_hermitian_trace()?;
        let min = rho.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    /// Shape check only. Engines use this for intermediate states and validate at the end.
    pub(crate) fn from_entries_unchecked(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidState(format!(
                "{} x {} matrix is not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        qubits_for_dim(entries.nrows())?;
        Ok(DensityMatrix { entries })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        Ok(DensityMatrix {
            entries: CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `max |rho - rho^dagger|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).camax()
    }

    pub(crate) fn check_hermitian_trace(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian: defect {herm:.3e}")));
        }
        let tr = self.entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_hermitian_trace()?;
        let min = self.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `(rho + rho^dagger)/2` rescaled to unit trace; returns the pre-correction drift
    /// `(hermiticity defect, |trace - 1|)`.
    pub(crate) fn rehermitize(&mut self) -> (f64, f64) {
        let herm = self.hermiticity_defect();
        let sym = (&self.entries + self.entries.adjoint()) * c(0.5, 0.0);
        let tr = sym.trace().re;
        self.entries = sym * c(1.0 / tr, 0.0);
        (herm, (tr - 1.0).abs())
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries).camax()
    }
}

/// `Tr(op rho)`, checked to be real.
pub fn expectation(op: &CMatrix, rho: &DensityMatrix) -> Result<f64> {
    let value = trace_product(op, rho.entries())?;
    if value.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue(value.im));
    }
    Ok(value.re)
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Result<num_complex::Complex64> {
    if a.nrows() != b.ncols() || a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: a.ncols() });
    }
    let mut acc = c(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// `Tr(rho^2) = sum |rho_ij|^2` for Hermitian `rho`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}
