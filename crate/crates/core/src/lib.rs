//! Logical-qubit dynamics under spatially correlated noise.
//!
//! The crate models small stabilizer codes (three- and four-qubit examples are
//! built in) as dense density matrices, evolves them under global or local
//! dephasing and amplitude damping with three independent engines, extracts
//! the logical observables (logical Bloch vector, code-space population,
//! in-code expectations, purity, conditional Bloch vector) and fits their
//! time series to closed-form decay laws.
//!
//! Basis convention used throughout: site 1 is the most significant bit of a
//! computational basis index and `|0>` is the `+1` eigenstate of `Z`. See
//! [`bits`] for the single conversion routine.

pub mod bits;
pub mod circuit;
pub mod code;
pub mod error;
pub mod fit;
pub mod model;
pub mod noise;
pub mod observables;
pub mod pauli;
pub mod state;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use error::{Error, Result};

/// Dense complex matrix used for operators and density matrices.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Largest register for which dense matrices are built.
pub const MAX_QUBITS: usize = 12;

pub(crate) fn check_register(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyRegister)
    } else if n > MAX_QUBITS {
        Err(Error::RegisterTooLarge(n))
    } else {
        Ok(())
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
