//! Exact dephasing channels.
//!
//! Gaussian white-noise dephasing is diagonal in the computational basis, so
//! each density-matrix element `(a, b)` is simply rescaled:
//!
//! * global field: `exp(-gamma t (m_a - m_b)^2 / 8)` with `m` the magnetization,
//! * independent fields: `exp(-gamma t d_H(a, b) / 2)` with `d_H` the Hamming distance.

use crate::bits::magnetization_unchecked;
use crate::state::DensityMatrix;
use crate::{c, Error, Result};

fn scale_elements(
    rho: &DensityMatrix,
    t: f64,
    factor: impl Fn(usize, usize) -> f64,
) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let mut m = rho.entries().clone();
    let dim = rho.dim();
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                m[(a, b)] *= c(factor(a, b), 0.0);
            }
        }
    }
    DensityMatrix::from_entries_unchecked(m)
}

/// Global-dephasing decay factor for a magnetization difference `delta_m`.
pub fn global_factor(delta_m: i32, gamma: f64, t: f64) -> f64 {
    let dm = delta_m as f64;
    (-gamma * t * dm * dm / 8.0).exp()
}

/// Local-dephasing decay factor for a Hamming distance `delta_n`.
pub fn local_factor(delta_n: u32, gamma: f64, t: f64) -> f64 {
    (-gamma * t * delta_n as f64 / 2.0).exp()
}

pub fn global_dephasing_map(rho: &DensityMatrix, gamma: f64, t: f64) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    scale_elements(rho, t, |a, b| {
        global_factor(magnetization_unchecked(a, n) - magnetization_unchecked(b, n), gamma, t)
    })
}

pub fn local_dephasing_map(rho: &DensityMatrix, gamma: f64, t: f64) -> Result<DensityMatrix> {
    scale_elements(rho, t, |a, b| local_factor((a ^ b).count_ones(), gamma, t))
}
