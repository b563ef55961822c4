//! Collapse-operator factories for the master equation.
//!
//! With the dissipator `C rho C^dag - {C^dag C, rho}/2`, a collapse operator
//! `sqrt(kappa) sum_k Z_k` damps element `(a, b)` at rate `kappa (m_a - m_b)^2 / 2`.
//! Choosing `kappa = gamma / 4` reproduces the analytic global factor
//! `exp(-gamma t dm^2 / 8)`; the same normalization per site gives
//! `exp(-gamma t d_H / 2)` for independent fields.

use crate::bits::site_mask;
use crate::noise::Correlation;
use crate::pauli::{Letter, PauliString, Phase};
use crate::{c, check_register, CMatrix, Result};

fn z_on(site: usize, n: usize) -> Result<CMatrix> {
    PauliString::from_sites(Phase::ONE, &[(Letter::Z, site + 1)], n)?.realize()
}

pub fn dephasing_collapse_ops(n: usize, gamma: f64, correlation: Correlation) -> Result<Vec<CMatrix>> {
    check_register(n)?;
    let amp = c(gamma.sqrt() / 2.0, 0.0);
    let zs = (0..n).map(|k| z_on(k, n)).collect::<Result<Vec<_>>>()?;
    Ok(match correlation {
        Correlation::Global => {
            let dim = 1 << n;
            let total = zs.into_iter().fold(CMatrix::zeros(dim, dim), |acc, z| acc + z);
            vec![total * amp]
        }
        Correlation::Local => zs.into_iter().map(|z| z * amp).collect(),
    })
}

/// `sqrt(gamma) sigma^-_k` per site, with `sigma^- = |0><1|` lowering toward `|0>`.
pub fn amplitude_damping_collapse_ops(n: usize, gamma: f64) -> Result<Vec<CMatrix>> {
    check_register(n)?;
    let dim = 1usize << n;
    let amp = c(gamma.sqrt(), 0.0);
    Ok((0..n)
        .map(|k| {
            let mask = site_mask(k, n);
            let mut m = CMatrix::zeros(dim, dim);
            for b in (0..dim).filter(|b| b & mask != 0) {
                m[(b ^ mask, b)] = amp;
            }
            m
        })
        .collect())
}
