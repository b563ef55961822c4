//! Fixed-step RK4 integration of the dissipative master equation
//! `d rho/dt = sum_n [C_n rho C_n^dag - {C_n^dag C_n, rho}/2]`.
//!
//! There is no Hamiltonian term: the noise is pure dissipation in the frame
//! where the coherent dynamics vanish.

use crate::state::DensityMatrix;
use crate::{c, CMatrix, Error, Result};

/// Maximum change of the final state allowed when the step count is halved.
pub const RICHARDSON_TOL: f64 = 1e-8;
/// Largest step count [`lindblad_evolve_converged`] will try.
pub const MAX_STEPS: usize = 1 << 16;
const DRIFT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// `max |rho_N(t) - rho_{N/2}(t)|` at the final time, if the run could be halved.
    pub richardson_error: Option<f64>,
    /// Largest Hermiticity or trace drift removed by the per-step correction.
    pub max_drift: f64,
}

impl EvolutionResult {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("at least the initial state")
    }
}

struct Dissipator {
    ops: Vec<CMatrix>,
    adjoints: Vec<CMatrix>,
    /// `sum_n C_n^dag C_n / 2`
    half_decay: CMatrix,
}

impl Dissipator {
    fn new(collapses: &[CMatrix], dim: usize) -> Result<Self> {
        for op in collapses {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: op.nrows() });
            }
        }
        let adjoints: Vec<CMatrix> = collapses.iter().map(|op| op.adjoint()).collect();
        let half_decay = collapses
            .iter()
            .zip(&adjoints)
            .fold(CMatrix::zeros(dim, dim), |acc, (op, adj)| acc + adj * op)
            * c(0.5, 0.0);
        Ok(Dissipator { ops: collapses.to_vec(), adjoints, half_decay })
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mut out = -(&self.half_decay * rho + rho * &self.half_decay);
        for (op, adj) in self.ops.iter().zip(&self.adjoints) {
            out += op * rho * adj;
        }
        out
    }

    fn step(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        let h = c(dt, 0.0);
        let half = c(0.5 * dt, 0.0);
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1 * half));
        let k3 = self.rhs(&(rho + &k2 * half));
        let k4 = self.rhs(&(rho + &k3 * h));
        rho + (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0)
    }

    /// Largest decay rate bound `sum_n ||C_n||^2`, used to pick a first step size.
    fn rate_bound(&self) -> f64 {
        self.ops
            .iter()
            .zip(&self.adjoints)
            .map(|(op, adj)| {
                let gram = adj * op;
                gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max)
            })
            .sum()
    }

    fn integrate_final(&self, rho0: &CMatrix, t_final: f64, n_steps: usize) -> CMatrix {
        let dt = t_final / n_steps as f64;
        (0..n_steps).fold(rho0.clone(), |rho, _| self.step(&rho, dt))
    }
}

/// Integrate from `rho0` to `t_final` in `n_steps` equal steps, storing every step.
///
/// Fails if a step drifts from Hermiticity or unit trace by more than `1e-6`, if the
/// final state is not positive, or if rerunning with half the steps moves the final
/// state by more than [`RICHARDSON_TOL`].
pub fn lindblad_evolve(
    rho0: &DensityMatrix,
    collapses: &[CMatrix],
    t_final: f64,
    n_steps: usize,
) -> Result<EvolutionResult> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    if !(t_final > 0.0) {
        if t_final == 0.0 {
            return Ok(EvolutionResult {
                times: vec![0.0],
                states: vec![rho0.clone()],
                richardson_error: None,
                max_drift: 0.0,
            });
        }
        return Err(Error::NegativeTime(t_final));
    }
    let diss = Dissipator::new(collapses, rho0.dim())?;
    let dt = t_final / n_steps as f64;

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(rho0.clone());
    let mut max_drift = 0.0f64;
    let mut current = rho0.entries().clone();
    for k in 1..=n_steps {
        let next = diss.step(&current, dt);
        let mut rho = DensityMatrix::from_entries_unchecked(next)?;
        let (herm, trace) = rho.rehermitize();
        let drift = herm.max(trace);
        if !drift.is_finite() || drift > DRIFT_TOL {
            return Err(Error::Integration(format!(
                "step {k}: drift {drift:.3e} exceeds {DRIFT_TOL:.0e}; reduce the step size"
            )));
        }
        max_drift = max_drift.max(drift);
        current = rho.entries().clone();
        times.push(if k == n_steps { t_final } else { k as f64 * dt });
        states.push(rho);
    }
    log::debug!("lindblad: {n_steps} steps, dt = {dt:.3e}, max drift {max_drift:.3e}");

    let final_state = states.last().expect("non-empty");
    let min_ev = final_state.min_eigenvalue();
    if min_ev < crate::state::POSITIVITY_TOL {
        return Err(Error::Integration(format!("final state has eigenvalue {min_ev:.3e}")));
    }

    let richardson_error = if n_steps >= 2 {
        let coarse = diss.integrate_final(rho0.entries(), t_final, n_steps / 2);
        let err = (&coarse - final_state.entries()).camax();
        if err > RICHARDSON_TOL {
            return Err(Error::Integration(format!(
                "halving {n_steps} steps changes the final state by {err:.3e} (> {RICHARDSON_TOL:.0e})"
            )));
        }
        Some(err)
    } else {
        None
    };

    Ok(EvolutionResult { times, states, richardson_error, max_drift })
}

/// Run [`lindblad_evolve`], doubling the step count from an initial guess until the
/// Richardson self-check passes.
pub fn lindblad_evolve_converged(
    rho0: &DensityMatrix,
    collapses: &[CMatrix],
    t_final: f64,
    min_steps: usize,
) -> Result<EvolutionResult> {
    let dim = rho0.dim();
    let diss = Dissipator::new(collapses, dim)?;
    // keep rate * dt near 0.02 for the first attempt
    let guess = (2.0 * diss.rate_bound() * t_final / 0.02).ceil() as usize;
    let mut n_steps = min_steps.max(guess).max(2);
    loop {
        match lindblad_evolve(rho0, collapses, t_final, n_steps) {
            Err(Error::Integration(msg)) if n_steps < MAX_STEPS => {
                log::debug!("lindblad: retrying with {} steps ({msg})", 2 * n_steps);
                n_steps *= 2;
            }
            other => return other,
        }
    }
}
