//! Noise models and the three evolution engines.
//!
//! * [`analytic`]: exact element-wise dephasing maps.
//! * [`lindblad`]: fixed-step RK4 integration of the master equation.
//! * [`monte_carlo`]: averaging over sampled Gaussian phase kicks.
//!
//! The rate `gamma` is the white-noise strength of the fluctuating field, so a
//! single physical qubit's coherence decays as `exp(-gamma t / 2)`.

pub mod analytic;
pub mod collapse;
pub mod lindblad;
pub mod monte_carlo;

use serde::{Deserialize, Serialize};

use crate::state::DensityMatrix;
use crate::{Error, Result};

pub use analytic::{global_dephasing_map, local_dephasing_map};
pub use collapse::{amplitude_damping_collapse_ops, dephasing_collapse_ops};
pub use lindblad::{lindblad_evolve, lindblad_evolve_converged, EvolutionResult, RICHARDSON_TOL};
pub use monte_carlo::{monte_carlo_dephasing, monte_carlo_estimate, MonteCarloEstimate, MonteCarloSettings, ProbeStat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    /// One field shared by every qubit.
    #[default]
    Global,
    /// Independent fields of equal strength.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Dephasing,
    AmplitudeDamping,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    Analytic,
    Lindblad,
    MonteCarlo,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "analytic" => Ok(EngineKind::Analytic),
            "lindblad" => Ok(EngineKind::Lindblad),
            "monte_carlo" | "mc" => Ok(EngineKind::MonteCarlo),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub gamma: f64,
    #[serde(default)]
    pub correlation: Correlation,
    #[serde(default)]
    pub kind: NoiseKind,
}

impl NoiseParams {
    pub fn new(gamma: f64, correlation: Correlation, kind: NoiseKind) -> Result<Self> {
        let p = NoiseParams { gamma, correlation, kind };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

pub const DEFAULT_N_STEPS: usize = 256;
pub const DEFAULT_N_TRAJ: usize = 100_000;

/// JSON noise block: `{"kind", "correlation", "gamma", "engine", "n_steps", "n_traj", "seed"}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub correlation: Correlation,
    pub gamma: f64,
    #[serde(default)]
    pub engine: EngineKind,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_steps() -> usize {
    DEFAULT_N_STEPS
}
fn default_n_traj() -> usize {
    DEFAULT_N_TRAJ
}

impl NoiseConfig {
    pub fn params(&self) -> NoiseParams {
        NoiseParams { gamma: self.gamma, correlation: self.correlation, kind: self.kind }
    }

    pub fn channel(&self) -> Result<Channel> {
        self.params().validate()?;
        let engine = match self.engine {
            EngineKind::Analytic => Engine::Analytic,
            EngineKind::Lindblad => Engine::Lindblad { min_steps: self.n_steps.max(1) },
            EngineKind::MonteCarlo => Engine::MonteCarlo { n_traj: self.n_traj, seed: self.seed },
        };
        Ok(Channel { noise: self.params(), engine })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    Analytic,
    /// Step count is doubled from `min_steps` until the Richardson check passes.
    Lindblad { min_steps: usize },
    MonteCarlo { n_traj: usize, seed: u64 },
}

/// A noise model paired with the engine that evolves it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel {
    pub noise: NoiseParams,
    pub engine: Engine,
}

impl Channel {
    pub fn analytic(noise: NoiseParams) -> Self {
        Channel { noise, engine: Engine::Analytic }
    }

    pub fn kind(&self) -> EngineKind {
        match self.engine {
            Engine::Analytic => EngineKind::Analytic,
            Engine::Lindblad { .. } => EngineKind::Lindblad,
            Engine::MonteCarlo { .. } => EngineKind::MonteCarlo,
        }
    }

    pub fn collapse_ops(&self, n: usize) -> Result<Vec<crate::CMatrix>> {
        match self.noise.kind {
            NoiseKind::Dephasing => dephasing_collapse_ops(n, self.noise.gamma, self.noise.correlation),
            NoiseKind::AmplitudeDamping => amplitude_damping_collapse_ops(n, self.noise.gamma),
        }
    }

    /// State after evolving `rho` for time `t`.
    pub fn apply(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        let NoiseParams { gamma, correlation, kind } = self.noise;
        match (self.engine, kind) {
            (Engine::Analytic, NoiseKind::Dephasing) => match correlation {
                Correlation::Global => global_dephasing_map(rho, gamma, t),
                Correlation::Local => local_dephasing_map(rho, gamma, t),
            },
            (Engine::Lindblad { min_steps }, _) => {
                if t < 0.0 {
                    return Err(Error::NegativeTime(t));
                }
                let ops = self.collapse_ops(rho.n_qubits())?;
                lindblad_evolve_converged(rho, &ops, t, min_steps).map(|r| r.final_state().clone())
            }
            (Engine::MonteCarlo { n_traj, seed }, NoiseKind::Dephasing) => {
                monte_carlo_dephasing(rho, gamma, t, n_traj, seed, correlation)
            }
            (engine, NoiseKind::AmplitudeDamping) => Err(Error::Unsupported(format!(
                "amplitude damping is only available with the Lindblad engine, not {engine:?}"
            ))),
        }
    }
}
