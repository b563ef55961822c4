//! Run configuration: the JSON file plus command-line overrides.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use logiq::circuit::{prepare_grassl, prepare_three_qubit, GrasslTarget};
use logiq::code::{builtin, validate_code, CodeConfig, LogicalAxis, StabilizerCode};
use logiq::model::{rotated_grassl_state, T2Convention};
use logiq::noise::{Correlation, EngineKind, NoiseConfig, NoiseKind, DEFAULT_N_STEPS, DEFAULT_N_TRAJ};
use logiq::state::PureState;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::CommonArgs;

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_TMAX: f64 = 3.0;
pub const DEFAULT_POINTS: usize = 31;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CodeRef {
    Name(String),
    Inline(CodeConfig),
}

impl CodeRef {
    pub fn name(&self) -> &str {
        match self {
            CodeRef::Name(n) => n,
            CodeRef::Inline(c) => &c.name,
        }
    }

    pub fn resolve(&self) -> CliResult<StabilizerCode> {
        Ok(match self {
            CodeRef::Name(n) => builtin(n)?,
            CodeRef::Inline(c) => validate_code(&c.to_spec()?)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitState {
    pub target: GrasslTarget,
    #[serde(default)]
    pub delta_z: f64,
    #[serde(default)]
    pub delta_ms: f64,
}

/// `{"theta", "phi"}`, `{"axis": "+X"}` or `{"circuit": {...}}`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Angles {
        theta: f64,
        #[serde(default)]
        phi: f64,
    },
    Axis {
        axis: LogicalAxis,
    },
    Circuit {
        circuit: CircuitState,
    },
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Axis { axis: LogicalAxis::PlusX }
    }
}

impl StateSpec {
    /// Bloch angles used by the closed forms. A perturbed `|0_L>` circuit maps to
    /// the rotated state with the same echo error.
    pub fn angles(&self) -> CliResult<(f64, f64)> {
        match *self {
            StateSpec::Angles { theta, phi } => Ok((theta, phi)),
            StateSpec::Axis { axis } => Ok(axis.angles()),
            StateSpec::Circuit { circuit } => match circuit.target {
                _ if circuit.delta_ms != 0.0 => {
                    Err(CliError::Config("no closed form for a state with an entangling-gate error".into()))
                }
                GrasslTarget::Zero => Ok(rotated_grassl_state(circuit.delta_z)),
                GrasslTarget::Plus if circuit.delta_z == 0.0 => Ok((FRAC_PI_2, 0.0)),
                GrasslTarget::Plus => Err(CliError::Config("the |+_L> circuit has no echo pulse".into())),
            },
        }
    }

    pub fn prepare(&self, code: &StabilizerCode) -> CliResult<PureState> {
        match *self {
            StateSpec::Angles { theta, phi } => Ok(logiq::code::logical_state(code, theta, phi)),
            StateSpec::Axis { axis } => Ok(logiq::code::eigenstate(code, axis)),
            StateSpec::Circuit { circuit } => match code.name() {
                "three_qubit" if circuit.delta_z == 0.0 && circuit.delta_ms == 0.0 => {
                    Ok(prepare_three_qubit(circuit.target.axis())?)
                }
                "three_qubit" => Err(CliError::Config("three-qubit circuit takes no deltas".into())),
                "grassl" => Ok(prepare_grassl(circuit.target, circuit.delta_z, circuit.delta_ms)?),
                other => Err(CliError::Config(format!("no preparation circuit for code {other:?}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnits {
    /// `t_max` is a value of `gamma t`.
    #[default]
    Gamma,
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub units: TimeUnits,
}

impl GridSpec {
    /// Evenly spaced absolute times from 0 to the end of the grid.
    pub fn times(&self, gamma: f64) -> CliResult<Vec<f64>> {
        if self.n_points == 0 {
            return Err(CliError::Config("time grid is empty".into()));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Config(format!("t_max must be finite and >= 0, got {}", self.t_max)));
        }
        let end = match self.units {
            TimeUnits::Absolute => self.t_max,
            TimeUnits::Gamma if gamma > 0.0 => self.t_max / gamma,
            TimeUnits::Gamma => return Err(CliError::Config("grid in units of 1/gamma needs gamma > 0".into())),
        };
        if self.n_points == 1 {
            return Ok(vec![0.0]);
        }
        let step = end / (self.n_points - 1) as f64;
        Ok((0..self.n_points).map(|k| if k + 1 == self.n_points { end } else { k as f64 * step }).collect())
    }
}

/// Overrides applied on top of the base noise block for one engine in `compare`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineEntry {
    pub engine: EngineKind,
    pub kind: Option<NoiseKind>,
    pub correlation: Option<Correlation>,
    pub n_steps: Option<usize>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
}

impl EngineEntry {
    pub fn plain(engine: EngineKind) -> Self {
        EngineEntry { engine, kind: None, correlation: None, n_steps: None, n_traj: None, seed: None }
    }

    pub fn apply(&self, base: &NoiseConfig) -> NoiseConfig {
        NoiseConfig {
            engine: self.engine,
            kind: self.kind.unwrap_or(base.kind),
            correlation: self.correlation.unwrap_or(base.correlation),
            n_steps: self.n_steps.unwrap_or(base.n_steps),
            n_traj: self.n_traj.unwrap_or(base.n_traj),
            seed: self.seed.unwrap_or(base.seed),
            gamma: base.gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub code: Option<CodeRef>,
    pub state: Option<StateSpec>,
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub engines: Vec<EngineEntry>,
    pub grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub t2_convention: Option<T2Convention>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Everything a command needs once the file and the flags are merged.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub code: CodeRef,
    pub state: StateSpec,
    pub noise: NoiseConfig,
    pub engines: Vec<EngineEntry>,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
    pub t2_convention: T2Convention,
}

impl Settings {
    /// Flags win over the config file.
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let code = match (&args.code, file.code) {
            (Some(name), _) => CodeRef::Name(name.clone()),
            (None, Some(c)) => c,
            (None, None) => CodeRef::Name("three_qubit".into()),
        };
        let mut state = file.state.unwrap_or_default();
        if args.theta.is_some() || args.phi.is_some() {
            let (theta0, phi0) = match state {
                StateSpec::Angles { theta, phi } => (theta, phi),
                _ => (FRAC_PI_2, 0.0),
            };
            state = StateSpec::Angles { theta: args.theta.unwrap_or(theta0), phi: args.phi.unwrap_or(phi0) };
        }
        let mut noise = file.noise.unwrap_or(NoiseConfig {
            kind: NoiseKind::Dephasing,
            correlation: Correlation::Global,
            gamma: DEFAULT_GAMMA,
            engine: EngineKind::Analytic,
            n_steps: DEFAULT_N_STEPS,
            n_traj: DEFAULT_N_TRAJ,
            seed: 0,
        });
        if let Some(g) = args.gamma {
            noise.gamma = g;
        }
        if let Some(c) = args.correlation {
            noise.correlation = c.into();
        }
        if let Some(k) = args.kind {
            noise.kind = k.into();
        }
        if let Some(n) = args.ntraj {
            noise.n_traj = n;
        }
        if let Some(s) = args.seed {
            noise.seed = s;
        }
        noise.params().validate()?;
        let engines = if !args.engine.is_empty() {
            args.engine.iter().map(|&e| EngineEntry::plain(e)).collect()
        } else if !file.engines.is_empty() {
            file.engines
        } else {
            vec![EngineEntry::plain(noise.engine)]
        };
        let mut grid = file.grid.unwrap_or(GridSpec { t_max: DEFAULT_TMAX, n_points: DEFAULT_POINTS, units: TimeUnits::Gamma });
        if let Some(t) = args.tmax {
            grid.t_max = t;
        }
        if let Some(n) = args.points {
            grid.n_points = n;
        }
        let t2_convention = args.t2_convention.map(Into::into).or(file.t2_convention).unwrap_or_default();
        Ok(Settings { code, state, noise, engines, grid, out: args.out.clone().or(file.out), t2_convention })
    }

    pub fn times(&self) -> CliResult<Vec<f64>> {
        self.grid.times(self.noise.gamma)
    }
}
