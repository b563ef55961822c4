use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] logiq::Error),

    #[error("{engine} engine: {source}")]
    Engine { engine: String, source: logiq::Error },

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error("comparison failed: {0}")]
    Comparison(String),
}

impl CliError {
    /// 1 for configuration problems, 2 for numerical failures, 3 for failed comparisons.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Comparison(_) => 3,
            CliError::Core(e) | CliError::Engine { source: e, .. } => core_exit_code(e),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

fn core_exit_code(e: &logiq::Error) -> u8 {
    use logiq::Error as E;
    match e {
        E::Integration(_)
        | E::NonConvergence(_)
        | E::Verification(_)
        | E::ImaginaryResidue(_)
        | E::VanishingPopulation(_)
        | E::InvalidState(_) => 2,
        _ => 1,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
