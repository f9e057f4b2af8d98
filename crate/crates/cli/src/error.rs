use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Frozen(String),
    Verification(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Frozen(_) => 3,
            CliError::Verification(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Frozen(m) => write!(f, "frozen dynamics: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<lindyn::Error> for CliError {
    fn from(e: lindyn::Error) -> Self {
        use lindyn::Error::*;
        let msg = e.to_string();
        match e {
            FrozenDynamics(m) => CliError::Frozen(m),
            DegenerateData => CliError::Frozen(msg),
            InvalidHyperparams(_) | InvalidData(_) | DimensionMismatch(_) | InvalidConfig(_) | UnsupportedBeta(_)
            | ProbeRejected(_) => CliError::Config(msg),
            DegenerateRequired | Branch(_) | Stiffness { .. } => CliError::Runtime(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `line:col: message` without serde's trailing position.
pub fn json_error(e: &serde_json::Error) -> String {
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = text.strip_suffix(&suffix).unwrap_or(&text);
    format!("{}:{}: {msg}", e.line(), e.column())
}
