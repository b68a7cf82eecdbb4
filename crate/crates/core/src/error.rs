use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid parameter {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("cannot parse value for `{key}`: {value}")]
    Parse { key: String, value: String },
    #[error("{0}")]
    Other(String),
}

impl ConfigError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { name, reason: reason.into() }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("non-finite state at t = {t}: {what}")]
    NonFinite { t: f64, what: String },
    #[error("step rejected {retries} times at t = {t}")]
    StepRejected { t: f64, retries: u32 },
    #[error("dimension guard: {0}")]
    Dimension(String),
    #[error("unphysical density operator: eigenvalue {eig} at t = {t}")]
    Unphysical { t: f64, eig: f64 },
    #[error("{failed} of {total} trajectories failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("grid mismatch: {0}")]
    Grid(String),
    #[error("{0}")]
    Estimator(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}
