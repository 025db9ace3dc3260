use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: &'static str, reason: String },

    #[error("singular channel: user and antenna coincide")]
    SingularChannel,

    #[error("weights are not on the simplex (sum of squares = {0})")]
    NotOnSimplex(f64),

    #[error("infeasible power split: alpha_B - tau * alpha_S = {0} <= 0")]
    InfeasibleSplit(f64),

    #[error("{n} antennas with spacing {spacing} m do not fit in a region of side {side} m")]
    LayoutDoesNotFit { n: usize, spacing: f64, side: f64 },

    #[error("initial waveguide power split violates the rate constraints")]
    InfeasibleStart,

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("config file: {0}")]
    ConfigFile(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err(key: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        key,
        reason: reason.into(),
    }
}
