use thiserror::Error;

/// Errors produced by the simulator, the optics solvers and the compiler.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid atom count {0}: a collective spin needs at least one atom")]
    InvalidAtomCount(u64),

    #[error("operands live on different spaces ({left} vs {right})")]
    SpaceMismatch { left: String, right: String },

    #[error("mode index {mode} out of range for a space with {modes} mode(s)")]
    UnknownMode { mode: usize, modes: usize },

    #[error("operator is not Hermitian (anti-Hermitian part {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("rotation axis must be non-zero")]
    ZeroAxis,

    #[error("dimension {dim} exceeds the limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("a wavelength is required to convert optical power to a photon rate")]
    MissingWavelength,

    #[error("primitive `{0}` cannot be sign-flipped")]
    UnflippablePrimitive(String),

    #[error("expression cannot be realised directly: {0}")]
    NotRealizable(String),

    #[error("cannot parse expression `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("scattering system is singular; resonant loop through {0:?}")]
    SingularNetwork(Vec<String>),

    #[error("least-squares fit is underdetermined: {points} points for {unknowns} unknowns")]
    UnderdeterminedFit { points: usize, unknowns: usize },

    #[error("least-squares fit is ill-conditioned (condition number {0:.3e})")]
    IllConditionedFit(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
