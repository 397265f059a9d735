use thiserror::Error;

/// Errors surfaced by the simulator.
///
/// The CLI maps these onto exit codes: configuration and input problems
/// exit with 2, numeric problems (aliasing, stationary phase, singular
/// fits) with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode set must be non-empty with unique labels")]
    InvalidModeSet,

    #[error("mode sets do not match: {0} vs {1}")]
    ModeSetMismatch(String, String),

    #[error("unknown mode label: {0}")]
    UnknownMode(String),

    #[error("occupation length {got} does not match mode count {want}")]
    OccupationLength { got: usize, want: usize },

    #[error("total photon number {total} exceeds cap n_max = {n_max}")]
    NMaxOverflow { total: u32, n_max: u32 },

    #[error("photon number mismatch: state carries {state} photons, operation expects {expected}")]
    PhotonMismatch { state: u32, expected: u32 },

    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("transform dimension {dim} does not match mode count {modes}")]
    DimensionMismatch { dim: usize, modes: usize },

    #[error("unphysical transform: largest singular value {sigma_max} exceeds 1")]
    Unphysical { sigma_max: f64 },

    #[error("amplitude {value} outside [0, 1]")]
    AmplitudeRange { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phase grid cannot resolve harmonic {harmonic}: {points} points (need at least {needed})")]
    Aliasing {
        harmonic: u32,
        points: usize,
        needed: usize,
    },

    #[error("phase grid is not uniform over whole periods")]
    NonUniformGrid,

    #[error("grids differ between the two data sets")]
    GridMismatch,

    #[error("phase sensitivity undefined at stationary point (sin(N phi) = 0)")]
    StationaryPhase,

    #[error("fit is degenerate: normal equations singular")]
    SingularFit,

    #[error("serialization: {0}")]
    Serialization(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
