use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid size must be odd, got n = {0}")]
    EvenGrid(usize),

    #[error("minimum separation needs at least two atoms, got {0}")]
    UndefinedSeparation(usize),

    #[error("could not place {r} atoms at separation {delta_min} within {attempts} attempts")]
    InfeasibleSeparation { r: usize, delta_min: f64, attempts: usize },

    #[error("spike count {s} exceeds grid capacity {capacity}")]
    InvalidCount { s: usize, capacity: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("derivative order {0} unsupported (max 3)")]
    UnsupportedOrder(usize),

    #[error("half-bandwidth m = {0} too small for the triple kernel")]
    UnsupportedBandwidth(usize),

    #[error("kernel second derivative vanishes at the origin")]
    DegenerateKernel,

    #[error("interpolation system is ill-conditioned (reciprocal condition {rcond:.3e})")]
    ConstructionFailed { rcond: f64 },

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("primal pair does not reproduce the observation (residual {0:.3e})")]
    InfeasiblePrimal(f64),

    #[error("least-squares design is rank deficient (reciprocal condition {0:.3e})")]
    DegenerateFit(f64),

    #[error("reference signal has zero norm")]
    ZeroNorm,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("refusing to overwrite existing output in {0} (use force)")]
    OutputExists(PathBuf),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
