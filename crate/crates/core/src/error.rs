use crate::tepid::TrainedSubspaceModel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dense form of a {n_qubits}-qubit operator exceeds the cap of {cap} qubits")]
    ResourceLimit { n_qubits: usize, cap: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("ensemble weights must be nonnegative and sum to one (sum {sum})")]
    BadWeights { sum: f64 },

    #[error("ensemble states are not pairwise orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("ground state is degenerate within tolerance (gap {gap:.3e})")]
    DegenerateGroundState { gap: f64 },

    #[error("weight {index} is numerically zero; its energy gap diverges")]
    VanishingWeight { index: usize },

    #[error("amplitude vector is numerically zero")]
    ZeroAmplitudes,

    #[error("basis label {label} out of range for dimension {dim}")]
    LabelOutOfRange { label: usize, dim: usize },

    #[error("duplicate basis label {label}")]
    DuplicateLabel { label: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// ADAPT growth hit the layer budget before the pool gradients fell below
    /// tolerance. The best model found so far rides along so callers can
    /// inspect or keep it.
    #[error("reached {max_layers} layers with max pool gradient {max_gradient:.3e} still above tolerance")]
    MaxLayersReached {
        max_layers: usize,
        max_gradient: f64,
        model: Box<TrainedSubspaceModel>,
    },

    #[error("projection residual {residual:.3e} exceeds the configured limit {limit:.3e}")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
