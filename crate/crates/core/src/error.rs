use thiserror::Error;

/// Errors raised by the index pipeline. Every variant carries enough context
/// to name the failing stage without a backtrace.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not orthogonal (residual {residual:.3e})")]
    NotOrthogonal { residual: f64 },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("P is singular at sample {index} (smallest singular value {sigma:.3e})")]
    SingularP { index: usize, sigma: f64 },

    #[error("coefficient data failed validation: {0}")]
    Validation(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("epsilon admissibility failed after {halvings} halvings")]
    EpsilonAdmissibility { halvings: usize },

    #[error("perturbed matrix lies in Sp(2n)^0")]
    ZeroComponent,

    #[error("component classification unstable under halving")]
    UnstableClassification,

    #[error("degenerate endpoint: {0}")]
    DegenerateEndpoint(String),

    #[error("s0 verification failed after {doublings} doublings")]
    S0Verification { doublings: usize },

    #[error("unresolved crossing near s = {location}")]
    UnresolvedCrossing { location: f64 },

    #[error("uncertified input: {0}")]
    Uncertified(String),

    #[error("problem specification: {0}")]
    Spec(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
