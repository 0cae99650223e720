use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Form(#[from] sdpform::FormError),
    #[error(transparent)]
    Solver(#[from] sdpsolve::SdpError),
    #[error(transparent)]
    Codec(#[from] phe::PheError),
    #[error("region {region}: solver reported {status:?} at outer {t}, inner {k}")]
    SolveFailed { region: usize, t: usize, k: usize, status: sdpsolve::SolveStatus },
    #[error("exchange failed: {0}")]
    Exchange(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, AdmmError>;
