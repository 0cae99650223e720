use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("solver: {0}")]
    Solver(#[from] sdpsolve::SdpError),
    #[error("formulation: {0}")]
    Form(#[from] sdpform::FormError),
    #[error("centralized solve ended with status {0:?}")]
    NotOptimal(sdpsolve::SolveStatus),
    #[error("admm: {0}")]
    Admm(#[from] admm::AdmmError),
    #[error("invalid noise schedule: {0}")]
    Schedule(String),
}

pub type Result<T> = std::result::Result<T, BaselineError>;
