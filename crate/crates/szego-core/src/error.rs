use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the solver.
#[derive(Debug, Error)]
pub enum SzegoError {
    #[error("evaluation point {point} is within tolerance of a pole")]
    PoleHit { point: Complex64 },
    #[error("pole collision would exceed the configured max multiplicity {max}")]
    DegenerateCollision { max: usize },
    #[error("product decays too slowly for the residue integral")]
    NotIntegrable,
    #[error("matrix is ill-conditioned (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("linear system is numerically singular (condition estimate {cond:.3e})")]
    SingularSystem { cond: f64 },
    #[error("coefficient tail too fat: isometry defect {defect:.3e} at {modes} modes")]
    TailTooFat { defect: f64, modes: usize },
    #[error("integrator unstable: norm drift {drift:.3e} at t = {t}")]
    Unstable { drift: f64, t: f64 },
}

pub type Result<T> = std::result::Result<T, SzegoError>;
