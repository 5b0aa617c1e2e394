use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants mirror the failure modes of the individual stages: parameter
/// domains, integrator and quadrature control, grid resolution, and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter outside its domain: {0}")]
    Domain(String),

    #[error("coefficient profile does not have the k·t^-2 tail shape: {0}")]
    Shape(String),

    #[error("integrator step control failed: {0}")]
    Tolerance(String),

    #[error("time {t} outside sampled range [0, {t_max}]")]
    Range { t: f64, t_max: f64 },

    #[error("least-squares problem is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("invalid grid size: {0}")]
    Size(String),

    #[error("momentum band not resolved by the grid: {0}")]
    Band(String),

    #[error("state support leaves the grid: {0}")]
    Support(String),

    #[error("times {t_from} and {t_to} do not lie in one scattering channel |t| >= {r0}")]
    Channel { t_from: f64, t_to: f64, r0: f64 },

    #[error("adaptive step halving exceeded depth {0}")]
    Step(usize),

    #[error("momentum grids differ between phase and state")]
    GridMismatch,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("cutoff mass reached the numerical floor at t = {0}")]
    Floor(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("projected runtime {projected:.1}s exceeds budget {budget:.1}s")]
    Budget { projected: f64, budget: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
