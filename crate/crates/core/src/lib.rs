//! Invariant constant-mean-curvature surfaces in the product spaces
//! `H^2 x R`, `S^2 x R` and `R^3`, together with evaluators for the sharp
//! boundary-curvature, maximum-height and boundary-distance estimates that
//! these families realize as equality cases.
//!
//! The crate is organized around six modules:
//!
//! * [`modelspace`] — embedded models of the constant-curvature base
//!   surfaces and of the product metric: distances, curve geodesic
//!   curvature.
//! * [`estimates`] — closed-form estimate evaluators (maximum height,
//!   geodesic-curvature lower bounds, the angle bound and the
//!   distance-to-boundary bound).
//! * [`profiles`] — generating curves of every invariant CMC family,
//!   with closed-form heights, domains and boundary curvatures.
//! * [`numerics`] — an embedded Runge-Kutta 5(4) integrator with dense
//!   output and conserved-quantity tracking, plus tanh-sinh quadrature
//!   that is robust to inverse-square-root endpoint singularities.
//! * [`geomcheck`] — numerical differential geometry of sampled
//!   immersions: fundamental forms, mean-curvature residuals, the angle
//!   function and the Abresch-Rosenberg density.
//! * [`cli`] — the command-line front end (generate / verify / bounds /
//!   figures).

pub mod cli;
pub mod estimates;
pub mod geomcheck;
pub mod modelspace;
pub mod numerics;
pub mod profiles;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input fails a precondition (bad parameters, mismatched space forms).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An argument lies outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine could not reach the requested accuracy.
    #[error("accuracy failure: {0}")]
    Accuracy(String),
    /// A family has no member for the given parameters.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// Step-size underflow while integrating towards a singular point.
    #[error("singularity near parameter {at}: {message}")]
    Singularity { at: f64, message: String },
    /// The parametrization degenerates (vanishing tangent area element).
    #[error("singular parametrization: {0}")]
    SingularParametrization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI contract: 2 for rejected input,
    /// 3 for numerical or I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Domain(_) => 2,
            _ => 3,
        }
    }
}
