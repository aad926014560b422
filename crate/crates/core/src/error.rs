use thiserror::Error;

/// Errors raised by the series engine, graph evaluators and pairings.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole order {order} is deeper than the supported limit of -4")]
    PoleDepthExceeded { order: i32 },

    #[error("cannot evaluate a series with poles at epsilon = 0")]
    EvalAtZeroWithPoles,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Feynman-parameter integrand crosses its branch cut (P^2 = {p_sq}, m^2 = {m_sq}); use the closed form")]
    BranchCutCrossing { p_sq: f64, m_sq: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e}) within {intervals} intervals")]
    QuadratureNotConverged {
        tol: f64,
        estimate: f64,
        intervals: usize,
    },

    #[error("closed form unsupported for s = {s} inside [0, 4m^2) with m^2 = {m_sq}")]
    DomainUnsupported { s: f64, m_sq: f64 },

    #[error("renormalized denominator 1 + G0 g m^2 / 6 vanishes")]
    DenominatorVanishes,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("step count {steps} insufficient: doubling changed the endpoint by {relative_change:e} (relative)")]
    StepCountInsufficient { steps: usize, relative_change: f64 },
}

/// Coarse classification used by the command-line front end to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Convergence,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::QuadratureNotConverged { .. } | Error::StepCountInsufficient { .. } => {
                ErrorClass::Convergence
            }
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
