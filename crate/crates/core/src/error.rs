//! Failure modes shared across the library.
//!
//! Escape of an orbit from an annulus and "degenerate" verdicts are data, not
//! errors; only genuine evaluation or convergence failures land here.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// `rho` outside the open chart interval `(0, 1)`.
    #[error("chart domain: rho={rho} outside ({lo}, {hi})")]
    ChartDomain { rho: f64, lo: f64, hi: f64 },

    /// Point within the guard distance of one of the two critical circles,
    /// where the chart angles are ill-conditioned.
    #[error("point too close to the critical link: rho={rho}, guard={guard}")]
    NearLink { rho: f64, guard: f64 },

    #[error("expression parse error: {0}")]
    Parse(String),

    #[error("profile evaluation error: {0}")]
    Eval(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Adaptive step size collapsed below the floor.
    #[error("integrator step underflow at t={t} (field too stiff for the requested tolerance)")]
    Stiffness { t: f64 },

    /// Field line left the guarded chart domain.
    #[error("orbit escaped the chart domain at t={t}: transverse coordinate {value}")]
    Escape { t: f64, value: f64 },

    /// No section return within the transit budget.
    #[error("no section return within max transit time {max_transit}")]
    NonReturn { max_transit: f64 },

    /// Sectioned-angle speed dropped below the transversality floor.
    #[error("section transversality violated: {0}")]
    SectionTransversality(String),

    /// The requested section has a vanishing transit speed; the complementary
    /// angle should be sectioned instead.
    #[error("bad section choice: {0}")]
    SectionChoice(String),

    /// Implicit generating-function solve failed to contract.
    #[error("perturbation amplitude too large: {0}")]
    AmplitudeTooLarge(String),

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
