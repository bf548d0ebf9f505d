//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A coordinate or parameter left its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The vector field vanishes at the requested point.
    #[error("stationary point: the vector field vanishes at ({x}, {y}, {z})")]
    Stationary { x: f64, y: f64, z: f64 },
    /// The orbit is too close to the fixed point or the two-periodic curve
    /// for period/flight-time computations to be well conditioned.
    #[error("degenerate circle near the singular locus; use the closed-form limit instead")]
    DegenerateCircle,
    /// Adaptive step size underflowed during integration.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    /// The integrator produced a state outside the positive octant.
    #[error("integrator failure: state left the positive octant at t = {t}")]
    LeftDomain { t: f64 },
    /// No section return was found within the time guard.
    #[error("no return to the section within t <= {guard}")]
    NoReturn { guard: f64 },
    /// The located section crossing is not the requested target point.
    #[error("target not on orbit: crossing misses the image point by {distance:.3e}")]
    TargetNotOnOrbit { distance: f64 },
    /// An iterative solver failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// The sampled circle is too small to define a projection plane.
    #[error("degenerate plane: sampled circle is too small for a winding estimate")]
    DegeneratePlane,
}

pub type Result<T> = std::result::Result<T, Error>;
