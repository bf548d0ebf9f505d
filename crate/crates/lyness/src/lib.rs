//! Numerical dynamics laboratory for the third-order Lyness map
//! `F(x, y, z) = (y, z, (a + y + z)/x)` on the open positive octant.
//!
//! The crate computes the two first integrals and their level-set geometry,
//! rotation numbers on invariant circles through an associated flow (flight
//! time over orbit period), periodic-orbit refinements, and the exact
//! integer machinery that determines which periods the map can realize.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod map;
pub mod numtheory;
pub mod periodic;
pub mod tables;

pub use error::{Error, Result};
pub use map::{Params, Point3};
