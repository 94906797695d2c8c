//! Numerical laboratory for shear steady Euler flows on the 3-sphere and the
//! 3-torus.
//!
//! The library builds the flows from profile functions, certifies their
//! nondegeneracy (Morse-Bott Bernoulli function plus a twist certificate),
//! traces field lines of the vorticity and extracts Poincaré return maps,
//! perturbs resonant circles with exact generating-function maps, suspends the
//! perturbed maps back into divergence-free fields, and estimates the measure
//! of ergodic invariant tori per isotopy class (unknotted, torus-knotted,
//! horizontal).
//!
//! The numerical core is generic over the scalar type (`f32`/`f64`) through
//! [`scalar::Real`]; the aliases at the crate root fix `f64`, which is what the
//! shipped tolerances are calibrated for.

pub mod scalar;
pub mod error;
pub mod numerics;
pub mod profile;
pub mod geometry;
pub mod steady;
pub mod dynamics;
pub mod twistmaps;
pub mod kam;
pub mod suspension;
pub mod acceptance;

pub use error::Error;

/// Chart point of `S3` minus the two critical circles, `f64`.
pub type ChartPoint = geometry::ChartPointS3<f64>;
/// Chart point of `T3`, `f64`.
pub type ChartPointTorus = geometry::ChartPointT3<f64>;
/// Shear profile pair on the sphere, `f64`.
pub type ShearProfile = steady::ShearProfileS3<f64>;
/// Shear profile pair on the torus, `f64`.
pub type ShearProfileTorus = steady::ShearProfileT3<f64>;
/// Exact annulus twist map, `f64`.
pub type TwistMap = twistmaps::TwistMap<f64>;
/// Shared handle to any area-preserving annulus map, `f64`.
pub type DynAnnulusMap = std::sync::Arc<dyn twistmaps::AnnulusMap<f64>>;
/// Linear-stability record of a periodic point, `f64`.
pub type FixedPointClass = twistmaps::FixedPointClass<f64>;
/// Per-isotopy-class measure estimate, `f64`.
pub type KappaEstimate = kam::KappaEstimate<f64>;
