//! Worst-case optimal-recovery errors for isotropic smoothness classes.
//!
//! The class is generated by a univariate differential operator
//! `P(D) = D^2 + p D + q` applied along directions: a function `f` on a
//! convex body belongs to the class when `P(d/du) f` stays within unit bound
//! along every unit direction `u`. Sampling `f` and its gradient at finitely
//! many nodes, the worst-case recovery error admits sharp two-sided bounds
//! driven by a one-dimensional extremal profile and the covering radius of
//! the node set.
//!
//! The crate computes those profiles, certifies covering radii on boxes,
//! balls and planar polygons, constructs near-optimal node sets, and
//! cross-checks every closed form against an independent adaptive-quadrature
//! oracle.

pub mod covering;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod oracle;
pub mod recovery;
pub mod scalar;
mod special;
pub mod verify;

pub use error::IsorecError;
pub use scalar::Real;

/// Default scalar used by the CLI and the concrete aliases below.
pub type Scalar = f64;

pub type OperatorSpec = operators::OperatorSpec<Scalar>;
pub type OperatorClass = operators::OperatorClass<Scalar>;
pub type ExtremalProfile = operators::ExtremalProfile<Scalar>;
pub type ConvexBody = geometry::ConvexBody<Scalar>;
pub type NodeSet = geometry::NodeSet<Scalar>;
pub type DistanceEstimate = geometry::DistanceEstimate<Scalar>;
pub type CoveringConstants = covering::CoveringConstants<Scalar>;
pub type NodeGenReport = covering::NodeGenReport<Scalar>;
pub type ErrorReport = recovery::ErrorReport<Scalar>;
pub type FoolingFunction = recovery::FoolingFunction<Scalar>;
pub type AsymptoticRn = recovery::AsymptoticRn<Scalar>;
pub type StudyRow = recovery::StudyRow<Scalar>;
