//! Certified bounds on steady-state performance of random walks in the
//! quarter-plane.
//!
//! A walk whose stationary distribution is unknown is compared with a
//! perturbed walk that has a geometric product form. Bounds on the
//! resulting error are the optima of finite linear programs assembled by
//! [`lp_builder`] and solved by [`lp_solver`]; [`oracle`] checks them
//! against truncated-chain computations.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the JSON and CLI surfaces use.

pub mod bias;
pub mod lp_builder;
pub mod lp_solver;
pub mod model;
pub mod oracle;
pub mod piecewise;
pub mod scalar;
pub mod sweep;
pub mod verify;

pub use scalar::Scalar;

pub type RandomWalk = model::RandomWalkSpec<f64>;
pub type RandomWalkF32 = model::RandomWalkSpec<f32>;
pub type ProductForm = model::GeometricProductForm<f64>;
pub type ProductFormF32 = model::GeometricProductForm<f32>;
pub type Pair = model::PerturbationPair<f64>;
pub type Measure = piecewise::CLinearFn<f64>;
pub type MeasureF32 = piecewise::CLinearFn<f32>;
pub type Coefficients = bias::CoefficientTable<f64>;
pub type Program = lp_solver::LinearProgram<f64>;
pub type Certificate = lp_builder::BoundCertificate<f64>;
