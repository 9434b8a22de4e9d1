//! Geodesics, distances and registration of planar curves under
//! second-order elastic Sobolev metrics.
//!
//! Curves and paths of curves are tensor-product B-splines ([`bspline`]).
//! The path energy of constant-coefficient or scale-invariant elastic
//! metrics and its exact gradient live in [`metric`]; the reparametrization
//! invariant endpoint constraint is an oriented-varifold kernel distance
//! ([`varifold`]). [`matching`] solves the boundary value problem with a
//! quadratic penalty or an augmented Lagrangian scheme on top of the L-BFGS
//! minimizer in [`optim`].
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

// Parameter checks read `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bspline;
pub mod error;
pub mod matching;
pub mod metric;
pub mod optim;
pub mod scalar;
pub mod varifold;
pub mod vec2;

pub use bspline::{Axis, SplineConfig};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Curve = bspline::DiscreteCurve<f64>;
pub type Path = bspline::DiscretePath<f64>;
pub type Space = bspline::SplineSpace<f64>;
pub type Metric = metric::MetricParams<f64>;
pub type Kernel = varifold::VarifoldKernel<f64>;
pub type Transform = varifold::Similarity<f64>;
pub type Problem = matching::MatchProblem<f64>;
pub type Solution = matching::MatchResult<f64>;
pub type Settings = optim::OptimSettings<f64>;
pub type AugLag = matching::AugLagState<f64>;
