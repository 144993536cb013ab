//! Numerical machinery for the minimum perfect matching problem with edge costs
//! of pseudo-dimension `0 < q <= 1`.
//!
//! * [`randomness`]: Weibull costs, the Poisson offspring process, seeded streams.
//! * [`matching`]: exact assignment solver and Monte Carlo estimates of the scaled cost.
//! * [`fixpoint`]: piecewise-linear functions on `[-lambda/2, lambda/2]` and the
//!   fixed point of the map `V` giving the root game-value distributions.
//! * [`operators`]: the diagonal densities, the positive operators `L_A`, `L_B`,
//!   their composed norm and the Neumann-series majorant.
//! * [`treegame`]: Poisson-weighted Galton-Watson trees, extremal game valuations,
//!   the Exploration game and reasonable subtrees.
//!
//! All numerics are generic over [`Scalar`]; the aliases below fix `f64`.

// Negated comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixpoint;
pub mod matching;
pub mod operators;
pub mod randomness;
pub mod scalar;
pub mod stats;
pub mod treegame;

pub use error::{Error, Result};
pub use randomness::{derive_stream, SeedSpec, Stream};
pub use scalar::Scalar;

pub type Params = randomness::Params<f64>;
pub type AssignmentInstance = matching::AssignmentInstance<f64>;
pub type MatchingResult = matching::MatchingResult<f64>;
pub type AssignmentInstanceF32 = matching::AssignmentInstance<f32>;
pub type GridFunction = fixpoint::GridFunction<f64>;
pub type GridFunctionF32 = fixpoint::GridFunction<f32>;
pub type FixedPoint = fixpoint::FixedPoint<f64>;
pub type KernelOperator = operators::KernelOperator<f64>;
pub type KernelOperatorF32 = operators::KernelOperator<f32>;
pub type DiagonalDensity = operators::DiagonalDensity<f64>;
pub type GameTree = treegame::GameTree<f64>;
pub type GameRecord = treegame::GameRecord<f64>;
