//! Piecewise-linear function calculus on `[-lambda/2, lambda/2]` and the fixed point
//! `F_A = V(F_B)`, `F_B = V(F_A)` of the game-value distributions.

mod derivative;
mod grid;
mod iterate;
mod kernel;

pub use derivative::{derivative_at, derivative_of_v, verify_derivative_bound, DerivativeBound, DerivativeProfile};
pub use grid::{Grid, GridFunction, Mesh};
pub use iterate::{iterate_fixpoint, iterate_on_grid, FixedPoint, FixpointConfig, VIterates};
pub use kernel::{apply_v, kernel_integral, v_at, Against};

pub(crate) use kernel::{kernel_integral_between, partial_moments, segment_weights, OffsetTable};
