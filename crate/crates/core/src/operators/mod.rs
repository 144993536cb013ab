//! Diagonal densities, the positive operators `L_A`, `L_B` with their factorization
//! `L = D o S` into a diagonal multiplication by `I` and a stochastic averaging, the
//! norm of `L_B o L_A`, and the Neumann-series majorant `Psi_t`.

mod density;
mod operator;
mod psi;
mod sweep;

pub use density::{build_density, DiagonalDensity};
pub use operator::{
    apply_operator, build_operator, build_operator_from, compose_norm, i_value, right_limit, KernelOperator, Player,
    RightLimit, DIVERGENCE_RATIO, ROW_SUM_TOL,
};
pub use psi::{
    choose_m, default_k, diagonal_envelope, envelope_tail, epsilon_m, estimate_alpha, marginal_envelope, marginal_j,
    marginal_j_of, neumann_psi, AlphaEstimate, MChoice, MarginalJ, Psi,
};
pub use sweep::{norm_sweep_csv, norm_sweep_row, NormSweepRow};
