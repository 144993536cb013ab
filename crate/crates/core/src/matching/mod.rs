//! Exact minimum-cost perfect matching on complete bipartite graphs with random
//! Weibull costs, and Monte Carlo estimation of the scaled matching cost.

mod estimate;
mod solver;

pub use estimate::{
    estimate_scaled_cost, extrapolate_beta, fit_beta, parisi_reference, sample_instance, scale_factor,
    BetaEstimate, SizeEstimate,
};
pub use solver::{solve_assignment, AssignmentInstance, MatchingResult};
