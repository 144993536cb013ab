//! Poisson-weighted Galton-Watson trees, their extremal game valuations, the
//! Exploration game, the value-labelled tree built from the cost/value square, and
//! reasonable subtrees.

mod experiments;
mod game;
mod labeled;
mod reasonable;
mod tree;
mod valuation;

pub use experiments::{
    distribution_experiment, game_path_experiment, reasonable_experiment, uniqueness_experiment, DistributionReport, GamePathReport,
    GapQuantiles, PsiSummary, ReasonableConfig, ReasonableReport, RvsPsi, TwoStepSize, UniquenessReport, BRACKET_TOL,
};
pub use game::{play_game, GameRecord, Mover};
pub use labeled::{labeled_offspring, sample_labeled_tree, sample_labeled_tree_from};
pub use reasonable::{estimate_r, reasonable_tree, RBin, REstimate, ReasonableTree, MIN_BIN_SAMPLES, OPTIMAL_TOL};
pub use tree::{sample_tree, GameTree, Node, NodeId, DEFAULT_NODE_CAP, ROOT};
pub use valuation::{delta_labels, extremal_valuations, Valuations};
