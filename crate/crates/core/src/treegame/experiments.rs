//! Tree experiments with JSON-ready reports, shared by the command line runner and the
//! acceptance suite. All of them run in `f64`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::game::play_game;
use super::labeled::sample_labeled_tree;
use super::reasonable::{estimate_r, reasonable_tree, REstimate};
use super::tree::{sample_tree, ROOT};
use super::valuation::{delta_labels, extremal_valuations};
use crate::error::Result;
use crate::fixpoint::FixedPoint;
use crate::operators::{build_operator, choose_m, compose_norm, default_k, estimate_alpha, neumann_psi, Player};
use crate::randomness::{derive_stream, Params, SeedSpec};
use crate::stats::{ks_anti_cdf, ks_two_sample, median, quantile, Welford};

/// Root gap `f_B - f_A` quantiles at one truncation depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapQuantiles {
    pub depth: usize,
    pub trees: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
    pub node_cap_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub q: f64,
    pub lambda: f64,
    pub per_depth: Vec<GapQuantiles>,
    pub medians_non_increasing: bool,
    /// `0.05 lambda`.
    pub threshold: f64,
    pub final_median_below: bool,
    pub pass: bool,
}

/// Samples `trees` trees at the deepest cap and truncates each to every depth, so the
/// depths are coupled and the medians compare like with like.
pub fn uniqueness_experiment(params: Params<f64>, depths: &[usize], trees: usize, node_cap: usize, seed: SeedSpec) -> UniquenessReport {
    let mut depths = depths.to_vec();
    depths.sort_unstable();
    let deepest = depths.last().copied().unwrap_or(0);
    let gaps: Vec<(Vec<f64>, bool)> = (0..trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed.child(i as u64));
            let tree = sample_tree(params, deepest, node_cap, &mut rng);
            let per = depths.iter().map(|&d| extremal_valuations(&tree.truncated(d)).root_gap()).collect();
            (per, tree.node_cap_hit)
        })
        .collect();
    let per_depth: Vec<GapQuantiles> = depths
        .iter()
        .enumerate()
        .map(|(k, &depth)| {
            let xs: Vec<f64> = gaps.iter().map(|(g, _)| g[k]).collect();
            GapQuantiles {
                depth,
                trees,
                median: median(&xs),
                q25: quantile(&xs, 0.25),
                q75: quantile(&xs, 0.75),
                q90: quantile(&xs, 0.9),
                max: xs.iter().copied().fold(0.0, f64::max),
                node_cap_hits: gaps.iter().filter(|(_, hit)| *hit).count(),
            }
        })
        .collect();
    let medians_non_increasing = per_depth.windows(2).all(|w| w[1].median <= w[0].median);
    let threshold = 0.05 * params.lambda;
    let final_median_below = per_depth.last().is_some_and(|g| g.median < threshold);
    UniquenessReport {
        q: params.q,
        lambda: params.lambda,
        per_depth,
        medians_non_increasing,
        threshold,
        final_median_below,
        pass: medians_non_increasing && final_median_below,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamePathReport {
    pub q: f64,
    pub lambda: f64,
    pub depth: usize,
    pub games: usize,
    pub complete: usize,
    pub incomplete: usize,
    pub node_cap_hits: usize,
    pub max_delta_sum: f64,
    /// Complete games with `delta_sum > 2 lambda`.
    pub delta_violations: usize,
    /// Largest violation of `f_A(root) >= -L >= f_B(root)`.
    pub max_bracket_violation: f64,
    /// Complete games whose path leaves the reasonable tree with budget `2 lambda`.
    pub outside_reasonable: usize,
    pub mean_path_edges: f64,
    pub pass: bool,
}

/// Tolerance on the value bracket; the bracket is an equality up to rounding.
pub const BRACKET_TOL: f64 = 1e-9;

/// Plays games on fresh trees until `target` complete games are collected, giving up after
/// `20 * target` trees.
pub fn game_path_experiment(params: Params<f64>, depth: usize, target: usize, node_cap: usize, seed: SeedSpec) -> GamePathReport {
    let limit = 20 * target.max(1);
    let mut report = GamePathReport {
        q: params.q,
        lambda: params.lambda,
        depth,
        games: 0,
        complete: 0,
        incomplete: 0,
        node_cap_hits: 0,
        max_delta_sum: 0.0,
        delta_violations: 0,
        max_bracket_violation: 0.0,
        outside_reasonable: 0,
        mean_path_edges: 0.0,
        pass: false,
    };
    let mut lengths = Welford::new();
    // batches keep the result independent of the thread count
    let batch = target.max(1);
    let mut start = 0;
    while report.complete < target && start < limit {
        let outcomes: Vec<_> = (start..start + batch)
            .into_par_iter()
            .map(|i| {
                let mut rng = derive_stream(seed.child(i as u64));
                let tree = sample_tree(params, depth, node_cap, &mut rng);
                let v = extremal_valuations(&tree);
                let delta = delta_labels(&tree, &v.f_a);
                let game = play_game(&tree, &v.f_a, &v.f_b, &delta);
                let inside = if game.is_complete() && !tree.node_cap_hit {
                    let d = reasonable_tree(&tree, &delta, ROOT, 2.0 * params.lambda, game.path.len() - 1).expect("root is even");
                    let mut member = vec![false; tree.len()];
                    d.nodes.iter().for_each(|&n| member[n] = true);
                    game.path.iter().all(|&n| member[n])
                } else {
                    true
                };
                (tree.node_cap_hit, v.f_a[ROOT], v.f_b[ROOT], game, inside)
            })
            .collect();
        start += batch;
        for (cap_hit, fa, fb, game, inside) in outcomes {
            if report.complete >= target {
                break;
            }
            report.games += 1;
            if cap_hit {
                report.node_cap_hits += 1;
                continue;
            }
            if !game.is_complete() {
                report.incomplete += 1;
                continue;
            }
            report.complete += 1;
            let minus_l = -game.payoff_l;
            report.max_delta_sum = report.max_delta_sum.max(game.delta_sum);
            report.delta_violations += (game.delta_sum > 2.0 * params.lambda) as usize;
            report.max_bracket_violation = report.max_bracket_violation.max(minus_l - fa).max(fb - minus_l);
            report.outside_reasonable += (!inside) as usize;
            lengths.push((game.path.len() - 1) as f64);
        }
    }
    report.mean_path_edges = lengths.mean();
    report.pass = report.complete >= target
        && report.delta_violations == 0
        && report.max_bracket_violation <= BRACKET_TOL
        && report.outside_reasonable == 0;
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub q: f64,
    pub lambda: f64,
    pub depth: usize,
    pub root_samples: usize,
    /// KS distance between the root midpoints `(f_A + f_B)/2` and `F_A`.
    pub ks_root: f64,
    pub median_root_gap: f64,
    pub labeled_trees: usize,
    pub depth2_direct: usize,
    pub depth2_labeled: usize,
    /// Two-sample KS distance between depth-2 labels of the two constructions.
    pub ks_depth2: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Root labels of deep truncations against `F_A`, and depth-2 labels of the labelled
/// construction against those of deep truncations. Both use the valuation midpoint.
pub fn distribution_experiment(
    fp: &FixedPoint<f64>,
    depth: usize,
    root_samples: usize,
    labeled_trees: usize,
    node_cap: usize,
    seed: SeedSpec,
) -> Result<DistributionReport> {
    let params = *fp.params();
    let direct_seed = seed.child(0);
    let direct: Vec<(f64, f64, Vec<f64>)> = (0..root_samples.max(labeled_trees))
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(direct_seed.child(i as u64));
            let tree = sample_tree(params, depth, node_cap, &mut rng);
            let v = extremal_valuations(&tree);
            let mid: Vec<f64> = v.f_a.iter().zip(&v.f_b).map(|(a, b)| 0.5 * (a + b)).collect();
            let depth2 = tree.nodes.iter().enumerate().filter(|(_, n)| n.depth == 2).map(|(id, _)| mid[id]).collect();
            (mid[ROOT], v.root_gap(), depth2)
        })
        .collect();
    let roots: Vec<f64> = direct.iter().take(root_samples).map(|d| d.0).collect();
    let gaps: Vec<f64> = direct.iter().take(root_samples).map(|d| d.1).collect();
    let direct2: Vec<f64> = direct.iter().take(labeled_trees).flat_map(|d| d.2.iter().copied()).collect();
    let f = &fp.f_a;
    let ks_root = ks_anti_cdf(&roots, |z| f.eval(z), params.half());

    let labeled_seed = seed.child(1);
    let labeled: Vec<Vec<f64>> = (0..labeled_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(labeled_seed.child(i as u64));
            let tree = sample_labeled_tree(fp, 2, &mut rng)?;
            let labels = tree.labels.as_ref().expect("labelled tree");
            Ok(tree.nodes.iter().zip(labels).filter(|(n, _)| n.depth == 2).map(|(_, &l)| l).collect())
        })
        .collect::<Result<_>>()?;
    let labeled2: Vec<f64> = labeled.into_iter().flatten().collect();
    let ks_depth2 = ks_two_sample(&direct2, &labeled2);
    let tolerance = 0.05;
    Ok(DistributionReport {
        q: params.q,
        lambda: params.lambda,
        depth,
        root_samples,
        ks_root,
        median_root_gap: median(&gaps),
        labeled_trees,
        depth2_direct: direct2.len(),
        depth2_labeled: labeled2.len(),
        ks_depth2,
        tolerance,
        pass: ks_root < tolerance && ks_depth2 < tolerance,
    })
}

/// `E|Delta^2_t(root)|` over labelled trees against `2 + lambda^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepSize {
    pub t: f64,
    pub trees: usize,
    pub mean: f64,
    pub std_err: f64,
    pub bound: f64,
    pub pass: bool,
}

/// One bin of `R^{2k}_t` against the majorant at the bin center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RvsPsi {
    pub t: f64,
    pub k: usize,
    pub center: f64,
    pub atom: bool,
    pub samples: usize,
    pub r_mean: Option<f64>,
    pub r_upper: Option<f64>,
    pub psi: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiSummary {
    pub t: f64,
    pub m: f64,
    pub k_const: f64,
    pub scale: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    pub terms: usize,
    /// Relative to `K e^(mt)`.
    pub identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonableReport {
    pub q: f64,
    pub lambda: f64,
    pub norm: f64,
    pub alpha: f64,
    pub m: f64,
    pub epsilon_m: f64,
    pub m_satisfied: bool,
    pub two_step: Vec<TwoStepSize>,
    pub psi: Vec<PsiSummary>,
    pub r_estimates: Vec<REstimate>,
    pub comparisons: Vec<RvsPsi>,
    /// The atom bin (root value `lambda/2`) has `R = 0` in every estimate.
    pub atom_bins_zero: bool,
    /// Per-bin means are non-decreasing in `k` at fixed `t`, within two standard errors.
    pub monotone_in_k: bool,
    pub identity_tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonableConfig {
    pub budgets: Vec<f64>,
    /// Half-depths: `R^{2k}` for each `k`.
    pub half_depths: Vec<usize>,
    pub two_step_trees: usize,
    pub z_bins: usize,
    pub samples_per_bin: usize,
}

impl Default for ReasonableConfig {
    fn default() -> Self {
        Self { budgets: vec![0.5, 1.0, 2.0], half_depths: vec![2, 4, 6], two_step_trees: 1000, z_bins: 8, samples_per_bin: 200 }
    }
}

/// Sizes of reasonable trees against `2 + lambda^q` and against the Neumann majorant.
pub fn reasonable_experiment(fp: &FixedPoint<f64>, config: &ReasonableConfig, seed: SeedSpec) -> Result<ReasonableReport> {
    let params = *fp.params();
    let la = build_operator(Player::A, fp)?;
    let lb = build_operator(Player::B, fp)?;
    let norm = compose_norm(&lb, &la)?;
    let alpha = estimate_alpha(&fp.f_a, 200)?.alpha_total.max(estimate_alpha(&fp.f_b, 200)?.alpha_total);
    let choice = choose_m(&params, alpha, norm);
    let k_const = default_k(&params);
    let bound = 2.0 + params.lambda.powf(params.q);
    let identity_tol = 1e-8;

    let mut two_step = Vec::new();
    for (ti, &t) in config.budgets.iter().enumerate() {
        let s = seed.child(ti as u64).child(0);
        let sizes: Vec<f64> = (0..config.two_step_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = derive_stream(s.child(i as u64));
                let tree = sample_labeled_tree(fp, 2, &mut rng)?;
                let delta = delta_labels(&tree, tree.labels.as_ref().expect("labelled tree"));
                Ok(reasonable_tree(&tree, &delta, ROOT, t, 2)?.edges as f64)
            })
            .collect::<Result<_>>()?;
        let w: Welford = sizes.into_iter().collect();
        two_step.push(TwoStepSize { t, trees: config.two_step_trees, mean: w.mean(), std_err: w.std_err(), bound, pass: w.mean() <= bound });
    }

    let mut psi = Vec::new();
    let mut r_estimates = Vec::new();
    let mut comparisons = Vec::new();
    let mut monotone_in_k = true;
    for (ti, &t) in config.budgets.iter().enumerate() {
        let majorant = neumann_psi(t, &lb, &la, k_const, choice.m, 1e-14)?;
        let values = majorant.values();
        psi.push(PsiSummary {
            t,
            m: choice.m,
            k_const,
            scale: majorant.scale,
            psi_min: values.iter().copied().fold(f64::INFINITY, f64::min),
            psi_max: values.iter().copied().fold(0.0, f64::max),
            terms: majorant.terms,
            identity_residual: majorant.identity_residual(&lb, &la),
        });
        let mut previous: Option<REstimate> = None;
        for &k in &config.half_depths {
            let est = estimate_r(fp, t, 2 * k, config.z_bins, config.samples_per_bin, seed.child(ti as u64).child(1 + k as u64))?;
            for bin in &est.bins {
                let bound = majorant.at(bin.center);
                let upper = bin.ci.map(|c| c.1);
                comparisons.push(RvsPsi {
                    t,
                    k,
                    center: bin.center,
                    atom: bin.atom,
                    samples: bin.samples,
                    r_mean: bin.mean,
                    r_upper: upper,
                    psi: bound,
                    pass: bin.mean.is_none_or(|m| m < bound),
                });
            }
            if let Some(prev) = &previous {
                for (a, b) in prev.bins.iter().zip(&est.bins) {
                    if let (Some(ma), Some(mb), Some(sa), Some(sb)) = (a.mean, b.mean, a.std_err, b.std_err) {
                        monotone_in_k &= mb >= ma - 2.0 * (sa * sa + sb * sb).sqrt();
                    }
                }
            }
            previous = Some(est.clone());
            r_estimates.push(est);
        }
    }
    let atom_bins_zero = r_estimates.iter().all(|e| e.bins.iter().filter(|b| b.atom).all(|b| b.mean == Some(0.0)));
    let pass = choice.satisfied
        && two_step.iter().all(|s| s.pass)
        && comparisons.iter().all(|c| c.pass)
        && psi.iter().all(|p| p.identity_residual <= identity_tol)
        && atom_bins_zero;
    Ok(ReasonableReport {
        q: params.q,
        lambda: params.lambda,
        norm,
        alpha,
        m: choice.m,
        epsilon_m: choice.epsilon,
        m_satisfied: choice.satisfied,
        two_step,
        psi,
        r_estimates,
        comparisons,
        atom_bins_zero,
        monotone_in_k,
        identity_tol,
        pass,
    })
}
