use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labeled::sample_labeled_tree_from;
use super::tree::{GameTree, NodeId, DEFAULT_NODE_CAP, ROOT};
use super::valuation::delta_labels;
use crate::error::{Error, Result};
use crate::fixpoint::FixedPoint;
use crate::randomness::{derive_stream, open_uniform, SeedSpec};
use crate::scalar::Scalar;
use crate::stats::Welford;

/// Tolerance for `delta = 0` on the odd (Alice) steps.
pub const OPTIMAL_TOL: f64 = 1e-9;

/// The union of all `(u, t)`-reasonable paths of at most `k` edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonableTree {
    pub nodes: Vec<NodeId>,
    /// `|Delta|` counted in edges.
    pub edges: usize,
    /// Some node inside the subtree (above depth `k`) is an unexpanded frontier node,
    /// so `edges` is only a lower bound.
    pub truncated: bool,
}

/// `Delta^k_t(u)`: paths from the even-depth node `u` whose odd steps have `delta = 0`
/// (within [`OPTIMAL_TOL`]) and whose total `delta` is at most `t`. Depth counts edges from `u`.
pub fn reasonable_tree<T: Scalar>(tree: &GameTree<T>, delta: &[T], u: NodeId, t: T, k: usize) -> Result<ReasonableTree> {
    if !tree.node(u).depth.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("node {u} is at odd depth")));
    }
    let tol = T::lit(OPTIMAL_TOL);
    let mut nodes = vec![u];
    let mut truncated = false;
    // (node, steps from u, cumulative delta)
    let mut stack = vec![(u, 0usize, T::zero())];
    while let Some((x, steps, spent)) = stack.pop() {
        if steps == k {
            continue;
        }
        let node = tree.node(x);
        if !node.expanded {
            truncated = true;
            continue;
        }
        let odd_step = (steps + 1) % 2 == 1;
        for c in node.children() {
            let d = delta[c];
            if odd_step && d > tol {
                continue;
            }
            let total = spent + d.max(T::zero());
            if total > t + tol {
                continue;
            }
            nodes.push(c);
            stack.push((c, steps + 1, total));
        }
    }
    let edges = nodes.len() - 1;
    Ok(ReasonableTree { nodes, edges, truncated })
}

/// Empirical `R^k_t` over one bin of root labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RBin {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    /// The bin holding only the atom at `lambda/2`.
    pub atom: bool,
    pub samples: usize,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    /// 95% normal interval.
    pub ci: Option<(f64, f64)>,
    pub truncated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct REstimate {
    pub t: f64,
    pub k: usize,
    pub bins: Vec<RBin>,
}

/// Bins with fewer samples are reported empty.
pub const MIN_BIN_SAMPLES: usize = 10;

/// `R^k_t` per root-label bin: `z_bins` equal bins of `[-lambda/2, lambda/2)` plus the atom
/// at `lambda/2`. Each bin draws `samples` labelled trees with the root label drawn from
/// `F_A` conditioned on the bin.
pub fn estimate_r<T: Scalar>(fp: &FixedPoint<T>, t: T, k: usize, z_bins: usize, samples: usize, seed: SeedSpec) -> Result<REstimate> {
    if !k.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("k must be even, got {k}")));
    }
    if samples < 100 || z_bins == 0 {
        return Err(Error::InvalidParams("estimate_r needs samples >= 100 and at least one bin".into()));
    }
    let p = *fp.params();
    let half = p.half();
    let f = &fp.f_a;
    let mut bins = Vec::with_capacity(z_bins + 1);
    for b in 0..=z_bins {
        let atom = b == z_bins;
        let (lo, hi) = if atom {
            (half, half)
        } else {
            let w = p.lambda / T::from_usize_lossy(z_bins);
            (-half + w * T::from_usize_lossy(b), -half + w * T::from_usize_lossy(b + 1))
        };
        // anti-CDF mass: root label in [lo, hi) iff F(hi) < U <= F(lo)
        let (u_lo, u_hi) = if atom { (T::zero(), f.right_value()) } else { (f.eval(hi), f.eval(lo)) };
        let bin_seed = seed.child(b as u64);
        let results: Vec<Result<(usize, bool)>> = if u_hi > u_lo {
            (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = derive_stream(bin_seed.child(i as u64));
                    let z = if atom {
                        half
                    } else {
                        let u: T = open_uniform(&mut rng);
                        f.anti_cdf_inverse(u_lo + u * (u_hi - u_lo)).max(lo).min(hi)
                    };
                    let tree = sample_labeled_tree_from(fp, z, k, DEFAULT_NODE_CAP, &mut rng)?;
                    let labels = tree.labels.as_ref().expect("labelled tree");
                    let delta = delta_labels(&tree, labels);
                    let d = reasonable_tree(&tree, &delta, ROOT, t, k)?;
                    Ok((d.edges, d.truncated || tree.node_cap_hit))
                })
                .collect()
        } else {
            Vec::new()
        };
        let mut w = Welford::new();
        let mut truncated = 0;
        for r in results {
            let (edges, trunc) = r?;
            w.push(edges as f64);
            truncated += trunc as usize;
        }
        let n = w.count() as usize;
        let filled = n >= MIN_BIN_SAMPLES;
        let mean = filled.then(|| w.mean());
        let se = filled.then(|| w.std_err());
        bins.push(RBin {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            center: ((lo + hi) / T::lit(2.0)).as_f64(),
            atom,
            samples: n,
            mean,
            std_err: se,
            ci: mean.zip(se).map(|(m, s)| (m - 1.96 * s, m + 1.96 * s)),
            truncated,
        });
    }
    Ok(REstimate { t: t.as_f64(), k, bins })
}
