use rand::Rng;

use super::tree::{GameTree, DEFAULT_NODE_CAP};
use crate::error::Result;
use crate::fixpoint::{FixedPoint, GridFunction};
use crate::operators::build_density;
use crate::randomness::{open_uniform, sample_poisson_arrivals};
use crate::scalar::Scalar;

/// Offspring of a node labelled `z` in the value-conditioned construction, as
/// `(edge cost, child label)` pairs. `f` is the anti-CDF of the child labels.
///
/// Off-diagonal children are the points of a Poisson process with intensity
/// `q l^(q-1) dl x dF(f)` on the square, kept where `l - f > z`. For `z < lambda/2` one
/// more child sits on the diagonal `l - f = z`: with probability `I(z)` drawn from the
/// continuous density, otherwise at the atom `(z + lambda/2, lambda/2)`. For
/// `z = lambda/2` the parent quits and there is no diagonal child.
pub fn labeled_offspring<T: Scalar, R: Rng + ?Sized>(f: &GridFunction<T>, z: T, rng: &mut R) -> Result<Vec<(T, T)>> {
    let p = *f.params();
    let half = p.half();
    let mut kids: Vec<(T, T)> = sample_poisson_arrivals(&p, rng)
        .into_iter()
        .map(|l| (l, f.anti_cdf_inverse(open_uniform(rng))))
        .filter(|&(l, v)| l - v > z)
        .collect();
    if z < half {
        let density = build_density(f, z)?;
        let u: T = open_uniform(rng);
        let diagonal = if u < density.continuous_fraction() {
            let t = density.sample_continuous(open_uniform(rng), open_uniform(rng)).unwrap_or(half);
            (z + t, t)
        } else {
            (z + half, half)
        };
        kids.push(diagonal);
    }
    Ok(kids)
}

/// Samples the labelled tree: root label from `F_A`, children of even-depth nodes from
/// the `F_B` measure and children of odd-depth nodes from the `F_A` measure.
pub fn sample_labeled_tree<T: Scalar, R: Rng + ?Sized>(fp: &FixedPoint<T>, depth_cap: usize, rng: &mut R) -> Result<GameTree<T>> {
    let root = fp.f_a.anti_cdf_inverse(open_uniform(rng));
    sample_labeled_tree_from(fp, root, depth_cap, DEFAULT_NODE_CAP, rng)
}

/// Same as [`sample_labeled_tree`] with a given root label.
pub fn sample_labeled_tree_from<T: Scalar, R: Rng + ?Sized>(
    fp: &FixedPoint<T>,
    root_label: T,
    depth_cap: usize,
    node_cap: usize,
    rng: &mut R,
) -> Result<GameTree<T>> {
    let mut tree = GameTree::with_root(*fp.params(), depth_cap, node_cap);
    tree.labels = Some(vec![root_label]);
    let mut failure = None;
    tree.grow(|depth, label| {
        let f = if depth % 2 == 0 { &fp.f_b } else { &fp.f_a };
        match labeled_offspring(f, label.unwrap_or(root_label), rng) {
            Ok(kids) => kids.into_iter().map(|(l, v)| (l, Some(v))).collect(),
            Err(e) => {
                failure.get_or_insert(e);
                Vec::new()
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::{iterate_fixpoint, FixpointConfig};
    use crate::randomness::{derive_stream, Params, SeedSpec};
    use crate::treegame::valuation::delta_labels;

    #[test]
    fn labels_satisfy_the_valuation_recursion_on_expanded_nodes() {
        let fp = iterate_fixpoint(Params::new(0.5, 1.5).unwrap(), &FixpointConfig::with_segments(256)).unwrap();
        let mut rng = derive_stream(SeedSpec::new(11, 0));
        for _ in 0..50 {
            let t = sample_labeled_tree(&fp, 4, &mut rng).unwrap();
            let labels = t.labels.as_ref().unwrap();
            assert_eq!(labels.len(), t.len());
            for (id, n) in t.nodes.iter().enumerate().filter(|(_, n)| n.expanded) {
                let best = n.children().map(|c| t.node(c).edge_cost - labels[c]).fold(0.75, f64::min);
                assert!((best - labels[id]).abs() < 1e-9, "node {id}: {best} vs {}", labels[id]);
            }
            let d = delta_labels(&t, labels);
            assert!(d.iter().all(|&x| x >= -1e-9));
            assert!(t.nodes.iter().all(|n| n.edge_cost >= 0.0 && n.edge_cost <= 1.5 + 1e-12));
        }
    }

    #[test]
    fn quitting_root_has_no_diagonal_child() {
        let fp = iterate_fixpoint(Params::new(0.5, 1.5).unwrap(), &FixpointConfig::with_segments(64)).unwrap();
        let mut rng = derive_stream(SeedSpec::new(12, 0));
        for _ in 0..200 {
            let kids = labeled_offspring(&fp.f_b, 0.75, &mut rng).unwrap();
            assert!(kids.iter().all(|&(l, v)| l - v > 0.75));
        }
    }
}
