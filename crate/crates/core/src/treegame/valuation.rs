use serde::{Deserialize, Serialize};

use super::tree::{GameTree, ROOT};
use crate::scalar::Scalar;

/// The two extremal valuations of a truncated tree.
///
/// `f_a` is the most favourable to Alice (smallest at even depth, largest at odd
/// depth), `f_b` the most favourable to Bob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valuations<T> {
    pub f_a: Vec<T>,
    pub f_b: Vec<T>,
}

impl<T: Scalar> Valuations<T> {
    /// `f_B(root) - f_A(root) >= 0`.
    pub fn root_gap(&self) -> T {
        self.f_b[ROOT] - self.f_a[ROOT]
    }

    pub fn root_midpoint(&self) -> T {
        (self.f_a[ROOT] + self.f_b[ROOT]) / T::lit(2.0)
    }
}

/// `h(u) = min(lambda/2, min_v l(u,v) - h(v))`, true leaves valued `lambda/2`, frontier
/// nodes valued `frontier(depth)`.
fn back_propagate<T: Scalar>(tree: &GameTree<T>, frontier: impl Fn(usize) -> T) -> Vec<T> {
    let half = tree.params.half();
    let mut h = vec![T::zero(); tree.len()];
    // children come after their parent in breadth-first order
    for id in (0..tree.len()).rev() {
        let node = tree.node(id);
        h[id] = if !node.expanded {
            frontier(node.depth)
        } else {
            node.children().map(|c| tree.node(c).edge_cost - h[c]).fold(half, |m, v| m.min(v))
        };
    }
    h
}

/// Extremal valuations by two back-propagations from the frontier. The recursion is
/// order-reversing, so frontier values `-lambda/2` at even depth and `lambda/2` at odd
/// depth give the valuation smallest at every even node.
pub fn extremal_valuations<T: Scalar>(tree: &GameTree<T>) -> Valuations<T> {
    let half = tree.params.half();
    let f_a = back_propagate(tree, |d| if d % 2 == 0 { -half } else { half });
    let f_b = back_propagate(tree, |d| if d % 2 == 0 { half } else { -half });
    Valuations { f_a, f_b }
}

/// `delta(v) = l(u, v) - f(u) - f(v)` for every non-root `v`; zero at the root.
pub fn delta_labels<T: Scalar>(tree: &GameTree<T>, f: &[T]) -> Vec<T> {
    tree.nodes
        .iter()
        .enumerate()
        .map(|(id, n)| match n.parent {
            Some(u) => n.edge_cost - f[u] - f[id],
            None => T::zero(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tree::{sample_tree, Node, DEFAULT_NODE_CAP};
    use super::*;
    use crate::randomness::{derive_stream, Params, SeedSpec};

    fn chain(l1: f64, l2: f64, lambda: f64) -> GameTree<f64> {
        let p = Params::new(0.5, lambda).unwrap();
        let mut t = GameTree::with_root(p, 2, 10);
        t.nodes[0] = Node { parent: None, edge_cost: 0.0, depth: 0, first_child: 1, child_count: 1, expanded: true };
        t.nodes.push(Node { parent: Some(0), edge_cost: l1, depth: 1, first_child: 2, child_count: 1, expanded: true });
        t.nodes.push(Node { parent: Some(1), edge_cost: l2, depth: 2, first_child: 0, child_count: 0, expanded: false });
        t
    }

    #[test]
    fn single_leaf_is_worth_half_lambda() {
        let p = Params::new(0.5, 2.0).unwrap();
        let mut t = GameTree::with_root(p, 3, 10);
        t.nodes[0].expanded = true;
        let v = extremal_valuations(&t);
        assert_eq!(v.f_a[ROOT], 1.0);
        assert_eq!(v.f_b[ROOT], 1.0);
    }

    #[test]
    fn chain_recursion() {
        let (l1, l2, lambda) = (0.7, 0.4, 2.0);
        let t = chain(l1, l2, lambda);
        let v = extremal_valuations(&t);
        let h = |boundary: f64| (lambda / 2.0_f64).min(l1 - (lambda / 2.0_f64).min(l2 - boundary));
        assert_eq!(v.f_a[ROOT], h(-1.0));
        assert_eq!(v.f_b[ROOT], h(1.0));
        assert!(v.f_a[ROOT] <= v.f_b[ROOT]);
    }

    #[test]
    fn parity_ordering_and_nonnegative_delta() {
        let p = Params::new(0.5_f64, 2.0).unwrap();
        for seed in 0..200 {
            let mut rng = derive_stream(SeedSpec::new(seed, 0));
            let t = sample_tree(p, 8, DEFAULT_NODE_CAP, &mut rng);
            let v = extremal_valuations(&t);
            for (id, n) in t.nodes.iter().enumerate() {
                if n.depth % 2 == 0 {
                    assert!(v.f_a[id] <= v.f_b[id]);
                } else {
                    assert!(v.f_a[id] >= v.f_b[id]);
                }
                assert!(v.f_a[id].abs() <= 1.0 && v.f_b[id].abs() <= 1.0);
            }
            for d in delta_labels(&t, &v.f_a).into_iter().chain(delta_labels(&t, &v.f_b)) {
                assert!(d >= -1e-12);
            }
        }
    }

    #[test]
    fn quit_capped_parent_has_positive_delta_children() {
        // the only move leads to a node worth -0.9 to the mover, so the root quits
        let mut t = chain(1.9, 0.1, 2.0);
        t.nodes[2].expanded = true;
        let v = extremal_valuations(&t);
        assert_eq!(v.f_a[ROOT], 1.0);
        let d = delta_labels(&t, &v.f_a);
        assert!((d[1] - (1.9 - 1.0 - v.f_a[1])).abs() < 1e-15);
        assert!((d[1] - 1.8).abs() < 1e-12);
    }
}
