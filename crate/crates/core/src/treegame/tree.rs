use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::randomness::{sample_poisson_arrivals, Params};
use crate::scalar::Scalar;

pub type NodeId = usize;

pub const ROOT: NodeId = 0;
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node<T> {
    pub parent: Option<NodeId>,
    /// Cost of the edge from the parent; zero at the root.
    pub edge_cost: T,
    pub depth: usize,
    /// Children occupy `first_child..first_child + child_count` (breadth-first layout).
    pub first_child: NodeId,
    pub child_count: usize,
    /// Whether the offspring were generated. `false` marks the truncation frontier.
    pub expanded: bool,
}

impl<T> Node<T> {
    pub fn children(&self) -> std::ops::Range<NodeId> {
        self.first_child..self.first_child + self.child_count
    }

    pub fn is_leaf(&self) -> bool {
        self.expanded && self.child_count == 0
    }
}

/// Edge-weighted rooted tree stored breadth-first, truncated at `depth_cap` and `node_cap`.
/// Trees built from the cost/value square also carry a value label per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTree<T> {
    pub params: Params<T>,
    pub nodes: Vec<Node<T>>,
    pub depth_cap: usize,
    pub node_cap: usize,
    /// Set when expansion stopped because of `node_cap`.
    pub node_cap_hit: bool,
    pub labels: Option<Vec<T>>,
}

impl<T: Scalar> GameTree<T> {
    pub(crate) fn with_root(params: Params<T>, depth_cap: usize, node_cap: usize) -> Self {
        let root = Node { parent: None, edge_cost: T::zero(), depth: 0, first_child: 1, child_count: 0, expanded: false };
        Self { params, nodes: vec![root], depth_cap, node_cap: node_cap.max(1), node_cap_hit: false, labels: None }
    }

    /// Breadth-first expansion: `offspring(depth, label)` returns the edge costs (and labels)
    /// of the children of a node.
    pub(crate) fn grow(&mut self, mut offspring: impl FnMut(usize, Option<T>) -> Vec<(T, Option<T>)>) {
        let mut next = 0;
        while next < self.nodes.len() {
            let id = next;
            next += 1;
            let depth = self.nodes[id].depth;
            if depth >= self.depth_cap || self.node_cap_hit {
                continue;
            }
            let kids = offspring(depth, self.labels.as_ref().map(|l| l[id]));
            if self.nodes.len() + kids.len() > self.node_cap {
                self.node_cap_hit = true;
                continue;
            }
            let first = self.nodes.len();
            for (cost, label) in kids {
                self.nodes.push(Node {
                    parent: Some(id),
                    edge_cost: cost,
                    depth: depth + 1,
                    first_child: 0,
                    child_count: 0,
                    expanded: false,
                });
                if let (Some(labels), Some(l)) = (self.labels.as_mut(), label) {
                    labels.push(l);
                }
            }
            let count = self.nodes.len() - first;
            let node = &mut self.nodes[id];
            node.first_child = first;
            node.child_count = count;
            node.expanded = true;
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, id: NodeId) -> &Node<T> {
        &self.nodes[id]
    }

    pub fn children(&self, id: NodeId) -> std::ops::Range<NodeId> {
        self.nodes[id].children()
    }

    /// Nodes whose offspring were not generated.
    pub fn frontier_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| !n.expanded).map(|(i, _)| i)
    }

    /// Node counts per depth, starting with the root.
    pub fn depth_profile(&self) -> Vec<usize> {
        let mut counts = vec![0; self.depth_cap + 1];
        for n in &self.nodes {
            counts[n.depth] += 1;
        }
        counts
    }

    /// Copy restricted to depth `<= depth`; nodes at `depth` become frontier nodes.
    pub fn truncated(&self, depth: usize) -> Self {
        if depth >= self.depth_cap {
            return self.clone();
        }
        // breadth-first order keeps every depth level contiguous
        let keep = self.nodes.partition_point(|n| n.depth <= depth);
        let mut nodes = self.nodes[..keep].to_vec();
        for n in nodes.iter_mut().filter(|n| n.depth == depth) {
            n.expanded = false;
            n.child_count = 0;
            n.first_child = 0;
        }
        Self {
            params: self.params,
            nodes,
            depth_cap: depth,
            node_cap: self.node_cap,
            node_cap_hit: self.node_cap_hit,
            labels: self.labels.as_ref().map(|l| l[..keep].to_vec()),
        }
    }
}

/// Samples the Poisson-weighted Galton-Watson tree: every node's offspring costs are
/// an independent inhomogeneous Poisson process with intensity `q t^(q-1)` on `[0, lambda]`.
pub fn sample_tree<T: Scalar, R: Rng + ?Sized>(params: Params<T>, depth_cap: usize, node_cap: usize, rng: &mut R) -> GameTree<T> {
    let mut tree = GameTree::with_root(params, depth_cap, node_cap);
    tree.grow(|_, _| sample_poisson_arrivals(&params, rng).into_iter().map(|c| (c, None)).collect());
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{derive_stream, SeedSpec};
    use crate::stats::Welford;

    #[test]
    fn zero_depth_cap_gives_a_single_unexpanded_root() {
        let mut rng = derive_stream(SeedSpec::new(1, 0));
        let t = sample_tree(Params::new(0.5, 2.0).unwrap(), 0, 10, &mut rng);
        assert_eq!(t.len(), 1);
        assert_eq!(t.edge_count(), 0);
        assert!(!t.node(ROOT).expanded);
    }

    #[test]
    fn breadth_first_layout_and_costs() {
        let mut rng = derive_stream(SeedSpec::new(2, 0));
        let p = Params::new(0.5, 2.0).unwrap();
        let t = sample_tree(p, 6, DEFAULT_NODE_CAP, &mut rng);
        assert!(t.nodes.windows(2).all(|w| w[0].depth <= w[1].depth));
        for (id, n) in t.nodes.iter().enumerate() {
            for c in n.children() {
                assert_eq!(t.node(c).parent, Some(id));
                assert_eq!(t.node(c).depth, n.depth + 1);
                assert!(t.node(c).edge_cost >= 0.0 && t.node(c).edge_cost <= 2.0);
            }
            assert_eq!(n.expanded, n.depth < 6);
        }
    }

    #[test]
    fn node_cap_is_flagged() {
        let mut rng = derive_stream(SeedSpec::new(3, 0));
        let t = sample_tree(Params::new(1.0, 6.0).unwrap(), 30, 50, &mut rng);
        assert!(t.node_cap_hit);
        assert!(t.len() <= 50);
    }

    #[test]
    fn mean_root_degree_is_lambda_to_the_q() {
        let p = Params::new(0.5, 2.0).unwrap();
        let mut rng = derive_stream(SeedSpec::new(4, 0));
        let w: Welford = (0..10_000).map(|_| sample_tree(p, 1, 100, &mut rng).edge_count() as f64).collect();
        assert!((w.mean() - 2.0_f64.sqrt()).abs() < 3.0 * w.std_err());
    }

    #[test]
    fn truncation_keeps_a_prefix() {
        let mut rng = derive_stream(SeedSpec::new(5, 0));
        let t = sample_tree(Params::new(0.5, 3.0).unwrap(), 8, DEFAULT_NODE_CAP, &mut rng);
        let s = t.truncated(3);
        assert_eq!(s.depth_cap, 3);
        assert_eq!(&s.depth_profile()[..], &t.depth_profile()[..4]);
        assert!(s.nodes.iter().all(|n| n.expanded == (n.depth < 3)));
    }
}
