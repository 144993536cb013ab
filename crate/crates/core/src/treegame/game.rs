use serde::{Deserialize, Serialize};

use super::tree::{GameTree, NodeId, ROOT};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mover {
    Alice,
    Bob,
}

/// One play of the Exploration game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord<T> {
    /// Visited nodes from the root.
    pub path: Vec<NodeId>,
    /// Alice's payoff: edge costs paid to her minus those she paid, plus or minus the quit penalty.
    pub payoff_l: T,
    /// Sum of `delta` over the moves of the path.
    pub delta_sum: T,
    /// Who quit; `None` when the path ran into the truncation frontier.
    pub terminator: Option<Mover>,
}

impl<T> GameRecord<T> {
    pub fn is_complete(&self) -> bool {
        self.terminator.is_some()
    }
}

/// Alice moves `f_a`-optimally from even depth, Bob `f_b`-optimally from odd depth. The
/// mover quits when no move costs less than `lambda/2` under their valuation; ties go to
/// the lower child index.
pub fn play_game<T: Scalar>(tree: &GameTree<T>, f_a: &[T], f_b: &[T], delta: &[T]) -> GameRecord<T> {
    let half = tree.params.half();
    let mut path = vec![ROOT];
    let mut payoff = T::zero();
    let mut delta_sum = T::zero();
    let mut u = ROOT;
    loop {
        let node = tree.node(u);
        let mover = if node.depth.is_multiple_of(2) { Mover::Alice } else { Mover::Bob };
        // Alice pays positive amounts, Bob's payments are her gains
        let sign = if mover == Mover::Alice { -T::one() } else { T::one() };
        if !node.expanded {
            return GameRecord { path, payoff_l: payoff, delta_sum, terminator: None };
        }
        let f = if mover == Mover::Alice { f_a } else { f_b };
        let mut best: Option<(NodeId, T)> = None;
        for c in node.children() {
            let v = tree.node(c).edge_cost - f[c];
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((c, v));
            }
        }
        match best {
            Some((c, v)) if v < half => {
                payoff = payoff + sign * tree.node(c).edge_cost;
                delta_sum = delta_sum + delta[c];
                path.push(c);
                u = c;
            }
            _ => {
                payoff = payoff + sign * half;
                return GameRecord { path, payoff_l: payoff, delta_sum, terminator: Some(mover) };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tree::{sample_tree, DEFAULT_NODE_CAP};
    use super::super::valuation::{delta_labels, extremal_valuations};
    use super::*;
    use crate::randomness::{derive_stream, Params, SeedSpec};

    #[test]
    fn lone_root_quits_at_once() {
        let p = Params::new(0.5, 2.0).unwrap();
        let mut t = GameTree::with_root(p, 4, 10);
        t.nodes[0].expanded = true;
        let g = play_game(&t, &[1.0], &[1.0], &[0.0]);
        assert_eq!(g.payoff_l, -1.0);
        assert_eq!(g.terminator, Some(Mover::Alice));
        assert_eq!(g.path, vec![ROOT]);
    }

    #[test]
    fn complete_games_sit_between_the_extremal_values() {
        let p = Params::new(0.5, 2.0).unwrap();
        let mut complete = 0;
        for seed in 0..300 {
            let mut rng = derive_stream(SeedSpec::new(seed, 7));
            let t = sample_tree(p, 12, DEFAULT_NODE_CAP, &mut rng);
            let v = extremal_valuations(&t);
            let d = delta_labels(&t, &v.f_a);
            let g = play_game(&t, &v.f_a, &v.f_b, &d);
            if g.is_complete() {
                complete += 1;
                assert!(v.f_a[ROOT] >= -g.payoff_l - 1e-12);
                assert!(-g.payoff_l >= v.f_b[ROOT] - 1e-12);
                assert!(g.delta_sum <= 4.0 + 1e-12);
            }
        }
        assert!(complete > 200);
    }
}
