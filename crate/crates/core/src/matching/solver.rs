use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix of nonnegative finite edge costs, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentInstance<T> {
    n: usize,
    costs: Vec<T>,
}

impl<T: Scalar> AssignmentInstance<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("cost matrix"));
        }
        let mut costs = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, row, len: r.len() });
            }
            costs.extend_from_slice(r);
        }
        Self::from_flat(n, costs)
    }

    pub fn from_flat(n: usize, costs: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("cost matrix"));
        }
        if costs.len() != n * n {
            return Err(Error::NotSquare { rows: n, row: costs.len() / n.max(1), len: costs.len() % n.max(1) });
        }
        if let Some(k) = costs.iter().position(|&c| !(c >= T::zero() && c.is_finite())) {
            return Err(Error::BadCost { row: k / n, col: k % n, value: costs[k].as_f64() });
        }
        Ok(Self { n, costs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> T {
        self.costs[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.costs[i * self.n..(i + 1) * self.n]
    }

    pub fn costs(&self) -> &[T] {
        &self.costs
    }
}

/// Optimal assignment with a dual certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingResult<T> {
    /// `assignment[i]` is the column matched to row `i`.
    pub assignment: Vec<usize>,
    pub total_cost: T,
    pub dual_row: Vec<T>,
    pub dual_col: Vec<T>,
}

impl<T: Scalar> MatchingResult<T> {
    /// Largest violation of dual feasibility (`u_i + v_j <= c_ij`) and of complementary
    /// slackness on matched pairs, each relative to `max(1, max |c_ij|)`.
    pub fn certificate_violation(&self, inst: &AssignmentInstance<T>) -> (T, T) {
        let scale = inst.costs().iter().fold(T::one(), |m, &c| m.max(c.abs()));
        let mut feas = T::zero();
        let mut slack = T::zero();
        for i in 0..inst.n() {
            for j in 0..inst.n() {
                let r = self.dual_row[i] + self.dual_col[j] - inst.cost(i, j);
                feas = feas.max(r);
                if self.assignment[i] == j {
                    slack = slack.max(r.abs());
                }
            }
        }
        (feas / scale, slack / scale)
    }

    /// `true` when `assignment` is a permutation and `total_cost` equals the sum of matched costs.
    pub fn is_consistent(&self, inst: &AssignmentInstance<T>) -> bool {
        let n = inst.n();
        let mut seen = vec![false; n];
        for &j in &self.assignment {
            if j >= n || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        let sum: T = self.assignment.iter().enumerate().map(|(i, &j)| inst.cost(i, j)).sum();
        (sum - self.total_cost).abs() <= T::lit(1e-12) * sum.max(T::one())
    }
}

/// Successive shortest augmenting paths with row/column potentials (Dijkstra over
/// reduced costs, dense O(n^3)). Ties go to the lowest column index.
pub fn solve_assignment<T: Scalar>(inst: &AssignmentInstance<T>) -> MatchingResult<T> {
    let n = inst.n();
    let inf = T::infinity();
    // 1-based with a virtual column 0, as is customary for this formulation.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = inf);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = inst.row(i0 - 1);
            let ui0 = u[i0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    let total_cost = assignment.iter().enumerate().map(|(i, &j)| inst.cost(i, j)).sum();
    MatchingResult { assignment, total_cost, dual_row: u[1..].to_vec(), dual_col: v[1..].to_vec() }
}
