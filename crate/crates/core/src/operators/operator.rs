use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::build_density;
use crate::error::{Error, Result};
use crate::fixpoint::{kernel_integral_between, segment_weights, Against, FixedPoint, Grid, GridFunction, Mesh, OffsetTable};
use crate::scalar::{pos_pow, Scalar};

/// Which anti-CDF an operator is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
}

impl Player {
    pub fn anti_cdf<'a, T>(&self, fp: &'a FixedPoint<T>) -> &'a GridFunction<T> {
        match self {
            Player::A => &fp.f_a,
            Player::B => &fp.f_b,
        }
    }

    pub fn other(&self) -> Self {
        match self {
            Player::A => Player::B,
            Player::B => Player::A,
        }
    }
}

/// Row sums of the normalized kernel must be 1 to this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Increment ratio at or above which the continuous mass at `z -> lambda/2` is taken
/// to diverge. Convergent cases approach `2^(1-2q) < 1`.
pub const DIVERGENCE_RATIO: f64 = 0.97;

/// Limit of the continuous diagonal mass and of `I` as `z -> lambda/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightLimit<T> {
    /// Extrapolated continuous mass; infinite when divergent.
    pub continuous_mass: T,
    pub atom: T,
    pub i_value: T,
    pub divergent: bool,
    /// Ratio of the two increments closest to `lambda/2`.
    pub ratio: T,
    /// Continuous masses at `lambda/2 - eps_k`, smallest `eps` first.
    pub eps: [T; 4],
    pub masses: [T; 4],
}

fn continuous_mass_at<T: Scalar>(f: &GridFunction<T>, z: T) -> T {
    let half = f.params().half();
    -kernel_integral_between(f, z, -half, half, Against::Measure)
}

/// Extrapolates the continuous mass `int rho^z` to `z = lambda/2` from a geometric
/// sequence `z_k = lambda/2 - eps_k`, `eps_k = eps_0 2^k`, with `eps_0` a few grid steps.
pub fn right_limit<T: Scalar>(f: &GridFunction<T>) -> RightLimit<T> {
    let p = *f.params();
    let n = T::from_usize_lossy(f.segments());
    let eps0 = (T::lit(8.0) * p.lambda / n).min(p.lambda / T::lit(64.0));
    let mut eps = [T::zero(); 4];
    let mut masses = [T::zero(); 4];
    for k in 0..4 {
        eps[k] = eps0 * T::lit((1u32 << k) as f64);
        masses[k] = continuous_mass_at(f, p.half() - eps[k]);
    }
    let d0 = masses[0] - masses[1];
    let d1 = masses[1] - masses[2];
    let ratio = if d1 > T::zero() { d0 / d1 } else { T::infinity() };
    let atom = p.q * p.lambda.powf(p.q - T::one()) * f.right_value();
    let divergent = !(ratio < T::lit(DIVERGENCE_RATIO));
    let (continuous_mass, i_value) = if divergent {
        (T::infinity(), T::one())
    } else {
        // C(eps) = C* - c eps^(2q-1) + ...
        let growth = T::lit(2.0).powf(T::lit(2.0) * p.q - T::one());
        let limit = masses[0] + d0 / (growth - T::one());
        (limit, limit / (atom + limit))
    };
    RightLimit { continuous_mass, atom, i_value, divergent, ratio, eps, masses }
}

/// `I(z)`: continuous share of the diagonal mass, with its continuous extensions at
/// `z = -lambda/2` (zero) and `z = lambda/2` (see [`right_limit`]).
pub fn i_value<T: Scalar>(f: &GridFunction<T>, z: T) -> Result<T> {
    let half = f.params().half();
    if z == -half {
        return Ok(T::zero());
    }
    if z == half {
        return Ok(right_limit(f).i_value);
    }
    Ok(build_density(f, z)?.continuous_fraction())
}

/// Discretized `L(h)(z) = I(z) * int h(t) kappa^z(t) dt`, `kappa^z` the normalized
/// diagonal density, integrated exactly against the hat basis of the grid.
///
/// Row `i` only touches columns `t_j >= -z_i`, so rows are stored from their first
/// nonzero column on.
#[derive(Debug, Clone)]
pub struct KernelOperator<T> {
    player: Player,
    grid: Arc<Grid<T>>,
    first_col: Vec<usize>,
    row_start: Vec<usize>,
    weights: Vec<T>,
    i_values: Vec<T>,
    continuous_mass: Vec<T>,
    atom: Vec<T>,
    right: RightLimit<T>,
}

struct Row<T> {
    first_col: usize,
    weights: Vec<T>,
    mass: T,
}

fn raw_row<T: Scalar>(f: &GridFunction<T>, neg_slopes: &[T], table: Option<&OffsetTable<T>>, i: usize) -> Row<T> {
    let n = f.segments();
    let q = f.params().q;
    let t = f.nodes();
    let z = t[i];
    // first segment reaching z + t > 0
    let first = match table {
        Some(_) => n - i,
        None => t.partition_point(|&tj| z + tj <= T::zero()).saturating_sub(1),
    };
    let mut w = vec![T::zero(); n + 1 - first];
    let mut mass = T::zero();
    for j in first..n {
        let s = neg_slopes[j];
        if s == T::zero() {
            continue;
        }
        let (w0, w1) = match table {
            Some(tab) => {
                let m = i + j - n;
                (tab.w0[m], tab.w1[m])
            }
            None => {
                let (w0, w1, _) = segment_weights(z, t[j], t[j + 1], q);
                (w0, w1)
            }
        };
        w[j - first] = w[j - first] + s * w0;
        w[j + 1 - first] = w[j + 1 - first] + s * w1;
        mass = mass + s * (w0 + w1);
    }
    Row { first_col: first, weights: w, mass }
}

/// Builds `L_A` (from `F_A`) or `L_B` (from `F_B`) on the grid of the fixed point.
pub fn build_operator<T: Scalar>(player: Player, fp: &FixedPoint<T>) -> Result<KernelOperator<T>> {
    build_operator_from(player, player.anti_cdf(fp))
}

/// Same as [`build_operator`] for an explicit anti-CDF.
pub fn build_operator_from<T: Scalar>(player: Player, f: &GridFunction<T>) -> Result<KernelOperator<T>> {
    let p = *f.params();
    let n = f.segments();
    let half = p.half();
    let neg_slopes: Vec<T> = (0..n).map(|j| (-f.slope(j)).max(T::zero())).collect();
    let table = match (f.grid().mesh(), f.grid().step()) {
        (Mesh::Uniform, Some(h)) => Some(OffsetTable::new(n, h, p.q)),
        _ => None,
    };
    let right = right_limit(f);
    let rows: Vec<(Row<T>, T, T)> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let z = f.nodes()[i];
            let atom = p.q * pos_pow(z + half, p.q - T::one()) * f.right_value();
            if i == 0 {
                // no continuous mass; I = 0 makes the row irrelevant
                let row = Row { first_col: n, weights: vec![T::one()], mass: T::zero() };
                return (row, T::zero(), atom);
            }
            if i == n && right.divergent {
                // all continuous mass concentrates at t = -lambda/2
                let mut w = vec![T::zero(); n + 1];
                w[0] = T::one();
                return (Row { first_col: 0, weights: w, mass: T::infinity() }, T::one(), atom);
            }
            let mut row = raw_row(f, &neg_slopes, table.as_ref(), i);
            let i_val = if i == n {
                right.i_value
            } else if row.mass > T::zero() {
                row.mass / (atom + row.mass)
            } else {
                T::zero()
            };
            if row.mass > T::zero() {
                let inv = T::one() / row.mass;
                row.weights.iter_mut().for_each(|w| *w = *w * inv);
            } else {
                row.weights.iter_mut().for_each(|w| *w = T::zero());
                *row.weights.last_mut().expect("row has at least one column") = T::one();
            }
            (row, i_val, atom)
        })
        .collect();

    let mut op = KernelOperator {
        player,
        grid: f.grid().clone(),
        first_col: Vec::with_capacity(n + 1),
        row_start: Vec::with_capacity(n + 2),
        weights: Vec::new(),
        i_values: Vec::with_capacity(n + 1),
        continuous_mass: Vec::with_capacity(n + 1),
        atom: Vec::with_capacity(n + 1),
        right,
    };
    op.row_start.push(0);
    for (i, (row, i_val, atom)) in rows.into_iter().enumerate() {
        let sum: T = row.weights.iter().copied().sum();
        let deviation = (sum - T::one()).abs();
        if !(deviation <= T::lit(ROW_SUM_TOL)) || row.weights.iter().any(|&w| w < T::zero()) {
            return Err(Error::RowNormalization { row: i, deviation: deviation.as_f64() });
        }
        op.first_col.push(row.first_col);
        op.weights.extend(row.weights);
        op.row_start.push(op.weights.len());
        op.i_values.push(i_val);
        op.continuous_mass.push(if i == n { op.right.continuous_mass } else { row.mass });
        op.atom.push(atom);
    }
    Ok(op)
}

impl<T: Scalar> KernelOperator<T> {
    pub fn player(&self) -> Player {
        self.player
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    /// `I` at the grid nodes, including the continuous extensions at both ends.
    pub fn i_values(&self) -> &[T] {
        &self.i_values
    }

    /// Continuous diagonal mass per node (infinite at `lambda/2` when divergent).
    pub fn continuous_mass(&self) -> &[T] {
        &self.continuous_mass
    }

    pub fn atom(&self) -> &[T] {
        &self.atom
    }

    pub fn right_limit(&self) -> &RightLimit<T> {
        &self.right
    }

    /// Row `i` of the normalized kernel: first column and the weights from there on.
    pub fn row(&self, i: usize) -> (usize, &[T]) {
        (self.first_col[i], &self.weights[self.row_start[i]..self.row_start[i + 1]])
    }

    fn check_grid(&self, h: &GridFunction<T>) -> Result<()> {
        if Arc::ptr_eq(&self.grid, h.grid()) || self.grid.same_as(h.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch("operator and function live on different grids".into()))
        }
    }

    /// `S(h)`: the stochastic averaging part alone.
    pub fn apply_stochastic_values(&self, h: &[T]) -> Vec<T> {
        (0..self.i_values.len())
            .map(|i| {
                let (c, w) = self.row(i);
                w.iter().zip(&h[c..]).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }

    /// `L(h) = D(S(h))` on raw node values.
    pub fn apply_values(&self, h: &[T]) -> Vec<T> {
        let mut out = self.apply_stochastic_values(h);
        out.iter_mut().zip(&self.i_values).for_each(|(o, &i)| *o = *o * i);
        out
    }

    pub fn apply_stochastic(&self, h: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_grid(h)?;
        GridFunction::new(self.grid.clone(), self.apply_stochastic_values(h.values()))
    }
}

/// `L(h)` on the operator's grid.
pub fn apply_operator<T: Scalar>(op: &KernelOperator<T>, h: &GridFunction<T>) -> Result<GridFunction<T>> {
    op.check_grid(h)?;
    GridFunction::new(op.grid.clone(), op.apply_values(h.values()))
}

/// `sup_z (L_B o L_A)(1)(z)`, the sup-norm of the composition of two positive operators.
pub fn compose_norm<T: Scalar>(outer: &KernelOperator<T>, inner: &KernelOperator<T>) -> Result<T> {
    if !outer.grid.same_as(&inner.grid) {
        return Err(Error::GridMismatch("operators live on different grids".into()));
    }
    let ones = vec![T::one(); inner.i_values.len()];
    let once = inner.apply_values(&ones);
    Ok(outer.apply_values(&once).into_iter().fold(T::zero(), |m, v| m.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::{iterate_fixpoint, FixpointConfig};
    use crate::randomness::Params;

    fn fixed_point(q: f64, lambda: f64, n: usize) -> FixedPoint<f64> {
        iterate_fixpoint(Params::new(q, lambda).unwrap(), &FixpointConfig::with_segments(n)).unwrap()
    }

    #[test]
    fn rows_are_stochastic_and_i_is_a_fraction() {
        let fp = fixed_point(0.5, 2.0, 128);
        let op = build_operator(Player::A, &fp).unwrap();
        for i in 0..=128 {
            let (_, w) = op.row(i);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
        assert_eq!(op.i_values()[0], 0.0);
        assert!(op.i_values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(op.i_values()[1..128].iter().all(|&v| v < 1.0));
    }

    #[test]
    fn constant_one_maps_to_i() {
        let fp = fixed_point(0.7, 1.0, 64);
        let op = build_operator(Player::B, &fp).unwrap();
        let one = GridFunction::constant(fp.grid().clone(), 1.0);
        let out = apply_operator(&op, &one).unwrap();
        for (a, b) in out.values().iter().zip(op.i_values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn general_mesh_path_matches_offset_table() {
        let fp = fixed_point(0.4, 1.5, 64);
        let fast = build_operator(Player::A, &fp).unwrap();
        // same nodes, but forced through the per-segment path
        let nodes = fp.grid().nodes().to_vec();
        let mut perturbed = nodes.clone();
        perturbed[20] += 1e-9;
        let grid = Arc::new(Grid::from_nodes(*fp.params(), perturbed).unwrap());
        assert_ne!(grid.mesh(), Mesh::Uniform);
        let f = GridFunction::new(grid, fp.f_a.values().to_vec()).unwrap();
        let slow = build_operator_from(Player::A, &f).unwrap();
        // the row through the moved node sees the kernel pole shifted, skip it
        for i in (1..64).filter(|&i| i != 44) {
            assert!((fast.i_values()[i] - slow.i_values()[i]).abs() < 1e-6, "row {i}");
        }
    }

    #[test]
    fn divergent_right_end_for_small_q() {
        let fp = fixed_point(0.3, 1.0, 512);
        let r = right_limit(&fp.f_a);
        assert!(r.divergent, "{r:?}");
        assert_eq!(r.i_value, 1.0);
        let fp = fixed_point(0.8, 1.0, 512);
        let r = right_limit(&fp.f_a);
        assert!(!r.divergent, "{r:?}");
        assert!(r.i_value < 1.0 && r.i_value > 0.0);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = fixed_point(0.5, 1.0, 32);
        let b = fixed_point(0.5, 1.0, 64);
        let op = build_operator(Player::A, &a).unwrap();
        assert!(matches!(apply_operator(&op, &b.f_a), Err(Error::GridMismatch(_))));
        let op_b = build_operator(Player::B, &b).unwrap();
        assert!(compose_norm(&op_b, &op).is_err());
    }

    #[test]
    fn i_value_endpoints() {
        let fp = fixed_point(0.5, 2.0, 64);
        assert_eq!(i_value(&fp.f_a, -1.0).unwrap(), 0.0);
        let mid = i_value(&fp.f_a, 0.0).unwrap();
        assert!(mid > 0.0 && mid < 1.0);
        assert!(i_value(&fp.f_a, 1.5).is_err());
    }
}
