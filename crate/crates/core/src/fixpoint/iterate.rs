use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction, Mesh};
use super::kernel::apply_v;
use crate::error::{Error, Result};
use crate::randomness::Params;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixpointConfig {
    pub segments: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mesh: Mesh,
}

impl Default for FixpointConfig {
    fn default() -> Self {
        Self { segments: 2048, tol: 1e-8, max_iter: 500, mesh: Mesh::Uniform }
    }
}

impl FixpointConfig {
    pub fn with_segments(segments: usize) -> Self {
        Self { segments, ..Self::default() }
    }
}

/// Iterates `F_0 = 0`, `F_{k+1} = V(F_k)`.
pub struct VIterates<T> {
    next: Option<GridFunction<T>>,
}

impl<T: Scalar> VIterates<T> {
    pub fn new(grid: Arc<Grid<T>>) -> Self {
        Self { next: Some(GridFunction::constant(grid, T::zero())) }
    }
}

impl<T: Scalar> Iterator for VIterates<T> {
    type Item = GridFunction<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.next.take()?;
        self.next = Some(apply_v(&cur));
        Some(cur)
    }
}

/// Converged anti-CDFs of `f_A(root)` and `f_B(root)`.
#[derive(Debug, Clone)]
pub struct FixedPoint<T> {
    pub f_a: GridFunction<T>,
    pub f_b: GridFunction<T>,
    /// `gaps[k - 2] = sup |F_k - F_{k-2}|` for `k >= 2`.
    pub gaps: Vec<T>,
    pub iterations: usize,
    /// `max(sup |V(F_B) - F_A|, sup |V(F_A) - F_B|)`.
    pub residual: T,
    /// Largest violation seen of `F_{2k} <= F_{2k+2} <= F_{2k+3} <= F_{2k+1}`.
    pub sandwich_violation: T,
}

impl<T: Scalar> FixedPoint<T> {
    pub fn params(&self) -> &Params<T> {
        self.f_a.params()
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.f_a.grid()
    }
}

/// Runs the even/odd iteration until both subsequences move less than `tol` in sup norm.
pub fn iterate_fixpoint<T: Scalar>(params: Params<T>, config: &FixpointConfig) -> Result<FixedPoint<T>> {
    if !(config.tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {}", config.tol)));
    }
    let grid = Arc::new(Grid::new(params, config.segments, config.mesh)?);
    iterate_on_grid(grid, T::lit(config.tol), config.max_iter)
}

pub fn iterate_on_grid<T: Scalar>(grid: Arc<Grid<T>>, tol: T, max_iter: usize) -> Result<FixedPoint<T>> {
    let mut older = GridFunction::constant(grid.clone(), T::zero()); // F_{k-2}
    let mut old = apply_v(&older); // F_{k-1}
    let mut gaps = Vec::new();
    let mut violation = T::zero();
    for k in 2..=max_iter.max(2) {
        let new = apply_v(&old);
        let gap = new.sup_distance(&older)?;
        // Even iterates increase, odd iterates decrease, evens stay below odds.
        let even_k = k % 2 == 0;
        for ((&n, &o2), &o1) in new.values().iter().zip(older.values()).zip(old.values()) {
            let mono = if even_k { o2 - n } else { n - o2 };
            let order = if even_k { n - o1 } else { o1 - n };
            violation = violation.max(mono).max(order);
        }
        gaps.push(gap);
        let converged = gaps.len() >= 2 && gaps[gaps.len() - 1] < tol && gaps[gaps.len() - 2] < tol;
        older = old;
        old = new;
        if converged {
            let (f_a, f_b) = if k % 2 == 0 { (old, older) } else { (older, old) };
            let residual = apply_v(&f_b).sup_distance(&f_a)?.max(apply_v(&f_a).sup_distance(&f_b)?);
            return Ok(FixedPoint { f_a, f_b, gaps, iterations: k, residual, sandwich_violation: violation });
        }
    }
    Err(Error::NotConverged { iterations: max_iter, last_gap: gaps.last().map_or(f64::NAN, |g| g.as_f64()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_iterates() {
        let p = Params::new(0.5, 2.0).unwrap();
        let grid = Arc::new(Grid::uniform(p, 32).unwrap());
        let it: Vec<_> = VIterates::new(grid.clone()).take(3).collect();
        assert!(it[0].values().iter().all(|&v| v == 0.0));
        assert!(it[1].values().iter().all(|&v| v == 1.0));
        let v1 = apply_v(&GridFunction::constant(grid, 1.0));
        assert_eq!(it[2].values(), v1.values());
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let p = Params::new(0.5, 2.0).unwrap();
        let cfg = FixpointConfig { tol: 0.0, ..FixpointConfig::with_segments(16) };
        assert!(iterate_fixpoint(p, &cfg).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let p = Params::new(0.5, 2.0).unwrap();
        let cfg = FixpointConfig { max_iter: 3, ..FixpointConfig::with_segments(16) };
        assert!(matches!(iterate_fixpoint(p, &cfg), Err(Error::NotConverged { iterations: 3, .. })));
    }

    #[test]
    fn small_grid_converges_with_sandwich() {
        let p = Params::new(0.5, 2.0).unwrap();
        let fp = iterate_fixpoint(p, &FixpointConfig::with_segments(64)).unwrap();
        assert!(fp.sandwich_violation <= 1e-15);
        assert!(fp.residual < 2e-8);
        assert!(fp.f_a.values().iter().zip(fp.f_b.values()).all(|(a, b)| a <= b));
        assert!(fp.f_a.is_anti_cdf(0.0) && fp.f_b.is_anti_cdf(0.0));
    }
}
