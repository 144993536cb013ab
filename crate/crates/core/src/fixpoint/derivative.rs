use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};
use super::kernel::{kernel_integral, measure_on_grid, Against};
use crate::error::Result;
use crate::scalar::{pos_pow, Scalar};

/// `d/dz V(G)(z) = V(G)(z) * int q (z+t)_+^(q-1) dG(t)` at a single point.
pub fn derivative_at<T: Scalar>(g: &GridFunction<T>, z: T) -> Result<T> {
    let k = kernel_integral(g, z, Against::Function)?;
    let m = kernel_integral(g, z, Against::Measure)?;
    Ok((-k).exp() * m)
}

/// Analytic derivative of `V(G)` at the interior grid nodes.
///
/// At `z = -lambda/2` the derivative behaves like `-c (z + lambda/2)^(q-1)`, which is
/// infinite for `q < 1`; only the coefficient and exponent are kept there. Near
/// `lambda/2` the local power-law exponent is estimated from the interior values.
#[derive(Debug, Clone)]
pub struct DerivativeProfile<T> {
    grid: Arc<Grid<T>>,
    interior: Vec<T>,
    pub left_coefficient: T,
    pub left_exponent: T,
    pub right_exponent: T,
}

impl<T: Scalar> DerivativeProfile<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    /// Values at nodes `1..N`.
    pub fn interior(&self) -> &[T] {
        &self.interior
    }

    pub fn interior_nodes(&self) -> &[T] {
        let t = self.grid.nodes();
        &t[1..t.len() - 1]
    }

    /// `sup_z (-F'(z)) / (lambda/2 - |z|)^(q-1)` over interior nodes.
    pub fn bound_ratio(&self) -> T {
        let p = self.grid.params();
        self.interior_nodes()
            .iter()
            .zip(&self.interior)
            .map(|(&z, &d)| -d / pos_pow(p.half() - z.abs(), p.q - T::one()))
            .fold(T::zero(), |m, r| m.max(r))
    }
}

pub fn derivative_of_v<T: Scalar>(g: &GridFunction<T>, vg: &GridFunction<T>) -> Result<DerivativeProfile<T>> {
    g.ensure_same_grid(vg)?;
    let p = *g.params();
    let cont = measure_on_grid(g);
    let nodes = g.nodes();
    let n = g.segments();
    let mass = g.right_value();
    let interior: Vec<T> = (1..n)
        .map(|i| {
            let atom = p.q * pos_pow(nodes[i] + p.half(), p.q - T::one()) * mass;
            vg.values()[i] * (cont[i] - atom)
        })
        .collect();
    let right_exponent = if n >= 32 {
        let (i1, i2) = (n - 4, n - 16);
        let (d1, d2) = (p.half() - nodes[i1], p.half() - nodes[i2]);
        let (a, b) = (-interior[i1 - 1], -interior[i2 - 1]);
        if a > T::zero() && b > T::zero() {
            (a / b).ln() / (d1 / d2).ln()
        } else {
            T::nan()
        }
    } else {
        T::nan()
    };
    Ok(DerivativeProfile {
        grid: g.grid().clone(),
        interior,
        left_coefficient: p.q * mass * vg.values()[0],
        left_exponent: p.q - T::one(),
        right_exponent,
    })
}

/// Empirical constant in `-F'(z) <= a (lambda/2 - |z|)^(q-1)`, checked for stability
/// between a grid and its refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub a_hat: f64,
    pub a_hat_refined: f64,
    pub relative_change: f64,
    pub pass: bool,
}

/// `pass` when both ratios are finite and differ by less than 5% relative.
pub fn verify_derivative_bound<T: Scalar>(coarse: &DerivativeProfile<T>, refined: &DerivativeProfile<T>) -> DerivativeBound {
    let a = coarse.bound_ratio().as_f64();
    let b = refined.bound_ratio().as_f64();
    let relative_change = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    DerivativeBound {
        a_hat: a,
        a_hat_refined: b,
        relative_change,
        pass: a.is_finite() && b.is_finite() && relative_change < 0.05,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::kernel::apply_v;
    use crate::randomness::Params;

    #[test]
    fn zero_function_has_zero_derivative() {
        let p = Params::new(0.4, 2.0).unwrap();
        let g = GridFunction::constant(Arc::new(Grid::uniform(p, 32).unwrap()), 0.0);
        let d = derivative_of_v(&g, &apply_v(&g)).unwrap();
        assert!(d.interior().iter().all(|&x| x == 0.0));
        assert_eq!(d.left_coefficient, 0.0);
        assert_eq!(derivative_at(&g, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn unit_exponent_unit_function() {
        // V(1)(z) = exp(-(z + lambda/2)), derivative -exp(-(z + lambda/2))
        let p = Params::new(1.0, 2.0).unwrap();
        let g = GridFunction::constant(Arc::new(Grid::uniform(p, 16).unwrap()), 1.0);
        let vg = apply_v(&g);
        for (&z, &v) in g.nodes().iter().zip(vg.values()) {
            assert!((v - (-(z + 1.0_f64)).exp()).abs() < 1e-14);
        }
        let d = derivative_of_v(&g, &vg).unwrap();
        for (&z, &dv) in d.interior_nodes().iter().zip(d.interior()) {
            assert!((dv + (-(z + 1.0_f64)).exp()).abs() < 1e-14);
        }
        assert!((derivative_at(&g, -1.0).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn left_endpoint_derivative_is_infinite_for_small_q() {
        let p = Params::new(0.5, 2.0).unwrap();
        let g = GridFunction::constant(Arc::new(Grid::uniform(p, 16).unwrap()), 0.5);
        assert_eq!(derivative_at(&g, -1.0).unwrap(), f64::NEG_INFINITY);
        let d = derivative_of_v(&g, &apply_v(&g)).unwrap();
        assert!((d.left_coefficient - 0.25).abs() < 1e-15);
        assert_eq!(d.left_exponent, -0.5);
    }
}
