use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fixpoint::{partial_moments, Grid, GridFunction};
use crate::scalar::{pos_pow, pow_diff, Scalar};

/// Law of the child value along the diagonal `l - f = z` of the cost/value square.
///
/// The continuous part has density `q (z+t)_+^(q-1) (-F'(t))`, with `F'` the
/// segment-wise slope of the piecewise-linear anti-CDF `F`. The atom sits at
/// `t = lambda/2` with mass `q (z + lambda/2)^(q-1) F(lambda/2)`.
#[derive(Debug, Clone)]
pub struct DiagonalDensity<T> {
    pub z: T,
    grid: Arc<Grid<T>>,
    /// `-F'` on each segment, clamped at zero.
    neg_slopes: Vec<T>,
    /// Cumulative continuous mass at the right end of each segment.
    cumulative: Vec<T>,
    pub continuous_mass: T,
    pub atom: T,
}

/// Builds the diagonal law for offset `z` in `[-lambda/2, lambda/2]`.
pub fn build_density<T: Scalar>(f: &GridFunction<T>, z: T) -> Result<DiagonalDensity<T>> {
    let p = *f.params();
    let half = p.half();
    if !(z >= -half && z <= half) {
        return Err(Error::OutOfRange { z: z.as_f64(), lo: -half.as_f64(), hi: half.as_f64() });
    }
    let t = f.nodes();
    let n = f.segments();
    let mut neg_slopes = Vec::with_capacity(n);
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = T::zero();
    for j in 0..n {
        let s = (-f.slope(j)).max(T::zero());
        neg_slopes.push(s);
        if s > T::zero() && z + t[j + 1] > T::zero() {
            let (mass, _) = partial_moments(z, t[j], t[j + 1], p.q);
            acc = acc + s * mass;
        }
        cumulative.push(acc);
    }
    let atom = p.q * pos_pow(z + half, p.q - T::one()) * f.right_value();
    Ok(DiagonalDensity { z, grid: f.grid().clone(), neg_slopes, cumulative, continuous_mass: acc, atom })
}

impl<T: Scalar> DiagonalDensity<T> {
    /// Continuous density at `t`; zero outside `[max(-lambda/2, -z), lambda/2]`.
    pub fn density_at(&self, t: T) -> T {
        let nodes = self.grid.nodes();
        let n = self.neg_slopes.len();
        if t < nodes[0] || t > nodes[n] || self.z + t <= T::zero() {
            return T::zero();
        }
        let q = self.grid.params().q;
        q * (self.z + t).powf(q - T::one()) * self.neg_slopes[self.grid.locate(t)]
    }

    pub fn total_mass(&self) -> T {
        self.continuous_mass + self.atom
    }

    /// Probability that the diagonal point is drawn from the continuous part.
    pub fn continuous_fraction(&self) -> T {
        if self.atom.is_infinite() {
            return T::zero();
        }
        let total = self.total_mass();
        if total > T::zero() {
            self.continuous_mass / total
        } else {
            T::zero()
        }
    }

    /// Inverse-CDF draw from the normalized continuous part: `u_segment` picks the
    /// segment by mass, `u_within` the position inside it. `None` if there is no mass.
    pub fn sample_continuous(&self, u_segment: T, u_within: T) -> Option<T> {
        if !(self.continuous_mass > T::zero()) {
            return None;
        }
        let target = u_segment * self.continuous_mass;
        let n = self.cumulative.len();
        let j = self.cumulative.partition_point(|&c| c < target).min(n - 1);
        let nodes = self.grid.nodes();
        let q = self.grid.params().q;
        // within the segment the density is proportional to s^(q-1), s = z + t
        let s0 = (self.z + nodes[j]).max(T::zero());
        let s1 = self.z + nodes[j + 1];
        let w = s0.powf(q) + u_within * pow_diff(s0, s1, q);
        let t = w.powf(T::one() / q) - self.z;
        Some(t.max(nodes[j].max(-self.z)).min(nodes[j + 1]))
    }
}
