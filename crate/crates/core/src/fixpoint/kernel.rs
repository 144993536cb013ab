//! Integrals of the singular kernel `q (z + t)_+^(q-1)` against piecewise-linear
//! functions and their Stieltjes measures, evaluated segment by segment in closed form.

use crate::error::{Error, Result};
use crate::scalar::{pos_pow, pow_diff, Scalar, GL8_NODES, GL8_WEIGHTS};

use super::grid::{GridFunction, Mesh};

/// What the kernel is integrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Against {
    /// `int q (z+t)_+^(q-1) G(t) dt`
    Function,
    /// `int q (z+t)_+^(q-1) dG(t)`, where `dG` carries an extra point mass `-G(lambda/2)`
    /// at `lambda/2`.
    Measure,
}

/// `int_lo^(lo+d) q s^(q-1) (s - lo) ds` for `lo >= 0`, `d >= 0`.
fn first_moment<T: Scalar>(lo: T, d: T, q: T) -> T {
    if d <= T::zero() {
        return T::zero();
    }
    if lo > T::zero() && d < T::lit(0.25) * lo {
        // smooth integrand: the closed form would cancel badly here
        let half = d / T::lit(2.0);
        let mut acc = T::zero();
        for (&x, &w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
            for sign in [-1.0, 1.0] {
                let u = half + half * T::lit(sign * x);
                acc = acc + T::lit(w) * (lo + u).powf(q - T::one()) * u;
            }
        }
        return q * half * acc;
    }
    let s1 = lo + d;
    s1.powf(q) * d - pow_diff(lo, s1, q + T::one()) / (q + T::one())
}

/// For `[a, b]` and offset `z`: `(P, M)` with `P = int_a^b q (z+t)_+^(q-1) dt` and
/// `M = int_a^b q (z+t)_+^(q-1) (t - a) dt`.
#[inline]
pub(crate) fn partial_moments<T: Scalar>(z: T, a: T, b: T, q: T) -> (T, T) {
    // z + t that is zero up to rounding is snapped, since s^q is steep at 0
    let snap = |s: T, t: T| if s.abs() <= T::lit(16.0) * T::epsilon() * (z.abs() + t.abs()) { T::zero() } else { s };
    let sa = snap(z + a, a);
    let sb = snap(z + b, b);
    if sb <= T::zero() || b <= a {
        return (T::zero(), T::zero());
    }
    let lo = sa.max(T::zero());
    let p = pow_diff(lo, sb, q);
    let m = first_moment(lo, sb - lo, q) + (lo - sa) * p;
    (p, m)
}

/// Kernel integrals against the two hat functions of segment `[t0, t1]`:
/// `(w0, w1, w0 + w1)`, where `w0` weights the left node.
#[inline]
pub(crate) fn segment_weights<T: Scalar>(z: T, t0: T, t1: T, q: T) -> (T, T, T) {
    let (p, m) = partial_moments(z, t0, t1, q);
    let w1 = m / (t1 - t0);
    ((p - w1).max(T::zero()), w1, p)
}

/// Kernel weights indexed by offset on a uniform grid: segment `m` is `s in [m h, (m+1) h]`.
/// For grid point `z_i` and segment `j`, the offset is `m = i + j - N`.
#[derive(Debug, Clone)]
pub(crate) struct OffsetTable<T> {
    pub w0: Vec<T>,
    pub w1: Vec<T>,
    pub mass: Vec<T>,
}

impl<T: Scalar> OffsetTable<T> {
    pub fn new(segments: usize, step: T, q: T) -> Self {
        let mut w0 = Vec::with_capacity(segments);
        let mut w1 = Vec::with_capacity(segments);
        let mut mass = Vec::with_capacity(segments);
        for m in 0..segments {
            let a = T::from_usize_lossy(m) * step;
            let (x0, x1, p) = segment_weights(T::zero(), a, a + step, q);
            w0.push(x0);
            w1.push(x1);
            mass.push(p);
        }
        Self { w0, w1, mass }
    }
}

fn check_range<T: Scalar>(g: &GridFunction<T>, z: T) -> Result<()> {
    let half = g.params().half();
    let lo = -half;
    let hi = T::lit(3.0) * half;
    if !(z >= lo && z <= hi) {
        return Err(Error::OutOfRange { z: z.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
    }
    Ok(())
}

/// Contribution of the point mass `-G(lambda/2)` at `t = lambda/2`.
fn atom_term<T: Scalar>(g: &GridFunction<T>, z: T) -> T {
    let p = g.params();
    let mass = g.right_value();
    if mass == T::zero() {
        return T::zero();
    }
    -p.q * pos_pow(z + p.half(), p.q - T::one()) * mass
}

/// `int_{-lambda/2}^{lambda/2} q (z+t)_+^(q-1) G(t) dt` or the Stieltjes version against `dG`,
/// exact for the piecewise-linear `G`. Valid for `z` in `[-lambda/2, 3 lambda/2]`.
pub fn kernel_integral<T: Scalar>(g: &GridFunction<T>, z: T, mode: Against) -> Result<T> {
    check_range(g, z)?;
    let half = g.params().half();
    let mut total = kernel_integral_between(g, z, -half, half, mode);
    if mode == Against::Measure {
        total = total + atom_term(g, z);
    }
    Ok(total)
}

/// Continuous part of the kernel integral restricted to `t in [a, b]` (no atom).
pub(crate) fn kernel_integral_between<T: Scalar>(g: &GridFunction<T>, z: T, a: T, b: T, mode: Against) -> T {
    let q = g.params().q;
    let t = g.nodes();
    let v = g.values();
    let mut total = T::zero();
    for j in 0..g.segments() {
        let lo = t[j].max(a);
        let hi = t[j + 1].min(b);
        if hi <= lo || z + hi <= T::zero() {
            continue;
        }
        let slope = g.slope(j);
        let (p, m) = partial_moments(z, lo, hi, q);
        total = total
            + match mode {
                Against::Function => {
                    let g_lo = v[j] + slope * (lo - t[j]);
                    g_lo * p + slope * m
                }
                Against::Measure => slope * p,
            };
    }
    total
}

/// Kernel integral against `G` at every grid node.
pub(crate) fn kernel_on_grid<T: Scalar>(g: &GridFunction<T>) -> Vec<T> {
    let n = g.segments();
    let v = g.values();
    match (g.grid().mesh(), g.grid().step()) {
        (Mesh::Uniform, Some(h)) => {
            let table = OffsetTable::new(n, h, g.params().q);
            (0..=n)
                .map(|i| {
                    let base = n - i;
                    (0..i).map(|m| v[base + m] * table.w0[m] + v[base + m + 1] * table.w1[m]).sum()
                })
                .collect()
        }
        _ => g
            .nodes()
            .iter()
            .map(|&z| kernel_integral_between(g, z, -g.params().half(), g.params().half(), Against::Function))
            .collect(),
    }
}

/// Continuous part of the Stieltjes integral (no atom) at every grid node.
pub(crate) fn measure_on_grid<T: Scalar>(g: &GridFunction<T>) -> Vec<T> {
    let n = g.segments();
    match (g.grid().mesh(), g.grid().step()) {
        (Mesh::Uniform, Some(h)) => {
            let table = OffsetTable::new(n, h, g.params().q);
            let slopes: Vec<T> = (0..n).map(|j| g.slope(j)).collect();
            (0..=n)
                .map(|i| {
                    let base = n - i;
                    (0..i).map(|m| slopes[base + m] * table.mass[m]).sum()
                })
                .collect()
        }
        _ => g
            .nodes()
            .iter()
            .map(|&z| kernel_integral_between(g, z, -g.params().half(), g.params().half(), Against::Measure))
            .collect(),
    }
}

/// `V(G)(z) = exp(-int q (z+t)_+^(q-1) G(t) dt)` at a single point.
pub fn v_at<T: Scalar>(g: &GridFunction<T>, z: T) -> Result<T> {
    Ok((-kernel_integral(g, z, Against::Function)?).exp())
}

/// `V(G)` sampled at the grid nodes.
pub fn apply_v<T: Scalar>(g: &GridFunction<T>) -> GridFunction<T> {
    let values = kernel_on_grid(g).into_iter().map(|k| (-k).exp()).collect();
    GridFunction::new(g.grid().clone(), values).expect("same grid")
}
