use serde::{Deserialize, Serialize};

use super::operator::{compose_norm, KernelOperator, Player};
use crate::error::{Error, Result};
use crate::fixpoint::{kernel_integral_between, Against, FixedPoint, GridFunction};
use crate::randomness::Params;
use crate::scalar::{gauss_legendre, pos_pow, Scalar};

/// Marginal mass of the diagonal `l - f = z` under the cost/value measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalJ<T> {
    pub continuous: T,
    pub atom: T,
    /// `continuous + atom`; infinite at `z = -lambda/2` when `q < 1`.
    pub total: T,
}

/// `J^z` for the given player, `z` in `[-lambda/2, 3 lambda/2]`.
///
/// Costs are confined to `[0, lambda]`, so for `z > lambda/2` only values
/// `t <= lambda - z` contribute and the atom at `t = lambda/2` is out of reach.
pub fn marginal_j<T: Scalar>(fp: &FixedPoint<T>, player: Player, z: T) -> Result<MarginalJ<T>> {
    marginal_j_of(player.anti_cdf(fp), z)
}

pub fn marginal_j_of<T: Scalar>(f: &GridFunction<T>, z: T) -> Result<MarginalJ<T>> {
    let p = *f.params();
    let half = p.half();
    if !(z >= -half && z <= T::lit(3.0) * half) {
        return Err(Error::OutOfRange { z: z.as_f64(), lo: -half.as_f64(), hi: (T::lit(3.0) * half).as_f64() });
    }
    let lo = (-half).max(-z);
    let hi = half.min(p.lambda - z);
    let continuous = (-kernel_integral_between(f, z, lo, hi, Against::Measure)).max(T::zero());
    let atom = if z <= half { p.q * pos_pow(z + half, p.q - T::one()) * f.right_value() } else { T::zero() };
    Ok(MarginalJ { continuous, atom, total: continuous + atom })
}

/// `max((z + lambda/2)^(2q-1), |z - lambda/2|^(q-1))`, the envelope of the continuous part.
pub fn diagonal_envelope<T: Scalar>(p: &Params<T>, z: T) -> T {
    let left = pos_pow(z + p.half(), T::lit(2.0) * p.q - T::one());
    let right = pos_pow((z - p.half()).abs(), p.q - T::one());
    left.max(right)
}

/// `(z + lambda/2)^(q-1) + |z - lambda/2|^(q-1)`, the envelope of the total marginal.
pub fn marginal_envelope<T: Scalar>(p: &Params<T>, z: T) -> T {
    pos_pow(z + p.half(), p.q - T::one()) + pos_pow((z - p.half()).abs(), p.q - T::one())
}

/// Empirical constants in the diagonal bounds over a sweep of `z` in `(-lambda/2, 3 lambda/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate<T> {
    /// `sup continuous / diagonal_envelope`.
    pub alpha_diag: T,
    /// `sup total / marginal_envelope`.
    pub alpha_total: T,
    pub points: usize,
}

pub fn estimate_alpha<T: Scalar>(f: &GridFunction<T>, points: usize) -> Result<AlphaEstimate<T>> {
    let p = *f.params();
    let mut alpha_diag = T::zero();
    let mut alpha_total = T::zero();
    for k in 1..=points {
        let z = -p.half() + T::lit(2.0) * p.lambda * T::from_usize_lossy(k) / T::from_usize_lossy(points);
        let j = marginal_j_of(f, z)?;
        let env_d = diagonal_envelope(&p, z);
        if env_d.is_finite() && env_d > T::zero() {
            alpha_diag = alpha_diag.max(j.continuous / env_d);
        }
        let env_t = marginal_envelope(&p, z);
        if env_t.is_finite() && env_t > T::zero() {
            alpha_total = alpha_total.max(j.total / env_t);
        }
    }
    Ok(AlphaEstimate { alpha_diag, alpha_total, points })
}

const QUAD_PANELS: usize = 64;
const DECAY_SPAN: f64 = 40.0;

/// `int_{s0}^inf s^(q-1) exp(-m (s - s0)) ds`, via `w = s^q`.
fn power_exp_tail<T: Scalar>(q: T, s0: T, m: T) -> T {
    let upper = s0 + T::lit(DECAY_SPAN) / m;
    let inv_q = T::one() / q;
    gauss_legendre(|w: T| (-m * (w.powf(inv_q) - s0)).exp(), s0.powf(q), upper.powf(q), QUAD_PANELS) / q
}

/// `int_0^d s^(q-1) exp(-m (d - s)) ds`, via `w = s^q` on the part that is not negligible.
fn power_exp_head<T: Scalar>(q: T, d: T, m: T) -> T {
    if d <= T::zero() {
        return T::zero();
    }
    let lower = (d - T::lit(DECAY_SPAN) / m).max(T::zero());
    let inv_q = T::one() / q;
    gauss_legendre(|w: T| (-m * (d - w.powf(inv_q))).exp(), lower.powf(q), d.powf(q), QUAD_PANELS) / q
}

/// `int_z^inf [(x + lambda/2)^(q-1) + |x - lambda/2|^(q-1)] exp(m (z - x)) dx` for `|z| <= lambda/2`.
pub fn envelope_tail<T: Scalar>(p: &Params<T>, z: T, m: T) -> T {
    let half = p.half();
    let d = half - z;
    power_exp_tail(p.q, z + half, m) + power_exp_head(p.q, d, m) + (-m * d).exp() * power_exp_tail(p.q, T::zero(), m)
}

/// `eps_m = alpha / (1 - norm) * sup_z int_z^inf envelope(x) exp(m (z - x)) dx`.
pub fn epsilon_m<T: Scalar>(p: &Params<T>, alpha: T, norm: T, m: T, sweep: usize) -> T {
    let sweep = sweep.max(2);
    let sup = (0..=sweep)
        .map(|k| {
            let z = -p.half() + p.lambda * T::from_usize_lossy(k) / T::from_usize_lossy(sweep);
            envelope_tail(p, z, m)
        })
        .fold(T::zero(), |a, b| a.max(b));
    alpha / (T::one() - norm) * sup
}

/// Rate `m` for the majorant together with the `eps_m` ladder that led to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MChoice<T> {
    pub m: T,
    pub epsilon: T,
    /// `(m, eps_m)` for every rung tried, in order.
    pub ladder: Vec<(T, T)>,
    /// Whether some rung gave `eps_m < 1/2`; the ladder continues past `16/lambda` by doubling.
    pub satisfied: bool,
}

const M_SWEEP: usize = 200;
const M_MAX_DOUBLINGS: u32 = 40;

/// Smallest `m` in `{1, 2, 4, 8, 16, ...} / lambda` with `eps_m < 1/2`.
pub fn choose_m<T: Scalar>(p: &Params<T>, alpha: T, norm: T) -> MChoice<T> {
    let mut ladder = Vec::new();
    for k in 0..M_MAX_DOUBLINGS {
        let m = T::lit((1u64 << k) as f64) / p.lambda;
        let eps = epsilon_m(p, alpha, norm, m, M_SWEEP);
        ladder.push((m, eps));
        if eps < T::lit(0.5) {
            return MChoice { m, epsilon: eps, ladder, satisfied: true };
        }
    }
    let (m, epsilon) = *ladder.last().expect("ladder is non-empty");
    MChoice { m, epsilon, ladder, satisfied: false }
}

/// `K = 2 (2 + lambda^q)`.
pub fn default_k<T: Scalar>(p: &Params<T>) -> T {
    T::lit(2.0) * (T::lit(2.0) + p.lambda.powf(p.q))
}

/// `Psi_t = K exp(m t) sum_k (L_B o L_A)^k (1)`, stored as the scale `K exp(m t)` and
/// the series, since the scale overflows for large `m t`.
#[derive(Debug, Clone)]
pub struct Psi<T> {
    pub t: T,
    pub m: T,
    pub k_const: T,
    /// `K exp(m t)`.
    pub scale: T,
    /// `sum_k (L_B o L_A)^k (1)`, the solution of `x = 1 + L_B(L_A(x))`.
    pub series: GridFunction<T>,
    pub norm: T,
    pub terms: usize,
}

impl<T: Scalar> Psi<T> {
    pub fn at(&self, z: T) -> T {
        self.scale * self.series.eval(z)
    }

    pub fn values(&self) -> Vec<T> {
        self.series.values().iter().map(|&x| self.scale * x).collect()
    }

    /// `sup |(L_B o L_A)(Psi) - (Psi - K e^(mt))| / (K e^(mt))`.
    pub fn identity_residual(&self, outer: &KernelOperator<T>, inner: &KernelOperator<T>) -> T {
        let x = self.series.values();
        let lx = outer.apply_values(&inner.apply_values(x));
        lx.iter().zip(x).fold(T::zero(), |m, (&a, &b)| m.max((a - (b - T::one())).abs()))
    }
}

/// Sums the Neumann series of `L_B o L_A` applied to `1` until the increment is below
/// `increment_tol` in sup norm.
pub fn neumann_psi<T: Scalar>(
    t: T,
    outer: &KernelOperator<T>,
    inner: &KernelOperator<T>,
    k_const: T,
    m: T,
    increment_tol: T,
) -> Result<Psi<T>> {
    let p = *outer.grid().params();
    if !(t >= T::zero() && t <= T::lit(2.0) * p.lambda) {
        return Err(Error::InvalidParams(format!("budget t = {} outside [0, 2 lambda]", t.as_f64())));
    }
    let norm = compose_norm(outer, inner)?;
    if !(norm < T::one()) {
        return Err(Error::Divergent { norm: norm.as_f64() });
    }
    let n = inner.i_values().len();
    // x_{k+1} = 1 + L x_k from x_0 = 1 gives the partial sums
    let mut x = vec![T::one(); n];
    let mut term = x.clone();
    let mut terms = 1;
    let max_terms = 1_000_000;
    loop {
        term = outer.apply_values(&inner.apply_values(&term));
        let size = term.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        x.iter_mut().zip(&term).for_each(|(a, &b)| *a = *a + b);
        terms += 1;
        if size < increment_tol {
            break;
        }
        if terms >= max_terms {
            return Err(Error::NotConverged { iterations: terms, last_gap: size.as_f64() });
        }
    }
    let series = GridFunction::new(outer.grid().clone(), x)?;
    Ok(Psi { t, m, k_const, scale: k_const * (m * t).exp(), series, norm, terms })
}
