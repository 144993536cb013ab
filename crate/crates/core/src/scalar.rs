//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the algorithms are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `b^p - a^p` for `0 <= a <= b`, without catastrophic cancellation when `a` is close to `b`.
#[inline]
pub fn pow_diff<T: Scalar>(a: T, b: T, p: T) -> T {
    if b <= T::zero() {
        return T::zero();
    }
    if a <= T::zero() {
        return b.powf(p);
    }
    // b^p * (1 - (a/b)^p)
    -b.powf(p) * (p * (a / b).ln()).exp_m1()
}

/// `(x)_+^p` with the convention `0^p = 0` for `p > 0` and `+inf` for `p < 0`.
#[inline]
pub fn pos_pow<T: Scalar>(x: T, p: T) -> T {
    if x > T::zero() {
        x.powf(p)
    } else if p > T::zero() {
        T::zero()
    } else if p == T::zero() {
        T::one()
    } else {
        T::infinity()
    }
}

// 8-point Gauss-Legendre on [-1, 1], symmetric half.
pub(crate) const GL8_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
pub(crate) const GL8_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Composite 8-point Gauss-Legendre rule with `panels` equal panels on `[a, b]`.
pub fn gauss_legendre<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, panels: usize) -> T {
    if !(b > a) || panels == 0 {
        return T::zero();
    }
    let width = (b - a) / T::from_usize_lossy(panels);
    let half = width / T::lit(2.0);
    let mut total = T::zero();
    for k in 0..panels {
        let mid = a + width * T::from_usize_lossy(k) + half;
        let mut acc = T::zero();
        for (&x, &w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
            let dx = half * T::lit(x);
            acc = acc + T::lit(w) * (f(mid - dx) + f(mid + dx));
        }
        total = total + acc * half;
    }
    total
}
