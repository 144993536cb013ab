//! Reproducible sampling of Weibull edge costs and of the offspring process
//! of the Poisson-weighted Galton-Watson tree.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Model parameters: the pseudo-dimension `q` and the game penalty scale `lambda`
/// (quitting costs `lambda / 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub q: T,
    pub lambda: T,
}

impl<T: Scalar> Params<T> {
    pub fn new(q: T, lambda: T) -> Result<Self> {
        if !(q > T::zero() && q <= T::one()) {
            return Err(Error::InvalidParams(format!("q must lie in (0, 1], got {q}")));
        }
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda must be positive and finite, got {lambda}")));
        }
        Ok(Self { q, lambda })
    }

    /// The quit penalty `lambda / 2`, which is also the half-width of the value interval.
    #[inline]
    pub fn half(&self) -> T {
        self.lambda / T::lit(2.0)
    }

    /// Expected number of offspring, `lambda^q`.
    #[inline]
    pub fn mean_offspring(&self) -> T {
        self.lambda.powf(self.q)
    }
}

/// Deterministic stream identifier. Two specs with equal fields produce identical streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// Generator type handed out by [`derive_stream`].
pub type Stream = ChaCha8Rng;

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// Spec for the `k`-th sub-task of this stream. Pure function of `(self, k)`.
    pub fn child(&self, k: u64) -> Self {
        let mixed = splitmix64(splitmix64(self.stream_index ^ 0xA076_1D64_78BD_642F).wrapping_add(k));
        Self { master_seed: self.master_seed, stream_index: mixed }
    }
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Counter-based generator: the ChaCha key comes from the master seed and the
/// stream index selects the ChaCha stream, so streams never overlap.
pub fn derive_stream(seed: SeedSpec) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(seed.stream_index);
    rng
}

/// Uniform draw on the open interval (0, 1).
#[inline]
pub fn open_uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    loop {
        let u: f64 = rng.sample(Open01);
        let u = T::lit(u);
        if u > T::zero() && u < T::one() {
            return u;
        }
    }
}

/// Inverse CDF of Weibull(1, q). `None` when the result is not finite (`u` underflowed to 0).
#[inline]
pub fn weibull_from_uniform<T: Scalar>(u: T, q: T) -> Option<T> {
    let x = (-u.ln()).powf(q.recip());
    x.is_finite().then_some(x)
}

/// Weibull(1, q) draw by inversion, `x = (-ln U)^(1/q)`. Non-finite draws are resampled.
pub fn sample_weibull<T: Scalar, R: Rng + ?Sized>(q: T, rng: &mut R) -> T {
    debug_assert!(q > T::zero());
    loop {
        if let Some(x) = weibull_from_uniform(open_uniform(rng), q) {
            return x;
        }
    }
}

/// Arrival times of the Poisson process on `[0, lambda]` with intensity `q t^(q-1)`,
/// sorted ascending.
///
/// The count is Poisson(`lambda^q`); given the count, `t^q` is uniform on `[0, lambda^q]`.
pub fn sample_poisson_arrivals<T: Scalar, R: Rng + ?Sized>(params: &Params<T>, rng: &mut R) -> Vec<T> {
    let mass = params.mean_offspring();
    let count = sample_poisson_count(mass.as_f64(), rng);
    let inv = params.q.recip();
    let mut times: Vec<T> = (0..count)
        .map(|_| {
            let u: T = open_uniform(rng);
            let t = (u * mass).powf(inv);
            t.min(params.lambda)
        })
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).expect("arrival times are finite"));
    times
}

/// Poisson count with mean `mean >= 0`.
pub fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(Params::new(0.5, 1.0).is_ok());
        assert!(Params::new(1.0, 8.0).is_ok());
        assert!(Params::new(0.0, 1.0).is_err());
        assert!(Params::new(1.5, 1.0).is_err());
        assert!(Params::new(0.5, 0.0).is_err());
        assert!(Params::new(0.5, f64::INFINITY).is_err());
        assert!(Params::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn inversion_at_e_inverse_is_one() {
        let u = (-1.0_f64).exp();
        assert!((weibull_from_uniform(u, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((weibull_from_uniform(u, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((weibull_from_uniform(u, 0.2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn underflowed_uniform_is_rejected() {
        assert_eq!(weibull_from_uniform(0.0_f64, 0.5), None);
        assert_eq!(weibull_from_uniform(1.0_f64, 0.5), Some(0.0));
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = (0..16).map({
            let mut r = derive_stream(SeedSpec::new(7, 0));
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..16).map({
            let mut r = derive_stream(SeedSpec::new(7, 0));
            move |_| r.random()
        }).collect();
        let c: Vec<u64> = (0..16).map({
            let mut r = derive_stream(SeedSpec::new(7, 1));
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(SeedSpec::new(7, 0).child(0), SeedSpec::new(7, 0).child(1));
        assert_eq!(SeedSpec::new(7, 3).child(5), SeedSpec::new(7, 3).child(5));
    }

    #[test]
    fn uniform_mean() {
        let mut rng = derive_stream(SeedSpec::new(11, 4));
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| open_uniform::<f64, _>(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn arrivals_sorted_and_in_range() {
        let p = Params::new(0.3, 2.5).unwrap();
        let mut rng = derive_stream(SeedSpec::new(1, 2));
        for _ in 0..1000 {
            let t = sample_poisson_arrivals(&p, &mut rng);
            assert!(t.windows(2).all(|w| w[0] <= w[1]));
            assert!(t.iter().all(|&x| (0.0..=2.5).contains(&x)));
        }
    }

    #[test]
    fn f32_sampling_works() {
        let mut rng = derive_stream(SeedSpec::new(3, 3));
        let p = Params::new(0.5_f32, 1.0).unwrap();
        let n = 20_000;
        let mean = (0..n).map(|_| sample_poisson_arrivals(&p, &mut rng).len()).sum::<usize>() as f32 / n as f32;
        assert!((mean - 1.0).abs() < 0.05);
        let w = sample_weibull(1.0_f32, &mut rng);
        assert!(w.is_finite());
    }
}
