//! Small statistics toolkit: streaming moments, Kolmogorov-Smirnov distances, quantiles.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Welford running mean/variance. Merging is order-sensitive only through rounding,
/// so callers push in a fixed (sample-index) order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        iter.into_iter().for_each(|x| w.push(x));
        w
    }
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    xs
}

/// Kolmogorov-Smirnov distance between the sample and a model given by its
/// anti-CDF `P(X >= z)`. The model may carry an atom at `atom_at` (its right endpoint):
/// `anti_cdf` is left-continuous, and just above `atom_at` the model mass is zero.
pub fn ks_anti_cdf<F>(samples: &[f64], anti_cdf: F, atom_at: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    let xs = sorted(samples.to_vec());
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = xs[i];
        let mut j = i;
        while j < n && xs[j] == x {
            j += 1;
        }
        // Empirical P(X >= x) and P(X > x).
        let emp_ge = (n - i) as f64 / nf;
        let emp_gt = (n - j) as f64 / nf;
        let model_ge = anti_cdf(x);
        let model_gt = if x >= atom_at { 0.0 } else { model_ge };
        worst = worst.max((emp_ge - model_ge).abs()).max((emp_gt - model_gt).abs());
        i = j;
    }
    worst
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let a = sorted(a.to_vec());
    let b = sorted(b.to_vec());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// Linear-interpolated quantile (type 7). `p` in [0, 1].
pub fn quantile(samples: &[f64], p: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let xs = sorted(samples.to_vec());
    let h = (xs.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

pub fn median(samples: &[f64]) -> f64 {
    quantile(samples, 0.5)
}

/// Ordinary least squares fit `y = a + b x`. Returns `(a, b, coefficient weights of a)`:
/// the intercept is `sum_i w_i y_i`, which lets callers propagate per-point errors.
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Option<(T, T, Vec<T>)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = T::from_usize_lossy(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if !(sxx > T::zero()) {
        return None;
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let weights = xs.iter().map(|&x| nf.recip() - mx * (x - mx) / sxx).collect();
    Some((a, b, weights))
}
