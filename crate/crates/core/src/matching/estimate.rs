use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{solve_assignment, AssignmentInstance};
use crate::error::{Error, Result};
use crate::randomness::{derive_stream, sample_weibull, SeedSpec};
use crate::scalar::Scalar;
use crate::stats::{linear_fit, Welford};

/// `n x n` instance with i.i.d. Weibull(1, q) costs, filled row by row.
pub fn sample_instance<T: Scalar, R: Rng + ?Sized>(n: usize, q: T, rng: &mut R) -> AssignmentInstance<T> {
    let costs = (0..n * n).map(|_| sample_weibull(q, rng)).collect();
    AssignmentInstance::from_flat(n, costs).expect("Weibull costs are finite and nonnegative")
}

/// The normalization `n^(-1 + 1/q)`; exactly 1 when `q = 1`.
pub fn scale_factor<T: Scalar>(n: usize, q: T) -> T {
    T::from_usize_lossy(n).powf(q.recip() - T::one())
}

/// Mean and standard error of the scaled optimal cost at one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `E[n^(-1+1/q) M]`. Sample `i` uses stream `seed.child(i)`,
/// so the result does not depend on how many worker threads run.
pub fn estimate_scaled_cost<T: Scalar>(n: usize, q: T, samples: usize, seed: SeedSpec) -> Result<SizeEstimate> {
    if n == 0 {
        return Err(Error::Empty("instance size"));
    }
    if samples < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 samples, got {samples}")));
    }
    if !(q > T::zero()) {
        return Err(Error::InvalidParams(format!("q must be positive, got {q}")));
    }
    let scale = scale_factor(n, q);
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed.child(i));
            let inst = sample_instance(n, q, &mut rng);
            (solve_assignment(&inst).total_cost * scale).as_f64()
        })
        .collect();
    let acc: Welford = values.into_iter().collect();
    Ok(SizeEstimate { n, mean: acc.mean(), std_err: acc.std_err(), samples })
}

/// `sum_{k=1}^n k^-2`, the exact expected optimum for exponential costs.
pub fn parisi_reference<T: Scalar>(n: usize) -> T {
    // Smallest terms first.
    (1..=n).rev().map(|k| T::from_usize_lossy(k).powi(-2)).fold(T::zero(), |a, b| a + b)
}

/// Extrapolated limit of the scaled cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub q: f64,
    pub per_n: Vec<SizeEstimate>,
    pub extrapolated: f64,
    /// Combined Monte Carlo and fit-residual standard error of `extrapolated`.
    pub uncertainty: f64,
    pub slope: f64,
    pub model: String,
}

/// Least-squares fit `mean(n) = beta + b / n` over per-size means.
pub fn fit_beta(q: f64, mut per_n: Vec<SizeEstimate>) -> Result<BetaEstimate> {
    per_n.sort_by_key(|e| e.n);
    let mut distinct: Vec<usize> = per_n.iter().map(|e| e.n).collect();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 distinct sizes, got {}", distinct.len())));
    }
    let xs: Vec<f64> = per_n.iter().map(|e| 1.0 / e.n as f64).collect();
    let ys: Vec<f64> = per_n.iter().map(|e| e.mean).collect();
    let (beta, slope, weights) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::DegenerateFit("sizes have no spread".into()))?;
    let mc_var: f64 = weights.iter().zip(&per_n).map(|(w, e)| w * w * e.std_err * e.std_err).sum();
    let k = xs.len() as f64;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - beta - slope * x).powi(2)).sum();
    let mx = xs.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let fit_var = if k > 2.0 { rss / (k - 2.0) * (1.0 / k + mx * mx / sxx) } else { 0.0 };
    Ok(BetaEstimate {
        q,
        per_n,
        extrapolated: beta,
        uncertainty: (mc_var + fit_var).sqrt(),
        slope,
        model: "mean(n) = beta + b/n, ordinary least squares in 1/n".into(),
    })
}

/// Runs [`estimate_scaled_cost`] at every size (size `n` uses stream `seed.child(n)`)
/// and extrapolates with [`fit_beta`].
pub fn extrapolate_beta(q: f64, sizes: &[usize], samples: usize, seed: SeedSpec) -> Result<BetaEstimate> {
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 distinct sizes, got {}", distinct.len())));
    }
    let per_n = distinct
        .iter()
        .map(|&n| estimate_scaled_cost(n, q, samples, seed.child(n as u64)))
        .collect::<Result<Vec<_>>>()?;
    fit_beta(q, per_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parisi_small_values() {
        assert_eq!(parisi_reference::<f64>(1), 1.0);
        assert_eq!(parisi_reference::<f64>(2), 1.25);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let n = 1_000_000;
        let gap = zeta2 - parisi_reference::<f64>(n);
        assert!(gap > 0.0 && gap < 1e-6 + 1.0 / n as f64);
    }

    #[test]
    fn unit_exponent_has_unit_scale() {
        for n in [1, 2, 17, 500] {
            assert_eq!(scale_factor(n, 1.0_f64), 1.0);
        }
        assert!((scale_factor(4, 0.5_f64) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_is_reproducible() {
        let s = SeedSpec::new(5, 0);
        let a = estimate_scaled_cost(4, 0.5_f64, 50, s).unwrap();
        let b = estimate_scaled_cost(4, 0.5_f64, 50, s).unwrap();
        assert_eq!(a, b);
        assert!(a.std_err > 0.0);
    }

    #[test]
    fn estimate_rejects_bad_input() {
        let s = SeedSpec::new(5, 0);
        assert!(estimate_scaled_cost(3, 1.0_f64, 1, s).is_err());
        assert!(estimate_scaled_cost(0, 1.0_f64, 10, s).is_err());
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        let e = |n| SizeEstimate { n, mean: 1.0, std_err: 0.0, samples: 2 };
        assert!(matches!(fit_beta(1.0, vec![e(5), e(5), e(5)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(extrapolate_beta(1.0, &[4, 4, 8], 4, SeedSpec::new(0, 0)), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn fit_on_exact_sequence_recovers_zeta2() {
        let per_n = [50, 100, 200, 400]
            .iter()
            .map(|&n| SizeEstimate { n, mean: parisi_reference(n), std_err: 0.0, samples: 0 })
            .collect();
        let fit = fit_beta(1.0, per_n).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((fit.extrapolated - zeta2).abs() < 0.005, "{}", fit.extrapolated);
        // tail sum_{k>n} k^-2 ~ 1/n, so the fitted slope is close to -1
        assert!((fit.slope + 1.0).abs() < 0.1);
    }
}
