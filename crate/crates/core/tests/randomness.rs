use pseudodim::randomness::{derive_stream, open_uniform, sample_poisson_arrivals, sample_weibull, Params, SeedSpec};
use pseudodim::stats::{ks_anti_cdf, Welford};

#[test]
fn weibull_cdf_ks_below_one_percent() {
    for q in [0.3, 0.5, 1.0] {
        let mut rng = derive_stream(SeedSpec::new(10, 0));
        let xs: Vec<f64> = (0..100_000).map(|_| sample_weibull(q, &mut rng)).collect();
        let ks = ks_anti_cdf(&xs, |x: f64| (-x.powf(q)).exp(), f64::INFINITY);
        assert!(ks < 0.01, "q = {q}: {ks}");
    }
}

#[test]
fn weibull_small_value_fraction_follows_x_to_the_q() {
    let mut rng = derive_stream(SeedSpec::new(11, 0));
    let n = 1_000_000;
    let hits = (0..n).filter(|_| sample_weibull(0.5, &mut rng) < 0.01).count() as f64;
    let p = 1.0 - (-0.1_f64).exp();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits / n as f64 - p).abs() < 3.0 * se);
}

#[test]
fn poisson_counts_have_poisson_mean_and_variance() {
    for (q, lambda) in [(0.5, 2.0_f64), (1.0, 1.0), (0.2, 4.0)] {
        let p = Params::new(q, lambda).unwrap();
        let mut rng = derive_stream(SeedSpec::new(12, 0));
        let n = 10_000;
        let w: Welford = (0..n).map(|_| sample_poisson_arrivals(&p, &mut rng).len() as f64).collect();
        let mu: f64 = lambda.powf(q);
        assert!((w.mean() - mu).abs() < 3.0 * (mu / n as f64).sqrt());
        // Var of the sample variance of a Poisson count: (mu + 2 mu^2) / n, approximately
        let sd_var = ((mu + 2.0 * mu * mu) / n as f64).sqrt();
        assert!((w.variance() - mu).abs() < 5.0 * sd_var, "{} vs {mu}", w.variance());
    }
}

#[test]
fn arrival_times_have_mean_q_over_q_plus_one() {
    let p = Params::new(0.5, 1.0).unwrap();
    let mut rng = derive_stream(SeedSpec::new(13, 0));
    let w: Welford = (0..100_000).flat_map(|_| sample_poisson_arrivals(&p, &mut rng)).collect();
    assert!((w.mean() - 1.0 / 3.0).abs() < 3.0 * w.std_err());
}

#[test]
fn uniform_streams_have_mean_one_half() {
    for k in 0..4 {
        let mut rng = derive_stream(SeedSpec::new(14, 0).child(k));
        let w: Welford = (0..100_000).map(|_| open_uniform::<f64, _>(&mut rng)).collect();
        assert!((w.mean() - 0.5).abs() < 0.005);
    }
}
