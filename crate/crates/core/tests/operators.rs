mod common;

use std::sync::{Arc, OnceLock};

use common::singular_integral;
use proptest::prelude::*;
use pseudodim::fixpoint::{iterate_fixpoint, FixedPoint, FixpointConfig, GridFunction};
use pseudodim::operators::{
    apply_operator, build_density, build_operator, choose_m, compose_norm, default_k, estimate_alpha, i_value, marginal_j, neumann_psi,
    diagonal_envelope, KernelOperator, Player,
};
use pseudodim::randomness::{derive_stream, open_uniform, Params, SeedSpec};

fn fixed_point(q: f64, lambda: f64, n: usize) -> FixedPoint<f64> {
    iterate_fixpoint(Params::new(q, lambda).unwrap(), &FixpointConfig::with_segments(n)).unwrap()
}

/// `I(z) * int h kappa^z` from the raw diagonal density, by quadrature.
fn operator_oracle(f: &GridFunction<f64>, h: &GridFunction<f64>, z: f64) -> f64 {
    let p = *f.params();
    let (mut weighted, mut mass) = (0.0, 0.0);
    for (j, w) in f.nodes().windows(2).enumerate() {
        let s = (-f.slope(j)).max(0.0);
        if s > 0.0 {
            weighted += s * singular_integral(p.q, z, w, &|t| h.eval(t), 1e-15);
            mass += s * singular_integral(p.q, z, w, &|_| 1.0, 1e-15);
        }
    }
    let atom = p.q * (z + p.half()).powf(p.q - 1.0) * f.right_value();
    weighted / (atom + mass)
}

fn random_positive(grid_of: &GridFunction<f64>, seed: u64) -> GridFunction<f64> {
    let mut rng = derive_stream(SeedSpec::new(seed, 1));
    let values = (0..grid_of.nodes().len()).map(|_| 0.1 + open_uniform::<f64, _>(&mut rng)).collect();
    GridFunction::new(grid_of.grid().clone(), values).unwrap()
}

#[test]
fn operator_matches_quadrature_of_the_definition() {
    for (k, (q, lambda)) in [(0.3, 1.0), (0.5, 2.0), (0.8, 4.0)].into_iter().enumerate() {
        let fp = fixed_point(q, lambda, 128);
        for player in [Player::A, Player::B] {
            let op = build_operator(player, &fp).unwrap();
            let h = random_positive(&fp.f_a, k as u64);
            let out = apply_operator(&op, &h).unwrap();
            let mut rng = derive_stream(SeedSpec::new(300 + k as u64, 0));
            for _ in 0..10 {
                let i = 1 + (open_uniform::<f64, _>(&mut rng) * 126.0) as usize;
                let z = fp.grid().nodes()[i];
                let want = operator_oracle(player.anti_cdf(&fp), &h, z);
                let got = out.values()[i];
                assert!((got - want).abs() <= 1e-6 * want.abs(), "q={q} {player:?} i={i}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn constant_one_gives_i_and_identity_stays_in_range() {
    let fp = fixed_point(0.5, 2.0, 256);
    let op = build_operator(Player::B, &fp).unwrap();
    let ones = GridFunction::constant(fp.grid().clone(), 1.0);
    let once = apply_operator(&op, &ones).unwrap();
    assert!(once.values().iter().zip(op.i_values()).all(|(a, b)| (a - b).abs() <= 1e-13));
    let id = GridFunction::from_fn(fp.grid().clone(), |t| t);
    assert!(apply_operator(&op, &id).unwrap().values().iter().all(|v| v.abs() <= 1.0 + 1e-12));
    for (i, &z) in fp.grid().nodes().iter().enumerate().skip(1).take(254) {
        assert!((i_value(&fp.f_b, z).unwrap() - op.i_values()[i]).abs() < 1e-12);
    }
}

#[test]
fn endpoint_values_of_i_follow_the_exponent_dichotomy() {
    let low = fixed_point(0.4, 1.0, 2048);
    let high = fixed_point(0.7, 1.0, 2048);
    for fp in [&low, &high] {
        assert_eq!(i_value(&fp.f_a, -0.5).unwrap(), 0.0);
    }
    let r = i_value(&low.f_a, 0.5).unwrap();
    assert!((r - 1.0).abs() <= 0.02, "{r}");
    let r = i_value(&high.f_a, 0.5).unwrap();
    assert!(r < 1.0, "{r}");
}

#[test]
fn composed_norm_is_a_contraction_and_refinement_stable() {
    let norm = |n| {
        let fp = fixed_point(0.5, 2.0, n);
        let la = build_operator(Player::A, &fp).unwrap();
        let lb = build_operator(Player::B, &fp).unwrap();
        let sup = |op: &KernelOperator<f64>| op.i_values().iter().copied().fold(0.0, f64::max);
        let nm = compose_norm(&lb, &la).unwrap();
        assert!(nm <= sup(&la) * sup(&lb) + 1e-12);
        nm
    };
    let (a, b) = (norm(1024), norm(2048));
    assert!(a > 0.0 && b < 1.0);
    assert!((a - b).abs() / b < 0.01, "{a} vs {b}");
}

#[test]
fn diagonal_density_is_nonnegative_and_below_the_envelope() {
    let fp = fixed_point(0.5, 2.0, 512);
    let alpha = estimate_alpha(&fp.f_a, 4000).unwrap();
    let p = *fp.params();
    let mut rng = derive_stream(SeedSpec::new(31, 0));
    for _ in 0..1000 {
        let z = -1.0 + 2.0 * open_uniform::<f64, _>(&mut rng);
        let d = build_density(&fp.f_a, z).unwrap();
        let t = -1.0 + 2.0 * open_uniform::<f64, _>(&mut rng);
        assert!(d.density_at(t) >= 0.0);
        assert!(d.continuous_mass <= 1.01 * alpha.alpha_diag * diagonal_envelope(&p, z), "z = {z}");
        let j = marginal_j(&fp, Player::A, z).unwrap();
        assert!((j.continuous - d.continuous_mass).abs() <= 1e-12 * j.continuous.max(1.0));
    }
    // the continuous mass vanishes at the left end
    let masses: Vec<f64> = [1e-3, 1e-5, 1e-7].iter().map(|e| build_density(&fp.f_a, -1.0 + e).unwrap().continuous_mass).collect();
    assert!(masses.windows(2).all(|w| w[1] < w[0]) && masses[2] < 1e-2);
}

#[test]
fn neumann_majorant_bounds() {
    let fp = fixed_point(0.5, 1.0, 512);
    let la = build_operator(Player::A, &fp).unwrap();
    let lb = build_operator(Player::B, &fp).unwrap();
    let norm = compose_norm(&lb, &la).unwrap();
    let alpha = estimate_alpha(&fp.f_a, 200).unwrap().alpha_total;
    let m = choose_m(fp.params(), alpha, norm);
    assert!(m.satisfied);
    let k = default_k(fp.params());
    for t in [0.5, 1.0, 2.0] {
        let psi = neumann_psi(t, &lb, &la, k, m.m, 1e-14).unwrap();
        let scale = k * (m.m * t).exp();
        let v = psi.values();
        assert!(v.iter().all(|&x| x >= scale * (1.0 - 1e-15)));
        assert!(v.iter().all(|&x| x <= scale / (1.0 - norm) * (1.0 + 1e-12)));
        assert!(psi.identity_residual(&lb, &la) < 1e-8);
    }
}

fn shared() -> &'static (FixedPoint<f64>, KernelOperator<f64>) {
    static CELL: OnceLock<(FixedPoint<f64>, KernelOperator<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let fp = fixed_point(0.6, 2.0, 128);
        let op = build_operator(Player::A, &fp).unwrap();
        (fp, op)
    })
}

fn grid_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 129)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_is_linear(h1 in grid_values(), h2 in grid_values(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (_, op) = shared();
        let combo: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| a * x + b * y).collect();
        let lhs = op.apply_values(&combo);
        let (l1, l2) = (op.apply_values(&h1), op.apply_values(&h2));
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (a * l1[i] + b * l2[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn operator_is_positive_and_averaging_is_a_contraction(h in prop::collection::vec(0.0f64..5.0, 129)) {
        let (fp, op) = shared();
        let g = GridFunction::new(Arc::clone(fp.grid()), h.clone()).unwrap();
        prop_assert!(apply_operator(op, &g).unwrap().values().iter().all(|&v| v >= 0.0));
        let sup = h.iter().copied().fold(0.0, f64::max);
        prop_assert!(op.apply_stochastic(&g).unwrap().values().iter().all(|&v| v <= sup * (1.0 + 1e-12)));
    }
}
