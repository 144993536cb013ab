//! One function per experiment group. Each returns the files to write and the checks
//! that decide the exit status.

use pseudodim::fixpoint::{derivative_of_v, iterate_fixpoint, FixedPoint, FixpointConfig};
use pseudodim::matching::{estimate_scaled_cost, extrapolate_beta, parisi_reference};
use pseudodim::operators::{norm_sweep_csv, norm_sweep_row, NormSweepRow};
use pseudodim::randomness::{Params, SeedSpec};
use pseudodim::treegame::{
    distribution_experiment, game_path_experiment, reasonable_experiment, uniqueness_experiment, ReasonableConfig, DEFAULT_NODE_CAP,
};
use pseudodim::Result;

use crate::report::{cell, csv, tag, Check, Report};

/// Relative grid-doubling tolerance for the composed norm.
pub const NORM_REFINEMENT_TOL: f64 = 0.01;
/// Sup distance to the logistic on `[-3, 3]`.
pub const LOGISTIC_TOL: f64 = 0.02;
/// Complete games per uniqueness run, per tree sampled for the gap quantiles.
pub const GAMES_PER_TREE: usize = 5;
/// Labelled trees per root sample in the depth-2 comparison.
pub const LABELED_PER_ROOT: usize = 4;
/// Depth of the deep truncations in the game-path runs.
pub const GAME_DEPTH: usize = 16;

fn params(q: f64, lambda: f64) -> Result<Params<f64>> {
    Params::new(q, lambda)
}

/// `sup_{|z| <= 3} |F(z) - 1/(1 + e^z)|`.
pub fn logistic_error(f: &pseudodim::GridFunction) -> f64 {
    f.nodes()
        .iter()
        .zip(f.values())
        .filter(|(z, _)| z.abs() <= 3.0)
        .map(|(&z, &v)| (v - 1.0 / (1.0 + z.exp())).abs())
        .fold(0.0, f64::max)
}

pub fn fixpoint(q: f64, lambda: f64, grid: usize, tol: f64) -> Result<(Report, FixedPoint<f64>)> {
    let config = FixpointConfig { tol, ..FixpointConfig::with_segments(grid) };
    let fp = iterate_fixpoint(params(q, lambda)?, &config)?;
    let t = tag(q, lambda);
    let mut r = Report::default();
    r.file(format!("F_A_{t}.csv"), fp.f_a.to_csv());
    r.file(format!("F_B_{t}.csv"), fp.f_b.to_csv());
    r.file(
        format!("gaps_{t}.csv"),
        csv(&["iteration", "gap"], fp.gaps.iter().enumerate().map(|(k, g)| vec![(k + 2).to_string(), g.to_string()])),
    );
    let deriv = derivative_of_v(&fp.f_b, &fp.f_a)?;
    r.file(
        format!("F_A_derivative_{t}.csv"),
        csv(&["z", "derivative"], deriv.interior_nodes().iter().zip(deriv.interior()).map(|(z, d)| vec![z.to_string(), d.to_string()])),
    );
    r.check(Check::below(format!("residual {t}"), fp.residual, 2.0 * tol));
    r.check(Check::at_most(format!("sandwich violation {t}"), fp.sandwich_violation, 1e-12));
    r.check(Check::flag(format!("anti-CDF shape {t}"), fp.f_a.is_anti_cdf(1e-12) && fp.f_b.is_anti_cdf(1e-12)));
    // the logistic is the fixed point in the wide-window limit of the unit exponent
    if q == 1.0 && lambda >= 8.0 {
        r.check(Check::below(format!("logistic distance F_A {t}"), logistic_error(&fp.f_a), LOGISTIC_TOL));
        r.check(Check::below(format!("logistic distance F_B {t}"), logistic_error(&fp.f_b), LOGISTIC_TOL));
    }
    Ok((r, fp))
}

pub fn norm_sweep(pairs: &[(f64, f64)], grid: usize) -> Result<(Report, Vec<(NormSweepRow, NormSweepRow)>)> {
    let mut rows = Vec::new();
    let mut r = Report::default();
    for &(q, lambda) in pairs {
        let p = params(q, lambda)?;
        let coarse = norm_sweep_row(p, &FixpointConfig::with_segments(grid))?;
        let fine = norm_sweep_row(p, &FixpointConfig::with_segments(2 * grid))?;
        let t = tag(q, lambda);
        r.check(Check::flag(format!("norm in (0,1) {t}"), [coarse.norm, fine.norm].iter().all(|&n| n > 0.0 && n < 1.0)));
        r.check(Check::below(format!("norm refinement change {t}"), (fine.norm - coarse.norm).abs() / fine.norm, NORM_REFINEMENT_TOL));
        rows.push((coarse, fine));
    }
    let flat: Vec<NormSweepRow> = rows.iter().flat_map(|(a, b)| [*a, *b]).collect();
    r.file("norm_sweep.csv", norm_sweep_csv(&flat));
    Ok((r, rows))
}

pub fn mc_matching(qs: &[f64], sizes: &[usize], samples: usize, seed: SeedSpec) -> Result<Report> {
    let mut r = Report::default();
    let mut rows = Vec::new();
    for (qi, &q) in qs.iter().enumerate() {
        for &n in sizes {
            let e = estimate_scaled_cost(n, q, samples, seed.child(qi as u64).child(n as u64))?;
            // the exact mean is known only for exponential costs
            let (reference, z) = if q == 1.0 {
                let reference: f64 = parisi_reference(n);
                (Some(reference), Some((e.mean - reference) / e.std_err))
            } else {
                (None, None)
            };
            if let Some(z) = z {
                r.check(Check::below(format!("|z| vs exact mean, n={n}"), z.abs(), 3.0));
            }
            rows.push(vec![q.to_string(), n.to_string(), samples.to_string(), e.mean.to_string(), e.std_err.to_string(), cell(reference), cell(z)]);
        }
    }
    r.file("mc_matching.csv", csv(&["q", "n", "samples", "mean", "std_err", "exact_mean", "z_score"], rows));
    Ok(r)
}

pub fn beta(qs: &[f64], sizes: &[usize], samples: usize, seed: SeedSpec) -> Result<Report> {
    let mut r = Report::default();
    let mut per_n = Vec::new();
    let mut summary = Vec::new();
    for (qi, &q) in qs.iter().enumerate() {
        let b = extrapolate_beta(q, sizes, samples, seed.child(qi as u64))?;
        for e in &b.per_n {
            per_n.push(vec![q.to_string(), e.n.to_string(), e.samples.to_string(), e.mean.to_string(), e.std_err.to_string()]);
        }
        r.check(Check::flag(format!("beta finite and positive q={q}"), b.extrapolated.is_finite() && b.extrapolated > 0.0));
        summary.push(vec![q.to_string(), b.extrapolated.to_string(), b.uncertainty.to_string(), b.slope.to_string()]);
    }
    r.file("beta_per_n.csv", csv(&["q", "n", "samples", "mean", "std_err"], per_n));
    r.file("beta.csv", csv(&["q", "beta", "uncertainty", "slope"], summary));
    Ok(r)
}

pub fn tree_uniqueness(q: f64, lambda: f64, depths: &[usize], trees: usize, seed: SeedSpec) -> Result<Report> {
    let p = params(q, lambda)?;
    let mut r = Report::default();
    r.extend(uniqueness(p, depths, trees, seed.child(0)));
    r.extend(game_paths(p, trees * GAMES_PER_TREE, seed.child(1)));
    Ok(r)
}

pub fn uniqueness(p: Params<f64>, depths: &[usize], trees: usize, seed: SeedSpec) -> Report {
    let u = uniqueness_experiment(p, depths, trees, DEFAULT_NODE_CAP, seed);
    let mut r = Report::default();
    let t = tag(p.q, p.lambda);
    r.file(
        format!("uniqueness_{t}.csv"),
        csv(
            &["depth", "trees", "median_gap", "q25", "q75", "q90", "max", "node_cap_hits"],
            u.per_depth.iter().map(|g| {
                [g.depth as f64, g.trees as f64, g.median, g.q25, g.q75, g.q90, g.max, g.node_cap_hits as f64]
                    .iter()
                    .map(|x| x.to_string())
                    .collect()
            }),
        ),
    );
    r.check(Check::flag("median gap non-increasing in depth", u.medians_non_increasing));
    let last = u.per_depth.last().map_or(f64::NAN, |g| g.median);
    r.check(Check::below("median gap at the deepest cap", last, u.threshold));
    r.json(format!("uniqueness_{t}.json"), &u);
    r
}

pub fn game_paths(p: Params<f64>, games: usize, seed: SeedSpec) -> Report {
    let g = game_path_experiment(p, GAME_DEPTH, games, DEFAULT_NODE_CAP, seed);
    let mut r = Report::default();
    r.check(Check::at_most("complete games missing", games as f64 - g.complete as f64, 0.0));
    r.check(Check::at_most("games with delta_sum > 2 lambda", g.delta_violations as f64, 0.0));
    r.check(Check::at_most("value bracket violation", g.max_bracket_violation, pseudodim::treegame::BRACKET_TOL));
    r.check(Check::at_most("game paths outside the reasonable tree", g.outside_reasonable as f64, 0.0));
    r.json(format!("game_paths_{}.json", tag(p.q, p.lambda)), &g);
    r
}

pub fn tree_distribution(q: f64, lambda: f64, grid: usize, depth: usize, samples: usize, seed: SeedSpec) -> Result<Report> {
    let fp = iterate_fixpoint(params(q, lambda)?, &FixpointConfig::with_segments(grid))?;
    let d = distribution_experiment(&fp, depth, samples, LABELED_PER_ROOT * samples, DEFAULT_NODE_CAP, seed)?;
    let mut r = Report::default();
    r.check(Check::below("KS root value vs F_A", d.ks_root, d.tolerance));
    r.check(Check::below("KS depth-2 labels, labelled vs direct", d.ks_depth2, d.tolerance));
    r.json(format!("tree_distribution_{}.json", tag(q, lambda)), &d);
    Ok(r)
}

pub fn reasonable_size(q: f64, lambda: f64, grid: usize, budgets: &[f64], half_depths: &[usize], samples: usize, seed: SeedSpec) -> Result<Report> {
    let fp = iterate_fixpoint(params(q, lambda)?, &FixpointConfig::with_segments(grid))?;
    let config = ReasonableConfig { budgets: budgets.to_vec(), half_depths: half_depths.to_vec(), samples_per_bin: samples, ..ReasonableConfig::default() };
    let rep = reasonable_experiment(&fp, &config, seed)?;
    let t = tag(q, lambda);
    let mut r = Report::default();
    r.check(Check::below("eps_m for the chosen m", rep.epsilon_m, 0.5));
    for s in &rep.two_step {
        r.check(Check::at_most(format!("mean |Delta^2_t|, t={}", s.t), s.mean, s.bound));
    }
    let worst = rep.comparisons.iter().filter_map(|c| c.r_mean.map(|m| m / c.psi)).fold(0.0, f64::max);
    r.check(Check::below("max per-bin R / Psi", worst, 1.0));
    let residual = rep.psi.iter().map(|p| p.identity_residual).fold(0.0, f64::max);
    r.check(Check::at_most("Psi identity residual (relative to K e^(mt))", residual, rep.identity_tol));
    r.check(Check::flag("R = 0 in the lambda/2 bin", rep.atom_bins_zero));
    r.file(
        format!("r_vs_psi_{t}.csv"),
        csv(
            &["t", "k", "z_center", "atom_bin", "samples", "R_mean", "R_upper95", "Psi"],
            rep.comparisons.iter().map(|c| {
                vec![c.t.to_string(), (2 * c.k).to_string(), c.center.to_string(), c.atom.to_string(), c.samples.to_string(), cell(c.r_mean), cell(c.r_upper), c.psi.to_string()]
            }),
        ),
    );
    r.file(
        format!("two_step_{t}.csv"),
        csv(&["t", "trees", "mean", "std_err", "bound"], rep.two_step.iter().map(|s| vec![s.t.to_string(), s.trees.to_string(), s.mean.to_string(), s.std_err.to_string(), s.bound.to_string()])),
    );
    r.json(format!("reasonable_{t}.json"), &rep);
    Ok(r)
}
