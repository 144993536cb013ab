//! The ten acceptance criteria at full scale, shared by `validate-all` and the
//! `acceptance` test target.

use serde::{Deserialize, Serialize};

use pseudodim::fixpoint::{iterate_fixpoint, FixpointConfig};
use pseudodim::matching::{estimate_scaled_cost, sample_instance, solve_assignment};
use pseudodim::AssignmentInstance;
use pseudodim::operators::i_value;
use pseudodim::randomness::{derive_stream, Params, SeedSpec};
use pseudodim::Result;

use crate::experiments;
use crate::report::{Check, Report};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "exact small-n means"),
    (2, "zeta(2) limit"),
    (3, "logistic fixed point"),
    (4, "contraction"),
    (5, "endpoint values of I"),
    (6, "uniqueness empirics"),
    (7, "game-path bounds"),
    (8, "distributional consistency"),
    (9, "reasonable-tree bounds"),
    (10, "solver oracle"),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    #[serde(skip)]
    pub files: Vec<(String, String)>,
}

impl Outcome {
    /// One line: status, id, title and the checks that decided it (the failing ones
    /// when there are any).
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let detail = match &self.error {
            Some(e) => format!("error: {e}"),
            None => {
                let shown: Vec<&Check> = if self.pass { self.checks.iter().collect() } else { self.checks.iter().filter(|c| !c.pass).collect() };
                let mut parts: Vec<String> = shown.iter().take(4).map(|c| c.describe()).collect();
                if shown.len() > 4 {
                    parts.push(format!("{} more", shown.len() - 4));
                }
                parts.join("; ")
            }
        };
        format!("{status} [{:>2}] {}: {detail}", self.id, self.title)
    }
}

fn outcome(id: u8, result: Result<Report>) -> Outcome {
    let title = CRITERIA[id as usize - 1].1.to_string();
    match result {
        Ok(r) => Outcome { id, title, pass: !r.checks.is_empty() && r.pass(), checks: r.checks, error: None, files: r.files },
        Err(e) => Outcome { id, title, pass: false, checks: Vec::new(), error: Some(e.to_string()), files: Vec::new() },
    }
}

pub fn run_criterion(id: u8, seed: u64) -> Outcome {
    let s = SeedSpec::new(seed, id as u64);
    let result = match id {
        1 => experiments::mc_matching(&[1.0], &[1, 2, 3, 5, 10], 100_000, s),
        2 => zeta2_limit(s),
        3 => experiments::fixpoint(1.0, 8.0, 2048, 1e-8).map(|(r, _)| r),
        4 => experiments::norm_sweep(&pairs(&[0.2, 0.5, 0.8], &[1.0, 2.0, 4.0]), 1024).map(|(r, _)| r),
        5 => endpoint_values(),
        6 => Params::new(0.5, 2.0).map(|p| experiments::uniqueness(p, &[4, 8, 12], 200, s)),
        7 => Params::new(0.5, 2.0).map(|p| experiments::game_paths(p, 1000, s)),
        8 => experiments::tree_distribution(0.5, 1.5, 1024, 20, 1000, s),
        9 => experiments::reasonable_size(0.5, 1.0, 1024, &[0.5, 1.0, 2.0], &[2, 4, 6], 200, s),
        10 => solver_oracle(s),
        _ => Err(pseudodim::Error::InvalidParams(format!("no criterion {id}"))),
    };
    outcome(id, result)
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, seed)).collect()
}

fn pairs(qs: &[f64], lambdas: &[f64]) -> Vec<(f64, f64)> {
    qs.iter().flat_map(|&q| lambdas.iter().map(move |&l| (q, l))).collect()
}

fn zeta2_limit(seed: SeedSpec) -> Result<Report> {
    let e = estimate_scaled_cost(500, 1.0, 200, seed)?;
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let mut r = Report::default();
    r.check(Check::below("relative distance of the n=500 mean to pi^2/6", (e.mean - zeta2).abs() / zeta2, 0.01));
    r.file(
        "zeta2.csv",
        crate::report::csv(&["n", "samples", "mean", "std_err", "pi2_over_6"], [vec!["500".into(), "200".into(), e.mean.to_string(), e.std_err.to_string(), zeta2.to_string()]]),
    );
    Ok(r)
}

fn endpoint_values() -> Result<Report> {
    let mut r = Report::default();
    let lambda = 1.0_f64;
    let half = lambda / 2.0;
    let low = iterate_fixpoint(Params::new(0.4, lambda)?, &FixpointConfig::with_segments(2048))?;
    let high = iterate_fixpoint(Params::new(0.7, lambda)?, &FixpointConfig::with_segments(2048))?;
    let mut rows = Vec::new();
    for (name, fp) in [("q=0.4", &low), ("q=0.7", &high)] {
        for (player, f) in [("A", &fp.f_a), ("B", &fp.f_b)] {
            let left = i_value(f, -half)?;
            let right = i_value(f, half)?;
            r.check(Check::at_most(format!("|I_{player}(-lambda/2)| {name}"), left.abs(), 0.0));
            if fp.params().q < 0.5 {
                r.check(Check::at_most(format!("|I_{player}(lambda/2) - 1| {name}"), (right - 1.0).abs(), 0.02));
            } else {
                r.check(Check::below(format!("I_{player}(lambda/2) {name}"), right, 1.0));
            }
            rows.push(vec![fp.params().q.to_string(), player.to_string(), left.to_string(), right.to_string()]);
        }
    }
    r.file("endpoint_i.csv", crate::report::csv(&["q", "player", "I_left", "I_right"], rows));
    Ok(r)
}

/// Minimum over all permutations (Heap's algorithm).
pub fn brute_force_min(inst: &AssignmentInstance) -> f64 {
    let n = inst.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| inst.cost(i, j)).sum::<f64>();
    let mut best = total(&perm);
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            perm.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
            best = best.min(total(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn solver_oracle(seed: SeedSpec) -> Result<Report> {
    let mut mismatches = 0usize;
    let mut worst_gap: f64 = 0.0;
    let mut worst_dual: f64 = 0.0;
    let mut instances = 0usize;
    for n in 1..=6usize {
        for i in 0..100u64 {
            let mut rng = derive_stream(seed.child(n as u64).child(i));
            let q = [0.3, 0.5, 1.0][i as usize % 3];
            let inst = sample_instance(n, q, &mut rng);
            let res = solve_assignment(&inst);
            let best = brute_force_min(&inst);
            let gap = (res.total_cost - best).abs();
            worst_gap = worst_gap.max(gap);
            // exact agreement up to summation order
            if !res.is_consistent(&inst) || gap > 4.0 * f64::EPSILON * best.max(1.0) * n as f64 {
                mismatches += 1;
            }
            let (feas, slack) = res.certificate_violation(&inst);
            worst_dual = worst_dual.max(feas).max(slack);
            instances += 1;
        }
    }
    let mut r = Report::default();
    r.check(Check::at_most("solver/brute-force mismatches", mismatches as f64, 0.0));
    r.check(Check::at_most("largest dual certificate violation", worst_dual, 1e-9));
    r.file(
        "solver_oracle.csv",
        crate::report::csv(&["instances", "mismatches", "max_cost_gap", "max_dual_violation"], [vec![instances.to_string(), mismatches.to_string(), worst_gap.to_string(), worst_dual.to_string()]]),
    );
    Ok(r)
}
