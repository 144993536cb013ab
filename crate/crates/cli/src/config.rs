use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "pseudodim", version, about = "Random assignment, game-value fixed points and Exploration game experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fixed point F_A, F_B of the map V.
    Fixpoint,
    /// Composed operator norm over a (q, lambda) grid, with a refinement check.
    NormSweep,
    /// Monte Carlo mean of the optimal assignment cost.
    McMatching,
    /// Extrapolated limit of the scaled assignment cost.
    Beta,
    /// Root value gaps of truncated trees and complete game paths.
    TreeUniqueness,
    /// Root and depth-2 value distributions against the fixed point.
    TreeDistribution,
    /// Reasonable-tree sizes against the Neumann majorant.
    ReasonableSize,
    /// Every acceptance check at full scale.
    ValidateAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fixpoint => "fixpoint",
            Command::NormSweep => "norm-sweep",
            Command::McMatching => "mc-matching",
            Command::Beta => "beta",
            Command::TreeUniqueness => "tree-uniqueness",
            Command::TreeDistribution => "tree-distribution",
            Command::ReasonableSize => "reasonable-size",
            Command::ValidateAll => "validate-all",
        }
    }
}

/// Flags shared by all subcommands. List-valued flags take comma-separated values.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Cost pseudo-dimensions q in (0, 1].
    #[arg(long, global = true, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Exploration costs lambda > 0.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Matching sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Samples: instances, trees or draws per bin, by command.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid segments N.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Fixed-point stopping tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Tree truncation depths.
    #[arg(long, global = true, value_delimiter = ',')]
    pub depth: Vec<usize>,
    /// Value-loss budgets t.
    #[arg(long = "t-budget", global = true, value_delimiter = ',')]
    pub t_budget: Vec<f64>,
    /// Half-depths k of R^{2k}.
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

/// Fully resolved configuration. Together with the program version it determines every
/// output byte for byte; the thread count is not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub q: Vec<f64>,
    pub lambda: Vec<f64>,
    pub n: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub grid: usize,
    pub tol: f64,
    pub depth: Vec<usize>,
    pub t_budget: Vec<f64>,
    pub k: Vec<usize>,
    pub out: PathBuf,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

fn or<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

impl ExperimentConfig {
    /// Fills unset flags with the defaults of `command` and validates the result.
    pub fn resolve(command: Command, o: &Opts) -> Result<Self, String> {
        use Command::*;
        let (q, lambda): (&[f64], &[f64]) = match command {
            Fixpoint => (&[1.0], &[8.0]),
            NormSweep => (&[0.2, 0.5, 0.8], &[1.0, 2.0, 4.0]),
            McMatching => (&[1.0], &[1.0]),
            Beta => (&[0.3, 0.5, 0.7], &[1.0]),
            TreeUniqueness => (&[0.5], &[2.0]),
            TreeDistribution => (&[0.5], &[1.5]),
            ReasonableSize => (&[0.5], &[1.0]),
            ValidateAll => (&[], &[]),
        };
        let n: &[usize] = match command {
            McMatching => &[1, 2, 3, 5, 10],
            Beta => &[50, 100, 200, 400],
            _ => &[],
        };
        let samples = match command {
            McMatching => 100_000,
            Beta => 200,
            TreeUniqueness => 200,
            TreeDistribution => 1000,
            ReasonableSize => 200,
            _ => 0,
        };
        let grid = match command {
            Fixpoint => 2048,
            _ => 1024,
        };
        let depth: &[usize] = match command {
            TreeUniqueness => &[4, 8, 12],
            TreeDistribution => &[20],
            _ => &[],
        };
        let cfg = Self {
            command,
            q: or(&o.q, q),
            lambda: or(&o.lambda, lambda),
            n: or(&o.n, n),
            samples: o.samples.unwrap_or(samples),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            grid: o.grid.unwrap_or(grid),
            tol: o.tol.unwrap_or(1e-8),
            depth: or(&o.depth, depth),
            t_budget: or(&o.t_budget, &[0.5, 1.0, 2.0]),
            k: or(&o.k, &[2, 4, 6]),
            out: o.out.clone(),
            jobs: o.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(q) = self.q.iter().find(|&&q| !(q > 0.0 && q <= 1.0)) {
            return Err(format!("--q must lie in (0, 1], got {q}"));
        }
        if let Some(l) = self.lambda.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(format!("--lambda must be positive, got {l}"));
        }
        if self.n.contains(&0) {
            return Err("--n must be positive".into());
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(format!("--tol must be positive, got {}", self.tol));
        }
        if self.grid < 16 {
            return Err(format!("--grid must be at least 16, got {}", self.grid));
        }
        if self.jobs == Some(0) {
            return Err("--jobs must be positive".into());
        }
        if self.k.contains(&0) {
            return Err("--k must be positive".into());
        }
        let need_samples = !matches!(self.command, Command::Fixpoint | Command::NormSweep | Command::ValidateAll);
        if need_samples && self.samples < 2 {
            return Err("--samples must be at least 2".into());
        }
        if self.command == Command::ReasonableSize && self.samples < 100 {
            return Err("reasonable-size needs --samples >= 100 per bin".into());
        }
        if matches!(self.command, Command::TreeUniqueness | Command::TreeDistribution) && self.depth.is_empty() {
            return Err("--depth needs at least one value".into());
        }
        Ok(())
    }

    /// All `(q, lambda)` pairs, `q` outermost.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.q.iter().flat_map(|&q| self.lambda.iter().map(move |&l| (q, l))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_depend_on_the_command() {
        let o = Opts { out: "x".into(), ..Opts::default() };
        let c = ExperimentConfig::resolve(Command::Fixpoint, &o).unwrap();
        assert_eq!((c.q.clone(), c.lambda.clone(), c.grid), (vec![1.0], vec![8.0], 2048));
        let c = ExperimentConfig::resolve(Command::McMatching, &o).unwrap();
        assert_eq!(c.n, vec![1, 2, 3, 5, 10]);
        assert_eq!(c.pairs(), vec![(1.0, 1.0)]);
    }

    #[test]
    fn bad_values_are_rejected() {
        let o = Opts { q: vec![1.5], out: "x".into(), ..Opts::default() };
        assert!(ExperimentConfig::resolve(Command::Fixpoint, &o).is_err());
        let o = Opts { samples: Some(10), out: "x".into(), ..Opts::default() };
        assert!(ExperimentConfig::resolve(Command::ReasonableSize, &o).is_err());
    }

    #[test]
    fn config_round_trips_without_jobs() {
        let o = Opts { jobs: Some(3), out: "x".into(), ..Opts::default() };
        let c = ExperimentConfig::resolve(Command::Beta, &o).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, ExperimentConfig { jobs: None, ..c });
    }
}
