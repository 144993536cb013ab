use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use pseudodim::SeedSpec;

use crate::acceptance;
use crate::config::{Command, ExperimentConfig};
use crate::experiments;
use crate::report::{csv, Check, Report};

/// Written last into the output directory.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub files: Vec<String>,
    pub checks: &'a [Check],
    pub pass: bool,
}

#[derive(Debug)]
pub enum RunError {
    /// A numerical routine failed; the message is also written to `error.json`.
    Numerical(String),
    Io(io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Runs the experiment, writes its files and `manifest.json`, and returns the checks.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Check>, RunError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.unwrap_or(0)).build().map_err(|e| RunError::Numerical(e.to_string()))?;
    fs::create_dir_all(&cfg.out)?;
    match pool.install(|| compute(cfg)) {
        Ok(report) => {
            write_files(&cfg.out, &report.files)?;
            let manifest = Manifest {
                program: "pseudodim",
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                files: report.files.iter().map(|(n, _)| n.clone()).collect(),
                checks: &report.checks,
                pass: report.pass(),
            };
            write_json(&cfg.out.join("manifest.json"), &manifest)?;
            Ok(report.checks)
        }
        Err(e) => {
            let message = e.to_string();
            write_json(&cfg.out.join("error.json"), &serde_json::json!({ "config": cfg, "error": message }))?;
            Err(RunError::Numerical(message))
        }
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> io::Result<()> {
    files.iter().try_for_each(|(name, text)| fs::write(dir.join(name), text))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

fn compute(cfg: &ExperimentConfig) -> pseudodim::Result<Report> {
    let seed = SeedSpec::new(cfg.seed, 0);
    let mut report = Report::default();
    match cfg.command {
        Command::Fixpoint => {
            for (q, lambda) in cfg.pairs() {
                report.extend(experiments::fixpoint(q, lambda, cfg.grid, cfg.tol)?.0);
            }
        }
        Command::NormSweep => report.extend(experiments::norm_sweep(&cfg.pairs(), cfg.grid)?.0),
        Command::McMatching => report.extend(experiments::mc_matching(&cfg.q, &cfg.n, cfg.samples, seed)?),
        Command::Beta => report.extend(experiments::beta(&cfg.q, &cfg.n, cfg.samples, seed)?),
        Command::TreeUniqueness => {
            for (i, (q, lambda)) in cfg.pairs().into_iter().enumerate() {
                report.extend(experiments::tree_uniqueness(q, lambda, &cfg.depth, cfg.samples, seed.child(i as u64))?);
            }
        }
        Command::TreeDistribution => {
            let depth = cfg.depth.iter().copied().max().unwrap_or(20);
            for (i, (q, lambda)) in cfg.pairs().into_iter().enumerate() {
                report.extend(experiments::tree_distribution(q, lambda, cfg.grid, depth, cfg.samples, seed.child(i as u64))?);
            }
        }
        Command::ReasonableSize => {
            for (i, (q, lambda)) in cfg.pairs().into_iter().enumerate() {
                report.extend(experiments::reasonable_size(q, lambda, cfg.grid, &cfg.t_budget, &cfg.k, cfg.samples, seed.child(i as u64))?);
            }
        }
        Command::ValidateAll => {
            let outcomes = acceptance::run_all(cfg.seed);
            let rows = outcomes.iter().map(|o| {
                let summary = o.line().replace(',', ";");
                vec![o.id.to_string(), o.title.clone(), o.pass.to_string(), summary]
            });
            report.file("validation.csv", csv(&["criterion", "title", "pass", "summary"], rows.collect::<Vec<_>>()));
            report.json("validation.json", &outcomes);
            for o in outcomes {
                report.check(Check::flag(format!("criterion {}: {}", o.id, o.title), o.pass));
                for (name, text) in o.files {
                    report.file(format!("c{:02}_{name}", o.id), text);
                }
            }
        }
    }
    Ok(report)
}
