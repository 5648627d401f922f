//! Gate-count statistics over many generated predicates per
//! (algorithm, n, t) cell.
//!
//! Every trial draws from its own RNG, seeded by hashing the master seed
//! with the cell and trial index, so cells can be rerun alone and trials run
//! in parallel without changing results.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boolfn::GateCounts;
use crate::opgen::{qm_generate, qmx_generate, rnd_generate_with, Generator, OpGenError, RndOptions};

/// Failed generations tolerated per trial before the cell is given up.
const MAX_RETRIES: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cell ({algorithm}, n={n}, t={t}) is infeasible and not in the skip list")]
    Infeasible { algorithm: Generator, n: u8, t: u32 },
    #[error("cell ({algorithm}, n={n}, t={t}): trial {trial} failed {MAX_RETRIES} times, last error: {source}")]
    Generation { algorithm: Generator, n: u8, t: u32, trial: u64, source: OpGenError },
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Generator>,
    pub n_values: Vec<u8>,
    pub t_values: Vec<u32>,
    /// Explicit `(n, t)` cells; when empty, every pair from `n_values` and
    /// `t_values` with `t + 1 ≤ 2^n` is used.
    pub cells: Vec<(u8, u32)>,
    pub trials: u64,
    pub master_seed: u64,
    pub skip_list: Vec<(Generator, u8, u32)>,
    /// Wall-clock limit for one RND trial.
    pub rnd_timeout: Duration,
    pub rnd_budget: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: Generator::ALL.to_vec(),
            n_values: vec![3, 4, 5],
            t_values: vec![2, 3, 5, 10],
            cells: Vec::new(),
            trials: 1000,
            master_seed: 0,
            skip_list: vec![(Generator::Rnd, 3, 5)],
            rnd_timeout: Duration::from_secs(10),
            rnd_budget: crate::opgen::DEFAULT_ATTEMPT_BUDGET,
        }
    }
}

impl ExperimentConfig {
    /// The `(n, t)` cells in run order.
    pub fn grid(&self) -> Vec<(u8, u32)> {
        if !self.cells.is_empty() {
            return self.cells.clone();
        }
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &t in &self.t_values {
                if n < 32 && (t as u64) < 1u64 << n {
                    cells.push((n, t));
                }
            }
        }
        cells
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    fn of(samples: impl Iterator<Item = f64> + Clone) -> Self {
        let n = samples.clone().count() as f64;
        if n == 0.0 {
            return Self::default();
        }
        let mean = samples.clone().sum::<f64>() / n;
        let var = if n > 1.0 { samples.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { mean, stddev: var.sqrt() }
    }

    /// Standard error of the mean over `n` samples.
    pub fn std_error(&self, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.stddev / (n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub algorithm: Generator,
    pub n: u8,
    pub t: u32,
    pub skipped: bool,
    /// Successful generations the statistics are computed over.
    pub trials: u64,
    pub not: Stat,
    pub and: Stat,
    pub or: Stat,
    pub xor: Stat,
    pub total: Stat,
    /// Mean candidate draws per accepted RND predicate.
    pub mean_attempts: Option<f64>,
    /// Generations that failed and were retried with a fresh seed.
    pub failures: u64,
    pub timeouts: u64,
}

impl CellResult {
    fn skipped(algorithm: Generator, n: u8, t: u32) -> Self {
        Self {
            algorithm,
            n,
            t,
            skipped: true,
            trials: 0,
            not: Stat::default(),
            and: Stat::default(),
            or: Stat::default(),
            xor: Stat::default(),
            total: Stat::default(),
            mean_attempts: None,
            failures: 0,
            timeouts: 0,
        }
    }

    /// Fraction of generation attempts that succeeded.
    pub fn success_rate(&self) -> f64 {
        let all = self.trials + self.failures;
        if all == 0 {
            0.0
        } else {
            self.trials as f64 / all as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<CellResult>,
}

impl ResultTable {
    pub fn get(&self, algorithm: Generator, n: u8, t: u32) -> Option<&CellResult> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.n == n && r.t == t)
    }
}

/// Seed of one generation attempt.
pub fn trial_seed(master: u64, algorithm: Generator, n: u8, t: u32, trial: u64, retry: u32) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"opred-trial");
    h.update(master.to_le_bytes());
    h.update(algorithm.name().as_bytes());
    h.update([n]);
    h.update(t.to_le_bytes());
    h.update(trial.to_le_bytes());
    h.update(retry.to_le_bytes());
    h.finalize().into()
}

struct Outcome {
    counts: GateCounts,
    attempts: u64,
    failures: u64,
    timeouts: u64,
}

fn run_trial(cfg: &ExperimentConfig, alg: Generator, n: u8, t: u32, trial: u64) -> Result<Outcome, ExperimentError> {
    let (mut failures, mut timeouts) = (0, 0);
    let mut retry = 0;
    loop {
        let mut rng = ChaCha8Rng::from_seed(trial_seed(cfg.master_seed, alg, n, t, trial, retry));
        let result = match alg {
            Generator::Qm => qm_generate(n, 0, t, &mut rng),
            Generator::Qmx => qmx_generate(n, 0, t, &mut rng),
            Generator::Rnd => rnd_generate_with(
                n,
                0,
                t,
                &mut rng,
                RndOptions { attempt_budget: cfg.rnd_budget, time_limit: Some(cfg.rnd_timeout) },
            ),
        };
        match result {
            Ok(op) => return Ok(Outcome { counts: op.counts, attempts: op.attempts, failures, timeouts }),
            Err(e @ (OpGenError::BudgetExhausted { .. } | OpGenError::Timeout { .. })) => {
                failures += 1;
                if matches!(e, OpGenError::Timeout { .. }) {
                    timeouts += 1;
                }
                retry += 1;
                if retry >= MAX_RETRIES {
                    return Err(ExperimentError::Generation { algorithm: alg, n, t, trial, source: e });
                }
            }
            Err(e) => return Err(ExperimentError::Generation { algorithm: alg, n, t, trial, source: e }),
        }
    }
}

fn feasible(alg: Generator, n: u8, t: u32) -> bool {
    let states = 1u64 << n;
    match alg {
        Generator::Qm | Generator::Qmx => t >= 1 && (t as u64) < states,
        // RND reads t as a lower bound and needs every bit to read two others
        Generator::Rnd => n >= 3 && (t as u64) < states,
    }
}

pub fn run_cell(cfg: &ExperimentConfig, algorithm: Generator, n: u8, t: u32) -> Result<CellResult, ExperimentError> {
    if cfg.skip_list.contains(&(algorithm, n, t)) {
        return Ok(CellResult::skipped(algorithm, n, t));
    }
    if n == 0 || n > crate::MAX_WIDTH || !feasible(algorithm, n, t) {
        return Err(ExperimentError::Infeasible { algorithm, n, t });
    }
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, algorithm, n, t, i))
        .collect::<Result<Vec<_>, _>>()?;
    let stat = |f: fn(&GateCounts) -> u32| Stat::of(outcomes.iter().map(move |o| f(&o.counts) as f64));
    let attempts = outcomes.iter().map(|o| o.attempts).sum::<u64>() as f64 / outcomes.len().max(1) as f64;
    Ok(CellResult {
        algorithm,
        n,
        t,
        skipped: false,
        trials: outcomes.len() as u64,
        not: stat(|c| c.not_count),
        and: stat(|c| c.and_count),
        or: stat(|c| c.or_count),
        xor: stat(|c| c.xor_count),
        total: stat(GateCounts::total),
        mean_attempts: (algorithm == Generator::Rnd).then_some(attempts),
        failures: outcomes.iter().map(|o| o.failures).sum(),
        timeouts: outcomes.iter().map(|o| o.timeouts).sum(),
    })
}

/// Runs every algorithm on every grid cell, algorithm-major.
pub fn run_table(cfg: &ExperimentConfig) -> Result<ResultTable, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::InvalidConfig("trials must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &alg in &cfg.algorithms {
        for (n, t) in cfg.grid() {
            rows.push(run_cell(cfg, alg, n, t)?);
        }
    }
    Ok(ResultTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(ExperimentError::UnknownFormat(s.to_string())),
        }
    }
}

pub const REPORT_COLUMNS: [&str; 10] =
    ["algorithm", "n", "t", "mean_not", "mean_and", "mean_or", "mean_xor", "stddev_total", "trials", "skipped"];

fn row_fields(r: &CellResult) -> Vec<String> {
    let num = |x: f64| if r.skipped { String::new() } else { format!("{x:.3}") };
    vec![
        r.algorithm.to_string(),
        r.n.to_string(),
        r.t.to_string(),
        num(r.not.mean),
        num(r.and.mean),
        num(r.or.mean),
        num(r.xor.mean),
        num(r.total.stddev),
        r.trials.to_string(),
        r.skipped.to_string(),
    ]
}

pub fn render_report(table: &ResultTable, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS).expect("in-memory write");
            for r in &table.rows {
                w.write_record(row_fields(r)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII fields")
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            writeln!(out, "| {} |", REPORT_COLUMNS.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(REPORT_COLUMNS.len())).unwrap();
            for r in &table.rows {
                let fields: Vec<String> =
                    row_fields(r).into_iter().map(|f| if f.is_empty() { "-".into() } else { f }).collect();
                writeln!(out, "| {} |", fields.join(" | ")).unwrap();
            }
            out
        }
    }
}
