//! Monte Carlo sweeps over the initial probability `p`.
//!
//! A [`SweepConfig`] fixes one setting of regime, node count, fixed degree
//! and group count; each grid point of `p` runs `runs` independent
//! realisations (network, thresholds, dynamics) on their own random stream
//! keyed by `(master_seed, grid index, run index)`. Per-run outcomes are
//! collected in index order before aggregation, so results are bitwise
//! identical for any thread count.

mod config;
mod output;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{default_max_attempts, run_to_fixation, run_to_fixation_traced, RunResult};
use crate::error::{Error, Result};
use crate::netgen::{build_network, Network, PowerLawSampler, Side, DEFAULT_GAMMA};
use crate::rng::{run_stream, stream, SimRng, SHARED_NETWORK_STREAM};
use crate::thresholds::{RankOrder, ThresholdAssignment};

pub use config::{ExperimentPlan, OneOrMany};
pub use output::{emit_results, read_results, results_csv, write_results, SweepRow, RESULTS_HEADER};

/// Which degree is power-law distributed and drives the thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Power-law out-degree, fixed in-degree `M_in`, thresholds ranked by out-degree.
    OutDependent,
    /// Power-law in-degree, fixed out-degree `M_out`, thresholds ranked by in-degree.
    InDependent,
}

impl Regime {
    pub fn variable_side(self) -> Side {
        match self {
            Regime::OutDependent => Side::Out,
            Regime::InDependent => Side::In,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::OutDependent => "out_dependent",
            Regime::InDependent => "in_dependent",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out_dependent" | "out" => Ok(Regime::OutDependent),
            "in_dependent" | "in" => Ok(Regime::InDependent),
            _ => Err(Error::param(format!("unknown regime `{s}`"))),
        }
    }
}

/// `0, 0.05, ..., 1`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=20).map(|i| f64::from(i) / 20.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub regime: Regime,
    pub n: usize,
    /// `M_in` in the out-dependent regime, `M_out` in the in-dependent one.
    pub fixed_degree: u32,
    pub gamma: f64,
    pub n_th: u32,
    pub p_grid: Vec<f64>,
    pub runs: u32,
    pub master_seed: u64,
    /// Attempt cap per run; `None` means 5000 per node.
    pub max_attempts: Option<u64>,
    pub fresh_network_per_run: bool,
    pub rank_order: RankOrder,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            regime: Regime::InDependent,
            n: 1000,
            fixed_degree: 15,
            gamma: DEFAULT_GAMMA,
            n_th: 10,
            p_grid: default_p_grid(),
            runs: 10_000,
            master_seed: 0,
            max_attempts: None,
            fresh_network_per_run: true,
            rank_order: RankOrder::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param(format!("n must be at least 2, got {}", self.n)));
        }
        if self.fixed_degree == 0 {
            return Err(Error::param("fixed_degree must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.n_th == 0 || self.n_th as usize > self.n {
            return Err(Error::param(format!("n_th must lie in 1..={}, got {}", self.n, self.n_th)));
        }
        if self.p_grid.is_empty() {
            return Err(Error::param("p_grid is empty"));
        }
        if self.p_grid.len() >= u32::MAX as usize {
            return Err(Error::param("p_grid is too long"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param(format!("p_grid value {p} outside [0, 1]")));
        }
        if self.runs == 0 {
            return Err(Error::param("runs must be at least 1"));
        }
        if self.max_attempts == Some(0) {
            return Err(Error::param("max_attempts must be at least 1"));
        }
        Ok(())
    }

    pub fn attempt_cap(&self) -> u64 {
        self.max_attempts.unwrap_or_else(|| default_max_attempts(self.n))
    }

    fn sampler(&self) -> PowerLawSampler {
        PowerLawSampler {
            gamma: self.gamma,
            ..PowerLawSampler::default()
        }
    }

    /// Draws a network and its thresholds from `rng`.
    pub fn realise(&self, rng: &mut SimRng) -> Result<(Network, ThresholdAssignment)> {
        let side = self.regime.variable_side();
        let targets = self.sampler().sample(self.n, side, self.fixed_degree, rng)?;
        let net = build_network(&targets, rng);
        let thresholds = ThresholdAssignment::for_network_ordered(&net, side, self.n_th, self.rank_order)?;
        Ok((net, thresholds))
    }
}

/// Aggregates at one value of `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub mean_s_bar: f64,
    pub std_s_bar: f64,
    /// In update attempts. Runs that hit the cap contribute the cap.
    pub mean_t_f: f64,
    pub std_t_f: f64,
    pub failures: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
}

/// Execution knobs that do not change results.
#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
    /// When set, every run writes an attempt trace into this directory.
    pub trace_dir: Option<PathBuf>,
}

/// Steady-state average opinion: the fraction of nodes holding 1.
pub fn average_opinion(opinions: &[u8]) -> f64 {
    let ones = opinions.iter().filter(|&&s| s == 1).count();
    ones as f64 / opinions.len() as f64
}

/// Mean and sample standard deviation, summed in slice order. A single
/// value has deviation 0.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Clone, Copy, Debug)]
struct RunSummary {
    s_bar: f64,
    t_f: u64,
    fixated: bool,
}

impl From<&RunResult> for RunSummary {
    fn from(r: &RunResult) -> Self {
        RunSummary {
            s_bar: r.average_opinion(),
            t_f: r.t_f,
            fixated: r.fixated,
        }
    }
}

fn trace_path(dir: &Path, grid: u32, run: u32) -> PathBuf {
    dir.join(format!("trace_g{grid:04}_r{run:06}.csv"))
}

fn one_run(
    config: &SweepConfig,
    shared: Option<&(Network, ThresholdAssignment)>,
    grid: u32,
    run: u32,
    trace_dir: Option<&Path>,
) -> Result<RunSummary> {
    let mut rng = run_stream(config.master_seed, grid, run);
    let owned;
    let (net, thresholds) = match shared {
        Some((net, thr)) => (net, thr),
        None => {
            owned = config.realise(&mut rng)?;
            (&owned.0, &owned.1)
        }
    };
    let p = config.p_grid[grid as usize];
    let cap = config.attempt_cap();
    let result = match trace_dir {
        None => run_to_fixation(net, thresholds, p, &mut rng, cap)?,
        Some(dir) => {
            let path = trace_path(dir, grid, run);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut out = BufWriter::new(file);
            let r = run_to_fixation_traced(net, thresholds, p, &mut rng, cap, &mut out)?;
            std::io::Write::flush(&mut out).map_err(|e| Error::io(&path, e))?;
            r
        }
    };
    Ok(RunSummary::from(&result))
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(config, &SweepOptions::default())
}

pub fn run_sweep_with(config: &SweepConfig, options: &SweepOptions) -> Result<SweepResult> {
    config.validate()?;
    if let Some(dir) = &options.trace_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let shared = if config.fresh_network_per_run {
        None
    } else {
        Some(config.realise(&mut stream(config.master_seed, SHARED_NETWORK_STREAM))?)
    };

    let grid_len = config.p_grid.len() as u64;
    let runs = u64::from(config.runs);
    let work = || -> Result<Vec<RunSummary>> {
        (0..grid_len * runs)
            .into_par_iter()
            .map(|k| {
                let (grid, run) = ((k / runs) as u32, (k % runs) as u32);
                one_run(config, shared.as_ref(), grid, run, options.trace_dir.as_deref())
            })
            .collect()
    };
    let summaries = match options.threads {
        None => work()?,
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::param(format!("cannot start {k} worker threads: {e}")))?
            .install(work)?,
    };

    let points = config
        .p_grid
        .iter()
        .zip(summaries.chunks(config.runs as usize))
        .map(|(&p, chunk)| {
            let s: Vec<f64> = chunk.iter().map(|r| r.s_bar).collect();
            let t: Vec<f64> = chunk.iter().map(|r| r.t_f as f64).collect();
            let (mean_s_bar, std_s_bar) = mean_and_std(&s);
            let (mean_t_f, std_t_f) = mean_and_std(&t);
            SweepPoint {
                p,
                mean_s_bar,
                std_s_bar,
                mean_t_f,
                std_t_f,
                failures: chunk.iter().filter(|r| !r.fixated).count() as u32,
            }
        })
        .collect();
    Ok(SweepResult {
        config: config.clone(),
        points,
    })
}
