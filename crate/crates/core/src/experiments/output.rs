//! Results CSV: one row per grid point.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Regime, SweepResult};
use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str =
    "regime,n,fixed_degree,n_th,p,mean_s_bar,std_s_bar,mean_t_f_attempts,std_t_f,failures,runs,seed";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub regime: Regime,
    pub n: usize,
    pub fixed_degree: u32,
    pub n_th: u32,
    pub p: f64,
    pub mean_s_bar: f64,
    pub std_s_bar: f64,
    pub mean_t_f_attempts: f64,
    pub std_t_f: f64,
    pub failures: u32,
    pub runs: u32,
    pub seed: u64,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        let c = &self.config;
        self.points
            .iter()
            .map(|pt| SweepRow {
                regime: c.regime,
                n: c.n,
                fixed_degree: c.fixed_degree,
                n_th: c.n_th,
                p: pt.p,
                mean_s_bar: pt.mean_s_bar,
                std_s_bar: pt.std_s_bar,
                mean_t_f_attempts: pt.mean_t_f,
                std_t_f: pt.std_t_f,
                failures: pt.failures,
                runs: c.runs,
                seed: c.master_seed,
            })
            .collect()
    }
}

/// The CSV text for several sweeps. Floats use the shortest representation
/// that parses back to the same value.
pub fn results_csv(results: &[SweepResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in results.iter().flat_map(SweepResult::rows) {
        w.serialize(row).expect("in-memory csv write");
    }
    let bytes = w.into_inner().expect("in-memory csv flush");
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    if text.is_empty() {
        format!("{RESULTS_HEADER}\n")
    } else {
        text
    }
}

pub fn write_results(results: &[SweepResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, results_csv(results)).map_err(|e| Error::io(path, e))
}

pub fn emit_results(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    write_results(std::slice::from_ref(result), path)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?;
    if header.iter().collect::<Vec<_>>().join(",") != RESULTS_HEADER {
        return Err(Error::Parse {
            path: path.to_owned(),
            message: format!("expected header `{RESULTS_HEADER}`"),
        });
    }
    reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}
