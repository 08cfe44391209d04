//! TOML experiment plans: every sweep dimension may be a scalar or a list,
//! and the plan expands to the cartesian product of [`SweepConfig`]s.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{default_p_grid, Regime, SweepConfig};
use crate::error::{Error, Result};
use crate::netgen::DEFAULT_GAMMA;
use crate::thresholds::RankOrder;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub regime: OneOrMany<Regime>,
    pub n: OneOrMany<usize>,
    pub fixed_degree: OneOrMany<u32>,
    pub n_th: OneOrMany<u32>,
    pub gamma: f64,
    pub p_grid: Vec<f64>,
    pub runs: u32,
    pub master_seed: u64,
    pub max_attempts: Option<u64>,
    pub fresh_network_per_run: bool,
    pub rank_order: RankOrder,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            regime: OneOrMany::Many(vec![Regime::OutDependent, Regime::InDependent]),
            n: OneOrMany::One(1000),
            fixed_degree: OneOrMany::One(15),
            n_th: OneOrMany::One(10),
            gamma: DEFAULT_GAMMA,
            p_grid: default_p_grid(),
            runs: 10_000,
            master_seed: 0,
            max_attempts: None,
            fresh_network_per_run: true,
            rank_order: RankOrder::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    /// One config per (regime, n, fixed_degree, n_th), in that nesting order.
    pub fn expand(&self) -> Result<Vec<SweepConfig>> {
        let mut out = Vec::new();
        for regime in self.regime.to_vec() {
            for n in self.n.to_vec() {
                for fixed_degree in self.fixed_degree.to_vec() {
                    for n_th in self.n_th.to_vec() {
                        let cfg = SweepConfig {
                            regime,
                            n,
                            fixed_degree,
                            gamma: self.gamma,
                            n_th,
                            p_grid: self.p_grid.clone(),
                            runs: self.runs,
                            master_seed: self.master_seed,
                            max_attempts: self.max_attempts,
                            fresh_network_per_run: self.fresh_network_per_run,
                            rank_order: self.rank_order,
                        };
                        cfg.validate()?;
                        out.push(cfg);
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::param("experiment plan expands to no sweeps"));
        }
        Ok(out)
    }
}
