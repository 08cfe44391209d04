//! Rank-group thresholds.
//!
//! Nodes are ranked by degree on one side (ties by node id) and cut into
//! `n_th` consecutive rank groups. [`rank_by_degree`] ranks lowest degree
//! first; [`RankOrder`] selects which end of the ordering gets rank 1 when
//! thresholds are built for a network. Group
//! `g` receives `0.5 + 0.5 (g - 1) / (n_th - 1)`, so thresholds run evenly
//! from 0.5 to 1 and average 0.75. Each level is kept as an exact fraction
//! so that the update rule compares integers, not rounded floats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::netgen::{Network, Side};

/// Which end of the degree ordering receives rank 1 (threshold 0.5).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankOrder {
    /// Lowest degree first: thresholds grow with degree.
    Ascending,
    /// Highest degree first: thresholds shrink with degree. This is the
    /// ordering used by sweeps unless configured otherwise.
    #[default]
    Descending,
}

/// A threshold `num / den` in `[0.5, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Threshold {
    num: u32,
    den: u32,
}

impl Threshold {
    /// The level of group `g` (1-based) out of `n_th`.
    pub fn level(g: u32, n_th: u32) -> Threshold {
        debug_assert!(g >= 1 && g <= n_th);
        if n_th == 1 {
            Threshold { num: 3, den: 4 }
        } else {
            Threshold {
                num: n_th + g - 2,
                den: 2 * (n_th - 1),
            }
        }
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdAssignment {
    levels: Vec<Threshold>,
    phi: Vec<f64>,
    rank: Vec<u32>,
    n_th: u32,
    ranked_side: Option<Side>,
}

impl ThresholdAssignment {
    /// Ranks `net` on `side` in the default order and assigns `n_th`
    /// threshold groups.
    pub fn for_network(net: &Network, side: Side, n_th: u32) -> Result<Self> {
        Self::for_network_ordered(net, side, n_th, RankOrder::default())
    }

    pub fn for_network_ordered(net: &Network, side: Side, n_th: u32, order: RankOrder) -> Result<Self> {
        let rank = rank_degrees_ordered(net.degrees(side), order);
        let mut a = assign_thresholds(&rank, n_th)?;
        a.ranked_side = Some(side);
        Ok(a)
    }

    /// Every node at the same threshold; useful for tests and homogeneous baselines.
    pub fn uniform(n: usize, level: Threshold) -> Self {
        ThresholdAssignment {
            levels: vec![level; n],
            phi: vec![level.value(); n],
            rank: (1..=n as u32).collect(),
            n_th: 1,
            ranked_side: None,
        }
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Threshold] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> Threshold {
        self.levels[i]
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn rank(&self) -> &[u32] {
        &self.rank
    }

    pub fn n_th(&self) -> u32 {
        self.n_th
    }

    pub fn ranked_side(&self) -> Option<Side> {
        self.ranked_side
    }

    pub fn mean_phi(&self) -> f64 {
        self.phi.iter().sum::<f64>() / self.phi.len() as f64
    }

    /// `node,degree,rank,phi` rows for auditing an assignment.
    pub fn audit_csv(&self, degrees: &[u32]) -> String {
        let mut out = String::from("node,degree,rank,phi\n");
        for i in 0..self.n() {
            let _ = writeln!(out, "{i},{},{},{}", degrees[i], self.rank[i], self.phi[i]);
        }
        out
    }

    pub fn write_audit(&self, degrees: &[u32], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.audit_csv(degrees)).map_err(|e| Error::io(path, e))
    }
}

/// 1-based ranks by ascending degree, ties broken by node id.
pub fn rank_degrees(degrees: &[u32]) -> Vec<u32> {
    rank_degrees_ordered(degrees, RankOrder::Ascending)
}

/// 1-based ranks in the given degree order; ties always go to the lower node id.
pub fn rank_degrees_ordered(degrees: &[u32], direction: RankOrder) -> Vec<u32> {
    let mut order: Vec<u32> = (0..degrees.len() as u32).collect();
    // stable: equal degrees keep id order
    match direction {
        RankOrder::Ascending => order.sort_by_key(|&i| degrees[i as usize]),
        RankOrder::Descending => order.sort_by_key(|&i| std::cmp::Reverse(degrees[i as usize])),
    }
    let mut rank = vec![0u32; degrees.len()];
    for (pos, &node) in order.iter().enumerate() {
        rank[node as usize] = pos as u32 + 1;
    }
    rank
}

pub fn rank_by_degree(net: &Network, side: Side) -> Vec<u32> {
    rank_degrees(net.degrees(side))
}

/// 1-based group of rank `r` among `n` nodes split into `n_th` groups:
/// `ceil(r * n_th / n)`.
pub fn group_of(r: u32, n: usize, n_th: u32) -> u32 {
    let n = n as u64;
    (u64::from(r) * u64::from(n_th)).div_ceil(n) as u32
}

pub fn assign_thresholds(rank: &[u32], n_th: u32) -> Result<ThresholdAssignment> {
    let n = rank.len();
    if n == 0 {
        return Err(Error::param("cannot assign thresholds to an empty network"));
    }
    if n_th == 0 || n_th as usize > n {
        return Err(Error::param(format!("n_th must lie in 1..={n}, got {n_th}")));
    }
    let mut seen = vec![false; n];
    for &r in rank {
        let ok = r >= 1 && (r as usize) <= n && !std::mem::replace(&mut seen[r as usize - 1], true);
        if !ok {
            return Err(Error::param(format!("rank vector is not a permutation of 1..={n}")));
        }
    }
    let levels: Vec<Threshold> = rank
        .iter()
        .map(|&r| Threshold::level(group_of(r, n, n_th), n_th))
        .collect();
    Ok(ThresholdAssignment {
        phi: levels.iter().map(|l| l.value()).collect(),
        levels,
        rank: rank.to_vec(),
        n_th,
        ranked_side: None,
    })
}
