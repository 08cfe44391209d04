//! Follower/following cluster analysis.
//!
//! Users are binned by follower or following count into half-open,
//! upper-inclusive intervals; each cluster's retweet ratio is compared with
//! the next one by a one-sided 2x2 chi-square test (no continuity
//! correction). The one-sided p-value is the upper normal tail at the signed
//! root of the statistic, and a test counts as significant only when the
//! earlier cluster's ratio is the larger one.

use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub follower_count: u64,
    pub following_count: u64,
    #[serde(deserialize_with = "flexible_bool")]
    pub retweeted: bool,
}

fn flexible_bool<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Ok(true),
        "false" | "0" | "no" | "n" => Ok(false),
        other => Err(serde::de::Error::custom(format!("not a boolean: `{other}`"))),
    }
}

pub fn read_user_records(path: impl AsRef<Path>) -> Result<Vec<UserRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Follower,
    Following,
}

impl Axis {
    pub fn count(self, r: &UserRecord) -> u64 {
        match self {
            Axis::Follower => r.follower_count,
            Axis::Following => r.following_count,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "follower" | "followers" => Ok(Axis::Follower),
            "following" | "followings" => Ok(Axis::Following),
            _ => Err(Error::param(format!("unknown axis `{s}`"))),
        }
    }
}

/// Interval edges `e0 < e1 < ... < ek` giving clusters `(e0, e1], ...,
/// (e(k-1), ek]`, plus `(ek, inf)` when the top is open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundaries {
    edges: Vec<u64>,
    open_top: bool,
}

impl Boundaries {
    pub fn new(edges: Vec<u64>, open_top: bool) -> Result<Self> {
        let needed = if open_top { 1 } else { 2 };
        if edges.len() < needed {
            return Err(Error::param("boundaries define no cluster"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(format!("boundaries must be strictly increasing: {edges:?}")));
        }
        Ok(Boundaries { edges, open_top })
    }

    /// Parses a comma list such as `0,1000,10000,inf`.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
        let open_top = tokens.last().is_some_and(|t| t.eq_ignore_ascii_case("inf"));
        let numeric = &tokens[..tokens.len() - usize::from(open_top)];
        let edges = numeric
            .iter()
            .map(|t| t.parse::<u64>().map_err(|_| Error::param(format!("bad boundary `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(edges, open_top)
    }

    /// `(0,10], (10,100], ..., (10^6,10^7], (10^7, inf)`: eight clusters.
    pub fn default_eight() -> Self {
        let mut edges = vec![0];
        edges.extend((1..=7).map(|k| 10u64.pow(k)));
        Boundaries { edges, open_top: true }
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1 + usize::from(self.open_top)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lower(&self, k: usize) -> u64 {
        self.edges[k]
    }

    /// `None` for the open top cluster.
    pub fn upper(&self, k: usize) -> Option<u64> {
        self.edges.get(k + 1).copied()
    }

    pub fn cluster_of(&self, count: u64) -> Option<usize> {
        // first edge >= count closes the interval containing it
        let k = self.edges.partition_point(|&e| e < count);
        if k == 0 {
            None
        } else if k < self.edges.len() || self.open_top {
            Some(k - 1)
        } else {
            None
        }
    }
}

impl fmt::Display for Boundaries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))?;
        if self.open_top {
            write!(f, ",inf")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterCounts {
    pub users: Vec<u64>,
    pub retweeters: Vec<u64>,
    /// Records whose count lies outside every cluster.
    pub outside: u64,
}

pub fn cluster_counts(records: &[UserRecord], axis: Axis, boundaries: &Boundaries) -> ClusterCounts {
    let mut c = ClusterCounts {
        users: vec![0; boundaries.len()],
        retweeters: vec![0; boundaries.len()],
        outside: 0,
    };
    for r in records {
        match boundaries.cluster_of(axis.count(r)) {
            Some(k) => {
                c.users[k] += 1;
                c.retweeters[k] += u64::from(r.retweeted);
            }
            None => c.outside += 1,
        }
    }
    c
}

pub type CountMatrix = Vec<Vec<u64>>;

/// Joint (follower cluster x following cluster) user and retweeter counts.
pub fn joint_counts(
    records: &[UserRecord],
    follower: &Boundaries,
    following: &Boundaries,
) -> (CountMatrix, CountMatrix) {
    let mut users = vec![vec![0; following.len()]; follower.len()];
    let mut retweeters = users.clone();
    for r in records {
        if let (Some(i), Some(j)) = (
            follower.cluster_of(r.follower_count),
            following.cluster_of(r.following_count),
        ) {
            users[i][j] += 1;
            retweeters[i][j] += u64::from(r.retweeted);
        }
    }
    (users, retweeters)
}

/// Cell-wise retweeters / users; empty cells are `None`, never 0.
pub fn ratio_matrix(users: &CountMatrix, retweeters: &CountMatrix) -> Result<Vec<Vec<Option<f64>>>> {
    let same_shape = users.len() == retweeters.len()
        && users.iter().zip(retweeters).all(|(a, b)| a.len() == b.len());
    if !same_shape {
        return Err(Error::param("user and retweeter matrices differ in shape"));
    }
    users
        .iter()
        .zip(retweeters)
        .map(|(urow, rrow)| {
            urow.iter()
                .zip(rrow)
                .map(|(&u, &r)| match (u, r) {
                    (0, _) => Ok(None),
                    (u, r) if r > u => Err(Error::param(format!("{r} retweeters exceed {u} users"))),
                    (u, r) => Ok(Some(r as f64 / u as f64)),
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub chi2: f64,
    pub p_one_sided: f64,
    pub significant: bool,
}

/// Upper tail of the standard normal.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// One-sided test that `a / n1` exceeds `b / n2`. Returns `None` when either
/// cluster is empty.
pub fn chi_square_one_sided(a: u64, n1: u64, b: u64, n2: u64, alpha: f64) -> Result<Option<ChiSquareTest>> {
    if a > n1 || b > n2 {
        return Err(Error::param(format!("retweeters exceed users in ({a}/{n1}) vs ({b}/{n2})")));
    }
    if n1 == 0 || n2 == 0 {
        return Ok(None);
    }
    // table [[a, c], [b, d]]
    let (a_f, b_f) = (a as f64, b as f64);
    let (c_f, d_f) = ((n1 - a) as f64, (n2 - b) as f64);
    let total = (n1 + n2) as f64;
    let col_yes = a_f + b_f;
    let col_no = c_f + d_f;
    let chi2 = if col_yes == 0.0 || col_no == 0.0 {
        0.0
    } else {
        let cross = a_f * d_f - c_f * b_f;
        total * cross * cross / (n1 as f64 * n2 as f64 * col_yes * col_no)
    };
    // compare a/n1 with b/n2 exactly
    let first_higher = u128::from(a) * u128::from(n2) > u128::from(b) * u128::from(n1);
    let first_lower = u128::from(a) * u128::from(n2) < u128::from(b) * u128::from(n1);
    let z = match (first_higher, first_lower) {
        (true, _) => chi2.sqrt(),
        (_, true) => -chi2.sqrt(),
        _ => 0.0,
    };
    let p_one_sided = normal_upper_tail(z);
    Ok(Some(ChiSquareTest {
        chi2,
        p_one_sided,
        significant: first_higher && p_one_sided < alpha,
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterReport {
    pub axis: Axis,
    pub boundaries: Boundaries,
    pub alpha: f64,
    pub user_counts: Vec<u64>,
    pub retweeter_counts: Vec<u64>,
    pub ratios: Vec<Option<f64>>,
    /// `tests[k]` compares cluster `k` with cluster `k + 1`.
    pub tests: Vec<Option<ChiSquareTest>>,
}

pub fn monotonicity_report(
    records: &[UserRecord],
    axis: Axis,
    boundaries: &Boundaries,
    alpha: f64,
) -> Result<ClusterReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let counts = cluster_counts(records, axis, boundaries);
    let ratios = ratio_matrix(&vec![counts.users.clone()], &vec![counts.retweeters.clone()])?
        .pop()
        .unwrap_or_default();
    let tests = (1..counts.users.len())
        .map(|k| {
            chi_square_one_sided(
                counts.retweeters[k - 1],
                counts.users[k - 1],
                counts.retweeters[k],
                counts.users[k],
                alpha,
            )
        })
        .collect::<Result<_>>()?;
    Ok(ClusterReport {
        axis,
        boundaries: boundaries.clone(),
        alpha,
        user_counts: counts.users,
        retweeter_counts: counts.retweeters,
        ratios,
        tests,
    })
}

pub const REPORT_HEADER: &str = "kind,index,lower,upper,users,retweeters,ratio,chi2,p_one_sided,significant";

impl ClusterReport {
    /// One `cluster` row per cluster, then one `test` row per defined
    /// consecutive test. A test row spans from the lower edge of the first
    /// cluster to the upper edge of the second.
    pub fn to_csv(&self) -> String {
        let upper = |k: usize| self.boundaries.upper(k).map_or_else(|| "inf".to_string(), |u| u.to_string());
        let mut out = format!("{REPORT_HEADER}\n");
        for k in 0..self.user_counts.len() {
            let ratio = self.ratios[k].map_or_else(String::new, |r| r.to_string());
            let _ = writeln!(
                out,
                "cluster,{k},{},{},{},{},{ratio},,,",
                self.boundaries.lower(k),
                upper(k),
                self.user_counts[k],
                self.retweeter_counts[k],
            );
        }
        for (k, t) in self.tests.iter().enumerate() {
            if let Some(t) = t {
                let _ = writeln!(
                    out,
                    "test,{k},{},{},{},{},,{},{},{}",
                    self.boundaries.lower(k),
                    upper(k + 1),
                    self.user_counts[k] + self.user_counts[k + 1],
                    self.retweeter_counts[k] + self.retweeter_counts[k + 1],
                    t.chi2,
                    t.p_one_sided,
                    t.significant,
                );
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
