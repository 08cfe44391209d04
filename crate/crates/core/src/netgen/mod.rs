//! Directed configuration-model multigraphs with a power-law degree side.
//!
//! One side of the network (out or in) gets per-node targets
//! `max(floor, round(sqrt(n) * u^gamma))` with `u ~ Uniform(0, 1]`; the
//! other side gets the same fixed degree for every node. Stubs of both sides
//! are shuffled and paired position by position. Self-loop pairings are
//! repaired by swapping with a random other pairing and, once the repair
//! budget runs out, discarded. Repeated pairs become edge multiplicity.

mod io;

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_edge_list, read_metadata, write_edge_list, write_metadata, NetworkMetadata, EDGE_LIST_HEADER};

pub const DEFAULT_GAMMA: f64 = 3.0;
pub const DEFAULT_FLOOR: u32 = 1;
/// Self-loop repair attempts allowed per node.
pub const REPAIR_ATTEMPTS_PER_NODE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Out,
    In,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Out => Side::In,
            Side::In => Side::Out,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Out => "out",
            Side::In => "in",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-node stub counts for the power-law side plus the fixed degree of the
/// opposite side.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeTargets {
    variable_side: Side,
    targets: Vec<u32>,
    fixed_degree: u32,
    gamma: f64,
}

impl DegreeTargets {
    /// Wraps explicit targets, checking the structural invariants.
    pub fn new(variable_side: Side, targets: Vec<u32>, fixed_degree: u32, gamma: f64) -> Result<Self> {
        let n = targets.len();
        if n < 2 {
            return Err(Error::param(format!("need at least 2 nodes, got {n}")));
        }
        if fixed_degree == 0 {
            return Err(Error::param("fixed degree must be at least 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param(format!("gamma must be positive and finite, got {gamma}")));
        }
        if let Some(i) = targets.iter().position(|&t| t == 0) {
            return Err(Error::param(format!("target of node {i} is zero")));
        }
        let cap = cutoff(n);
        if let Some(i) = targets.iter().position(|&t| t > cap) {
            return Err(Error::param(format!(
                "target {} of node {i} exceeds the structural cutoff {cap}",
                targets[i]
            )));
        }
        Ok(DegreeTargets {
            variable_side,
            targets,
            fixed_degree,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.targets.len()
    }

    pub fn variable_side(&self) -> Side {
        self.variable_side
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn fixed_degree(&self) -> u32 {
        self.fixed_degree
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn variable_stubs(&self) -> u64 {
        self.targets.iter().map(|&t| u64::from(t)).sum()
    }

    pub fn fixed_stubs(&self) -> u64 {
        self.n() as u64 * u64::from(self.fixed_degree)
    }
}

/// `ceil(sqrt(n))`, the largest value a target may take.
pub fn cutoff(n: usize) -> u32 {
    let mut c = (n as f64).sqrt().ceil() as u64;
    // guard against sqrt rounding on perfect squares
    while c > 0 && (c - 1) * (c - 1) >= n as u64 {
        c -= 1;
    }
    while c * c < n as u64 {
        c += 1;
    }
    c as u32
}

/// The power-law sampler: `max(floor, round(sqrt(n) * u^gamma))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawSampler {
    pub gamma: f64,
    pub floor: u32,
}

impl Default for PowerLawSampler {
    fn default() -> Self {
        PowerLawSampler {
            gamma: DEFAULT_GAMMA,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl PowerLawSampler {
    /// Target for a given uniform draw `u` in (0, 1].
    pub fn target(&self, n: usize, u: f64) -> u32 {
        let raw = (n as f64).sqrt() * u.powf(self.gamma);
        (raw.round() as u32).max(self.floor)
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        variable_side: Side,
        fixed_degree: u32,
        rng: &mut R,
    ) -> Result<DegreeTargets> {
        if n < 2 {
            return Err(Error::param(format!("need at least 2 nodes, got {n}")));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            )));
        }
        if self.floor == 0 || self.floor > cutoff(n) {
            return Err(Error::param(format!(
                "floor must lie in 1..={} for n = {n}, got {}",
                cutoff(n),
                self.floor
            )));
        }
        let targets = (0..n)
            .map(|_| {
                // random() is on [0, 1); flip it onto (0, 1]
                let u = 1.0 - rng.random::<f64>();
                self.target(n, u)
            })
            .collect();
        DegreeTargets::new(variable_side, targets, fixed_degree, self.gamma)
    }
}

/// Draws power-law targets with the default floor of 1.
pub fn sample_degree_targets<R: Rng + ?Sized>(
    n: usize,
    gamma: f64,
    variable_side: Side,
    fixed_degree: u32,
    rng: &mut R,
) -> Result<DegreeTargets> {
    PowerLawSampler {
        gamma,
        floor: DEFAULT_FLOOR,
    }
    .sample(n, variable_side, fixed_degree, rng)
}

/// A neighbour together with the multiplicity of the connecting edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Link {
    pub node: u32,
    pub multiplicity: u32,
}

/// Compressed adjacency: the links of node `i` are
/// `links[offsets[i]..offsets[i + 1]]`, sorted by neighbour id.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<usize>,
    links: Vec<Link>,
}

impl Adjacency {
    fn of(&self, i: usize) -> &[Link] {
        &self.links[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// How the stub matching went.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiringReport {
    /// Stub pairs formed, including later discarded self-loops.
    pub matched_pairs: u64,
    /// Stubs on the larger side that had no partner.
    pub unmatched_stubs: u64,
    /// Self-loop pairs left after the repair budget ran out.
    pub discarded_self_loops: u64,
    pub repair_attempts: u64,
}

/// Directed multigraph with forward and reverse adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    n: usize,
    variable_side: Side,
    fixed_degree: u32,
    out_adj: Adjacency,
    in_adj: Adjacency,
    out_degree: Vec<u32>,
    in_degree: Vec<u32>,
    wiring: WiringReport,
}

impl Network {
    /// Builds a network from directed `(source, target)` pairs; repeated
    /// pairs accumulate multiplicity. Self-loops are rejected.
    pub fn from_pairs(
        n: usize,
        variable_side: Side,
        fixed_degree: u32,
        pairs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut keys: Vec<u64> = Vec::new();
        for (s, t) in pairs {
            if s as usize >= n || t as usize >= n {
                return Err(Error::param(format!("edge {s}->{t} out of range for n = {n}")));
            }
            if s == t {
                return Err(Error::param(format!("self-loop on node {s}")));
            }
            keys.push((u64::from(s) << 32) | u64::from(t));
        }
        keys.sort_unstable();
        let triples = keys.chunk_by(|a, b| a == b).map(|run| {
            let k = run[0];
            ((k >> 32) as u32, k as u32, run.len() as u32)
        });
        Ok(Self::from_sorted_triples(n, variable_side, fixed_degree, triples))
    }

    /// `triples` must be sorted by (source, target) with no duplicates.
    fn from_sorted_triples(
        n: usize,
        variable_side: Side,
        fixed_degree: u32,
        triples: impl Iterator<Item = (u32, u32, u32)>,
    ) -> Self {
        let mut out_offsets = vec![0usize; n + 1];
        let mut out_links = Vec::new();
        let mut out_degree = vec![0u32; n];
        let mut in_degree = vec![0u32; n];
        let mut in_counts = vec![0usize; n];
        for (s, t, m) in triples {
            out_offsets[s as usize + 1] += 1;
            out_links.push(Link {
                node: t,
                multiplicity: m,
            });
            out_degree[s as usize] += m;
            in_degree[t as usize] += m;
            in_counts[t as usize] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let out_adj = Adjacency {
            offsets: out_offsets,
            links: out_links,
        };

        // transpose; iterating sources in order keeps each in-list sorted
        let mut in_offsets = vec![0usize; n + 1];
        for i in 0..n {
            in_offsets[i + 1] = in_offsets[i] + in_counts[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_links = vec![
            Link {
                node: 0,
                multiplicity: 0
            };
            out_adj.links.len()
        ];
        for s in 0..n {
            for l in out_adj.of(s) {
                let slot = &mut cursor[l.node as usize];
                in_links[*slot] = Link {
                    node: s as u32,
                    multiplicity: l.multiplicity,
                };
                *slot += 1;
            }
        }
        let in_adj = Adjacency {
            offsets: in_offsets,
            links: in_links,
        };

        Network {
            n,
            variable_side,
            fixed_degree,
            out_adj,
            in_adj,
            out_degree,
            in_degree,
            wiring: WiringReport::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variable_side(&self) -> Side {
        self.variable_side
    }

    pub fn fixed_degree(&self) -> u32 {
        self.fixed_degree
    }

    pub fn wiring(&self) -> &WiringReport {
        &self.wiring
    }

    /// Out-links `(target, multiplicity)` of node `i`, sorted by target.
    pub fn out_links(&self, i: usize) -> &[Link] {
        self.out_adj.of(i)
    }

    /// In-links `(source, multiplicity)` of node `i`, sorted by source.
    pub fn in_links(&self, i: usize) -> &[Link] {
        self.in_adj.of(i)
    }

    pub fn out_degrees(&self) -> &[u32] {
        &self.out_degree
    }

    pub fn in_degrees(&self) -> &[u32] {
        &self.in_degree
    }

    pub fn degrees(&self, side: Side) -> &[u32] {
        match side {
            Side::Out => &self.out_degree,
            Side::In => &self.in_degree,
        }
    }

    /// Total edge multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.out_degree.iter().map(|&d| u64::from(d)).sum()
    }

    /// Distinct `(source, target)` pairs in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.n).flat_map(move |s| {
            self.out_links(s)
                .iter()
                .map(move |l| (s as u32, l.node, l.multiplicity))
        })
    }

    /// Full-scan check of the structural invariants: no self-loops, degree
    /// bookkeeping, transpose consistency and fixed-side bound.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        let mut out_deg = vec![0u32; self.n];
        let mut in_deg = vec![0u32; self.n];
        let mut forward = Vec::new();
        for (s, t, m) in self.edges() {
            if s == t {
                return bad(format!("self-loop on node {s}"));
            }
            if m == 0 {
                return bad(format!("zero multiplicity on {s}->{t}"));
            }
            out_deg[s as usize] += m;
            in_deg[t as usize] += m;
            forward.push((s, t, m));
        }
        let mut backward: Vec<(u32, u32, u32)> = (0..self.n)
            .flat_map(|t| self.in_links(t).iter().map(move |l| (l.node, t as u32, l.multiplicity)))
            .collect();
        backward.sort_unstable();
        if forward != backward {
            return bad("in-adjacency is not the transpose of out-adjacency".into());
        }
        if out_deg != self.out_degree || in_deg != self.in_degree {
            return bad("cached degrees disagree with adjacency".into());
        }
        let fixed = self.degrees(self.variable_side.opposite());
        if let Some(i) = fixed.iter().position(|&d| d > self.fixed_degree) {
            return bad(format!(
                "node {i} has fixed-side degree {} > {}",
                fixed[i], self.fixed_degree
            ));
        }
        Ok(())
    }

    /// Checks that no node exceeds its variable-side target.
    pub fn respects_targets(&self, targets: &DegreeTargets) -> bool {
        targets.n() == self.n
            && self
                .degrees(self.variable_side)
                .iter()
                .zip(targets.targets())
                .all(|(&d, &t)| d <= t)
    }
}

fn expand_stubs(counts: impl Iterator<Item = u32>) -> Vec<u32> {
    counts
        .enumerate()
        .flat_map(|(i, c)| std::iter::repeat_n(i as u32, c as usize))
        .collect()
}

/// Wires a network against the given targets.
pub fn build_network<R: Rng + ?Sized>(targets: &DegreeTargets, rng: &mut R) -> Network {
    let n = targets.n();
    let mut variable = expand_stubs(targets.targets().iter().copied());
    let mut fixed = expand_stubs(std::iter::repeat_n(targets.fixed_degree(), n));
    variable.shuffle(rng);
    fixed.shuffle(rng);

    let m = variable.len().min(fixed.len());
    let unmatched = (variable.len() + fixed.len() - 2 * m) as u64;
    variable.truncate(m);
    fixed.truncate(m);
    let (sources, mut sinks) = match targets.variable_side() {
        Side::Out => (variable, fixed),
        Side::In => (fixed, variable),
    };

    let budget = REPAIR_ATTEMPTS_PER_NODE * n;
    let mut attempts = 0usize;
    if m > 1 {
        for k in 0..m {
            while sources[k] == sinks[k] && attempts < budget {
                attempts += 1;
                let mut j = rng.random_range(0..m - 1);
                if j >= k {
                    j += 1;
                }
                if sources[k] != sinks[j] && sources[j] != sinks[k] {
                    sinks.swap(k, j);
                }
            }
        }
    }

    let mut keys = Vec::with_capacity(m);
    let mut discarded = 0u64;
    for (&s, &t) in sources.iter().zip(&sinks) {
        if s == t {
            discarded += 1;
        } else {
            keys.push((u64::from(s) << 32) | u64::from(t));
        }
    }
    keys.sort_unstable();
    let triples = keys.chunk_by(|a, b| a == b).map(|run| {
        let k = run[0];
        ((k >> 32) as u32, k as u32, run.len() as u32)
    });
    let mut net = Network::from_sorted_triples(n, targets.variable_side(), targets.fixed_degree(), triples);
    net.wiring = WiringReport {
        matched_pairs: m as u64,
        unmatched_stubs: unmatched,
        discarded_self_loops: discarded,
        repair_attempts: attempts as u64,
    };
    net
}

#[derive(Clone, Debug, PartialEq)]
pub struct SideStats {
    pub min: u32,
    pub max: u32,
    pub mean: f64,
    /// `histogram[d]` is the number of nodes with degree `d`.
    pub histogram: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkStats {
    pub n: usize,
    pub edges: u64,
    pub distinct_pairs: usize,
    pub mean_degree: f64,
    pub out: SideStats,
    pub inward: SideStats,
}

fn side_stats(degrees: &[u32]) -> SideStats {
    let max = degrees.iter().copied().max().unwrap_or(0);
    let min = degrees.iter().copied().min().unwrap_or(0);
    let mut histogram = vec![0usize; max as usize + 1];
    for &d in degrees {
        histogram[d as usize] += 1;
    }
    let total: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
    SideStats {
        min,
        max,
        mean: if degrees.is_empty() { 0.0 } else { total as f64 / degrees.len() as f64 },
        histogram,
    }
}

pub fn network_stats(net: &Network) -> NetworkStats {
    let edges = net.edge_count();
    NetworkStats {
        n: net.n(),
        edges,
        distinct_pairs: net.out_adj.links.len(),
        mean_degree: if net.n() == 0 { 0.0 } else { edges as f64 / net.n() as f64 },
        out: side_stats(net.out_degrees()),
        inward: side_stats(net.in_degrees()),
    }
}
