//! Asynchronous reversible threshold dynamics.
//!
//! At every attempt one node is drawn uniformly. A node holding 0 adopts 1
//! when the multiplicity-weighted share of its in-neighbours holding 1 is
//! strictly above its threshold; a node holding 1 drops to 0 when that share
//! is strictly below `1 - phi`. Nodes without in-neighbours never change.
//!
//! The set of nodes whose flip condition currently holds is maintained
//! incrementally, so reaching a fixed point is detected exactly: a flip only
//! changes the neighbourhood average of the flipped node's out-neighbours.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::netgen::Network;
use crate::thresholds::{Threshold, ThresholdAssignment};

/// Attempt cap per node used when none is given.
pub const DEFAULT_ATTEMPTS_PER_NODE: u64 = 5000;

/// The flip rule on a precomputed neighbourhood average. `None` stands for a
/// node without in-neighbours.
pub fn flip_eligible(opinion: u8, o_bar: Option<f64>, phi: f64) -> bool {
    match o_bar {
        None => false,
        Some(o) if opinion == 0 => o > phi,
        Some(o) => o < 1.0 - phi,
    }
}

/// The same rule evaluated exactly on integer weights: `ones` of the
/// `total` incoming multiplicity comes from nodes holding 1.
#[inline]
pub fn flip_eligible_exact(opinion: u8, ones: u32, total: u32, phi: Threshold) -> bool {
    if total == 0 {
        return false;
    }
    let ones = u64::from(ones);
    let total = u64::from(total);
    let (num, den) = (u64::from(phi.num()), u64::from(phi.den()));
    if opinion == 0 {
        ones * den > total * num
    } else {
        ones * den < total * (den - num)
    }
}

/// Multiplicity-weighted share of node `i`'s in-neighbours holding 1,
/// computed by a fresh scan of its in-links.
pub fn weighted_in_average(net: &Network, opinions: &[u8], i: usize) -> Option<f64> {
    let (mut ones, mut total) = (0u64, 0u64);
    for l in net.in_links(i) {
        total += u64::from(l.multiplicity);
        ones += u64::from(l.multiplicity) * u64::from(opinions[l.node as usize]);
    }
    (total > 0).then(|| ones as f64 / total as f64)
}

/// Set of node ids with O(1) insert, remove and membership.
#[derive(Clone, Debug)]
struct NodeSet {
    members: Vec<u32>,
    slot: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl NodeSet {
    fn new(n: usize) -> Self {
        NodeSet {
            members: Vec::new(),
            slot: vec![ABSENT; n],
        }
    }

    #[inline]
    fn contains(&self, i: usize) -> bool {
        self.slot[i] != ABSENT
    }

    #[inline]
    fn set(&mut self, i: usize, present: bool) {
        match (self.contains(i), present) {
            (false, true) => {
                self.slot[i] = self.members.len() as u32;
                self.members.push(i as u32);
            }
            (true, false) => {
                let at = self.slot[i] as usize;
                let last = *self.members.last().expect("non-empty");
                self.members.swap_remove(at);
                if last as usize != i {
                    self.slot[last as usize] = at as u32;
                }
                self.slot[i] = ABSENT;
            }
            _ => {}
        }
    }
}

/// Opinions, cached in-neighbour weights and the set of flippable nodes.
#[derive(Clone, Debug)]
pub struct OpinionState {
    opinions: Vec<u8>,
    /// Incoming multiplicity from nodes currently holding 1.
    ones_in: Vec<u32>,
    unstable: NodeSet,
    ones: usize,
    clock: u64,
    flips: u64,
}

impl OpinionState {
    /// State for given opinions; the unstable set is found by full scan.
    pub fn from_opinions(net: &Network, thresholds: &ThresholdAssignment, opinions: Vec<u8>) -> Result<Self> {
        let n = net.n();
        if opinions.len() != n || thresholds.n() != n {
            return Err(Error::param(format!(
                "size mismatch: network {n}, opinions {}, thresholds {}",
                opinions.len(),
                thresholds.n()
            )));
        }
        if let Some(i) = opinions.iter().position(|&s| s > 1) {
            return Err(Error::param(format!("opinion of node {i} is not binary")));
        }
        let ones_in = (0..n)
            .map(|i| {
                net.in_links(i)
                    .iter()
                    .map(|l| l.multiplicity * u32::from(opinions[l.node as usize]))
                    .sum()
            })
            .collect();
        let mut state = OpinionState {
            ones: opinions.iter().filter(|&&s| s == 1).count(),
            opinions,
            ones_in,
            unstable: NodeSet::new(n),
            clock: 0,
            flips: 0,
        };
        for i in 0..n {
            state.refresh(net, thresholds, i);
        }
        Ok(state)
    }

    pub fn opinions(&self) -> &[u8] {
        &self.opinions
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn is_fixated(&self) -> bool {
        self.unstable.members.is_empty()
    }

    /// Currently flippable nodes, in no particular order.
    pub fn unstable(&self) -> &[u32] {
        &self.unstable.members
    }

    pub fn is_unstable(&self, i: usize) -> bool {
        self.unstable.contains(i)
    }

    #[inline]
    fn refresh(&mut self, net: &Network, thresholds: &ThresholdAssignment, i: usize) {
        let eligible = flip_eligible_exact(
            self.opinions[i],
            self.ones_in[i],
            net.in_degrees()[i],
            thresholds.level(i),
        );
        self.unstable.set(i, eligible);
    }
}

/// Draws Bernoulli(`p`) opinions.
pub fn init_opinions<R: Rng + ?Sized>(
    net: &Network,
    thresholds: &ThresholdAssignment,
    p: f64,
    rng: &mut R,
) -> Result<OpinionState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("initial probability must lie in [0, 1], got {p}")));
    }
    let opinions = (0..net.n()).map(|_| u8::from(rng.random_bool(p))).collect();
    OpinionState::from_opinions(net, thresholds, opinions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub node: u32,
    pub flipped: bool,
}

/// A network and its thresholds driving one opinion state.
pub struct Dynamics<'a> {
    net: &'a Network,
    thresholds: &'a ThresholdAssignment,
    state: OpinionState,
}

impl<'a> Dynamics<'a> {
    pub fn new(net: &'a Network, thresholds: &'a ThresholdAssignment, state: OpinionState) -> Self {
        Dynamics { net, thresholds, state }
    }

    pub fn state(&self) -> &OpinionState {
        &self.state
    }

    pub fn into_state(self) -> OpinionState {
        self.state
    }

    /// One update attempt on a uniformly drawn node.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepOutcome> {
        if self.state.is_fixated() {
            return Err(Error::Contract("step called on a fixated state".into()));
        }
        let i = rng.random_range(0..self.net.n());
        self.state.clock += 1;
        let flipped = self.state.is_unstable(i);
        if flipped {
            self.flip(i);
        }
        Ok(StepOutcome {
            node: i as u32,
            flipped,
        })
    }

    fn flip(&mut self, i: usize) {
        let st = &mut self.state;
        let now = st.opinions[i] ^ 1;
        st.opinions[i] = now;
        st.flips += 1;
        if now == 1 {
            st.ones += 1;
        } else {
            st.ones -= 1;
        }
        st.refresh(self.net, self.thresholds, i);
        for l in self.net.out_links(i) {
            let j = l.node as usize;
            if now == 1 {
                st.ones_in[j] += l.multiplicity;
            } else {
                st.ones_in[j] -= l.multiplicity;
            }
            st.refresh(self.net, self.thresholds, j);
        }
    }

    /// Steps until fixation or until the clock reaches `max_attempts`,
    /// reporting every attempt to `observe`.
    pub fn run<R, F>(mut self, rng: &mut R, max_attempts: u64, mut observe: F) -> RunResult
    where
        R: Rng + ?Sized,
        F: FnMut(&OpinionState, StepOutcome),
    {
        while !self.state.is_fixated() && self.state.clock < max_attempts {
            let outcome = self.step(rng).expect("state is not fixated");
            observe(&self.state, outcome);
        }
        let n = self.net.n();
        let st = self.state;
        RunResult {
            fixated: st.is_fixated(),
            t_f: st.clock,
            t_f_sweeps: st.clock as f64 / n as f64,
            flips: st.flips,
            final_state: st.opinions,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub final_state: Vec<u8>,
    /// Update attempts until no node could flip (or the cap, if not fixated).
    pub t_f: u64,
    pub t_f_sweeps: f64,
    pub fixated: bool,
    pub flips: u64,
}

impl RunResult {
    pub fn average_opinion(&self) -> f64 {
        crate::experiments::average_opinion(&self.final_state)
    }
}

pub fn default_max_attempts(n: usize) -> u64 {
    DEFAULT_ATTEMPTS_PER_NODE * n as u64
}

fn check_cap(max_attempts: u64) -> Result<()> {
    if max_attempts == 0 {
        return Err(Error::param("max_attempts must be at least 1"));
    }
    Ok(())
}

/// Initializes Bernoulli(`p`) opinions and runs them to a fixed point.
pub fn run_to_fixation<R: Rng + ?Sized>(
    net: &Network,
    thresholds: &ThresholdAssignment,
    p: f64,
    rng: &mut R,
    max_attempts: u64,
) -> Result<RunResult> {
    check_cap(max_attempts)?;
    let state = init_opinions(net, thresholds, p, rng)?;
    Ok(Dynamics::new(net, thresholds, state).run(rng, max_attempts, |_, _| {}))
}

pub const TRACE_HEADER: &str = "attempt,node,flipped,ones_count";

/// Like [`run_to_fixation`], also writing one `attempt,node,flipped,ones_count`
/// row per attempt to `trace`.
pub fn run_to_fixation_traced<R: Rng + ?Sized, W: Write>(
    net: &Network,
    thresholds: &ThresholdAssignment,
    p: f64,
    rng: &mut R,
    max_attempts: u64,
    trace: &mut W,
) -> Result<RunResult> {
    check_cap(max_attempts)?;
    let state = init_opinions(net, thresholds, p, rng)?;
    writeln!(trace, "{TRACE_HEADER}").map_err(Error::Write)?;
    let mut failed = None;
    let result = Dynamics::new(net, thresholds, state).run(rng, max_attempts, |st, out| {
        if failed.is_none() {
            let row = writeln!(trace, "{},{},{},{}", st.clock(), out.node, u8::from(out.flipped), st.ones());
            failed = row.err();
        }
    });
    match failed {
        Some(e) => Err(Error::Write(e)),
        None => Ok(result),
    }
}
