//! IA feasibility of a feedback profile.
//!
//! Three checks share one set of per-node capacities:
//!
//! * receive slack of MS `(j, k)`: `m_jk − |B^II \ {j}|·Kd − d`
//! * transmit slack of type-I BS `i`: `K·(n_i − Kd)`
//! * demand of each (MS, type-I BS other than the serving one) pair: `Kd`
//!
//! [`check_necessary_enum`] tests the subset inequality for every pair of
//! subsets directly. [`check_necessary_flow`] decides the same thing in
//! polynomial time as a max-flow saturation problem and returns an integer
//! witness. Integer capacities admit an integral max flow, so integer
//! witnesses lose nothing. [`check_sufficient`] adds the divisibility
//! conditions under which the necessary conditions are also sufficient.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::feedback::FeedbackProfile;
use crate::network::NetworkConfig;

/// Largest `G·K + g` accepted by [`check_necessary_enum`].
pub const ENUM_LIMIT: usize = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error("enumeration over 2^{bits} subset pairs exceeds the limit 2^{ENUM_LIMIT}")]
    TooLarge { bits: usize },
    #[error("invalid profile: {0}")]
    Profile(String),
}

/// Identifier of an edge in a [`FlowGraph`].
pub type EdgeId = usize;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    flow: i64,
}

/// Directed graph with integer capacities, solved with Dinic's algorithm.
///
/// Every edge is stored with its reverse residual edge at `id ^ 1`.
/// Flow persists between calls to [`FlowGraph::augment`], so capacities
/// can be raised in stages to steer which max flow is found.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<EdgeId>>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> EdgeId {
        assert!(cap >= 0, "negative capacity");
        assert!(from < self.nodes() && to < self.nodes(), "node out of range");
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, flow: 0 });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            flow: 0,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Changes an edge capacity; it may not drop below the current flow.
    pub fn set_capacity(&mut self, e: EdgeId, cap: i64) {
        assert!(cap >= self.edges[e].flow, "capacity below current flow");
        self.edges[e].cap = cap;
    }

    pub fn capacity(&self, e: EdgeId) -> i64 {
        self.edges[e].cap
    }

    pub fn flow(&self, e: EdgeId) -> i64 {
        self.edges[e].flow
    }

    pub fn endpoints(&self, e: EdgeId) -> (usize, usize) {
        (self.edges[e ^ 1].to, self.edges[e].to)
    }

    /// Net flow leaving `node`.
    pub fn outflow(&self, node: usize) -> i64 {
        self.adj[node]
            .iter()
            .filter(|&&e| e % 2 == 0)
            .map(|&e| self.edges[e].flow)
            .sum::<i64>()
            - self.adj[node]
                .iter()
                .filter(|&&e| e % 2 == 1)
                .map(|&e| self.edges[e ^ 1].flow)
                .sum::<i64>()
    }

    fn residual(&self, e: EdgeId) -> i64 {
        self.edges[e].cap - self.edges[e].flow
    }

    fn push(&mut self, e: EdgeId, amount: i64) {
        self.edges[e].flow += amount;
        self.edges[e ^ 1].flow -= amount;
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.nodes()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if level[v] == usize::MAX && self.residual(e) > 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn blocking(&mut self, u: usize, t: usize, limit: i64, level: &[usize], next: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let v = self.edges[e].to;
            if level[v] == level[u] + 1 && self.residual(e) > 0 {
                let pushed = self.blocking(v, t, limit.min(self.residual(e)), level, next);
                if pushed > 0 {
                    self.push(e, pushed);
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Augments the current flow to a maximum one; returns the added value.
    pub fn augment(&mut self, s: usize, t: usize) -> i64 {
        let mut added = 0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0; self.nodes()];
            loop {
                let pushed = self.blocking(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                added += pushed;
            }
        }
        added
    }
}

/// Max-flow value from `s` to `t`, starting from the graph's current flow.
pub fn max_flow(graph: &mut FlowGraph, s: usize, t: usize) -> i64 {
    graph.augment(s, t);
    graph.outflow(s)
}

/// Integer flow on one (MS, type-I BS) demand pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairFlow {
    pub j: usize,
    pub k: usize,
    pub i: usize,
    /// Receive-side share `f^r_{jk,i}`.
    pub fr: i64,
    /// Transmit-side share `f^t_{jk,i}`.
    pub ft: i64,
}

/// A certificate for the necessary conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowWitness {
    pub pairs: Vec<PairFlow>,
}

impl FlowWitness {
    /// Checks the three witness inequalities exactly: every pair is covered
    /// (`f^r + f^t ≥ Kd`), and no MS or BS exceeds its slack.
    pub fn is_valid(&self, profile: &FeedbackProfile, cfg: &NetworkConfig) -> bool {
        let kd = cfg.kd() as i64;
        let mut used_r = vec![0i64; cfg.num_ms()];
        let mut used_t = vec![0i64; profile.g];
        for p in &self.pairs {
            if p.fr < 0 || p.ft < 0 || p.fr + p.ft < kd {
                return false;
            }
            used_r[cfg.ms_index(p.j, p.k)] += p.fr;
            used_t[p.i] += p.ft;
        }
        let expected = demand_pairs(profile, cfg).count();
        self.pairs.len() == expected
            && cfg
                .ms_iter()
                .all(|(j, k)| used_r[cfg.ms_index(j, k)] <= receive_slack(profile, cfg, j, k))
            && (0..profile.g).all(|i| used_t[i] <= transmit_slack(profile, cfg, i))
    }
}

/// The first necessary condition that fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `m_jk − |B^II \ {j}|·Kd − d < 0`.
    ReceiveSlack { j: usize, k: usize, slack: i64 },
    /// `N < Kd`.
    BsAntennas { n: usize, kd: usize },
    /// `n_i < Kd` for a type-I BS.
    BsFeedback { i: usize, n: usize, kd: usize },
    /// The subset inequality fails for these subsets.
    Subset {
        ms: Vec<(usize, usize)>,
        bs: Vec<usize>,
        lhs: i64,
        rhs: i64,
    },
    /// Max flow leaves some demand unmet.
    FlowDeficit { flow: i64, demand: i64 },
}

impl Violation {
    /// Which necessary condition failed: 1 receive slack, 2 antenna
    /// counts, 3 subset inequality (or its max-flow form).
    pub fn condition(&self) -> u8 {
        match self {
            Violation::ReceiveSlack { .. } => 1,
            Violation::BsAntennas { .. } | Violation::BsFeedback { .. } => 2,
            Violation::Subset { .. } | Violation::FlowDeficit { .. } => 3,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ReceiveSlack { j, k, slack } => write!(
                f,
                "MS ({}, {}): m - |B^II \\ {{{}}}|Kd - d = {slack} < 0",
                j + 1,
                k + 1,
                j + 1
            ),
            Violation::BsAntennas { n, kd } => write!(f, "N = {n} < Kd = {kd}"),
            Violation::BsFeedback { i, n, kd } => {
                write!(f, "BS {}: n = {n} < Kd = {kd}", i + 1)
            }
            Violation::Subset { ms, bs, lhs, rhs } => {
                let ms: Vec<String> = ms.iter().map(|(j, k)| format!("({}, {})", j + 1, k + 1)).collect();
                let bs: Vec<String> = bs.iter().map(|i| (i + 1).to_string()).collect();
                write!(
                    f,
                    "subset inequality fails for MSs {{{}}} and BSs {{{}}}: {lhs} < {rhs}",
                    ms.join(", "),
                    bs.join(", ")
                )
            }
            Violation::FlowDeficit { flow, demand } => {
                write!(f, "max flow {flow} is below the demand {demand}")
            }
        }
    }
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub necessary_ok: bool,
    pub sufficient_ok: bool,
    pub witness: Option<FlowWitness>,
    pub violation: Option<Violation>,
}

impl FeasibilityVerdict {
    fn violated(v: Violation) -> Self {
        FeasibilityVerdict {
            necessary_ok: false,
            sufficient_ok: false,
            witness: None,
            violation: Some(v),
        }
    }

    fn necessary(witness: Option<FlowWitness>) -> Self {
        FeasibilityVerdict {
            necessary_ok: true,
            sufficient_ok: false,
            witness,
            violation: None,
        }
    }
}

pub fn receive_slack(profile: &FeedbackProfile, cfg: &NetworkConfig, j: usize, k: usize) -> i64 {
    profile.m(j, k) as i64 - (profile.type_two_others(cfg, j) * cfg.kd()) as i64 - cfg.streams as i64
}

pub fn transmit_slack(profile: &FeedbackProfile, cfg: &NetworkConfig, i: usize) -> i64 {
    cfg.users as i64 * (profile.n[i] as i64 - cfg.kd() as i64)
}

/// `(j, k, i)` for every MS and every type-I BS `i ≠ j`.
pub fn demand_pairs<'a>(
    profile: &'a FeedbackProfile,
    cfg: &'a NetworkConfig,
) -> impl Iterator<Item = (usize, usize, usize)> + 'a {
    cfg.ms_iter()
        .flat_map(move |(j, k)| (0..profile.g).filter(move |&i| i != j).map(move |i| (j, k, i)))
}

fn check_shape(profile: &FeedbackProfile, cfg: &NetworkConfig) -> Result<(), FeasibilityError> {
    profile
        .validate(cfg)
        .map_err(|e| FeasibilityError::Profile(e.to_string()))
}

/// Conditions 1 and 2: non-negative slacks everywhere.
fn check_slacks(profile: &FeedbackProfile, cfg: &NetworkConfig) -> Option<Violation> {
    for (j, k) in cfg.ms_iter() {
        let slack = receive_slack(profile, cfg, j, k);
        if slack < 0 {
            return Some(Violation::ReceiveSlack { j, k, slack });
        }
    }
    if cfg.bs_antennas < cfg.kd() {
        return Some(Violation::BsAntennas {
            n: cfg.bs_antennas,
            kd: cfg.kd(),
        });
    }
    for (i, &n) in profile.n.iter().enumerate() {
        if n < cfg.kd() {
            return Some(Violation::BsFeedback { i, n, kd: cfg.kd() });
        }
    }
    None
}

/// Necessary conditions by exhaustive subset enumeration.
///
/// Subsets are visited in Gray-code order with O(1) updates of both sides.
/// Bits `0..GK` select MSs (in [`NetworkConfig::ms_index`] order) and bits
/// `GK..GK+g` select type-I BSs; the violation with the smallest such mask
/// is reported.
pub fn check_necessary_enum(
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<FeasibilityVerdict, FeasibilityError> {
    check_shape(profile, cfg)?;
    let ms_bits = cfg.num_ms();
    let bits = ms_bits + profile.g;
    if bits > ENUM_LIMIT {
        return Err(FeasibilityError::TooLarge { bits });
    }
    if let Some(v) = check_slacks(profile, cfg) {
        return Ok(FeasibilityVerdict::violated(v));
    }
    let kd = cfg.kd() as i64;
    let weight: Vec<i64> = cfg
        .ms_iter()
        .map(|(j, k)| receive_slack(profile, cfg, j, k))
        .chain((0..profile.g).map(|i| transmit_slack(profile, cfg, i)))
        .collect();
    let cell_of = |bit: usize| bit / cfg.users;

    let mut lhs = 0i64;
    let mut n_r = 0i64;
    let mut n_t = 0i64;
    // Number of selected MSs whose serving BS is also selected.
    let mut overlap = 0i64;
    let mut per_cell = vec![0i64; cfg.cells];
    let mut bs_on = vec![false; profile.g];
    let mut worst: Option<(u64, i64, i64)> = None;
    let mut mask = 0u64;
    for step in 1u64..(1u64 << bits) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        let on = mask & (1 << bit) != 0;
        let sign = if on { 1 } else { -1 };
        lhs += sign * weight[bit];
        if bit < ms_bits {
            let j = cell_of(bit);
            n_r += sign;
            per_cell[j] += sign;
            if j < profile.g && bs_on[j] {
                overlap += sign;
            }
        } else {
            let i = bit - ms_bits;
            bs_on[i] = on;
            n_t += sign;
            overlap += sign * per_cell[i];
        }
        let rhs = kd * (n_r * n_t - overlap);
        if lhs < rhs && worst.is_none_or(|(m, _, _)| mask < m) {
            worst = Some((mask, lhs, rhs));
        }
    }
    Ok(match worst {
        None => FeasibilityVerdict::necessary(None),
        Some((mask, lhs, rhs)) => FeasibilityVerdict::violated(Violation::Subset {
            ms: cfg
                .ms_iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, jk)| jk)
                .collect(),
            bs: (0..profile.g)
                .filter(|i| mask & (1 << (ms_bits + i)) != 0)
                .collect(),
            lhs,
            rhs,
        }),
    })
}

/// One demand pair of a [`FlowNetwork`] and its edges.
#[derive(Debug, Clone, Copy)]
pub struct PairEdges {
    pub j: usize,
    pub k: usize,
    pub i: usize,
    pub from_ms: EdgeId,
    pub from_bs: EdgeId,
    pub to_sink: EdgeId,
}

/// The flow graph `a → {u_jk, v_i} → c_{jk,i} → b`.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub graph: FlowGraph,
    /// `a → u_jk`, in MS order.
    pub ms_edges: Vec<EdgeId>,
    /// `a → v_i`, one per type-I BS.
    pub bs_edges: Vec<EdgeId>,
    pub pairs: Vec<PairEdges>,
    bs_capacity: Vec<i64>,
    kd: i64,
}

impl FlowNetwork {
    pub const SOURCE: usize = 0;
    pub const SINK: usize = 1;

    /// Builds the network; fails with the first violated slack condition.
    pub fn build(profile: &FeedbackProfile, cfg: &NetworkConfig) -> Result<Self, Violation> {
        if let Some(v) = check_slacks(profile, cfg) {
            return Err(v);
        }
        let pair_list: Vec<_> = demand_pairs(profile, cfg).collect();
        let u = |idx: usize| 2 + idx;
        let v = |i: usize| 2 + cfg.num_ms() + i;
        let c = |p: usize| 2 + cfg.num_ms() + profile.g + p;
        let mut graph = FlowGraph::new(2 + cfg.num_ms() + profile.g + pair_list.len());
        let ms_edges = cfg
            .ms_iter()
            .map(|(j, k)| {
                graph.add_edge(Self::SOURCE, u(cfg.ms_index(j, k)), receive_slack(profile, cfg, j, k))
            })
            .collect();
        let bs_capacity: Vec<i64> = (0..profile.g).map(|i| transmit_slack(profile, cfg, i)).collect();
        let bs_edges = (0..profile.g)
            .map(|i| graph.add_edge(Self::SOURCE, v(i), bs_capacity[i]))
            .collect();
        let kd = cfg.kd() as i64;
        let pairs = pair_list
            .iter()
            .enumerate()
            .map(|(p, &(j, k, i))| PairEdges {
                j,
                k,
                i,
                from_ms: graph.add_edge(u(cfg.ms_index(j, k)), c(p), receive_slack(profile, cfg, j, k)),
                from_bs: graph.add_edge(v(i), c(p), bs_capacity[i]),
                to_sink: graph.add_edge(c(p), Self::SINK, kd),
            })
            .collect();
        Ok(FlowNetwork {
            graph,
            ms_edges,
            bs_edges,
            pairs,
            bs_capacity,
            kd,
        })
    }

    pub fn demand(&self) -> i64 {
        self.kd * self.pairs.len() as i64
    }

    /// Max flow in a fixed order: MS supply first, then each BS's supply
    /// released in ascending BS order. BS supply is thereby used only where
    /// MS supply falls short, and earlier BSs are preferred.
    pub fn solve(&mut self) -> i64 {
        for &e in &self.bs_edges {
            self.graph.set_capacity(e, 0);
        }
        self.graph.augment(Self::SOURCE, Self::SINK);
        for (idx, &e) in self.bs_edges.iter().enumerate() {
            self.graph.set_capacity(e, self.bs_capacity[idx]);
            self.graph.augment(Self::SOURCE, Self::SINK);
        }
        self.graph.outflow(Self::SOURCE)
    }

    pub fn witness(&self) -> FlowWitness {
        FlowWitness {
            pairs: self
                .pairs
                .iter()
                .map(|p| PairFlow {
                    j: p.j,
                    k: p.k,
                    i: p.i,
                    fr: self.graph.flow(p.from_ms),
                    ft: self.graph.flow(p.from_bs),
                })
                .collect(),
        }
    }

    /// Unused MS supply `c(a, u_jk) − f(a, u_jk)`, in MS order.
    pub fn ms_leftover(&self) -> Vec<i64> {
        self.ms_edges
            .iter()
            .map(|&e| self.graph.capacity(e) - self.graph.flow(e))
            .collect()
    }

    /// Unused BS supply `c(a, v_i) − f(a, v_i)`.
    pub fn bs_leftover(&self) -> Vec<i64> {
        self.bs_edges
            .iter()
            .map(|&e| self.graph.capacity(e) - self.graph.flow(e))
            .collect()
    }
}

/// Necessary conditions by max-flow saturation, with a witness.
pub fn check_necessary_flow(
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<FeasibilityVerdict, FeasibilityError> {
    check_shape(profile, cfg)?;
    let mut net = match FlowNetwork::build(profile, cfg) {
        Ok(net) => net,
        Err(v) => return Ok(FeasibilityVerdict::violated(v)),
    };
    let flow = net.solve();
    let demand = net.demand();
    Ok(if flow == demand {
        FeasibilityVerdict::necessary(Some(net.witness()))
    } else {
        FeasibilityVerdict::violated(Violation::FlowDeficit { flow, demand })
    })
}

/// Divisibility: `d | n_i` for every type-I BS, or `Kd | (m_jk − d)` for
/// every MS.
pub fn divisibility_holds(profile: &FeedbackProfile, cfg: &NetworkConfig) -> bool {
    let d = cfg.streams;
    let kd = cfg.kd();
    profile.n.iter().all(|n| n % d == 0)
        || cfg
            .ms_iter()
            .all(|(j, k)| profile.m(j, k) >= d && (profile.m(j, k) - d) % kd == 0)
}

/// Necessary conditions plus divisibility.
pub fn check_sufficient(
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<FeasibilityVerdict, FeasibilityError> {
    let mut verdict = check_necessary_flow(profile, cfg)?;
    verdict.sufficient_ok = verdict.necessary_ok && divisibility_holds(profile, cfg);
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (NetworkConfig, FeedbackProfile) {
        let cfg = NetworkConfig::new(3, 2, 4, 4, 1);
        (cfg, FeedbackProfile::uniform(&cfg, 4, &[4, 3]))
    }

    fn example1(m: usize) -> (NetworkConfig, FeedbackProfile) {
        let cfg = NetworkConfig::new(2, 2, 3, 3, 1);
        (cfg, FeedbackProfile::uniform(&cfg, m, &[]))
    }

    fn example2() -> (NetworkConfig, FeedbackProfile) {
        let cfg = NetworkConfig::new(2, 3, 5, 3, 1);
        (cfg, FeedbackProfile::uniform(&cfg, 2, &[5, 5]))
    }

    #[test]
    fn single_path() {
        let mut g = FlowGraph::new(3);
        g.add_edge(0, 2, 3);
        g.add_edge(2, 1, 5);
        assert_eq!(max_flow(&mut g, 0, 1), 3);
    }

    #[test]
    fn classic_six_node_instance() {
        // CLRS flow network; max flow 23.
        let mut g = FlowGraph::new(6);
        for (u, v, c) in [
            (0, 1, 16),
            (0, 2, 13),
            (2, 1, 4),
            (1, 3, 12),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ] {
            g.add_edge(u, v, c);
        }
        assert_eq!(max_flow(&mut g, 0, 5), 23);
        for node in 1..5 {
            assert_eq!(g.outflow(node), 0);
        }
    }

    #[test]
    fn brute_force_agrees_on_small_graphs() {
        // Min cut by enumerating all s-t cuts of random 6-node graphs.
        use rand::Rng;
        let mut rng = crate::rng::stream(9, "flow", 0);
        for _ in 0..200 {
            let n = 6;
            let mut g = FlowGraph::new(n);
            let mut cap = vec![vec![0i64; n]; n];
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.random_bool(0.4) {
                        let c = rng.random_range(0..6);
                        g.add_edge(u, v, c);
                        cap[u][v] += c;
                    }
                }
            }
            let flow = max_flow(&mut g, 0, n - 1);
            let mut best = i64::MAX;
            for side in 0u32..(1 << (n - 2)) {
                let in_s = |x: usize| x == 0 || (x != n - 1 && side & (1 << (x - 1)) != 0);
                let cut: i64 = (0..n)
                    .flat_map(|u| (0..n).map(move |v| (u, v)))
                    .filter(|&(u, v)| in_s(u) && !in_s(v))
                    .map(|(u, v)| cap[u][v])
                    .sum();
                best = best.min(cut);
            }
            assert_eq!(flow, best);
        }
    }

    #[test]
    fn two_cell_zero_forcing_verdicts() {
        let (cfg, p) = example1(3);
        assert!(check_necessary_enum(&p, &cfg).unwrap().necessary_ok);
        let v = check_necessary_flow(&p, &cfg).unwrap();
        assert!(v.necessary_ok);
        assert!(v.witness.unwrap().pairs.is_empty());
        let (cfg, p) = example1(2);
        let v = check_necessary_enum(&p, &cfg).unwrap();
        assert!(!v.necessary_ok);
        assert!(matches!(v.violation, Some(Violation::ReceiveSlack { slack: -1, .. })));
    }

    #[test]
    fn reference_profile_is_feasible() {
        let (cfg, p) = reference();
        assert!(check_necessary_enum(&p, &cfg).unwrap().necessary_ok);
        let mut net = FlowNetwork::build(&p, &cfg).unwrap();
        assert_eq!(net.demand(), 16);
        assert_eq!(net.solve(), 16);
        let v = check_sufficient(&p, &cfg).unwrap();
        assert!(v.necessary_ok && v.sufficient_ok);
        assert!(v.witness.unwrap().is_valid(&p, &cfg));
    }

    #[test]
    fn truncated_receiver_profile() {
        let (cfg, p) = example2();
        let v = check_sufficient(&p, &cfg).unwrap();
        assert!(v.sufficient_ok);
        assert!(v.witness.unwrap().is_valid(&p, &cfg));
        assert!(check_necessary_enum(&p, &cfg).unwrap().necessary_ok);
        // One antenna fewer at one BS leaves 3 units of demand unmet.
        let short = FeedbackProfile::uniform(&cfg, 2, &[5, 4]);
        let v = check_necessary_flow(&short, &cfg).unwrap();
        assert_eq!(v.violation, Some(Violation::FlowDeficit { flow: 15, demand: 18 }));
        let e = check_necessary_enum(&short, &cfg).unwrap();
        assert!(matches!(e.violation, Some(Violation::Subset { .. })));
    }

    #[test]
    fn divisibility_failure() {
        // d = 2, K = 1, G = 3: n odd and Kd does not divide m - d.
        let cfg = NetworkConfig::new(3, 1, 5, 5, 2);
        let p = FeedbackProfile::uniform(&cfg, 5, &[5, 5, 5]);
        let v = check_sufficient(&p, &cfg).unwrap();
        assert!(v.necessary_ok);
        assert!(!v.sufficient_ok);
    }

    #[test]
    fn backward_compatibility() {
        let cfg = NetworkConfig::new(3, 1, 2, 2, 1);
        let p = FeedbackProfile::full_cdi(&cfg);
        assert!(check_sufficient(&p, &cfg).unwrap().sufficient_ok);
        assert!(check_necessary_enum(&p, &cfg).unwrap().necessary_ok);
        // The 3-user 1x1 channel has no IA solution with d = 1 and no
        // symbol extension.
        let cfg = NetworkConfig::new(3, 1, 1, 1, 1);
        let p = FeedbackProfile::full_cdi(&cfg);
        assert!(!check_necessary_flow(&p, &cfg).unwrap().necessary_ok);
    }

    #[test]
    fn violation_labels_are_one_based() {
        let (cfg, p) = example1(2);
        let v = check_necessary_flow(&p, &cfg).unwrap();
        assert_eq!(
            v.violation.unwrap().to_string(),
            "MS (1, 1): m - |B^II \\ {1}|Kd - d = -1 < 0"
        );
        let cfg = NetworkConfig::new(2, 3, 5, 3, 1);
        let p = FeedbackProfile::uniform(&cfg, 2, &[2, 5]);
        assert_eq!(
            check_necessary_flow(&p, &cfg).unwrap().violation.unwrap().to_string(),
            "BS 1: n = 2 < Kd = 3"
        );
    }

    #[test]
    fn enumeration_guard() {
        let cfg = NetworkConfig::new(4, 3, 12, 12, 1);
        let p = FeedbackProfile::full_cdi(&cfg);
        assert_eq!(
            check_necessary_enum(&p, &cfg),
            Err(FeasibilityError::TooLarge { bits: 16 })
        );
        assert!(check_necessary_flow(&p, &cfg).is_ok());
    }
}
