use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{CollectionGraph, NodeId};
use super::RoutingError;
use crate::diagnostics::Diagnostic;
use crate::rng;

/// Largest number of service bins a single tabular problem may hold.
pub const MAX_TABULAR_BINS: usize = 16;

/// Position of the truck plus the set of service bins already emptied.
///
/// Bit `k` of `visited` stands for the `k`-th service bin in ascending id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RouteState {
    pub current: NodeId,
    pub visited: u32,
}

impl RouteState {
    pub fn start(depot: NodeId) -> Self {
        Self { current: depot, visited: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RLConfig {
    /// Step size of the temporal-difference update, in (0, 1].
    pub learning_rate: f64,
    /// Discount factor, in [0, 1).
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub episodes: usize,
    pub rng_seed: u64,
    /// Positive multiplier applied to every reward.
    pub reward_scale: f64,
}

impl Default for RLConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            discount: 0.95,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            episodes: 5_000,
            rng_seed: 0,
            reward_scale: 1.0,
        }
    }
}

impl RLConfig {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &str, msg: &str| {
            if !ok {
                out.push(Diagnostic::new(format!("rl.{field}"), msg));
            }
        };
        check(self.learning_rate > 0.0 && self.learning_rate <= 1.0, "learning_rate", "must lie in (0, 1]");
        check((0.0..1.0).contains(&self.discount), "discount", "must lie in [0, 1)");
        check((0.0..=1.0).contains(&self.epsilon_start), "epsilon_start", "must lie in [0, 1]");
        check((0.0..=1.0).contains(&self.epsilon_end), "epsilon_end", "must lie in [0, 1]");
        check(self.epsilon_end <= self.epsilon_start, "epsilon_end", "must not exceed epsilon_start");
        check(self.episodes >= 1, "episodes", "must be >= 1");
        check(self.reward_scale.is_finite() && self.reward_scale > 0.0, "reward_scale", "must be > 0");
        out
    }

    /// Exploration rate for episode `k`, annealed linearly across the run.
    pub fn epsilon(&self, k: usize) -> f64 {
        if self.episodes <= 1 {
            return self.epsilon_start;
        }
        let t = k as f64 / (self.episodes - 1) as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct QEntry {
    current: NodeId,
    visited: u32,
    action: NodeId,
    q: f64,
}

/// State-action values; absent entries read as zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<QEntry>", into = "Vec<QEntry>")]
pub struct QTable {
    values: HashMap<(RouteState, NodeId), f64>,
}

impl From<Vec<QEntry>> for QTable {
    fn from(entries: Vec<QEntry>) -> Self {
        Self {
            values: entries
                .into_iter()
                .map(|e| ((RouteState { current: e.current, visited: e.visited }, e.action), e.q))
                .collect(),
        }
    }
}

impl From<QTable> for Vec<QEntry> {
    fn from(t: QTable) -> Self {
        t.sorted_entries()
            .into_iter()
            .map(|(s, a, q)| QEntry {
                current: s.current,
                visited: s.visited,
                action: a,
                q,
            })
            .collect()
    }
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: RouteState, a: NodeId) -> f64 {
        self.values.get(&(s, a)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, s: RouteState, a: NodeId, q: f64) {
        self.values.insert((s, a), q);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries in ascending (state, action) order.
    pub fn sorted_entries(&self) -> Vec<(RouteState, NodeId, f64)> {
        let mut v: Vec<_> = self.values.iter().map(|(&(s, a), &q)| (s, a, q)).collect();
        v.sort_by_key(|x| (x.0, x.1));
        v
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.values().copied()
    }

    pub fn max_over(&self, s: RouteState, actions: &[NodeId]) -> f64 {
        actions
            .iter()
            .map(|&a| self.get(s, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest-valued action; ties go to the lowest node id.
    pub fn argmax(&self, s: RouteState, actions: &[NodeId]) -> Option<NodeId> {
        let mut best: Option<(NodeId, f64)> = None;
        for &a in actions {
            let q = self.get(s, a);
            let better = match best {
                None => true,
                Some((b, bq)) => q > bq || (q == bq && a < b),
            };
            if better {
                best = Some((a, q));
            }
        }
        best.map(|(a, _)| a)
    }
}

/// One temporal-difference step:
/// `Q(s,a) ← Q(s,a) + α·(r + γ·max_a' Q(s',a') − Q(s,a))`.
///
/// `next_actions` are the actions available in `s_next`; an empty slice
/// marks `s_next` terminal and zeroes the lookahead term.
pub fn q_update(
    q: &mut QTable,
    cfg: &RLConfig,
    s: RouteState,
    a: NodeId,
    r: f64,
    s_next: RouteState,
    next_actions: &[NodeId],
) {
    let lookahead = if next_actions.is_empty() {
        0.0
    } else {
        q.max_over(s_next, next_actions)
    };
    let old = q.get(s, a);
    let new = old + cfg.learning_rate * (r + cfg.discount * lookahead - old);
    if new != old || q.values.contains_key(&(s, a)) {
        q.set(s, a, new);
    }
}

/// Service bins of a graph with dense leg costs, ready for episodes.
pub(crate) struct RoutingProblem {
    pub depot: NodeId,
    pub bins: Vec<NodeId>,
    /// `cost[i][j]` between positions, 0 = depot and `k + 1` = `bins[k]`.
    cost: Vec<Vec<f64>>,
}

impl RoutingProblem {
    pub fn new(g: &CollectionGraph) -> Result<Self, RoutingError> {
        let depot = g.depot().ok_or(RoutingError::NoDepot)?;
        let bins = g.service_bins();
        if bins.len() > MAX_TABULAR_BINS {
            return Err(RoutingError::StateSpaceTooLarge {
                bins: bins.len(),
                max: MAX_TABULAR_BINS,
            });
        }
        let stops: Vec<NodeId> = std::iter::once(depot).chain(bins.iter().copied()).collect();
        let mut cost = vec![vec![0.0; stops.len()]; stops.len()];
        for (i, &a) in stops.iter().enumerate() {
            for (j, &b) in stops.iter().enumerate() {
                if i != j {
                    cost[i][j] = g
                        .leg_emissions(a, b)
                        .ok_or(RoutingError::DisconnectedGraph { from: a, to: b })?;
                }
            }
        }
        Ok(Self { depot, bins, cost })
    }

    fn position(&self, node: NodeId) -> usize {
        if node == self.depot {
            0
        } else {
            self.bins.binary_search(&node).map(|k| k + 1).expect("node is a service bin")
        }
    }

    pub fn bit(&self, node: NodeId) -> u32 {
        1 << (self.position(node) - 1)
    }

    pub fn actions(&self, s: RouteState) -> Vec<NodeId> {
        self.bins
            .iter()
            .enumerate()
            .filter(|(k, _)| s.visited & (1 << k) == 0)
            .map(|(_, &b)| b)
            .collect()
    }

    pub fn full_mask(&self) -> u32 {
        if self.bins.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.bins.len()) - 1
        }
    }

    /// Emissions of moving to `a`, plus the depot return when `a` is the last bin.
    pub fn step_cost(&self, s: RouteState, a: NodeId) -> f64 {
        let (i, j) = (self.position(s.current), self.position(a));
        let mut c = self.cost[i][j];
        if s.visited | self.bit(a) == self.full_mask() {
            c += self.cost[j][0];
        }
        c
    }
}

pub fn train_routing(g: &CollectionGraph, cfg: &RLConfig) -> Result<QTable, RoutingError> {
    let mut q = QTable::new();
    continue_training(&mut q, g, cfg)?;
    Ok(q)
}

/// Runs `cfg.episodes` more episodes on an existing table.
pub fn continue_training(q: &mut QTable, g: &CollectionGraph, cfg: &RLConfig) -> Result<(), RoutingError> {
    let diags = cfg.validate();
    if !diags.is_empty() {
        return Err(RoutingError::InvalidConfig(crate::diagnostics::join(&diags)));
    }
    let problem = RoutingProblem::new(g)?;
    if problem.bins.is_empty() {
        return Ok(());
    }
    let mut rng = rng::generator(cfg.rng_seed);
    for episode in 0..cfg.episodes {
        let eps = cfg.epsilon(episode);
        let mut s = RouteState::start(problem.depot);
        let mut actions = problem.actions(s);
        while !actions.is_empty() {
            let a = if rng.random::<f64>() < eps {
                actions[rng.random_range(0..actions.len())]
            } else {
                q.argmax(s, &actions).expect("actions nonempty")
            };
            let r = -cfg.reward_scale * problem.step_cost(s, a);
            let s_next = RouteState {
                current: a,
                visited: s.visited | problem.bit(a),
            };
            let next_actions = problem.actions(s_next);
            q_update(q, cfg, s, a, r, s_next, &next_actions);
            s = s_next;
            actions = next_actions;
        }
    }
    Ok(())
}
