//! Waste-collection routing with tabular Q-learning.
//!
//! The MDP: state = (current node, visited service bins), action = next
//! unvisited bin, reward = minus the kg CO₂ of the leg driven. Choosing the
//! last bin also pays for the drive back to the depot, so the return of an
//! episode is exactly minus the emissions of the closed tour.

mod graph;
mod qlearn;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{BinNode, CollectionGraph, EdgeAttrs, NodeId};
pub use qlearn::{continue_training, q_update, train_routing, QTable, RLConfig, RouteState, MAX_TABULAR_BINS};

use qlearn::RoutingProblem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("collection graph has no depot")]
    NoDepot,
    #[error("{bins} service bins exceed the tabular limit of {max}")]
    StateSpaceTooLarge { bins: usize, max: usize },
    #[error("no edge between {from} and {to}; tabular routing needs every pair of stops connected")]
    DisconnectedGraph { from: NodeId, to: NodeId },
    #[error("route leg {from} -> {to} has no edge")]
    MissingEdge { from: NodeId, to: NodeId },
    #[error("invalid routing configuration: {0}")]
    InvalidConfig(String),
}

/// Visiting order: depot, each service bin once, depot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route(pub Vec<NodeId>);

impl Route {
    pub fn stops(&self) -> &[NodeId] {
        &self.0
    }
}

/// Follows the highest-valued unvisited bin from the depot (ties → lowest id).
pub fn greedy_route(q: &QTable, g: &CollectionGraph) -> Result<Route, RoutingError> {
    let depot = g.depot().ok_or(RoutingError::NoDepot)?;
    let bins = g.service_bins();
    if bins.len() > MAX_TABULAR_BINS {
        return Err(RoutingError::StateSpaceTooLarge {
            bins: bins.len(),
            max: MAX_TABULAR_BINS,
        });
    }
    let mut s = RouteState::start(depot);
    let mut route = vec![depot];
    loop {
        let actions: Vec<NodeId> = bins
            .iter()
            .enumerate()
            .filter(|(k, _)| s.visited & (1 << k) == 0)
            .map(|(_, &b)| b)
            .collect();
        let Some(a) = q.argmax(s, &actions) else { break };
        let k = bins.binary_search(&a).expect("action is a bin");
        s = RouteState {
            current: a,
            visited: s.visited | (1 << k),
        };
        route.push(a);
    }
    route.push(depot);
    Ok(Route(route))
}

/// Lowest-id-first tour, the baseline's static route.
pub fn naive_route(g: &CollectionGraph) -> Result<Route, RoutingError> {
    let depot = g.depot().ok_or(RoutingError::NoDepot)?;
    let mut route = vec![depot];
    route.extend(g.service_bins());
    route.push(depot);
    Ok(Route(route))
}

/// kg CO₂ over all legs of a route.
pub fn route_emissions(g: &CollectionGraph, route: &Route) -> Result<f64, RoutingError> {
    route
        .0
        .windows(2)
        .map(|w| {
            g.leg_emissions(w[0], w[1])
                .ok_or(RoutingError::MissingEdge { from: w[0], to: w[1] })
        })
        .sum()
}

/// Validates that a graph can be trained on without running any episodes.
pub fn check_trainable(g: &CollectionGraph) -> Result<(), RoutingError> {
    RoutingProblem::new(g).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Four bins on a line with the depot at one end: the optimal tour is
    /// any monotone sweep out and back.
    fn line_graph() -> CollectionGraph {
        let pos = [(0u32, 0.0f64), (1, 7.0), (2, 2.0), (3, 9.0), (4, 4.0)];
        let mut g = CollectionGraph::new(
            pos.iter()
                .map(|&(id, _)| BinNode { id, fill_level: 1.0, is_depot: id == 0 })
                .collect(),
        );
        for (i, &(a, pa)) in pos.iter().enumerate() {
            for &(b, pb) in &pos[i + 1..] {
                g.add_edge(a, b, (pa - pb).abs(), 0.8);
            }
        }
        g
    }

    /// Exhaustive tour enumeration (test oracle).
    fn brute_force_min(g: &CollectionGraph) -> f64 {
        fn permute(items: &mut Vec<NodeId>, k: usize, out: &mut Vec<Vec<NodeId>>) {
            if k == items.len() {
                out.push(items.clone());
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                permute(items, k + 1, out);
                items.swap(k, i);
            }
        }
        let depot = g.depot().unwrap();
        let mut bins = g.service_bins();
        let mut orders = Vec::new();
        permute(&mut bins, 0, &mut orders);
        orders
            .into_iter()
            .map(|o| {
                let mut r = vec![depot];
                r.extend(o);
                r.push(depot);
                route_emissions(g, &Route(r)).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn q_update_full_overwrite() {
        let mut q = QTable::new();
        let cfg = RLConfig { learning_rate: 1.0, discount: 0.0, ..RLConfig::default() };
        let s = RouteState { current: 0, visited: 0 };
        let s2 = RouteState { current: 1, visited: 1 };
        q_update(&mut q, &cfg, s, 1, 5.0, s2, &[2]);
        assert_eq!(q.get(s, 1), 5.0);
    }

    #[test]
    fn q_update_zero_rate_is_noop() {
        let mut q = QTable::new();
        let s = RouteState { current: 0, visited: 0 };
        let s2 = RouteState { current: 1, visited: 1 };
        q.set(s2, 2, 7.0);
        let before = q.clone();
        let cfg = RLConfig { learning_rate: 0.0, ..RLConfig::default() };
        q_update(&mut q, &cfg, s, 1, -123.0, s2, &[2]);
        q_update(&mut q, &cfg, s2, 2, 55.0, s, &[]);
        assert_eq!(q, before);
    }

    #[test]
    fn q_update_direct_substitution() {
        let mut q = QTable::new();
        let s = RouteState { current: 0, visited: 0 };
        let s2 = RouteState { current: 1, visited: 1 };
        q.set(s, 1, 1.0);
        q.set(s2, 2, 2.0);
        q.set(s2, 3, -4.0);
        let cfg = RLConfig { learning_rate: 0.5, discount: 0.9, ..RLConfig::default() };
        q_update(&mut q, &cfg, s, 1, 1.0, s2, &[2, 3]);
        assert!((q.get(s, 1) - 1.9).abs() < 1e-12);
    }

    #[test]
    fn terminal_next_state_drops_lookahead() {
        let mut q = QTable::new();
        let s = RouteState { current: 0, visited: 0 };
        let terminal = RouteState { current: 1, visited: 1 };
        q.set(terminal, 9, 100.0);
        let cfg = RLConfig { learning_rate: 1.0, discount: 0.9, ..RLConfig::default() };
        q_update(&mut q, &cfg, s, 1, -3.0, terminal, &[]);
        assert_eq!(q.get(s, 1), -3.0);
    }

    #[test]
    fn depot_only_graph_trains_nothing() {
        let g = CollectionGraph::new(vec![BinNode { id: 0, fill_level: 0.0, is_depot: true }]);
        let q = train_routing(&g, &RLConfig::default()).unwrap();
        assert!(q.is_empty());
        assert_eq!(greedy_route(&q, &g).unwrap(), Route(vec![0, 0]));
    }

    #[test]
    fn untrained_table_routes_by_id() {
        let g = line_graph();
        assert_eq!(greedy_route(&QTable::new(), &g).unwrap(), Route(vec![0, 1, 2, 3, 4, 0]));
        assert_eq!(naive_route(&g).unwrap(), Route(vec![0, 1, 2, 3, 4, 0]));
    }

    #[test]
    fn four_bin_training_finds_enumerated_optimum() {
        let g = line_graph();
        let cfg = RLConfig { episodes: 5_000, discount: 0.95, rng_seed: 7, ..RLConfig::default() };
        let q = train_routing(&g, &cfg).unwrap();
        let route = greedy_route(&q, &g).unwrap();
        assert_eq!(route.0.len(), 6);
        let best = brute_force_min(&g);
        assert!((route_emissions(&g, &route).unwrap() - best).abs() < 1e-9, "{route:?}");
        // Depot -> 9 km sweep -> back: 18 km at 0.8 kg/km.
        assert!((best - 14.4).abs() < 1e-12);
    }

    #[test]
    fn training_is_deterministic() {
        let g = line_graph();
        let cfg = RLConfig { episodes: 500, rng_seed: 99, ..RLConfig::default() };
        let a = train_routing(&g, &cfg).unwrap();
        let b = train_routing(&g, &cfg).unwrap();
        assert_eq!(a.sorted_entries(), b.sorted_entries());
    }

    #[test]
    fn emissions_arithmetic() {
        let g = line_graph();
        assert_eq!(route_emissions(&g, &Route(vec![])).unwrap(), 0.0);
        assert_eq!(route_emissions(&g, &Route(vec![3])).unwrap(), 0.0);
        let mut g2 = CollectionGraph::new(vec![
            BinNode { id: 0, fill_level: 0.0, is_depot: true },
            BinNode { id: 1, fill_level: 1.0, is_depot: false },
        ]);
        g2.add_edge(0, 1, 10.0, 0.8);
        assert!((route_emissions(&g2, &Route(vec![0, 1])).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(
            route_emissions(&g2, &Route(vec![0, 5])),
            Err(RoutingError::MissingEdge { from: 0, to: 5 })
        );
    }

    #[test]
    fn too_many_bins() {
        let mut nodes = vec![BinNode { id: 0, fill_level: 0.0, is_depot: true }];
        nodes.extend((1..=17).map(|id| BinNode { id, fill_level: 1.0, is_depot: false }));
        let g = CollectionGraph::new(nodes);
        assert_eq!(
            train_routing(&g, &RLConfig::default()),
            Err(RoutingError::StateSpaceTooLarge { bins: 17, max: 16 })
        );
    }

    #[test]
    fn missing_connection_is_disconnected() {
        let mut g = line_graph();
        g.edges.remove(&(1, 2));
        assert_eq!(
            train_routing(&g, &RLConfig::default()),
            Err(RoutingError::DisconnectedGraph { from: 1, to: 2 })
        );
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = RLConfig { discount: 1.0, ..RLConfig::default() };
        assert!(matches!(train_routing(&line_graph(), &cfg), Err(RoutingError::InvalidConfig(_))));
    }

    #[test]
    fn qtable_json_round_trip() {
        let g = line_graph();
        let q = train_routing(&g, &RLConfig { episodes: 50, ..RLConfig::default() }).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        let back: QTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
