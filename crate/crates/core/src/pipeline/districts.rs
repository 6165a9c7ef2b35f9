use std::collections::BTreeSet;

use crate::routing::{CollectionGraph, NodeId};

/// Splits the bins into districts of at most `max_bins` for tabular routing.
///
/// Each district is grown as a nearest-neighbour chain: it opens at the
/// unassigned bin closest to the depot and repeatedly adds the unassigned bin
/// closest to the last one added (ties to the lowest id; bins without an edge
/// count as infinitely far). Every district keeps the depot.
pub fn partition_districts(g: &CollectionGraph, max_bins: usize) -> Vec<CollectionGraph> {
    assert!(max_bins >= 1, "max_bins must be >= 1");
    let Some(depot) = g.depot() else {
        return Vec::new();
    };
    let mut unassigned: BTreeSet<NodeId> = g.nodes.iter().filter(|n| !n.is_depot).map(|n| n.id).collect();
    if unassigned.is_empty() {
        return Vec::new();
    }
    if unassigned.len() <= max_bins {
        return vec![g.clone()];
    }

    let distance = |a: NodeId, b: NodeId| g.edge(a, b).map_or(f64::INFINITY, |e| e.distance_km);
    let nearest = |from: NodeId, pool: &BTreeSet<NodeId>| -> NodeId {
        let mut best = *pool.iter().next().expect("pool nonempty");
        let mut best_d = distance(from, best);
        for &b in pool {
            let d = distance(from, b);
            if d < best_d {
                best = b;
                best_d = d;
            }
        }
        best
    };

    let mut districts = Vec::new();
    while !unassigned.is_empty() {
        let mut members = vec![depot];
        let mut last = depot;
        while members.len() <= max_bins && !unassigned.is_empty() {
            let next = nearest(last, &unassigned);
            unassigned.remove(&next);
            members.push(next);
            last = next;
        }
        districts.push(g.subgraph(&members));
    }
    districts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::BinNode;

    fn line(n: u32) -> CollectionGraph {
        let mut g = CollectionGraph::new(
            (0..=n)
                .map(|id| BinNode { id, fill_level: 1.0, is_depot: id == 0 })
                .collect(),
        );
        for a in 0..=n {
            for b in a + 1..=n {
                g.add_edge(a, b, (b - a) as f64, 1.0);
            }
        }
        g
    }

    #[test]
    fn small_graph_is_one_district() {
        let g = line(4);
        assert_eq!(partition_districts(&g, 4), vec![g.clone()]);
        assert_eq!(partition_districts(&g, 10), vec![g]);
    }

    #[test]
    fn zero_bins() {
        let g = CollectionGraph::new(vec![BinNode { id: 0, fill_level: 0.0, is_depot: true }]);
        assert!(partition_districts(&g, 3).is_empty());
    }

    #[test]
    fn chains_cover_every_bin_once() {
        let g = line(7);
        let d = partition_districts(&g, 3);
        let ids: Vec<Vec<NodeId>> = d.iter().map(|x| x.nodes.iter().map(|n| n.id).collect()).collect();
        assert_eq!(ids, vec![vec![0, 1, 2, 3], vec![0, 4, 5, 6], vec![0, 7]]);
        assert!(d.iter().all(|x| x.depot() == Some(0)));
    }
}
