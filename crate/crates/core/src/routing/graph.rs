use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinNode {
    pub id: NodeId,
    #[serde(default)]
    pub fill_level: f64,
    #[serde(default)]
    pub is_depot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeAttrs {
    pub distance_km: f64,
    pub emission_rate_kg_per_km: f64,
}

impl EdgeAttrs {
    pub fn emissions_kg(&self) -> f64 {
        self.distance_km * self.emission_rate_kg_per_km
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: NodeId,
    to: NodeId,
    distance_km: f64,
    emission_rate_kg_per_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    nodes: Vec<BinNode>,
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    service_threshold: f64,
}

/// Street graph of a depot and its smart bins.
///
/// An edge listed once serves both directions; when both directions are
/// listed they must carry the same distance. Bins whose fill level is at or
/// above `service_threshold` require service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct CollectionGraph {
    pub nodes: Vec<BinNode>,
    pub edges: BTreeMap<(NodeId, NodeId), EdgeAttrs>,
    pub service_threshold: f64,
}

impl TryFrom<GraphDocument> for CollectionGraph {
    type Error = String;

    fn try_from(doc: GraphDocument) -> Result<Self, Self::Error> {
        let mut edges = BTreeMap::new();
        for e in doc.edges {
            let attrs = EdgeAttrs {
                distance_km: e.distance_km,
                emission_rate_kg_per_km: e.emission_rate_kg_per_km,
            };
            if edges.insert((e.from, e.to), attrs).is_some() {
                return Err(format!("edge {} -> {} listed twice", e.from, e.to));
            }
        }
        Ok(Self {
            nodes: doc.nodes,
            edges,
            service_threshold: doc.service_threshold,
        })
    }
}

impl From<CollectionGraph> for GraphDocument {
    fn from(g: CollectionGraph) -> Self {
        Self {
            nodes: g.nodes,
            edges: g
                .edges
                .into_iter()
                .map(|((from, to), a)| EdgeRecord {
                    from,
                    to,
                    distance_km: a.distance_km,
                    emission_rate_kg_per_km: a.emission_rate_kg_per_km,
                })
                .collect(),
            service_threshold: g.service_threshold,
        }
    }
}

impl CollectionGraph {
    pub fn new(nodes: Vec<BinNode>) -> Self {
        Self {
            nodes,
            edges: BTreeMap::new(),
            service_threshold: 0.0,
        }
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, distance_km: f64, emission_rate_kg_per_km: f64) {
        self.edges.insert(
            (from, to),
            EdgeAttrs {
                distance_km,
                emission_rate_kg_per_km,
            },
        );
    }

    pub fn depot(&self) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.is_depot).map(|n| n.id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    /// Non-depot nodes requiring service, ascending by id.
    pub fn service_bins(&self) -> Vec<NodeId> {
        let mut bins: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| !n.is_depot && n.fill_level >= self.service_threshold)
            .map(|n| n.id)
            .collect();
        bins.sort_unstable();
        bins
    }

    /// Edge between two nodes, taking the reverse direction when only it is listed.
    pub fn edge(&self, from: NodeId, to: NodeId) -> Option<EdgeAttrs> {
        self.edges
            .get(&(from, to))
            .or_else(|| self.edges.get(&(to, from)))
            .copied()
    }

    pub fn leg_emissions(&self, from: NodeId, to: NodeId) -> Option<f64> {
        if from == to {
            return Some(0.0);
        }
        self.edge(from, to).map(|e| e.emissions_kg())
    }

    /// The induced subgraph on `keep` (which should include the depot).
    pub fn subgraph(&self, keep: &[NodeId]) -> CollectionGraph {
        let keep: BTreeSet<NodeId> = keep.iter().copied().collect();
        CollectionGraph {
            nodes: self.nodes.iter().filter(|n| keep.contains(&n.id)).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|((a, b), _)| keep.contains(a) && keep.contains(b))
                .map(|(k, v)| (*k, *v))
                .collect(),
            service_threshold: self.service_threshold,
        }
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let depots = self.nodes.iter().filter(|n| n.is_depot).count();
        if depots != 1 {
            out.push(Diagnostic::new(
                "collection_graph.nodes",
                format!("expected exactly one depot, found {depots}"),
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !seen.insert(n.id) {
                out.push(Diagnostic::new(
                    format!("collection_graph.nodes[{i}].id"),
                    format!("duplicate node id {}", n.id),
                ));
            }
            if !(0.0..=1.0).contains(&n.fill_level) {
                out.push(Diagnostic::new(
                    format!("collection_graph.nodes[{i}].fill_level"),
                    format!("fill level {} outside [0, 1]", n.fill_level),
                ));
            }
        }
        for (&(a, b), attrs) in &self.edges {
            let path = format!("collection_graph.edges[{a}->{b}]");
            if !seen.contains(&a) || !seen.contains(&b) {
                out.push(Diagnostic::new(path.clone(), "references an unknown node"));
            }
            if !(attrs.distance_km.is_finite() && attrs.distance_km >= 0.0) {
                out.push(Diagnostic::new(path.clone(), "distance_km must be >= 0"));
            }
            if !(attrs.emission_rate_kg_per_km.is_finite() && attrs.emission_rate_kg_per_km >= 0.0) {
                out.push(Diagnostic::new(path.clone(), "emission_rate_kg_per_km must be >= 0"));
            }
            if a < b {
                if let Some(rev) = self.edges.get(&(b, a)) {
                    if rev.distance_km != attrs.distance_km {
                        out.push(Diagnostic::new(
                            path,
                            format!(
                                "asymmetric distance: {} vs {} in reverse",
                                attrs.distance_km, rev.distance_km
                            ),
                        ));
                    }
                }
            }
        }
        if !(0.0..=1.0).contains(&self.service_threshold) {
            out.push(Diagnostic::new(
                "collection_graph.service_threshold",
                "must lie in [0, 1]",
            ));
        }
        out
    }
}
