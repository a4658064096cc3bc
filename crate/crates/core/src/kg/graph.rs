use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::extract::Triple;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    /// Relation count scaled by the largest count in the graph, in (0, 1].
    pub shade: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    pub relation: String,
    pub weight: u64,
}

/// Concept graph with occurrence-weighted, relation-labeled edges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl WeightedGraph {
    pub fn node_index(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
    }

    /// Sum of incident edge weights for each node, in node order.
    pub fn relation_counts(&self) -> Vec<u64> {
        let index = self.node_index();
        let mut counts = vec![0u64; self.nodes.len()];
        for e in &self.edges {
            counts[index[e.source.as_str()]] += e.weight;
            counts[index[e.target.as_str()]] += e.weight;
        }
        counts
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

/// Group triples by unordered concept pair. Weight counts occurrences; the
/// first-seen triple fixes edge direction and display relation. Nodes appear
/// in first-seen order.
pub fn reduce_edge_weights(triples: &[Triple]) -> WeightedGraph {
    let mut node_order: Vec<String> = Vec::new();
    let mut node_seen: HashMap<String, ()> = HashMap::new();
    let mut edge_index: HashMap<(String, String), usize> = HashMap::new();
    let mut edges: Vec<GraphEdge> = Vec::new();
    for t in triples {
        for id in [&t.source, &t.target] {
            if node_seen.insert(id.clone(), ()).is_none() {
                node_order.push(id.clone());
            }
        }
        let key = if t.source <= t.target {
            (t.source.clone(), t.target.clone())
        } else {
            (t.target.clone(), t.source.clone())
        };
        match edge_index.get(&key) {
            Some(&i) => edges[i].weight += 1,
            None => {
                edge_index.insert(key, edges.len());
                edges.push(GraphEdge {
                    source: t.source.clone(),
                    target: t.target.clone(),
                    relation: t.relation.clone(),
                    weight: 1,
                });
            }
        }
    }
    let mut graph = WeightedGraph {
        nodes: node_order
            .into_iter()
            .map(|id| GraphNode { id, shade: 0.0 })
            .collect(),
        edges,
    };
    let counts = graph.relation_counts();
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    for (node, c) in graph.nodes.iter_mut().zip(counts) {
        node.shade = c as f64 / max;
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str, r: &str, o: &str) -> Triple {
        Triple {
            source: s.into(),
            relation: r.into(),
            target: o.into(),
            sentence: 0,
        }
    }

    #[test]
    fn counting_and_first_seen_relation() {
        let g = reduce_edge_weights(&[t("a", "r1", "b"), t("a", "r2", "b"), t("c", "r1", "d")]);
        assert_eq!(g.edges.len(), 2);
        assert_eq!((g.edges[0].weight, g.edges[0].relation.as_str()), (2, "r1"));
        assert_eq!((g.edges[1].weight, g.edges[1].relation.as_str()), (1, "r1"));
        assert_eq!(g.nodes[0].shade, 1.0);
        assert_eq!(g.nodes[2].shade, 0.5);
    }

    #[test]
    fn direction_is_ignored() {
        let g = reduce_edge_weights(&[t("a", "r", "b"), t("b", "q", "a")]);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].weight, 2);
    }

    #[test]
    fn empty_input() {
        assert_eq!(reduce_edge_weights(&[]), WeightedGraph::default());
    }

    proptest! {
        #[test]
        fn weight_conservation(pairs in proptest::collection::vec((0u8..6, 0u8..6), 0..60)) {
            let triples: Vec<Triple> = pairs
                .iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| t(&format!("c{a}"), "r", &format!("c{b}")))
                .collect();
            let g = reduce_edge_weights(&triples);
            prop_assert_eq!(g.total_weight() as usize, triples.len());
            let mut keys: Vec<(String, String)> = g.edges.iter().map(|e| {
                if e.source <= e.target { (e.source.clone(), e.target.clone()) } else { (e.target.clone(), e.source.clone()) }
            }).collect();
            let n = keys.len();
            keys.sort();
            keys.dedup();
            prop_assert_eq!(keys.len(), n);
            let mut rev = triples.clone();
            rev.reverse();
            let g2 = reduce_edge_weights(&rev);
            let weights = |g: &WeightedGraph| {
                let mut w: Vec<(String, String, u64)> = g.edges.iter().map(|e| {
                    let (a, b) = if e.source <= e.target { (e.source.clone(), e.target.clone()) } else { (e.target.clone(), e.source.clone()) };
                    (a, b, e.weight)
                }).collect();
                w.sort();
                w
            };
            prop_assert_eq!(weights(&g), weights(&g2));
        }
    }
}
