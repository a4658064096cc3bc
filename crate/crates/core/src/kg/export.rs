use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::Serialize;

use super::graph::WeightedGraph;
use super::layout::LayoutCoords;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    EdgelistCsv,
    Dot,
    GraphJson,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edgelist-csv" | "csv" => Ok(Self::EdgelistCsv),
            "dot" => Ok(Self::Dot),
            "graph-json" | "json" => Ok(Self::GraphJson),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Serialize a graph. DOT output carries `penwidth` = edge weight, the node
/// relation count and its shade, and node positions when a layout is given.
pub fn export_graph(graph: &WeightedGraph, layout: Option<&LayoutCoords>, format: ExportFormat) -> Result<String> {
    if let Some(l) = layout {
        if format != ExportFormat::EdgelistCsv && l.positions.len() != graph.nodes.len() {
            return Err(Error::InvalidConfig(format!(
                "layout has {} positions for {} nodes",
                l.positions.len(),
                graph.nodes.len()
            )));
        }
    }
    match format {
        ExportFormat::EdgelistCsv => {
            let mut out = String::from("source,relation,target,weight\n");
            for e in &graph.edges {
                writeln!(
                    out,
                    "{},{},{},{}",
                    csv_field(&e.source),
                    csv_field(&e.relation),
                    csv_field(&e.target),
                    e.weight
                )
                .unwrap();
            }
            Ok(out)
        }
        ExportFormat::GraphJson => Ok(serde_json::to_string_pretty(graph)? + "\n"),
        ExportFormat::Dot => {
            let counts = graph.relation_counts();
            let mut out = String::from("graph kg {\n  node [style=filled, fontname=\"Helvetica\"];\n");
            for (i, n) in graph.nodes.iter().enumerate() {
                let grey = 1.0 - 0.7 * n.shade;
                write!(
                    out,
                    "  {} [relations={}, shade={:.6}, fillcolor=\"0 0 {:.4}\"",
                    dot_id(&n.id),
                    counts[i],
                    n.shade,
                    grey
                )
                .unwrap();
                if let Some(l) = layout {
                    let [x, y] = l.positions[i];
                    write!(out, ", pos=\"{x:.6},{y:.6}!\"").unwrap();
                }
                out.push_str("];\n");
            }
            for e in &graph.edges {
                writeln!(
                    out,
                    "  {} -- {} [label={}, weight={}, penwidth={}];",
                    dot_id(&e.source),
                    dot_id(&e.target),
                    dot_id(&e.relation),
                    e.weight,
                    e.weight
                )
                .unwrap();
            }
            out.push_str("}\n");
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct LayoutDoc<'a> {
    nodes: BTreeMap<&'a str, [f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stress: Option<f64>,
}

/// `{"nodes": {id: [x, y]}, "stress": s}`.
pub fn layout_json(graph: &WeightedGraph, layout: &LayoutCoords) -> Result<String> {
    if layout.positions.len() != graph.nodes.len() {
        return Err(Error::InvalidConfig("layout does not cover every node".into()));
    }
    let doc = LayoutDoc {
        nodes: graph
            .nodes
            .iter()
            .zip(&layout.positions)
            .map(|(n, p)| (n.id.as_str(), *p))
            .collect(),
        stress: layout.stress,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::graph::{GraphEdge, GraphNode};

    fn pair() -> WeightedGraph {
        WeightedGraph {
            nodes: vec![
                GraphNode { id: "spike".into(), shade: 1.0 },
                GraphNode { id: "neuron".into(), shade: 1.0 },
            ],
            edges: vec![GraphEdge {
                source: "spike".into(),
                target: "neuron".into(),
                relation: "drive".into(),
                weight: 3,
            }],
        }
    }

    #[test]
    fn csv_has_header_and_row() {
        let s = export_graph(&pair(), None, ExportFormat::EdgelistCsv).unwrap();
        assert_eq!(s, "source,relation,target,weight\nspike,drive,neuron,3\n");
    }

    #[test]
    fn json_round_trip() {
        let g = pair();
        let s = export_graph(&g, None, ExportFormat::GraphJson).unwrap();
        let back: WeightedGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dot_carries_width() {
        let s = export_graph(&pair(), None, ExportFormat::Dot).unwrap();
        assert!(s.starts_with("graph kg {"));
        assert!(s.contains("\"spike\" -- \"neuron\" [label=\"drive\", weight=3, penwidth=3];"));
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("gexf".parse::<ExportFormat>(), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn layout_document() {
        let l = LayoutCoords {
            positions: vec![[1.0, 0.0], [-1.0, 0.0]],
            stress: Some(0.0),
            initial_stress: None,
        };
        let s = layout_json(&pair(), &l).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["nodes"]["neuron"][0], -1.0);
        assert_eq!(v["stress"], 0.0);
    }
}
