//! Cross-topic concept relations: extraction from sentences, reduction to a
//! weighted graph, circular and spring layouts, and export.

mod export;
mod extract;
mod graph;
mod layout;
mod verbs;

pub use export::{export_graph, layout_json, ExportFormat};
pub use extract::{extract_relations, find_mention, ConceptEntry, ConceptList, Triple};
pub use graph::{reduce_edge_weights, GraphEdge, GraphNode, WeightedGraph};
pub use layout::{
    layout_circular, layout_kamada_kawai, shortest_path_lengths, stress, stress_gradient, LayoutCoords,
    SpringParams,
};
pub use verbs::VerbLexicon;
