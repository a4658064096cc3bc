//! Browser bindings. Every entry point takes plain text or JSON and returns
//! a JSON string; errors come back as a thrown string.

use serde::Serialize;
use topictaxo::corpus::{build_doc_term_matrix, preprocess_document, preprocess_tokens, PreprocessRules, TokenizedCorpus};
use topictaxo::kg::{
    extract_relations, layout_circular, layout_kamada_kawai, reduce_edge_weights, ConceptList, SpringParams, Triple,
    VerbLexicon, WeightedGraph,
};
use topictaxo::models::{train_lda, LdaConfig, ModelKind};
use topictaxo::taxo::{compare_taxonomies, Taxonomy, TaxonomyReport};
use topictaxo::terms::{topic_map, TopicMapData};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
pub struct GraphResult {
    pub triples: Vec<Triple>,
    pub graph: WeightedGraph,
    pub circular: Vec<[f64; 2]>,
    pub spring: Vec<[f64; 2]>,
    pub stress: Option<f64>,
}

/// `concept, topic` per line. Concepts are normalized like corpus text, so
/// "machine learning" matches mentions of "machine-learning models".
fn parse_concepts(text: &str, rules: &PreprocessRules) -> Result<ConceptList, String> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (concept, topic) = line
            .rsplit_once(',')
            .ok_or_else(|| format!("line {}: expected \"concept, topic\"", i + 1))?;
        let topic: usize = topic
            .trim()
            .parse()
            .map_err(|_| format!("line {}: topic must be a number", i + 1))?;
        let canonical = preprocess_tokens(concept, rules).join("_");
        if canonical.is_empty() {
            return Err(format!("line {}: \"{}\" has no content words", i + 1, concept.trim()));
        }
        pairs.push((canonical, topic));
    }
    ConceptList::from_pairs(&pairs).map_err(|e| e.to_string())
}

pub fn concept_graph(text: &str, concepts: &str, cross_topic_only: bool) -> Result<GraphResult, String> {
    let rules = PreprocessRules::default();
    let concepts = parse_concepts(concepts, &rules)?;
    let doc = preprocess_document("pasted", text, &rules);
    let staging = TokenizedCorpus { docs: vec![doc] };
    let corpus = build_doc_term_matrix(&staging, 1).map_err(|e| e.to_string())?;
    let triples = extract_relations(corpus.sentences(), &concepts, &VerbLexicon::bundled(), cross_topic_only);
    let graph = reduce_edge_weights(&triples);
    if graph.nodes.is_empty() {
        return Ok(GraphResult {
            triples,
            graph,
            circular: vec![],
            spring: vec![],
            stress: None,
        });
    }
    let circular = layout_circular(&graph).map_err(|e| e.to_string())?;
    let spring = layout_kamada_kawai(&graph, &SpringParams::default()).map_err(|e| e.to_string())?;
    Ok(GraphResult {
        triples,
        graph,
        circular: circular.positions,
        spring: spring.positions,
        stress: spring.stress,
    })
}

pub fn taxonomy_report(generated: &str, reference: &str) -> Result<TaxonomyReport, String> {
    let g = Taxonomy::from_json(generated).map_err(|e| format!("generated: {e}"))?;
    let r = Taxonomy::from_json(reference).map_err(|e| format!("reference: {e}"))?;
    compare_taxonomies(&g, &r).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct MapResult {
    pub top_terms: Vec<Vec<String>>,
    pub map: TopicMapData,
}

/// LDA over one document per nonempty line, then the inter-topic map.
pub fn lda_topic_map(text: &str, k: usize, seed: u64) -> Result<MapResult, String> {
    let rules = PreprocessRules::default();
    let docs: Vec<_> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| preprocess_document(&format!("line{i}"), l, &rules))
        .collect();
    if docs.is_empty() {
        return Err("paste at least one nonempty line".into());
    }
    let corpus = build_doc_term_matrix(&TokenizedCorpus { docs }, 1).map_err(|e| e.to_string())?;
    let cfg = LdaConfig {
        k,
        iterations: 300,
        burn_in: 100,
        sample_lag: 10,
        seed,
        ..LdaConfig::default()
    };
    let model = train_lda(&corpus, &cfg, ModelKind::Lda).map_err(|e| e.to_string())?;
    let top_terms = (0..k)
        .map(|t| model.top_terms(t, 8))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let map = topic_map(&model).map_err(|e| e.to_string())?;
    Ok(MapResult { top_terms, map })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = conceptGraph)]
pub fn concept_graph_js(text: &str, concepts: &str, cross_topic_only: bool) -> Result<String, JsValue> {
    to_js(concept_graph(text, concepts, cross_topic_only))
}

#[wasm_bindgen(js_name = compareTaxonomies)]
pub fn compare_taxonomies_js(generated: &str, reference: &str) -> Result<String, JsValue> {
    to_js(taxonomy_report(generated, reference))
}

#[wasm_bindgen(js_name = topicMap)]
pub fn topic_map_js(text: &str, k: usize, seed: u32) -> Result<String, JsValue> {
    to_js(lda_topic_map(text, k, seed as u64))
}
