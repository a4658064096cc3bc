//! Corpus-to-taxonomy text mining.
//!
//! The crate turns a collection of abstracts into a small taxonomy of
//! topics: it preprocesses the corpus, trains topic models (collapsed
//! Gibbs LDA, bigram LDA and LSI), picks the model family and topic count
//! with a two-stage coherence search, ranks each topic's concepts by
//! saliency and relevance, maps topic distances, extracts a weighted
//! concept graph with layouts and compares the result to a reference
//! taxonomy with Jaccard similarity.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod kg;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod rng;
pub mod stem;
pub mod taxo;
pub mod terms;

pub use corpus::{Corpus, DocumentRecord, PreprocessRules};
pub use error::{Error, Result};
pub use models::{LdaConfig, LsiConfig, ModelKind, TopicModel};
