//! Document ingestion, text normalization and the immutable token corpus.

mod bigrams;
mod matrix;
mod preprocess;
mod records;
mod sentences;

pub use bigrams::{bigram_score, detect_bigrams, BigramPolicy};
pub use matrix::{build_doc_term_matrix, Corpus, Sentence, SentenceWord, Vocabulary};
pub use preprocess::{
    parse_stopword_list, preprocess_document, preprocess_tokens, surface_words, PreprocessRules,
    StemmerKind, StripPattern, TokenizedCorpus, TokenizedDoc,
};
pub use records::{ingest_corpus, parse_jsonl, read_jsonl, DocumentRecord, Staging, StagedDoc};
pub use sentences::split_sentences;
