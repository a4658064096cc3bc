use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::verbs::VerbLexicon;
use crate::corpus::Sentence;
use crate::error::{Error, Result};

pub const FALLBACK_RELATION: &str = "related_to";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub concept: String,
    pub topic: usize,
}

/// Concepts with their owning topics. A multiword concept joins its stemmed
/// parts with `_`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptList {
    pub entries: Vec<ConceptEntry>,
}

impl ConceptList {
    pub fn new(entries: Vec<ConceptEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.concept.is_empty() || !seen.insert(e.concept.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "concepts must be nonempty and distinct: \"{}\"",
                    e.concept
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, usize)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(c, t)| ConceptEntry {
                    concept: c.as_ref().to_string(),
                    topic: *t,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub source: String,
    pub relation: String,
    pub target: String,
    pub sentence: usize,
}

/// Word span `[start, end)` of the first mention of `concept` in the sentence.
///
/// Mentions are matched on stems; words removed by preprocessing are
/// transparent, so `question and answer` matches `question_answer`.
pub fn find_mention(sentence: &Sentence, concept: &str) -> Option<(usize, usize)> {
    let parts: Vec<&str> = concept.split('_').collect();
    let kept: Vec<(usize, &str)> = sentence
        .words
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.stem.as_deref().map(|s| (i, s)))
        .collect();
    if parts.len() > 1 {
        if let Some((i, _)) = kept.iter().find(|(_, s)| *s == concept) {
            return Some((*i, i + 1));
        }
    }
    kept.windows(parts.len())
        .find(|win| win.iter().zip(&parts).all(|((_, s), p)| s == p))
        .map(|win| (win[0].0, win[parts.len() - 1].0 + 1))
}

/// First verb strictly between two mention spans, or the fallback label.
pub(crate) fn relation_between(
    sentence: &Sentence,
    a: (usize, usize),
    b: (usize, usize),
    lexicon: &VerbLexicon,
) -> String {
    let range = if a.1 <= b.0 {
        a.1..b.0
    } else if b.1 <= a.0 {
        b.1..a.0
    } else {
        0..0
    };
    sentence.words[range]
        .iter()
        .find_map(|w| lexicon.base_form(&w.surface))
        .unwrap_or_else(|| FALLBACK_RELATION.to_string())
}

fn sentence_triples(
    idx: usize,
    sentence: &Sentence,
    present: &[(usize, (usize, usize))],
    concepts: &ConceptList,
    lexicon: &VerbLexicon,
    cross_topic_only: bool,
) -> Vec<Triple> {
    let mut out = Vec::new();
    for &(ci, span_i) in present {
        for &(cj, span_j) in present {
            if ci == cj {
                continue;
            }
            let (ei, ej) = (&concepts.entries[ci], &concepts.entries[cj]);
            if cross_topic_only && ei.topic == ej.topic {
                continue;
            }
            out.push(Triple {
                source: ei.concept.clone(),
                relation: relation_between(sentence, span_i, span_j, lexicon),
                target: ej.concept.clone(),
                sentence: idx,
            });
        }
    }
    out
}

/// For every sentence and every ordered pair of distinct concepts it
/// mentions, emit `(source, verb, target)`. Pairs from the same topic are
/// skipped when `cross_topic_only` is set. Output is ordered by sentence,
/// then source concept order, then target concept order.
pub fn extract_relations(
    sentences: &[Sentence],
    concepts: &ConceptList,
    lexicon: &VerbLexicon,
    cross_topic_only: bool,
) -> Vec<Triple> {
    if concepts.is_empty() {
        return Vec::new();
    }
    // stem -> sentences containing it
    let mut postings: HashMap<&str, Vec<usize>> = HashMap::new();
    for (s, sentence) in sentences.iter().enumerate() {
        for w in &sentence.words {
            if let Some(stem) = w.stem.as_deref() {
                let list = postings.entry(stem).or_default();
                if list.last() != Some(&s) {
                    list.push(s);
                }
            }
        }
    }
    let mut present: Vec<Vec<(usize, (usize, usize))>> = vec![Vec::new(); sentences.len()];
    for (ci, entry) in concepts.entries.iter().enumerate() {
        let mut candidates: Vec<usize> = entry
            .concept
            .split('_')
            .filter_map(|p| postings.get(p))
            .min_by_key(|l| l.len())
            .cloned()
            .unwrap_or_default();
        if let Some(whole) = postings.get(entry.concept.as_str()) {
            candidates.extend(whole);
            candidates.sort_unstable();
            candidates.dedup();
        }
        for s in candidates {
            if let Some(span) = find_mention(&sentences[s], &entry.concept) {
                present[s].push((ci, span));
            }
        }
    }

    let per_sentence = |(s, found): (usize, &Vec<(usize, (usize, usize))>)| {
        if found.len() < 2 {
            Vec::new()
        } else {
            sentence_triples(s, &sentences[s], found, concepts, lexicon, cross_topic_only)
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        present
            .par_iter()
            .enumerate()
            .map(per_sentence)
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        present.iter().enumerate().flat_map(per_sentence).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{preprocess_document, PreprocessRules};

    fn sentences(text: &str) -> Vec<Sentence> {
        let doc = preprocess_document("d", text, &PreprocessRules::default());
        doc.sentences
            .into_iter()
            .map(|(text, words)| Sentence {
                doc: 0,
                text,
                words,
                tokens: vec![],
            })
            .collect()
    }

    #[test]
    fn verb_between_cross_topic_mentions() {
        let s = sentences("Neuromorphic chips accelerate machine learning models.");
        let c = ConceptList::from_pairs(&[("neuromorph", 1), ("machin_learn", 2)]).unwrap();
        let t = extract_relations(&s, &c, &VerbLexicon::bundled(), true);
        assert_eq!(t[0].source, "neuromorph");
        assert_eq!(t[0].relation, "accelerate");
        assert_eq!(t[0].target, "machin_learn");
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn single_concept_sentence_yields_nothing() {
        let s = sentences("Spiking neurons fire rapidly.");
        let c = ConceptList::from_pairs(&[("neuron", 0), ("memristor", 1)]).unwrap();
        assert!(extract_relations(&s, &c, &VerbLexicon::bundled(), true).is_empty());
    }

    #[test]
    fn same_topic_filtered_when_cross_only() {
        let s = sentences("Neurons drive spikes.");
        let c = ConceptList::from_pairs(&[("neuron", 0), ("spike", 0)]).unwrap();
        assert!(extract_relations(&s, &c, &VerbLexicon::bundled(), true).is_empty());
        let t = extract_relations(&s, &c, &VerbLexicon::bundled(), false);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].relation, "drive");
    }

    #[test]
    fn fallback_relation_and_empty_list() {
        let s = sentences("Neurons spikes.");
        let c = ConceptList::from_pairs(&[("neuron", 0), ("spike", 1)]).unwrap();
        assert_eq!(extract_relations(&s, &c, &VerbLexicon::bundled(), true)[0].relation, FALLBACK_RELATION);
        assert!(extract_relations(&s, &ConceptList::default(), &VerbLexicon::bundled(), true).is_empty());
    }

    #[test]
    fn duplicate_concepts_rejected() {
        assert!(ConceptList::from_pairs(&[("a", 0), ("a", 1)]).is_err());
    }
}
