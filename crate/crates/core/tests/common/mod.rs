#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub fn dirichlet(rng: &mut ChaCha8Rng, alpha: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).unwrap().sample(rng).max(1e-300))
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn categorical(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Word `w` of the planted vocabulary, spelled so preprocessing keeps it intact.
pub fn word(w: usize) -> String {
    const L: &[u8] = b"bcdfghjklmnpqrstvwxz";
    let mut s = String::from("w");
    let mut x = w;
    for _ in 0..3 {
        s.push(L[x % L.len()] as char);
        x /= L.len();
    }
    s.push('o');
    s
}

#[derive(Debug, Clone, Copy)]
pub struct PlantedSpec {
    pub topics: usize,
    pub vocab: usize,
    pub docs: usize,
    /// Mean document length; lengths vary by +-5.
    pub len: usize,
    pub alpha: f64,
    /// Rare words outside every topic.
    pub noise_words: usize,
    /// Share of each document given to two of those words, repeated.
    pub noise_share: f64,
}

impl PlantedSpec {
    /// 4 topics, V = 200, 800 documents of about 60 tokens.
    pub fn four_topics() -> Self {
        Self {
            topics: 4,
            vocab: 200,
            docs: 800,
            len: 60,
            alpha: 0.1,
            noise_words: 40,
            noise_share: 0.2,
        }
    }
}

pub struct Planted {
    pub docs: Vec<Vec<String>>,
    /// Row `t` over word indices `0..vocab`.
    pub phi: Vec<Vec<f64>>,
}

/// Topics own disjoint blocks of the vocabulary with Zipf-like weights and
/// documents mix them under a symmetric Dirichlet. Each document also
/// repeats two idiosyncratic noise words, the way abstracts repeat their own
/// acronyms; surplus topics end up collecting those.
pub fn planted_corpus(seed: u64, spec: PlantedSpec) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = (spec.vocab - spec.noise_words) / spec.topics;
    let phi: Vec<Vec<f64>> = (0..spec.topics)
        .map(|t| {
            let mut row = vec![0.0; spec.vocab];
            for r in 0..block {
                row[t * block + r] = 1.0 / (r as f64 + 2.0);
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|x| x / s).collect()
        })
        .collect();
    let docs = (0..spec.docs)
        .map(|_| {
            let theta = dirichlet(&mut rng, &vec![spec.alpha; spec.topics]);
            let n = spec.len - 5 + rng.random_range(0..=10);
            let mut doc: Vec<String> = Vec::with_capacity(n);
            if spec.noise_words > 0 {
                let reps = (spec.noise_share * n as f64 / 2.0).round() as usize;
                for _ in 0..2 {
                    let w = word(spec.vocab - spec.noise_words + rng.random_range(0..spec.noise_words));
                    doc.extend(std::iter::repeat_n(w, reps));
                }
            }
            while doc.len() < n {
                let t = categorical(&mut rng, &theta);
                doc.push(word(categorical(&mut rng, &phi[t])));
            }
            doc.shuffle(&mut rng);
            doc
        })
        .collect();
    Planted { docs, phi }
}

/// Best mean cosine between planted and estimated topics over all matchings.
pub fn best_permutation_cosine(planted: &[Vec<f64>], estimated: &[Vec<f64>]) -> f64 {
    fn cos(a: &[f64], b: &[f64]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        d / (na * nb)
    }
    let k = planted.len();
    let mut best = f64::NEG_INFINITY;
    for perm in itertools::Itertools::permutations(0..k, k) {
        let s: f64 = perm.iter().enumerate().map(|(i, &j)| cos(&planted[i], &estimated[j])).sum();
        best = best.max(s / k as f64);
    }
    best
}

/// Reorder the columns of a model's phi to planted word-index order.
pub fn phi_in_planted_order(model: &topictaxo::TopicModel, vocab: usize) -> Vec<Vec<f64>> {
    model
        .phi
        .iter()
        .map(|row| {
            (0..vocab)
                .map(|w| model.term_id(&word(w)).map_or(0.0, |i| row[i]))
                .collect()
        })
        .collect()
}
