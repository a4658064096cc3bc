use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::coherence::coherence_cv;
use super::perplexity::perplexity;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::models::{train_lda, train_lsi, FoldInConfig, LdaConfig, LsiConfig, ModelKind, TopicModel};

/// One scored (implementation, K) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub algorithm: String,
    pub family: String,
    pub k: usize,
    pub coherence: f64,
    pub perplexity: Option<f64>,
    pub log_likelihood_per_word: Option<f64>,
}

impl EvalCell {
    /// A cell carrying only a coherence score.
    pub fn scored(algorithm: &str, family: &str, k: usize, coherence: f64) -> Self {
        Self {
            algorithm: algorithm.into(),
            family: family.into(),
            k,
            coherence,
            perplexity: None,
            log_likelihood_per_word: None,
        }
    }
}

/// A trainable implementation and the model family it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Implementation {
    pub name: String,
    pub family: String,
}

impl Implementation {
    pub fn new(name: &str, family: &str) -> Self {
        Self {
            name: name.into(),
            family: family.into(),
        }
    }

    pub fn from_kind(kind: ModelKind) -> Self {
        Self::new(kind.name(), kind.family())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionGrid {
    pub implementations: Vec<Implementation>,
    pub k_pilot: usize,
    pub k_values: Vec<usize>,
}

impl SelectionGrid {
    pub fn new(implementations: Vec<Implementation>, k_pilot: usize, k_range: std::ops::RangeInclusive<usize>) -> Self {
        Self {
            implementations,
            k_pilot,
            k_values: k_range.collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.implementations.is_empty() {
            return Err(Error::Selection("no model implementations to evaluate".into()));
        }
        if self.k_values.is_empty() || self.k_pilot == 0 || self.k_values.contains(&0) {
            return Err(Error::Selection("topic counts must be positive and nonempty".into()));
        }
        let mut names: Vec<&str> = self.implementations.iter().map(|i| i.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Selection("implementation names must be unique".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub algorithm: String,
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub best_family: String,
    pub best_algorithm: String,
    pub k_best: usize,
    pub best_cell: EvalCell,
    /// Stage-1 cells, best coherence first.
    pub stage1_ranking: Vec<EvalCell>,
    /// Stage-2 cells in implementation order, then increasing K.
    pub stage2_curve: Vec<EvalCell>,
    #[serde(default)]
    pub failed: Vec<FailedCell>,
}

fn evaluate_all<F>(tasks: &[(usize, usize)], grid: &SelectionGrid, eval: &F) -> Vec<Result<EvalCell>>
where
    F: Fn(&Implementation, usize) -> Result<EvalCell> + Sync,
{
    let run = |&(i, k): &(usize, usize)| eval(&grid.implementations[i], k);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        tasks.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        tasks.iter().map(run).collect()
    }
}

/// Two-stage selection.
///
/// Stage 1 scores every implementation at `k_pilot` and keeps the family of
/// the most coherent one. Stage 2 sweeps every implementation of that family
/// over `k_values` and returns the most coherent cell; ties go to the
/// smaller K, then to the earlier implementation. Failed cells are excluded
/// and reported. Cells may be evaluated concurrently; results are merged by
/// `(implementation, K)` so the outcome does not depend on scheduling.
pub fn run_staged_selection<F>(grid: &SelectionGrid, eval: F) -> Result<SelectionResult>
where
    F: Fn(&Implementation, usize) -> Result<EvalCell> + Sync,
{
    grid.validate()?;
    let mut failed = Vec::new();
    let mut cache: HashMap<(usize, usize), EvalCell> = HashMap::new();

    let stage1_tasks: Vec<(usize, usize)> = (0..grid.implementations.len()).map(|i| (i, grid.k_pilot)).collect();
    for (task, outcome) in stage1_tasks.iter().zip(evaluate_all(&stage1_tasks, grid, &eval)) {
        match outcome {
            Ok(cell) => {
                cache.insert(*task, cell);
            }
            Err(e) => {
                let name = &grid.implementations[task.0].name;
                log::warn!("cell {name} K={} failed: {e}", task.1);
                failed.push(FailedCell {
                    algorithm: name.clone(),
                    k: task.1,
                    reason: e.to_string(),
                });
            }
        }
    }
    let mut stage1: Vec<(usize, EvalCell)> = stage1_tasks
        .iter()
        .filter_map(|t| cache.get(t).map(|c| (t.0, c.clone())))
        .collect();
    stage1.sort_by(|(ia, a), (ib, b)| b.coherence.total_cmp(&a.coherence).then(ia.cmp(ib)));
    let Some((_, pilot_best)) = stage1.first() else {
        return Err(Error::Selection("every stage-1 cell failed".into()));
    };
    let family = grid.implementations
        .iter()
        .find(|i| i.name == pilot_best.algorithm)
        .map(|i| i.family.clone())
        .unwrap_or_else(|| pilot_best.family.clone());

    let focus: Vec<usize> = (0..grid.implementations.len())
        .filter(|&i| grid.implementations[i].family == family)
        .collect();
    let stage2_tasks: Vec<(usize, usize)> = focus
        .iter()
        .flat_map(|&i| grid.k_values.iter().map(move |&k| (i, k)))
        .collect();
    let pending: Vec<(usize, usize)> = stage2_tasks
        .iter()
        .copied()
        .filter(|t| !cache.contains_key(t) && !(t.1 == grid.k_pilot && failed_at(&failed, grid, *t)))
        .collect();
    for (task, outcome) in pending.iter().zip(evaluate_all(&pending, grid, &eval)) {
        match outcome {
            Ok(cell) => {
                cache.insert(*task, cell);
            }
            Err(e) => {
                let name = &grid.implementations[task.0].name;
                log::warn!("cell {name} K={} failed: {e}", task.1);
                failed.push(FailedCell {
                    algorithm: name.clone(),
                    k: task.1,
                    reason: e.to_string(),
                });
            }
        }
    }

    let stage2: Vec<(usize, EvalCell)> = stage2_tasks
        .iter()
        .filter_map(|t| cache.get(t).map(|c| (t.0, c.clone())))
        .collect();
    let best = stage2
        .iter()
        .min_by(|(ia, a), (ib, b)| {
            b.coherence
                .total_cmp(&a.coherence)
                .then(a.k.cmp(&b.k))
                .then(ia.cmp(ib))
        })
        .map(|(_, c)| c.clone())
        .ok_or_else(|| Error::Selection("every stage-2 cell failed".into()))?;

    Ok(SelectionResult {
        best_family: family,
        best_algorithm: best.algorithm.clone(),
        k_best: best.k,
        best_cell: best,
        stage1_ranking: stage1.into_iter().map(|(_, c)| c).collect(),
        stage2_curve: stage2.into_iter().map(|(_, c)| c).collect(),
        failed,
    })
}

fn failed_at(failed: &[FailedCell], grid: &SelectionGrid, (i, k): (usize, usize)) -> bool {
    failed.iter().any(|f| f.k == k && f.algorithm == grid.implementations[i].name)
}

/// Corpora the grid trains on: the unigram corpus and, for bigram LDA, its
/// bigram-merged counterpart with the same documents in the same order.
#[derive(Debug, Clone, Copy)]
pub struct GridCorpora<'a> {
    pub unigram: &'a Corpus,
    pub bigram: Option<&'a Corpus>,
}

impl<'a> GridCorpora<'a> {
    pub fn for_kind(&self, kind: ModelKind) -> Result<&'a Corpus> {
        match kind {
            ModelKind::BiLda => self
                .bigram
                .ok_or_else(|| Error::Selection("bigram corpus not provided".into())),
            _ => Ok(self.unigram),
        }
    }
}

/// Training and scoring parameters shared by every grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub lda: LdaConfig,
    pub lsi: LsiConfig,
    pub fold_in: FoldInConfig,
    pub heldout_fraction: f64,
    pub top_n: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            lda: LdaConfig::default(),
            lsi: LsiConfig::default(),
            fold_in: FoldInConfig::default(),
            heldout_fraction: 0.1,
            top_n: 10,
            window: 110,
            seed: 42,
        }
    }
}

/// Train one model on the training split and score it.
///
/// Coherence is measured on the full corpus; perplexity on the held-out
/// split (not available for LSI).
pub fn evaluate_cell(
    kind: ModelKind,
    k: usize,
    corpora: &GridCorpora<'_>,
    settings: &GridSettings,
) -> Result<(EvalCell, TopicModel)> {
    let corpus = corpora.for_kind(kind)?;
    let (train, heldout) = corpus.split_heldout(settings.heldout_fraction, settings.seed);
    let model = match kind {
        ModelKind::Lsi => {
            let cfg = LsiConfig {
                k,
                seed: settings.seed,
                ..settings.lsi.clone()
            };
            train_lsi(&train, &cfg)?
        }
        ModelKind::Lda | ModelKind::BiLda => {
            let cfg = LdaConfig {
                k,
                seed: settings.seed,
                ..settings.lda.clone()
            };
            train_lda(&train, &cfg, kind)?
        }
    };
    let coherence = coherence_cv(&model, corpus, settings.top_n, settings.window)?;
    let ppl = match kind {
        ModelKind::Lsi => None,
        _ => Some(perplexity(&model, &heldout, &settings.fold_in)?),
    };
    let cell = EvalCell {
        algorithm: kind.name().into(),
        family: kind.family().into(),
        k,
        coherence: coherence.score,
        perplexity: ppl.map(|p| p.perplexity),
        log_likelihood_per_word: ppl.map(|p| p.log_likelihood_per_word),
    };
    Ok((cell, model))
}

/// Run the two-stage search with real training. Implementation names must
/// parse as model kinds (`LDA`, `BiLDA`, `LSI`).
pub fn run_selection_grid(
    corpora: &GridCorpora<'_>,
    grid: &SelectionGrid,
    settings: &GridSettings,
) -> Result<SelectionResult> {
    for imp in &grid.implementations {
        if ModelKind::parse(&imp.name).is_none() {
            return Err(Error::Selection(format!("unknown implementation \"{}\"", imp.name)));
        }
    }
    run_staged_selection(grid, |imp, k| {
        let kind = ModelKind::parse(&imp.name).expect("checked above");
        let (mut cell, _) = evaluate_cell(kind, k, corpora, settings)?;
        cell.family = imp.family.clone();
        Ok(cell)
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// `algorithm,k,coherence,perplexity,log_likelihood_per_word`; missing values are empty.
pub fn write_eval_grid_csv(cells: &[EvalCell], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "algorithm,k,coherence,perplexity,log_likelihood_per_word")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{:.6},{},{}",
            c.algorithm,
            c.k,
            c.coherence,
            fmt_opt(c.perplexity),
            fmt_opt(c.log_likelihood_per_word)
        )?;
    }
    Ok(())
}
