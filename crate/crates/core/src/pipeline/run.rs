use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::report::emit_reports;
use crate::corpus::{
    build_doc_term_matrix, detect_bigrams, ingest_corpus, read_jsonl, Corpus, TokenizedCorpus,
};
use crate::error::{Error, Result};
use crate::eval::{run_selection_grid, write_eval_grid_csv, EvalCell, GridCorpora, Implementation, SelectionGrid, SelectionResult};
use crate::kg::{
    export_graph, extract_relations, layout_json, layout_kamada_kawai, reduce_edge_weights, ConceptList, ExportFormat,
    LayoutCoords, VerbLexicon, WeightedGraph,
};
use crate::models::{train_lda, train_lsi, LdaConfig, LsiConfig, ModelKind, TopicModel};
use crate::taxo::{compare_taxonomies, Taxonomy, Theme};
use crate::terms::{select_topic_concepts, topic_map, TopicsDocument};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Corpus,
    Grid,
    Model,
    Terms,
    Map,
    Kg,
    Compare,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Corpus,
        Stage::Grid,
        Stage::Model,
        Stage::Terms,
        Stage::Map,
        Stage::Kg,
        Stage::Compare,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Corpus => "corpus",
            Stage::Grid => "grid",
            Stage::Model => "model",
            Stage::Terms => "terms",
            Stage::Map => "map",
            Stage::Kg => "kg",
            Stage::Compare => "compare",
            Stage::Report => "report",
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Corpus => &["corpus.json"],
            Stage::Grid => &["eval_grid.csv", "selection.json"],
            Stage::Model => &["model.json"],
            Stage::Terms => &["topics.json"],
            Stage::Map => &["topic_map.json"],
            Stage::Kg => &["kg_edges.csv", "graph.dot", "graph.json", "kg_layout.json"],
            Stage::Compare => &["taxonomy_report.json"],
            Stage::Report => &["report.html"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Completed,
    /// Outputs from an earlier run with the same inputs were kept.
    Reused,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub seconds: f64,
    /// File name -> sha256 hex digest.
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: PipelineConfig,
    /// Digest of the configuration and every input file.
    pub input_key: String,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    /// Every output digest across stages, keyed by file name.
    pub fn digests(&self) -> BTreeMap<String, String> {
        self.stages
            .iter()
            .flat_map(|s| s.outputs.iter().map(|(k, v)| (k.clone(), v.clone())))
            .collect()
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_digest(path: &Path) -> Option<String> {
    std::fs::read(path).ok().map(|b| sha256_hex(&b))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn input_key(cfg: &PipelineConfig) -> Result<String> {
    let mut snapshot = cfg.clone();
    snapshot.out_dir = PathBuf::new();
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&snapshot)?);
    let mut inputs = vec![Some(cfg.corpus.path.clone()), cfg.reference.clone(), cfg.corpus.extra_stopwords.clone()];
    for p in inputs.iter_mut().flatten() {
        let bytes = std::fs::read(&*p).map_err(|e| Error::io(&*p, e))?;
        h.update(sha256_hex(&bytes));
    }
    h.update(env!("CARGO_PKG_VERSION"));
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CorpusSummary {
    documents: usize,
    sentences: usize,
    tokens: usize,
    vocab: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bigram_vocab: Option<Vec<String>>,
}

struct Context<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    unigram: Option<Corpus>,
    bigram: Option<Corpus>,
    selection: Option<SelectionResult>,
    model: Option<TopicModel>,
    topics: Option<TopicsDocument>,
}

impl<'a> Context<'a> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(name), bytes)
    }

    fn corpora(&mut self) -> Result<GridCorpora<'_>> {
        if self.unigram.is_none() {
            let rules = self.cfg.preprocess_rules()?;
            let staging = ingest_corpus(read_jsonl(&self.cfg.corpus.path)?)?;
            let tokenized = TokenizedCorpus::from_staging(&staging, &rules);
            let unigram = build_doc_term_matrix(&tokenized, self.cfg.corpus.min_doc_freq)?;
            let wants_bigrams = self.cfg.grid.implementations.contains(&ModelKind::BiLda);
            self.bigram = if wants_bigrams {
                let merged = detect_bigrams(&tokenized, &self.cfg.bigram);
                Some(build_doc_term_matrix(&merged, self.cfg.corpus.min_doc_freq)?)
            } else {
                None
            };
            self.unigram = Some(unigram);
        }
        Ok(GridCorpora {
            unigram: self.unigram.as_ref().expect("built above"),
            bigram: self.bigram.as_ref(),
        })
    }

    fn selection(&mut self) -> Result<&SelectionResult> {
        if self.selection.is_none() {
            self.selection = Some(serde_json::from_str(&read_text(&self.path("selection.json"))?)?);
        }
        Ok(self.selection.as_ref().expect("loaded above"))
    }

    fn model(&mut self) -> Result<&TopicModel> {
        if self.model.is_none() {
            self.model = Some(TopicModel::load(&self.path("model.json"))?);
        }
        Ok(self.model.as_ref().expect("loaded above"))
    }

    fn topics(&mut self) -> Result<&TopicsDocument> {
        if self.topics.is_none() {
            self.topics = Some(serde_json::from_str(&read_text(&self.path("topics.json"))?)?);
        }
        Ok(self.topics.as_ref().expect("loaded above"))
    }

    fn model_corpus(&mut self) -> Result<Corpus> {
        let kind = self.model()?.kind;
        let corpora = self.corpora()?;
        Ok(corpora.for_kind(kind)?.clone())
    }

    fn run_stage(&mut self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Corpus => self.stage_corpus(),
            Stage::Grid => self.stage_grid(),
            Stage::Model => self.stage_model(),
            Stage::Terms => self.stage_terms(),
            Stage::Map => self.stage_map(),
            Stage::Kg => self.stage_kg(),
            Stage::Compare => self.stage_compare(),
            Stage::Report => emit_reports(&self.out).map(|_| ()),
        }
    }

    fn stage_corpus(&mut self) -> Result<()> {
        let corpora = self.corpora()?;
        let summary = CorpusSummary {
            documents: corpora.unigram.num_docs(),
            sentences: corpora.unigram.sentences().len(),
            tokens: corpora.unigram.total_tokens(),
            vocab: corpora.unigram.vocab().tokens().to_vec(),
            bigram_vocab: corpora.bigram.map(|c| c.vocab().tokens().to_vec()),
        };
        self.write("corpus.json", (serde_json::to_string_pretty(&summary)? + "\n").as_bytes())
    }

    fn stage_grid(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let grid = SelectionGrid::new(
            cfg.grid.implementations.iter().map(|&k| Implementation::from_kind(k)).collect(),
            cfg.grid.k_pilot,
            cfg.grid.k_min..=cfg.grid.k_max,
        );
        let settings = cfg.grid_settings();
        let corpora = self.corpora()?;
        let result = run_selection_grid(&corpora, &grid, &settings)?;

        let order = |c: &EvalCell| {
            let i = grid.implementations.iter().position(|imp| imp.name == c.algorithm);
            (i.unwrap_or(usize::MAX), c.k)
        };
        let mut cells: Vec<EvalCell> = result.stage1_ranking.iter().chain(&result.stage2_curve).cloned().collect();
        cells.sort_by_key(order);
        cells.dedup_by_key(|c| order(c));
        let mut csv = Vec::new();
        write_eval_grid_csv(&cells, &mut csv).map_err(|e| Error::io(self.path("eval_grid.csv"), e))?;
        self.write("eval_grid.csv", &csv)?;
        self.write("selection.json", (serde_json::to_string_pretty(&result)? + "\n").as_bytes())?;
        self.selection = Some(result);
        Ok(())
    }

    /// Retrain the selected implementation at the selected K on the full corpus.
    fn stage_model(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let (algorithm, k) = {
            let s = self.selection()?;
            (s.best_algorithm.clone(), s.k_best)
        };
        let kind = ModelKind::parse(&algorithm)
            .ok_or_else(|| Error::Selection(format!("unknown implementation \"{algorithm}\"")))?;
        let corpus = self.corpora()?.for_kind(kind)?;
        let model = match kind {
            ModelKind::Lsi => train_lsi(
                corpus,
                &LsiConfig {
                    k,
                    seed: cfg.seed,
                    ..cfg.lsi.clone()
                },
            )?,
            _ => train_lda(
                corpus,
                &LdaConfig {
                    k,
                    seed: cfg.seed,
                    ..cfg.lda.clone()
                },
                kind,
            )?,
        };
        self.write("model.json", (model.to_json()? + "\n").as_bytes())?;
        self.model = Some(model);
        Ok(())
    }

    fn stage_terms(&mut self) -> Result<()> {
        let opts = self.cfg.terms;
        let corpus = self.model_corpus()?;
        let model = self.model()?;
        let topics = select_topic_concepts(model, &corpus, &opts)?;
        let doc = TopicsDocument {
            lambda: opts.lambda,
            formula: opts.formula,
            topics,
        };
        self.write("topics.json", (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;
        self.topics = Some(doc);
        Ok(())
    }

    fn stage_map(&mut self) -> Result<()> {
        let map = topic_map(self.model()?)?;
        self.write("topic_map.json", (serde_json::to_string_pretty(&map)? + "\n").as_bytes())
    }

    fn stage_kg(&mut self) -> Result<()> {
        let pairs: Vec<(String, usize)> = self
            .topics()?
            .topics
            .iter()
            .flat_map(|t| t.top_concepts.iter().map(move |c| (c.term.clone(), t.topic)))
            .collect();
        let concepts = ConceptList::from_pairs(&pairs)?;
        let cross = self.cfg.kg.cross_topic_only;
        let spring = self.cfg.kg.spring;
        let corpora = self.corpora()?;
        let triples = extract_relations(corpora.unigram.sentences(), &concepts, &VerbLexicon::bundled(), cross);
        let graph: WeightedGraph = reduce_edge_weights(&triples);
        log::info!("{} triples reduced to {} edges", triples.len(), graph.edges.len());
        let layout = if graph.nodes.is_empty() {
            LayoutCoords {
                positions: vec![],
                stress: None,
                initial_stress: None,
            }
        } else {
            layout_kamada_kawai(&graph, &spring)?
        };
        self.write("kg_edges.csv", export_graph(&graph, None, ExportFormat::EdgelistCsv)?.as_bytes())?;
        self.write("graph.dot", export_graph(&graph, Some(&layout), ExportFormat::Dot)?.as_bytes())?;
        self.write("graph.json", export_graph(&graph, None, ExportFormat::GraphJson)?.as_bytes())?;
        self.write("kg_layout.json", layout_json(&graph, &layout)?.as_bytes())
    }

    fn stage_compare(&mut self) -> Result<()> {
        let Some(reference) = self.cfg.reference.clone() else {
            return Ok(());
        };
        let reference = Taxonomy::load(&reference)?;
        let generated = Taxonomy {
            themes: self
                .topics()?
                .topics
                .iter()
                .map(|t| Theme {
                    name: format!("Topic {}", t.topic),
                    concepts: t.top_concepts.iter().map(|c| c.term.clone()).collect(),
                })
                .collect(),
        };
        let report = compare_taxonomies(&generated, &reference)?;
        self.write("taxonomy_report.json", (serde_json::to_string_pretty(&report)? + "\n").as_bytes())
    }
}

fn previous_manifest(out: &Path) -> Option<RunManifest> {
    let text = std::fs::read_to_string(out.join(MANIFEST_FILE)).ok()?;
    serde_json::from_str(&text).ok()
}

fn reusable(prev: Option<&RunManifest>, key: &str, stage: Stage, out: &Path) -> Option<BTreeMap<String, String>> {
    let prev = prev.filter(|m| m.input_key == key)?;
    let rec = prev.stage(stage)?;
    if !matches!(rec.status, StageStatus::Completed | StageStatus::Reused) || rec.outputs.is_empty() {
        return None;
    }
    for (name, digest) in &rec.outputs {
        if file_digest(&out.join(name)).as_deref() != Some(digest.as_str()) {
            return None;
        }
    }
    Some(rec.outputs.clone())
}

/// Check the configuration and inputs without writing anything.
pub fn preflight(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate()?;
    let records = read_jsonl(&cfg.corpus.path)?;
    ingest_corpus(records)?;
    cfg.preprocess_rules()?;
    if let Some(r) = &cfg.reference {
        Taxonomy::load(r)?;
    }
    Ok(())
}

/// Run every stage up to and including `last`.
///
/// Stages whose recorded outputs are intact and whose inputs are unchanged
/// are reused; once a stage reruns, every later stage reruns too. The
/// manifest is rewritten after each stage, so a failure keeps the record
/// of what finished.
pub fn run_until(cfg: &PipelineConfig, last: Stage) -> Result<RunManifest> {
    preflight(cfg)?;
    let key = input_key(cfg)?;
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let prev = previous_manifest(&out);
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        input_key: key.clone(),
        stages: Vec::new(),
    };
    let mut ctx = Context {
        cfg,
        out: out.clone(),
        unigram: None,
        bigram: None,
        selection: None,
        model: None,
        topics: None,
    };
    let mut dirty = false;
    for stage in Stage::ALL.into_iter().filter(|&s| s <= last) {
        if stage == Stage::Compare && cfg.reference.is_none() {
            manifest.stages.push(StageRecord {
                stage,
                status: StageStatus::Skipped,
                seconds: 0.0,
                outputs: BTreeMap::new(),
                error: None,
            });
            continue;
        }
        if !dirty {
            if let Some(outputs) = reusable(prev.as_ref(), &key, stage, &out) {
                log::info!("stage {}: reusing outputs", stage.name());
                manifest.stages.push(StageRecord {
                    stage,
                    status: StageStatus::Reused,
                    seconds: 0.0,
                    outputs,
                    error: None,
                });
                continue;
            }
        }
        dirty = true;
        log::info!("stage {}: running", stage.name());
        let started = Instant::now();
        let outcome = ctx.run_stage(stage);
        let seconds = started.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => {
                let outputs = stage
                    .outputs()
                    .iter()
                    .filter_map(|name| file_digest(&out.join(name)).map(|d| (name.to_string(), d)))
                    .collect();
                manifest.stages.push(StageRecord {
                    stage,
                    status: StageStatus::Completed,
                    seconds,
                    outputs,
                    error: None,
                });
                write_manifest(&out, &manifest)?;
            }
            Err(e) => {
                log::error!("stage {} failed: {e}", stage.name());
                manifest.stages.push(StageRecord {
                    stage,
                    status: StageStatus::Failed,
                    seconds,
                    outputs: BTreeMap::new(),
                    error: Some(e.to_string()),
                });
                write_manifest(&out, &manifest)?;
                return Err(Error::StageFailed {
                    stage: stage.name().into(),
                    message: e.to_string(),
                });
            }
        }
    }
    write_manifest(&out, &manifest)?;
    Ok(manifest)
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<()> {
    write_atomic(&out.join(MANIFEST_FILE), (serde_json::to_string_pretty(manifest)? + "\n").as_bytes())
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest> {
    run_until(cfg, Stage::Report)
}

/// Run with a dedicated worker pool of `jobs` threads (`None`: the global pool).
/// Output does not depend on the thread count.
pub fn run_with_jobs(cfg: &PipelineConfig, last: Stage, jobs: Option<usize>) -> Result<RunManifest> {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        return pool.install(|| run_until(cfg, last));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    run_until(cfg, last)
}
