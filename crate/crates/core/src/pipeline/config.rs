use std::fmt::Write;
use std::path::{Path, PathBuf};

use ini::Ini;
use serde::{Deserialize, Serialize};

use crate::corpus::{BigramPolicy, PreprocessRules, StemmerKind, StripPattern};
use crate::error::{Error, Result};
use crate::eval::GridSettings;
use crate::kg::SpringParams;
use crate::models::{FoldInConfig, LdaConfig, LsiConfig, ModelKind};
use crate::terms::{ConceptSelection, RelevanceFormula};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSettings {
    pub path: PathBuf,
    pub min_doc_freq: usize,
    pub min_token_len: usize,
    pub strip: StripPattern,
    pub stemmer: StemmerKind,
    /// Extra stopword file added to the bundled lists.
    pub extra_stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub implementations: Vec<ModelKind>,
    pub k_pilot: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub heldout_fraction: f64,
    pub window: usize,
    pub top_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgSettings {
    pub cross_topic_only: bool,
    pub spring: SpringParams,
}

/// Every tunable of a run. Defaults reproduce the reference methodology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub reference: Option<PathBuf>,
    pub corpus: CorpusSettings,
    pub bigram: BigramPolicy,
    pub lda: LdaConfig,
    pub lsi: LsiConfig,
    pub fold_in: FoldInConfig,
    pub grid: GridParams,
    pub terms: ConceptSelection,
    pub kg: KgSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out_dir: PathBuf::from("out"),
            reference: None,
            corpus: CorpusSettings {
                path: PathBuf::from("corpus.jsonl"),
                min_doc_freq: 2,
                min_token_len: 3,
                strip: StripPattern::NonAlphabetic,
                stemmer: StemmerKind::Porter,
                extra_stopwords: None,
            },
            bigram: BigramPolicy::default(),
            lda: LdaConfig::default(),
            lsi: LsiConfig::default(),
            fold_in: FoldInConfig::default(),
            grid: GridParams {
                implementations: vec![ModelKind::Lda, ModelKind::BiLda, ModelKind::Lsi],
                k_pilot: 10,
                k_min: 2,
                k_max: 15,
                heldout_fraction: 0.1,
                window: 110,
                top_n: 10,
            },
            terms: ConceptSelection::default(),
            kg: KgSettings {
                cross_topic_only: true,
                spring: SpringParams::default(),
            },
        }
    }
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("[{section}] {key}: cannot parse \"{value}\"")))
}

fn parse_bool(section: &str, key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("[{section}] {key}: expected a boolean, got \"{value}\""))),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl PipelineConfig {
    /// Parse `[section]` / `key = value` text on top of the defaults.
    /// Unknown sections and keys are rejected.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Parse {
            line: e.line + 1,
            message: e.msg.to_string(),
        })?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("run");
            for (key, value) in props.iter() {
                cfg.set(section, key, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_ini_str(&text)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match (section, key) {
            ("run", "seed") => self.seed = parse_value(section, key, v)?,
            ("run", "out_dir") => self.out_dir = PathBuf::from(v),
            ("run", "reference") => self.reference = optional_path(v),
            ("corpus", "path") => self.corpus.path = PathBuf::from(v),
            ("corpus", "min_doc_freq") => self.corpus.min_doc_freq = parse_value(section, key, v)?,
            ("corpus", "min_token_len") => self.corpus.min_token_len = parse_value(section, key, v)?,
            ("corpus", "strip") => {
                self.corpus.strip = match v {
                    "non_alphabetic" => StripPattern::NonAlphabetic,
                    "non_alphanumeric" => StripPattern::NonAlphanumeric,
                    _ => return Err(Error::InvalidConfig(format!("[corpus] strip: unknown pattern \"{v}\""))),
                }
            }
            ("corpus", "stemmer") => {
                self.corpus.stemmer = match v {
                    "porter" => StemmerKind::Porter,
                    "none" => StemmerKind::None,
                    _ => return Err(Error::InvalidConfig(format!("[corpus] stemmer: unknown stemmer \"{v}\""))),
                }
            }
            ("corpus", "extra_stopwords") => self.corpus.extra_stopwords = optional_path(v),
            ("bigram", "min_count") => self.bigram.min_count = parse_value(section, key, v)?,
            ("bigram", "threshold") => self.bigram.threshold = parse_value(section, key, v)?,
            ("bigram", "keep_unigrams") => self.bigram.keep_unigrams = parse_bool(section, key, v)?,
            ("lda", "alpha") => self.lda.alpha = parse_value(section, key, v)?,
            ("lda", "beta") => self.lda.beta = parse_value(section, key, v)?,
            ("lda", "iterations") => self.lda.iterations = parse_value(section, key, v)?,
            ("lda", "burn_in") => self.lda.burn_in = parse_value(section, key, v)?,
            ("lda", "sample_lag") => self.lda.sample_lag = parse_value(section, key, v)?,
            ("lsi", "oversampling") => self.lsi.oversampling = parse_value(section, key, v)?,
            ("lsi", "power_iters") => self.lsi.power_iters = parse_value(section, key, v)?,
            ("fold_in", "iterations") => self.fold_in.iterations = parse_value(section, key, v)?,
            ("fold_in", "burn_in") => self.fold_in.burn_in = parse_value(section, key, v)?,
            ("fold_in", "sample_lag") => self.fold_in.sample_lag = parse_value(section, key, v)?,
            ("grid", "implementations") => {
                self.grid.implementations = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        ModelKind::parse(s)
                            .ok_or_else(|| Error::InvalidConfig(format!("[grid] implementations: unknown \"{s}\"")))
                    })
                    .collect::<Result<_>>()?
            }
            ("grid", "k_pilot") => self.grid.k_pilot = parse_value(section, key, v)?,
            ("grid", "k_min") => self.grid.k_min = parse_value(section, key, v)?,
            ("grid", "k_max") => self.grid.k_max = parse_value(section, key, v)?,
            ("grid", "heldout_fraction") => self.grid.heldout_fraction = parse_value(section, key, v)?,
            ("grid", "window") => self.grid.window = parse_value(section, key, v)?,
            ("grid", "top_n") => self.grid.top_n = parse_value(section, key, v)?,
            ("terms", "lambda") => self.terms.lambda = parse_value(section, key, v)?,
            ("terms", "n") => self.terms.n = parse_value(section, key, v)?,
            ("terms", "pool") => self.terms.pool = parse_value(section, key, v)?,
            ("terms", "formula") => {
                self.terms.formula = match v {
                    "linear" => RelevanceFormula::Linear,
                    "log" => RelevanceFormula::Log,
                    _ => return Err(Error::InvalidConfig(format!("[terms] formula: unknown \"{v}\""))),
                }
            }
            ("kg", "cross_topic_only") => self.kg.cross_topic_only = parse_bool(section, key, v)?,
            ("kg", "edge_length") => self.kg.spring.edge_length = parse_value(section, key, v)?,
            ("kg", "iterations") => self.kg.spring.iterations = parse_value(section, key, v)?,
            ("kg", "tolerance") => self.kg.spring.tolerance = parse_value(section, key, v)?,
            ("kg", "padding") => self.kg.spring.padding = parse_value(section, key, v)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key [{section}] {key}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess_rules_base().validate()?;
        self.bigram.validate()?;
        let mut lda = self.lda.clone();
        lda.k = self.grid.k_pilot.max(1);
        lda.validate()?;
        let g = &self.grid;
        if g.implementations.is_empty() {
            return Err(Error::InvalidConfig("[grid] implementations is empty".into()));
        }
        if g.k_min == 0 || g.k_min > g.k_max || g.k_pilot == 0 {
            return Err(Error::InvalidConfig("[grid] need 0 < k_min <= k_max and k_pilot > 0".into()));
        }
        if !(0.0..1.0).contains(&g.heldout_fraction) {
            return Err(Error::InvalidConfig("[grid] heldout_fraction must lie in [0, 1)".into()));
        }
        if g.window == 0 || g.top_n < 2 {
            return Err(Error::InvalidConfig("[grid] need window >= 1 and top_n >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.terms.lambda) || self.terms.n == 0 {
            return Err(Error::InvalidConfig("[terms] need lambda in [0, 1] and n >= 1".into()));
        }
        let s = &self.kg.spring;
        if !(s.edge_length > 0.0) || !(s.tolerance >= 0.0) || !(s.padding >= 0.0) {
            return Err(Error::InvalidConfig("[kg] spring parameters must be positive".into()));
        }
        Ok(())
    }

    fn preprocess_rules_base(&self) -> PreprocessRules {
        PreprocessRules {
            min_token_len: self.corpus.min_token_len,
            strip_pattern: self.corpus.strip,
            stemmer: self.corpus.stemmer,
            ..PreprocessRules::default()
        }
    }

    /// Bundled stopwords plus the optional extra list.
    pub fn preprocess_rules(&self) -> Result<PreprocessRules> {
        let mut rules = self.preprocess_rules_base();
        if let Some(path) = &self.corpus.extra_stopwords {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            rules.stopwords.extend(crate::corpus::parse_stopword_list(&text)?);
        }
        Ok(rules)
    }

    pub fn grid_settings(&self) -> GridSettings {
        GridSettings {
            lda: LdaConfig { seed: self.seed, ..self.lda.clone() },
            lsi: LsiConfig { seed: self.seed, ..self.lsi.clone() },
            fold_in: FoldInConfig { seed: self.seed, ..self.fold_in.clone() },
            heldout_fraction: self.grid.heldout_fraction,
            top_n: self.grid.top_n,
            window: self.grid.window,
            seed: self.seed,
        }
    }

    /// The configuration as parseable `key = value` text.
    pub fn to_ini_string(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let strip = match self.corpus.strip {
            StripPattern::NonAlphabetic => "non_alphabetic",
            StripPattern::NonAlphanumeric => "non_alphanumeric",
        };
        let stemmer = match self.corpus.stemmer {
            StemmerKind::Porter => "porter",
            StemmerKind::None => "none",
        };
        let formula = match self.terms.formula {
            RelevanceFormula::Linear => "linear",
            RelevanceFormula::Log => "log",
        };
        let impls: Vec<&str> = self.grid.implementations.iter().map(|k| k.name()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "[run]\nseed = {}\nout_dir = {}\nreference = {}\n", self.seed, self.out_dir.display(), path(&self.reference));
        let _ = writeln!(
            s,
            "[corpus]\npath = {}\nmin_doc_freq = {}\nmin_token_len = {}\nstrip = {strip}\nstemmer = {stemmer}\nextra_stopwords = {}\n",
            self.corpus.path.display(),
            self.corpus.min_doc_freq,
            self.corpus.min_token_len,
            path(&self.corpus.extra_stopwords)
        );
        let b = &self.bigram;
        let _ = writeln!(s, "[bigram]\nmin_count = {}\nthreshold = {}\nkeep_unigrams = {}\n", b.min_count, b.threshold, b.keep_unigrams);
        let l = &self.lda;
        let _ = writeln!(
            s,
            "[lda]\nalpha = {}\nbeta = {}\niterations = {}\nburn_in = {}\nsample_lag = {}\n",
            l.alpha, l.beta, l.iterations, l.burn_in, l.sample_lag
        );
        let _ = writeln!(s, "[lsi]\noversampling = {}\npower_iters = {}\n", self.lsi.oversampling, self.lsi.power_iters);
        let f = &self.fold_in;
        let _ = writeln!(s, "[fold_in]\niterations = {}\nburn_in = {}\nsample_lag = {}\n", f.iterations, f.burn_in, f.sample_lag);
        let g = &self.grid;
        let _ = writeln!(
            s,
            "[grid]\nimplementations = {}\nk_pilot = {}\nk_min = {}\nk_max = {}\nheldout_fraction = {}\nwindow = {}\ntop_n = {}\n",
            impls.join(","),
            g.k_pilot,
            g.k_min,
            g.k_max,
            g.heldout_fraction,
            g.window,
            g.top_n
        );
        let t = &self.terms;
        let _ = writeln!(s, "[terms]\nlambda = {}\nn = {}\npool = {}\nformula = {formula}\n", t.lambda, t.n, t.pool);
        let k = &self.kg;
        let _ = write!(
            s,
            "[kg]\ncross_topic_only = {}\nedge_length = {}\niterations = {}\ntolerance = {:e}\npadding = {}\n",
            k.cross_topic_only, k.spring.edge_length, k.spring.iterations, k.spring.tolerance, k.spring.padding
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_run() {
        let c = PipelineConfig::default();
        assert_eq!((c.grid.k_pilot, c.grid.k_min, c.grid.k_max), (10, 2, 15));
        assert_eq!(c.terms.lambda, 0.33);
        assert_eq!(c.grid.top_n, 10);
        assert_eq!(c.grid.window, 110);
        assert!(c.kg.cross_topic_only);
    }

    #[test]
    fn sections_override_defaults() {
        let c = PipelineConfig::from_ini_str("seed = 7\n[grid]\nk_max = 6\nimplementations = LDA, LSI\n[kg]\ncross_topic_only = false\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid.k_max, 6);
        assert_eq!(c.grid.implementations, vec![ModelKind::Lda, ModelKind::Lsi]);
        assert!(!c.kg.cross_topic_only);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(PipelineConfig::from_ini_str("[lda]\ngamma = 1\n"), Err(Error::InvalidConfig(_))));
        assert!(PipelineConfig::from_ini_str("[grid]\nk_min = 5\nk_max = 3\n").is_err());
    }

    #[test]
    fn ini_round_trip() {
        let mut c = PipelineConfig::default();
        c.seed = 3;
        c.reference = Some("ref.json".into());
        c.terms.formula = RelevanceFormula::Log;
        assert_eq!(PipelineConfig::from_ini_str(&c.to_ini_string()).unwrap(), c);
    }
}
