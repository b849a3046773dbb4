//! Run configuration for the command-line tool, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fightin::DEFAULT_PRIOR_SCALE;
use crate::semsim::{OovPolicy, DEFAULT_BASELINE_TRIALS, DEFAULT_EXCLUDE_TOP, DEFAULT_SET_SIZE};
use crate::synthgen::{LlmClientConfig, PlanSpec};
use crate::topicmodel::{LdaParams, DEFAULT_KEYWORDS, DEFAULT_REPLICATES};

/// Default corpus file name inside the output directory.
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const MODEL_FILE: &str = "model.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Output directory. Left out of the recorded snapshot so that runs into
    /// different directories produce identical metadata.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Input corpora, concatenated in order. Empty means the corpus written
    /// by `generate` into the output directory.
    pub corpus: Vec<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<EmbeddingsConfig>,
    /// Use the offline mock generator instead of the HTTP client.
    pub mock: bool,
    pub generation: PlanSpec,
    pub llm: LlmClientConfig,
    pub topics: TopicsConfig,
    pub logodds: LogOddsConfig,
    pub prevalence: PrevalenceConfig,
    pub similarity: SimilarityConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            corpus: Vec::new(),
            lexicon: None,
            embeddings: None,
            mock: false,
            generation: PlanSpec::default(),
            llm: LlmClientConfig::default(),
            topics: TopicsConfig::default(),
            logodds: LogOddsConfig::default(),
            prevalence: PrevalenceConfig::default(),
            similarity: SimilarityConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingsConfig {
    pub path: PathBuf,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsConfig {
    pub k: usize,
    /// `None` means 50/K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub n_keywords: usize,
    pub min_df: usize,
    /// One word per line; `None` uses the built-in English list.
    pub stopwords: Option<PathBuf>,
    /// CSV assigning fine topics to overarching labels.
    pub mapping: Option<PathBuf>,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        let p = LdaParams::default();
        TopicsConfig {
            k: p.k,
            alpha: p.alpha,
            beta: p.beta,
            iterations: p.iterations,
            burn_in: p.burn_in,
            samples: p.samples,
            n_keywords: DEFAULT_KEYWORDS,
            min_df: 1,
            stopwords: None,
            mapping: None,
        }
    }
}

impl TopicsConfig {
    pub fn lda_params(&self, seed: u64) -> LdaParams {
        LdaParams {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            burn_in: self.burn_in,
            samples: self.samples,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPair {
    pub a: String,
    pub b: String,
}

fn default_pairs() -> Vec<GroupPair> {
    vec![GroupPair {
        a: "gender=woman".into(),
        b: "gender=man".into(),
    }]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogOddsConfig {
    /// Reference category counts (`category,count` CSV) for the informative
    /// prior; `None` uses a uniform prior.
    pub prior: Option<PathBuf>,
    pub scale: f64,
    pub top_k: Vec<usize>,
    pub pairs: Vec<GroupPair>,
}

impl Default for LogOddsConfig {
    fn default() -> Self {
        LogOddsConfig {
            prior: None,
            scale: DEFAULT_PRIOR_SCALE,
            top_k: vec![5, 15],
            pairs: default_pairs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrevalenceConfig {
    pub replicates: usize,
    pub pairs: Vec<GroupPair>,
}

impl Default for PrevalenceConfig {
    fn default() -> Self {
        PrevalenceConfig {
            replicates: DEFAULT_REPLICATES,
            pairs: default_pairs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    /// Minimum cosine for a match; `None` uses the baseline mean, or 0 when
    /// no baseline is computed.
    pub threshold: Option<f64>,
    /// Random-set trials for the baseline; 0 skips it.
    pub baseline_trials: usize,
    pub set_size: usize,
    pub exclude_top: usize,
    pub oov: OovPolicy,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            threshold: None,
            baseline_trials: DEFAULT_BASELINE_TRIALS,
            set_size: DEFAULT_SET_SIZE,
            exclude_top: DEFAULT_EXCLUDE_TOP,
            oov: OovPolicy::Skip,
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        rebase(base, &mut self.out);
        self.corpus.iter_mut().for_each(|p| rebase(base, p));
        for p in [
            self.lexicon.as_mut(),
            self.embeddings.as_mut().map(|e| &mut e.path),
            self.topics.stopwords.as_mut(),
            self.topics.mapping.as_mut(),
            self.logodds.prior.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            rebase(base, p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.generation.to_plan()?;
        self.llm.validate()?;
        if self.topics.n_keywords == 0 {
            return Err(Error::Config("topics.n_keywords must be at least 1".into()));
        }
        if !(self.logodds.scale > 0.0) {
            return Err(Error::Config("logodds.scale must be positive".into()));
        }
        if self.logodds.top_k.contains(&0) {
            return Err(Error::Config("logodds.top_k entries must be positive".into()));
        }
        if let Some(e) = &self.embeddings {
            if e.dim == 0 {
                return Err(Error::Config("embeddings.dim must be positive".into()));
            }
        }
        Ok(())
    }

    /// Corpus files a command reads, falling back to the generated corpus.
    pub fn corpus_paths(&self) -> Vec<PathBuf> {
        if self.corpus.is_empty() {
            vec![self.out.join(CORPUS_FILE)]
        } else {
            self.corpus.clone()
        }
    }
}

/// Fails with a configuration error naming the first path that does not exist.
pub fn require_paths<'a, I: IntoIterator<Item = &'a Path>>(paths: I) -> Result<()> {
    for p in paths {
        if !p.exists() {
            return Err(Error::Config(format!("{} does not exist", p.display())));
        }
    }
    Ok(())
}
