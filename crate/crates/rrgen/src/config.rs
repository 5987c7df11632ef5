//! Run configuration file (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [paths]
//! corpus = "corpus.jsonl"
//! app_names = "apps.txt"
//! user_names = "users.txt"
//! output_dir = "out"
//! # lexicon, keywords, stopwords, embeddings: optional; built-in data otherwise
//!
//! [model]       # defaults shown
//! word_dim = 100
//! hidden_dim = 200
//! attr_dim = 90
//! vocab_max = 10000
//! max_len = 200
//! length_buckets = 5
//! category = true
//! length = true
//! rating = true
//! sentiment = true
//! keywords = true
//!
//! [train]
//! batch_size = 32
//! learning_rate = 0.001
//! epochs = 2
//! checkpoint_every = 200
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use rrgen_core::model::{ModelConfig, Toggles, TrainConfig};
use rrgen_core::text::{DEFAULT_BUCKETS, DEFAULT_MAX_SIZE, MAX_SEQUENCE_LEN};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, RunError, RunResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    pub app_names: Option<PathBuf>,
    pub user_names: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// Pretrained word vectors, one `token v1 ... v_dw` line each.
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub word_dim: usize,
    pub hidden_dim: usize,
    pub attr_dim: usize,
    pub vocab_max: usize,
    pub max_len: usize,
    pub length_buckets: usize,
    pub category: bool,
    pub length: bool,
    pub rating: bool,
    pub sentiment: bool,
    pub keywords: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::default();
        ModelSection {
            word_dim: m.word_dim,
            hidden_dim: m.hidden_dim,
            attr_dim: m.attr_dim,
            vocab_max: DEFAULT_MAX_SIZE,
            max_len: MAX_SEQUENCE_LEN,
            length_buckets: DEFAULT_BUCKETS,
            category: true,
            length: true,
            rating: true,
            sentiment: true,
            keywords: true,
        }
    }
}

impl ModelSection {
    pub fn toggles(&self) -> Toggles {
        Toggles {
            category: self.category,
            length: self.length,
            rating: self.rating,
            sentiment: self.sentiment,
            keywords: self.keywords,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub checkpoint_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            checkpoint_every: t.checkpoint_every,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Directory with `train.idx`, `valid.idx`, `test.idx`; defaults to
    /// `<output_dir>/split`.
    pub split_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and validates a config file, resolving relative paths and
    /// creating the output directory.
    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.paths.output_dir).map_err(io_err(&cfg.paths.output_dir))?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        fix(&mut p.corpus);
        fix(&mut p.output_dir);
        for x in [
            &mut p.app_names,
            &mut p.user_names,
            &mut p.lexicon,
            &mut p.keywords,
            &mut p.stopwords,
            &mut p.embeddings,
        ]
        .into_iter()
        .flatten()
        {
            fix(x);
        }
        if let Some(d) = &mut self.eval.split_dir {
            fix(d);
        }
    }

    fn validate(&self) -> RunResult<()> {
        let p = &self.paths;
        let inputs = [
            Some(&p.corpus),
            p.app_names.as_ref(),
            p.user_names.as_ref(),
            p.lexicon.as_ref(),
            p.keywords.as_ref(),
            p.stopwords.as_ref(),
            p.embeddings.as_ref(),
        ];
        for path in inputs.into_iter().flatten() {
            if !path.is_file() {
                return Err(RunError::Config(format!(
                    "input file {} does not exist",
                    path.display()
                )));
            }
        }
        let m = &self.model;
        if m.vocab_max == 0 || m.length_buckets < 2 {
            return Err(RunError::Config(
                "vocab_max must be at least 1 and length_buckets at least 2".into(),
            ));
        }
        let t = &self.train;
        if t.batch_size == 0 || t.checkpoint_every == 0 || t.learning_rate.is_nan() || t.learning_rate <= 0.0 {
            return Err(RunError::Config(
                "batch_size and checkpoint_every must be at least 1 and learning_rate positive".into(),
            ));
        }
        Ok(())
    }

    pub fn split_dir(&self) -> PathBuf {
        self.eval
            .split_dir
            .clone()
            .unwrap_or_else(|| self.paths.output_dir.join("split"))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            checkpoint_every: self.train.checkpoint_every,
            seed: self.seed,
            shuffle: true,
        }
    }

    /// Model configuration for a vocabulary, category list and bucketizer.
    pub fn model_config(&self, vocab_size: usize, categories: usize, length_buckets: usize) -> ModelConfig {
        let m = &self.model;
        ModelConfig {
            word_dim: m.word_dim,
            hidden_dim: m.hidden_dim,
            attr_dim: m.attr_dim,
            vocab_size,
            max_len: m.max_len,
            categories: categories.max(1),
            length_buckets,
            toggles: m.toggles(),
            seed: self.seed,
        }
    }
}
