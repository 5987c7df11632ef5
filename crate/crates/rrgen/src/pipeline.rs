//! Pipeline steps behind the CLI subcommands. Each step reads the artifacts
//! of earlier steps from the output directory and writes its own.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rrgen_core::annotate::{
    AnnotatedReview, Annotator, CategoryIndex, KeywordDictionary, KeywordSymbol, SentimentLexicon,
};
use rrgen_core::baselines::{random_response, BowIndex};
use rrgen_core::metrics::{corpus_bleu_owned, BleuReport};
use rrgen_core::model::{
    generate as greedy, init_params, train as fit, CheckpointEvent, Example, ModelConfig, TrainObserver,
};
use rrgen_core::postprocess::{quality_filter, substitute, PlaceholderDictionary, Stopwords};
use rrgen_core::text::{
    keep_review, split_indices, LengthBucketizer, Normalizer, Placeholder, ReviewRecord, Substitution, Vocabulary,
};
use rrgen_core::ParamSet;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::{read_corpus, read_name_list};
use crate::error::{io_err, RunError, RunResult};
use crate::formats::{
    load_checkpoint, read_buckets, read_index, read_json, read_jsonl, read_required_string, read_split_file,
    read_vocab, save_checkpoint, write_atomic, write_index, write_json, write_jsonl, write_split, write_vocab,
    BucketFile, Manifest,
};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const BUCKETS_FILE: &str = "buckets.json";
pub const CATEGORIES_FILE: &str = "categories.txt";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUBSTITUTIONS_FILE: &str = "substitutions.jsonl";
pub const PLACEHOLDERS_FILE: &str = "placeholders.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const BEST_CHECKPOINT: &str = "checkpoints/best.ckpt";
pub const INDEX_FILE: &str = "nngen_index.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

/// One preprocessed pair as stored in `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub app_id: String,
    pub category: String,
    pub rating: u8,
    pub review: Vec<String>,
    pub response: Vec<String>,
    pub category_index: usize,
    pub length_bucket: usize,
    pub sentiment: i8,
    pub keywords: Vec<String>,
}

impl StoredRecord {
    fn from_annotated(a: &AnnotatedReview) -> Self {
        StoredRecord {
            app_id: a.record.app_id.clone(),
            category: a.record.category.clone(),
            rating: a.rating,
            review: a.record.review_tokens.clone(),
            response: a.record.response_tokens.clone(),
            category_index: a.category_index,
            length_bucket: a.length_bucket,
            sentiment: a.sentiment,
            keywords: a.keyword_symbols.iter().map(|k| k.as_str().to_string()).collect(),
        }
    }

    pub fn to_annotated(&self) -> RunResult<AnnotatedReview> {
        let keyword_symbols = self
            .keywords
            .iter()
            .map(|k| KeywordSymbol::parse(k).ok_or_else(|| RunError::Format(format!("unknown keyword symbol `{k}`"))))
            .collect::<RunResult<Vec<_>>>()?;
        Ok(AnnotatedReview {
            record: ReviewRecord {
                app_id: self.app_id.clone(),
                category: self.category.clone(),
                rating: self.rating,
                review_tokens: self.review.clone(),
                response_tokens: self.response.clone(),
                ..Default::default()
            },
            category_index: self.category_index,
            length_bucket: self.length_bucket,
            rating: self.rating,
            sentiment: self.sentiment,
            keyword_symbols,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SubstitutionRow {
    index: usize,
    app_id: String,
    review: Vec<LoggedValue>,
    response: Vec<LoggedValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LoggedValue {
    placeholder: String,
    value: String,
}

fn logged(subs: &[Substitution]) -> Vec<LoggedValue> {
    subs.iter()
        .map(|s| LoggedValue {
            placeholder: s.placeholder.symbol().to_string(),
            value: s.value.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub input_pairs: usize,
    pub dropped: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub vocab_size: usize,
    pub categories: usize,
    pub bucket_edges: Vec<f64>,
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.paths.output_dir.join(name)
}

fn load_lexicon(cfg: &RunConfig) -> RunResult<SentimentLexicon> {
    match &cfg.paths.lexicon {
        Some(p) => Ok(SentimentLexicon::parse(
            &std::fs::read_to_string(p).map_err(io_err(p))?,
        )?),
        None => Ok(SentimentLexicon::builtin()),
    }
}

fn load_dictionary(cfg: &RunConfig) -> RunResult<KeywordDictionary> {
    match &cfg.paths.keywords {
        Some(p) => Ok(KeywordDictionary::parse(
            &std::fs::read_to_string(p).map_err(io_err(p))?,
        )?),
        None => Ok(KeywordDictionary::builtin()),
    }
}

fn load_stopwords(cfg: &RunConfig) -> RunResult<Stopwords> {
    match &cfg.paths.stopwords {
        Some(p) => Ok(Stopwords::parse(&std::fs::read_to_string(p).map_err(io_err(p))?)),
        None => Ok(Stopwords::builtin()),
    }
}

/// Normalizes, filters, splits 8:1:1, builds the vocabulary and length
/// buckets from the training split, annotates every pair and writes the
/// placeholder dictionary.
pub fn preprocess(cfg: &RunConfig) -> RunResult<PreprocessSummary> {
    let raw = read_corpus(&cfg.paths.corpus)?;
    let apps = read_name_list(cfg.paths.app_names.as_deref())?;
    let users = read_name_list(cfg.paths.user_names.as_deref())?;
    let normalizer = Normalizer::new(&apps, &users);

    let mut records = Vec::new();
    let mut subs = Vec::new();
    for pair in &raw {
        let (review_tokens, review_subs) = normalizer.normalize_logged(&pair.review);
        let (response_tokens, response_subs) = normalizer.normalize_logged(&pair.response);
        if !keep_review(&review_tokens) || response_tokens.is_empty() {
            continue;
        }
        records.push(ReviewRecord {
            app_id: pair.app_id.clone(),
            category: pair.category.clone(),
            rating: pair.rating,
            review_raw: pair.review.clone(),
            response_raw: pair.response.clone(),
            review_tokens,
            response_tokens,
        });
        subs.push((review_subs, response_subs));
    }
    let dropped = raw.len() - records.len();
    if dropped > 0 {
        log::info!("dropped {dropped} pairs with empty or single-letter reviews or empty responses");
    }

    let split = split_indices(records.len(), cfg.seed)?;
    let train_records: Vec<ReviewRecord> = split.train.iter().map(|&i| records[i].clone()).collect();
    let vocab = Vocabulary::build(&train_records, cfg.model.vocab_max)?;
    let categories = CategoryIndex::from_names(records.iter().map(|r| r.category.as_str()));
    let lengths: Vec<usize> = train_records.iter().map(|r| r.review_tokens.len()).collect();
    let buckets = LengthBucketizer::fit(&lengths, cfg.model.length_buckets)?;
    let annotator = Annotator {
        lexicon: load_lexicon(cfg)?,
        dictionary: load_dictionary(cfg)?,
        buckets: buckets.clone(),
        categories: categories.clone(),
    };
    let annotated = records
        .iter()
        .map(|r| annotator.annotate(r))
        .collect::<Result<Vec<_>, _>>()?;

    let dict = PlaceholderDictionary::build(
        split
            .train
            .iter()
            .map(|&i| (records[i].app_id.as_str(), subs[i].1.as_slice())),
    );

    write_vocab(&out(cfg, VOCAB_FILE), &vocab)?;
    write_json(
        &out(cfg, BUCKETS_FILE),
        &BucketFile {
            edges: buckets.edges().to_vec(),
        },
    )?;
    let mut cats = categories.names().join("\n");
    cats.push('\n');
    write_atomic(&out(cfg, CATEGORIES_FILE), cats.as_bytes())?;
    write_split(&cfg.split_dir(), &split)?;
    write_jsonl(
        &out(cfg, RECORDS_FILE),
        annotated.iter().map(StoredRecord::from_annotated),
    )?;
    write_jsonl(
        &out(cfg, SUBSTITUTIONS_FILE),
        records
            .iter()
            .zip(&subs)
            .enumerate()
            .map(|(index, (r, (rv, rs)))| SubstitutionRow {
                index,
                app_id: r.app_id.clone(),
                review: logged(rv),
                response: logged(rs),
            }),
    )?;
    write_placeholders(&out(cfg, PLACEHOLDERS_FILE), &dict)?;

    let summary = PreprocessSummary {
        input_pairs: raw.len(),
        dropped,
        train: split.train.len(),
        valid: split.valid.len(),
        test: split.test.len(),
        vocab_size: vocab.len(),
        categories: categories.len(),
        bucket_edges: buckets.edges().to_vec(),
    };
    write_json(&out(cfg, "preprocess_summary.json"), &summary)?;
    Ok(summary)
}

fn write_placeholders(path: &Path, dict: &PlaceholderDictionary) -> RunResult<()> {
    let map: BTreeMap<&str, BTreeMap<&str, &str>> = dict
        .entries()
        .iter()
        .map(|(app, m)| (app.as_str(), m.iter().map(|(p, v)| (p.symbol(), v.as_str())).collect()))
        .collect();
    write_json(path, &map)
}

fn read_placeholders(path: &Path) -> RunResult<PlaceholderDictionary> {
    let map: BTreeMap<String, BTreeMap<String, String>> = read_json(path)?;
    let mut dict = PlaceholderDictionary::default();
    for (app, m) in map {
        for (sym, value) in m {
            let p = Placeholder::from_symbol(&sym)
                .ok_or_else(|| RunError::Format(format!("unknown placeholder `{sym}` in {}", path.display())))?;
            dict.insert(&app, p, &value);
        }
    }
    Ok(dict)
}

/// Preprocessed artifacts needed by later steps.
pub struct Artifacts {
    pub vocab: Vocabulary,
    pub buckets: LengthBucketizer,
    pub categories: Vec<String>,
    pub records: Vec<StoredRecord>,
}

impl Artifacts {
    pub fn load(cfg: &RunConfig) -> RunResult<Self> {
        let vocab = read_vocab(&out(cfg, VOCAB_FILE))?;
        let buckets = read_buckets(&out(cfg, BUCKETS_FILE))?;
        let categories = read_required_string(&out(cfg, CATEGORIES_FILE))?
            .lines()
            .map(str::to_string)
            .collect();
        let records = read_jsonl(&out(cfg, RECORDS_FILE))?;
        Ok(Artifacts {
            vocab,
            buckets,
            categories,
            records,
        })
    }

    pub fn split(&self, cfg: &RunConfig, split: Split) -> RunResult<Vec<usize>> {
        let idx = read_split_file(&cfg.split_dir(), split.name())?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.records.len()) {
            return Err(RunError::Format(format!(
                "{} split refers to record {bad}, but only {} exist",
                split.name(),
                self.records.len()
            )));
        }
        Ok(idx)
    }

    pub fn examples(&self, indices: &[usize], max_len: usize) -> RunResult<Vec<Example>> {
        indices
            .iter()
            .map(|&i| {
                Ok(Example::from_annotated(
                    &self.records[i].to_annotated()?,
                    &self.vocab,
                    max_len,
                ))
            })
            .collect()
    }

    pub fn model_config(&self, cfg: &RunConfig) -> ModelConfig {
        cfg.model_config(self.vocab.len(), self.categories.len(), self.buckets.bucket_count())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub steps: usize,
    pub final_loss: f64,
    pub checkpoints: Vec<String>,
    pub best_checkpoint: String,
    pub best_valid_bleu: Option<f64>,
}

struct CheckpointWriter<'a> {
    dir: PathBuf,
    config: &'a ModelConfig,
    artifacts: &'a Artifacts,
    saved: Vec<String>,
    best: Option<(String, Option<f64>)>,
}

impl TrainObserver for CheckpointWriter<'_> {
    fn on_checkpoint(&mut self, event: &CheckpointEvent, params: &ParamSet) -> rrgen_core::Result<()> {
        let name = format!("step-{:06}.ckpt", event.step);
        let manifest = Manifest::new(self.config, &self.artifacts.vocab, &self.artifacts.buckets, event.step);
        let hook = |e: RunError| rrgen_core::Error::Hook(e.to_string());
        save_checkpoint(&self.dir.join(&name), params, &manifest).map_err(hook)?;
        if event.is_best {
            save_checkpoint(&self.dir.join("best.ckpt"), params, &manifest).map_err(hook)?;
            self.best = Some((name.clone(), event.valid_bleu));
        }
        self.saved.push(name);
        Ok(())
    }
}

#[derive(Serialize)]
struct CheckpointRow<'a> {
    step: usize,
    epoch: usize,
    valid_bleu: Option<f64>,
    is_best: bool,
    file: &'a str,
}

pub fn train(cfg: &RunConfig) -> RunResult<TrainSummary> {
    let artifacts = Artifacts::load(cfg)?;
    let config = artifacts.model_config(cfg);
    let train_idx = artifacts.split(cfg, Split::Train)?;
    let valid_idx = artifacts.split(cfg, Split::Valid)?;
    let corpus = artifacts.examples(&train_idx, config.max_len)?;
    let valid = artifacts.examples(&valid_idx, config.max_len)?;
    let mut params = init_params(&config)?;
    if let Some(p) = &cfg.paths.embeddings {
        crate::embeddings::load_into(p, &artifacts.vocab, &mut params)?;
    }
    log::info!("training {} parameters on {} pairs", params.num_scalars(), corpus.len());
    let mut writer = CheckpointWriter {
        dir: out(cfg, CHECKPOINT_DIR),
        config: &config,
        artifacts: &artifacts,
        saved: Vec::new(),
        best: None,
    };
    let log = fit(&config, &cfg.train_config(), &mut params, &corpus, &valid, &mut writer)?;
    write_jsonl(
        &out(cfg, "train_log.jsonl"),
        log.batches.iter().map(|b| BatchRow::from(*b)).collect::<Vec<_>>(),
    )?;
    write_jsonl(
        &out(cfg, "checkpoints.jsonl"),
        log.checkpoints.iter().zip(&writer.saved).map(|(c, f)| CheckpointRow {
            step: c.step,
            epoch: c.epoch,
            valid_bleu: c.valid_bleu,
            is_best: c.is_best,
            file: f,
        }),
    )?;
    let (best_name, best_bleu) = writer.best.clone().unwrap_or_default();
    let summary = TrainSummary {
        steps: log.batches.len(),
        final_loss: log.batches.last().map_or(f64::NAN, |b| b.loss),
        checkpoints: writer.saved.clone(),
        best_checkpoint: format!("{CHECKPOINT_DIR}/{best_name}"),
        best_valid_bleu: best_bleu,
    };
    write_json(&out(cfg, "train_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Serialize)]
struct BatchRow {
    epoch: usize,
    batch: usize,
    step: usize,
    loss: f64,
}

impl From<rrgen_core::model::BatchRecord> for BatchRow {
    fn from(b: rrgen_core::model::BatchRecord) -> Self {
        BatchRow {
            epoch: b.epoch,
            batch: b.batch,
            step: b.step,
            loss: b.loss,
        }
    }
}

/// One generated response with its filter verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub index: usize,
    pub app_id: String,
    pub tokens: Vec<String>,
    pub text: String,
    pub overlap: f64,
    pub length: usize,
    pub rating: u8,
    pub unresolved: Vec<String>,
    pub requires_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionRow {
    pub index: usize,
    pub source: Vec<String>,
    pub output: Vec<String>,
    /// `output.len()` rows of `source.len()` weights.
    pub weights: Vec<Vec<f64>>,
}

pub fn hypotheses_path(cfg: &RunConfig, stem: &str, split: Split) -> PathBuf {
    out(cfg, &format!("{stem}-{}.txt", split.name()))
}

fn write_token_lines(path: &Path, lines: &[Vec<String>]) -> RunResult<()> {
    let s: String = lines.iter().map(|l| format!("{}\n", l.join(" "))).collect();
    write_atomic(path, s.as_bytes())
}

/// Reads one space-separated token sequence per line.
pub fn read_token_lines(path: &Path) -> RunResult<Vec<Vec<String>>> {
    Ok(read_required_string(path)?
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect())
}

/// Generates a response for every review in `split`, substitutes
/// placeholders and applies the quality filter.
pub fn generate(
    cfg: &RunConfig,
    checkpoint: Option<&Path>,
    split: Split,
    dump_attention: bool,
) -> RunResult<Vec<ResponseRow>> {
    let artifacts = Artifacts::load(cfg)?;
    let ckpt = checkpoint.map_or_else(|| out(cfg, BEST_CHECKPOINT), Path::to_path_buf);
    let (config, params) = load_checkpoint(&ckpt, &artifacts.vocab, &artifacts.buckets)?;
    let dict = read_placeholders(&out(cfg, PLACEHOLDERS_FILE))?;
    let stopwords = load_stopwords(cfg)?;
    let indices = artifacts.split(cfg, split)?;
    let examples = artifacts.examples(&indices, config.max_len)?;
    let mut rows = Vec::with_capacity(indices.len());
    let mut attention = Vec::new();
    for (&i, ex) in indices.iter().zip(&examples) {
        let rec = &artifacts.records[i];
        let g = greedy(&config, &params, ex)?;
        let tokens = g
            .tokens
            .iter()
            .map(|&t| artifacts.vocab.decode(t).map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        let sub = substitute(&tokens, &rec.app_id, &dict);
        let decision = quality_filter(&tokens, &rec.review, rec.rating, &stopwords);
        if dump_attention {
            attention.push(AttentionRow {
                index: i,
                source: rec.review.iter().take(config.max_len).cloned().collect(),
                output: tokens.clone(),
                weights: g.attention,
            });
        }
        rows.push(ResponseRow {
            index: i,
            app_id: rec.app_id.clone(),
            text: sub.text.clone(),
            overlap: decision.overlap,
            length: decision.length,
            rating: decision.rating,
            requires_check: decision.requires_check || sub.requires_check(),
            unresolved: sub.unresolved,
            tokens,
        });
    }
    write_jsonl(&out(cfg, &format!("responses-{}.jsonl", split.name())), &rows)?;
    let hyps: Vec<Vec<String>> = rows.iter().map(|r| r.tokens.clone()).collect();
    write_token_lines(&hypotheses_path(cfg, "generated", split), &hyps)?;
    if dump_attention {
        write_jsonl(&out(cfg, &format!("attention-{}.jsonl", split.name())), &attention)?;
    }
    Ok(rows)
}

/// Machine-readable BLEU report line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub bleu4: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub brevity_penalty: f64,
    pub hypothesis_length: u64,
    pub reference_length: u64,
    pub matches: [u64; 4],
    pub totals: [u64; 4],
}

impl From<&BleuReport> for ReportLine {
    fn from(r: &BleuReport) -> Self {
        ReportLine {
            bleu4: r.bleu4,
            p1: r.precisions[0],
            p2: r.precisions[1],
            p3: r.precisions[2],
            p4: r.precisions[3],
            brevity_penalty: r.brevity_penalty,
            hypothesis_length: r.hyp_len,
            reference_length: r.ref_len,
            matches: r.matches,
            totals: r.totals,
        }
    }
}

impl ReportLine {
    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>6}",
            "BLEU-4", "p1", "p2", "p3", "p4", "BP"
        );
        let _ = writeln!(
            s,
            "{:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>6.3}",
            self.bleu4, self.p1, self.p2, self.p3, self.p4, self.brevity_penalty
        );
        let _ = write!(
            s,
            "hypothesis length {}, reference length {}",
            self.hypothesis_length, self.reference_length
        );
        s
    }
}

pub fn bleu_between(hyps: &[Vec<String>], refs: &[Vec<String>]) -> RunResult<ReportLine> {
    Ok(ReportLine::from(&corpus_bleu_owned(hyps, refs)?))
}

fn references(artifacts: &Artifacts, indices: &[usize]) -> Vec<Vec<String>> {
    indices.iter().map(|&i| artifacts.records[i].response.clone()).collect()
}

/// Scores a hypothesis file against the references of `split` and writes
/// `bleu-<stem>.json`.
pub fn evaluate(cfg: &RunConfig, split: Split, responses: Option<&Path>) -> RunResult<ReportLine> {
    let artifacts = Artifacts::load(cfg)?;
    let path = responses.map_or_else(|| hypotheses_path(cfg, "generated", split), Path::to_path_buf);
    let hyps = read_token_lines(&path)?;
    let refs = references(&artifacts, &artifacts.split(cfg, split)?);
    let report = bleu_between(&hyps, &refs)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("responses");
    write_json(&out(cfg, &format!("bleu-{stem}.json")), &report)?;
    Ok(report)
}

pub fn baseline_random(cfg: &RunConfig, split: Split) -> RunResult<ReportLine> {
    let artifacts = Artifacts::load(cfg)?;
    let pool = references(&artifacts, &artifacts.split(cfg, Split::Train)?);
    let targets = artifacts.split(cfg, split)?;
    let hyps = (0..targets.len())
        .map(|k| random_response(k, &pool, cfg.seed).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    finish_baseline(cfg, &artifacts, "baseline-random", split, &targets, &hyps)
}

#[derive(Serialize)]
struct NnGenRow {
    index: usize,
    neighbour: usize,
    cosine: f64,
    bleu: f64,
    degenerate: bool,
}

/// Loads the NNGen index, building it from the training split when it is
/// missing or was built for another vocabulary.
pub fn nngen_index(cfg: &RunConfig, artifacts: &Artifacts) -> RunResult<BowIndex> {
    let path = out(cfg, INDEX_FILE);
    if path.exists() {
        let index = read_index(&path)?;
        if index.vocab_fingerprint() == artifacts.vocab.fingerprint() {
            return Ok(index);
        }
        log::warn!("{} was built for another vocabulary; rebuilding", path.display());
    }
    let train = artifacts.split(cfg, Split::Train)?;
    let reviews = train.iter().map(|&i| artifacts.records[i].review.clone()).collect();
    let index = BowIndex::build(&artifacts.vocab, reviews, references(artifacts, &train))?;
    write_index(&path, &index)?;
    Ok(index)
}

pub fn baseline_nngen(cfg: &RunConfig, split: Split) -> RunResult<ReportLine> {
    let artifacts = Artifacts::load(cfg)?;
    let index = nngen_index(cfg, &artifacts)?;
    let targets = artifacts.split(cfg, split)?;
    let mut hyps = Vec::with_capacity(targets.len());
    let mut rows = Vec::with_capacity(targets.len());
    for &i in &targets {
        let (resp, m) = index.nngen_response(&artifacts.vocab, &artifacts.records[i].review)?;
        hyps.push(resp.to_vec());
        rows.push(NnGenRow {
            index: i,
            neighbour: m.index,
            cosine: m.cosine,
            bleu: m.bleu,
            degenerate: m.degenerate,
        });
    }
    write_jsonl(&out(cfg, &format!("baseline-nngen-{}.jsonl", split.name())), &rows)?;
    finish_baseline(cfg, &artifacts, "baseline-nngen", split, &targets, &hyps)
}

fn finish_baseline(
    cfg: &RunConfig,
    artifacts: &Artifacts,
    stem: &str,
    split: Split,
    targets: &[usize],
    hyps: &[Vec<String>],
) -> RunResult<ReportLine> {
    let path = hypotheses_path(cfg, stem, split);
    write_token_lines(&path, hyps)?;
    let report = bleu_between(hyps, &references(artifacts, targets))?;
    write_json(&out(cfg, &format!("bleu-{stem}-{}.json", split.name())), &report)?;
    Ok(report)
}
