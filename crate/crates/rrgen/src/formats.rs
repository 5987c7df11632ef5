//! On-disk formats: checkpoints and their manifests, vocabulary, split
//! manifests and the NNGen index. Every writer goes through
//! [`write_atomic`].

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rrgen_core::baselines::BowIndex;
use rrgen_core::model::{ModelConfig, Toggles};
use rrgen_core::text::{LengthBucketizer, SplitIndices, Vocabulary};
use rrgen_core::{ParamSet, Tensor};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, RunError, RunResult};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RRGC";
pub const CHECKPOINT_VERSION: u32 = 1;
pub const INDEX_VERSION: u32 = 1;

/// Writes `bytes` to `<path>.partial`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> RunResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    let partial = PathBuf::from(partial);
    let mut f = fs::File::create(&partial).map_err(io_err(&partial))?;
    f.write_all(bytes).map_err(io_err(&partial))?;
    f.sync_all().map_err(io_err(&partial))?;
    drop(f);
    fs::rename(&partial, path).map_err(io_err(path))
}

pub fn read_required(path: &Path) -> RunResult<Vec<u8>> {
    if !path.exists() {
        return Err(RunError::MissingArtifact(path.to_path_buf()));
    }
    fs::read(path).map_err(io_err(path))
}

pub fn read_required_string(path: &Path) -> RunResult<String> {
    String::from_utf8(read_required(path)?).map_err(|_| RunError::Format(format!("{} is not UTF-8", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> RunResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| RunError::Format(e.to_string()))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> RunResult<T> {
    let text = read_required_string(path)?;
    serde_json::from_str(&text).map_err(|e| RunError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// One JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> RunResult<()> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(&r).map_err(|e| RunError::Format(e.to_string()))?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> RunResult<Vec<T>> {
    let text = read_required_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| RunError::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Checkpoints
//
//   magic    4 bytes  "RRGC"
//   version  u32 LE
//   count    u64 LE   number of tensors
//   per tensor, in parameter order:
//     name_len u32 LE, name (UTF-8)
//     rank     u32 LE
//     dims     rank × u64 LE
//     data     prod(dims) × f64 LE
// ---------------------------------------------------------------------------

pub fn encode_checkpoint(params: &ParamSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + params.num_scalars() * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for (name, t) in params.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &x in t.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> RunResult<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| RunError::Format(format!("checkpoint truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> RunResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> RunResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> RunResult<ParamSet> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(RunError::Format("not a checkpoint file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(RunError::Format(format!("unsupported checkpoint version {version}")));
    }
    let count = r.u64()?;
    let mut params = ParamSet::new();
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| RunError::Format("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = r.u32()? as usize;
        let dims = (0..rank)
            .map(|_| r.u64().map(|d| d as usize))
            .collect::<RunResult<Vec<_>>>()?;
        let n = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let n = n.ok_or_else(|| RunError::Format(format!("tensor `{name}` is too large")))?;
        let raw = r.take(
            n.checked_mul(8)
                .ok_or_else(|| RunError::Format("tensor too large".into()))?,
        )?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        params.insert(&name, Tensor::new(dims, data)?)?;
    }
    if r.pos != bytes.len() {
        return Err(RunError::Format("trailing bytes after the last tensor".into()));
    }
    if !params.all_finite() {
        return Err(RunError::Format("checkpoint contains non-finite values".into()));
    }
    Ok(params)
}

/// Self-description stored next to each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub word_dim: usize,
    pub hidden_dim: usize,
    pub attr_dim: usize,
    pub vocab_size: usize,
    pub max_len: usize,
    pub categories: usize,
    pub length_buckets: usize,
    pub toggles: ToggleSet,
    pub seed: u64,
    /// FNV-1a fingerprint of the vocabulary, hex.
    pub vocab_fingerprint: String,
    pub bucket_edges: Vec<f64>,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToggleSet {
    pub category: bool,
    pub length: bool,
    pub rating: bool,
    pub sentiment: bool,
    pub keywords: bool,
}

impl From<Toggles> for ToggleSet {
    fn from(t: Toggles) -> Self {
        ToggleSet {
            category: t.category,
            length: t.length,
            rating: t.rating,
            sentiment: t.sentiment,
            keywords: t.keywords,
        }
    }
}

impl From<ToggleSet> for Toggles {
    fn from(t: ToggleSet) -> Self {
        Toggles {
            category: t.category,
            length: t.length,
            rating: t.rating,
            sentiment: t.sentiment,
            keywords: t.keywords,
        }
    }
}

pub fn fingerprint_hex(vocab: &Vocabulary) -> String {
    format!("{:016x}", vocab.fingerprint())
}

impl Manifest {
    pub fn new(config: &ModelConfig, vocab: &Vocabulary, buckets: &LengthBucketizer, step: usize) -> Self {
        Manifest {
            format_version: CHECKPOINT_VERSION,
            word_dim: config.word_dim,
            hidden_dim: config.hidden_dim,
            attr_dim: config.attr_dim,
            vocab_size: config.vocab_size,
            max_len: config.max_len,
            categories: config.categories,
            length_buckets: config.length_buckets,
            toggles: config.toggles.into(),
            seed: config.seed,
            vocab_fingerprint: fingerprint_hex(vocab),
            bucket_edges: buckets.edges().to_vec(),
            step,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            word_dim: self.word_dim,
            hidden_dim: self.hidden_dim,
            attr_dim: self.attr_dim,
            vocab_size: self.vocab_size,
            max_len: self.max_len,
            categories: self.categories,
            length_buckets: self.length_buckets,
            toggles: self.toggles.into(),
            seed: self.seed,
        }
    }

    /// Refuses a manifest written for a different vocabulary or bucketizer.
    pub fn check_against(&self, vocab: &Vocabulary, buckets: &LengthBucketizer) -> RunResult<()> {
        if self.vocab_fingerprint != fingerprint_hex(vocab) || self.vocab_size != vocab.len() {
            return Err(RunError::Format(format!(
                "checkpoint vocabulary {} ({} entries) does not match {} ({} entries)",
                self.vocab_fingerprint,
                self.vocab_size,
                fingerprint_hex(vocab),
                vocab.len()
            )));
        }
        if self.bucket_edges != buckets.edges() {
            return Err(RunError::Format(
                "checkpoint length buckets do not match the preprocessed ones".into(),
            ));
        }
        Ok(())
    }
}

pub fn manifest_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("manifest.json")
}

pub fn save_checkpoint(path: &Path, params: &ParamSet, manifest: &Manifest) -> RunResult<()> {
    write_atomic(path, &encode_checkpoint(params))?;
    write_json(&manifest_path(path), manifest)
}

/// Loads a checkpoint and its manifest, checking both against the
/// preprocessed vocabulary and buckets.
pub fn load_checkpoint(
    path: &Path,
    vocab: &Vocabulary,
    buckets: &LengthBucketizer,
) -> RunResult<(ModelConfig, ParamSet)> {
    let manifest: Manifest = read_json(&manifest_path(path))?;
    manifest.check_against(vocab, buckets)?;
    let params = decode_checkpoint(&read_required(path)?)?;
    let config = manifest.model_config();
    rrgen_core::model::check_params(&config, &params)?;
    Ok((config, params))
}

// ---------------------------------------------------------------------------
// Vocabulary, buckets, splits
// ---------------------------------------------------------------------------

/// One token per line, in id order (reserved entries first).
pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> RunResult<()> {
    let mut s = vocab.tokens().join("\n");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_vocab(path: &Path) -> RunResult<Vocabulary> {
    let text = read_required_string(path)?;
    Ok(Vocabulary::from_token_list(text.lines().map(str::to_string).collect())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketFile {
    pub edges: Vec<f64>,
}

pub fn read_buckets(path: &Path) -> RunResult<LengthBucketizer> {
    let f: BucketFile = read_json(path)?;
    Ok(LengthBucketizer::from_edges(f.edges)?)
}

pub const SPLIT_NAMES: [&str; 3] = ["train", "valid", "test"];

pub fn write_split(dir: &Path, split: &SplitIndices) -> RunResult<()> {
    for (name, idx) in SPLIT_NAMES.iter().zip([&split.train, &split.valid, &split.test]) {
        let s: String = idx.iter().map(|i| format!("{i}\n")).collect();
        write_atomic(&dir.join(format!("{name}.idx")), s.as_bytes())?;
    }
    Ok(())
}

pub fn read_split_file(dir: &Path, name: &str) -> RunResult<Vec<usize>> {
    let path = dir.join(format!("{name}.idx"));
    let text = read_required_string(&path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim().parse().map_err(|_| RunError::Parse {
                path: path.clone(),
                line: n + 1,
                message: format!("`{l}` is not an index"),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// NNGen index
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    vocab_fingerprint: String,
    vectors: Vec<BTreeMap<u32, u32>>,
    unk_counts: Vec<u32>,
    reviews: Vec<Vec<String>>,
    responses: Vec<Vec<String>>,
}

pub fn write_index(path: &Path, index: &BowIndex) -> RunResult<()> {
    let f = IndexFile {
        version: INDEX_VERSION,
        vocab_fingerprint: format!("{:016x}", index.vocab_fingerprint()),
        vectors: index.vectors().to_vec(),
        unk_counts: index.unk_counts().to_vec(),
        reviews: index.reviews().to_vec(),
        responses: index.responses().to_vec(),
    };
    let mut s = serde_json::to_string(&f).map_err(|e| RunError::Format(e.to_string()))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_index(path: &Path) -> RunResult<BowIndex> {
    let f: IndexFile = read_json(path)?;
    if f.version != INDEX_VERSION {
        return Err(RunError::Format(format!("unsupported index version {}", f.version)));
    }
    let fp = u64::from_str_radix(&f.vocab_fingerprint, 16)
        .map_err(|_| RunError::Format("bad vocabulary fingerprint in index".into()))?;
    Ok(BowIndex::from_parts(
        fp,
        f.vectors,
        f.unk_counts,
        f.reviews,
        f.responses,
    )?)
}
