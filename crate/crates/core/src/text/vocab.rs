use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::text::ReviewRecord;

pub const PAD: &str = "<pad>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub const PAD_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const UNK_ID: u32 = 3;

pub const RESERVED: [&str; 4] = [PAD, BOS, EOS, UNK];

/// Default cap on non-reserved entries.
pub const DEFAULT_MAX_SIZE: usize = 10_000;

/// Token ↔ index map with reserved entries at indices 0..4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Keeps the `max_size` most frequent tokens across reviews and responses
    /// of `training`; ties go to the lexicographically smaller token.
    pub fn build(training: &[ReviewRecord], max_size: usize) -> Result<Self> {
        if max_size == 0 {
            return Err(contract("vocabulary max_size must be at least 1"));
        }
        if training.is_empty() {
            return Err(contract("cannot build a vocabulary from an empty corpus"));
        }
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for r in training {
            for t in r.review_tokens.iter().chain(&r.response_tokens) {
                if !RESERVED.contains(&t.as_str()) {
                    *counts.entry(t.as_str()).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(max_size);
        Ok(Self::from_entries(ranked.into_iter().map(|(t, _)| t.to_string())))
    }

    fn from_entries(entries: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        tokens.extend(entries);
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { tokens, index }
    }

    /// Rebuilds a vocabulary from its full index-ordered token list.
    pub fn from_token_list(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED.len() || tokens[..RESERVED.len()] != RESERVED {
            return Err(contract("token list must start with the reserved entries"));
        }
        let v = Self::from_entries(tokens.into_iter().skip(RESERVED.len()));
        if v.index.len() != v.tokens.len() {
            return Err(contract("duplicate token in vocabulary list"));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Index of `token`, or the `<unk>` index when absent.
    pub fn encode(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn encode_all<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.encode(t.as_ref())).collect()
    }

    pub fn decode(&self, id: u32) -> Result<&str> {
        self.tokens.get(id as usize).map(String::as_str).ok_or(Error::Index {
            what: "vocabulary",
            index: id as usize,
            size: self.tokens.len(),
        })
    }

    /// 64-bit FNV-1a digest of the ordered token list.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in &self.tokens {
            for b in t.bytes().chain(core::iter::once(b'\n')) {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}
