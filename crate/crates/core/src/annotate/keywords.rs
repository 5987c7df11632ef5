//! Topic keyword dictionary and per-token keyword tagging.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::text::{lemmatize, squeeze};

/// The twelve review topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Topic {
    App,
    Gui,
    Contents,
    Pricing,
    Feature,
    Improvement,
    Updates,
    Resources,
    Security,
    Download,
    Model,
    Company,
}

impl Topic {
    pub const ALL: [Topic; 12] = [
        Topic::App,
        Topic::Gui,
        Topic::Contents,
        Topic::Pricing,
        Topic::Feature,
        Topic::Improvement,
        Topic::Updates,
        Topic::Resources,
        Topic::Security,
        Topic::Download,
        Topic::Model,
        Topic::Company,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Topic::App => "app",
            Topic::Gui => "gui",
            Topic::Contents => "contents",
            Topic::Pricing => "pricing",
            Topic::Feature => "feature",
            Topic::Improvement => "improvement",
            Topic::Updates => "updates/versions",
            Topic::Resources => "resources",
            Topic::Security => "security",
            Topic::Download => "download",
            Topic::Model => "model",
            Topic::Company => "company",
        }
    }

    pub fn from_name(name: &str) -> Option<Topic> {
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "updates" | "versions" => Some(Topic::Updates),
            _ => Topic::ALL.iter().copied().find(|t| t.name() == name),
        }
    }

    pub fn symbol(self) -> KeywordSymbol {
        KeywordSymbol(self as u8)
    }
}

/// Number of keyword symbols: twelve topics plus `<O>`.
pub const KEYWORD_SYMBOLS: usize = 13;

/// Keyword symbol; indices `0..12` are topics, `12` is `<O>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KeywordSymbol(u8);

impl KeywordSymbol {
    pub const OTHER: KeywordSymbol = KeywordSymbol(12);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < KEYWORD_SYMBOLS).then_some(KeywordSymbol(i as u8))
    }

    pub fn topic(self) -> Option<Topic> {
        Topic::ALL.get(self.index()).copied()
    }

    pub fn as_str(self) -> &'static str {
        const SYMBOLS: [&str; KEYWORD_SYMBOLS] = [
            "<A>", "<GUI>", "<C>", "<P>", "<F>", "<I>", "<U>", "<R>", "<S>", "<D>", "<M>", "<CO>", "<O>",
        ];
        SYMBOLS[self.index()]
    }

    pub fn parse(s: &str) -> Option<Self> {
        (0..KEYWORD_SYMBOLS)
            .map(|i| KeywordSymbol(i as u8))
            .find(|k| k.as_str() == s)
    }
}

/// Keyword → topic map; each keyword belongs to exactly one topic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordDictionary {
    map: BTreeMap<String, Topic>,
}

impl KeywordDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `keyword` under `topic`. Returns `false` (keeping the existing
    /// topic) when the keyword is already present.
    pub fn insert(&mut self, topic: Topic, keyword: &str) -> bool {
        if self.map.contains_key(keyword) {
            return false;
        }
        self.map.insert(keyword.to_string(), topic);
        true
    }

    pub fn topic(&self, token: &str) -> Option<Topic> {
        self.map.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Parses `topic<TAB>keyword` lines (`#` starts a comment). Keywords are
    /// normalized like review tokens; a keyword listed under two topics keeps
    /// the first one and logs a warning.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dict = KeywordDictionary::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: n + 1, message };
            let (topic, keyword) = line
                .split_once('\t')
                .ok_or_else(|| err("expected topic<TAB>keyword".into()))?;
            let topic = Topic::from_name(topic).ok_or_else(|| err(format!("unknown topic `{topic}`")))?;
            let keyword = lemmatize(&squeeze(&keyword.trim().to_lowercase()));
            if keyword.is_empty() || keyword.contains(char::is_whitespace) {
                return Err(err(format!("keyword `{keyword}` must be a single token")));
            }
            if !dict.insert(topic, &keyword) {
                log::warn!(
                    "keyword `{}` (line {}) already listed under `{}`; keeping the first topic",
                    keyword,
                    n + 1,
                    dict.topic(&keyword).map_or("?", Topic::name)
                );
            }
        }
        Ok(dict)
    }

    /// The dictionary shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../data/keywords.tsv")).expect("builtin dictionary parses")
    }

    /// Keyword symbol for every token: its topic, or `<O>`.
    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<KeywordSymbol> {
        tokens
            .iter()
            .map(|t| self.topic(t.as_ref()).map_or(KeywordSymbol::OTHER, Topic::symbol))
            .collect()
    }
}
