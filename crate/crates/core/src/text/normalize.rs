//! Review/response normalization with placeholder substitution.
//!
//! Steps, in order:
//!
//! 1. URLs and email addresses are located in the raw text with
//!    [`URL_PATTERN`] and [`EMAIL_PATTERN`] (leftmost match wins, URL on ties)
//!    and replaced by `<url>` / `<email>`.
//! 2. The remaining text is lowercased and split into tokens: alphabetic runs
//!    (internal apostrophes kept), maximal ASCII digit runs (each becomes
//!    `<digit>`), literal placeholders, and single punctuation/symbol chars.
//! 3. Character runs of three or more are squeezed to two.
//! 4. Purely alphabetic tokens are lemmatized by suffix stripping
//!    (`-ing`, `-ed`, `-es`, `-s`), repeated until no rule applies.
//! 5. Token sequences equal to a normalized app name become `<app>`, user
//!    names become `<user>` (longest match, app names first).
//!
//! The output is a fixed point: normalizing the space-joined output again
//! yields the same tokens.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use regex_automata::meta::Regex;

pub const DIGIT: &str = "<digit>";
pub const EMAIL: &str = "<email>";
pub const URL: &str = "<url>";
pub const APP: &str = "<app>";
pub const USER: &str = "<user>";

/// URL matcher applied to raw text.
pub const URL_PATTERN: &str = r#"(?i)(?:https?://|www\.)[^\s<>"]*[^\s<>".,;:!?'()\[\]{}]"#;
/// Email matcher applied to raw text.
pub const EMAIL_PATTERN: &str = r"(?i)[a-z0-9._%+\-]+@[a-z0-9\-]+(?:\.[a-z0-9\-]+)*\.[a-z]{2,}";

const PLACEHOLDERS: [&str; 5] = [DIGIT, EMAIL, URL, APP, USER];

/// Placeholder symbols whose concrete values are logged during normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Placeholder {
    Url,
    Email,
    App,
}

impl Placeholder {
    pub fn symbol(self) -> &'static str {
        match self {
            Placeholder::Url => URL,
            Placeholder::Email => EMAIL,
            Placeholder::App => APP,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            URL => Some(Placeholder::Url),
            EMAIL => Some(Placeholder::Email),
            APP => Some(Placeholder::App),
            _ => None,
        }
    }
}

/// One replaced value: the placeholder and the text it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub placeholder: Placeholder,
    pub value: String,
}

pub fn is_placeholder(token: &str) -> bool {
    PLACEHOLDERS.contains(&token)
}

/// Tokenizer/normalizer holding compiled patterns and the name lists.
#[derive(Debug, Clone)]
pub struct Normalizer {
    url: Regex,
    email: Regex,
    // (normalized token sequence, placeholder, canonical name)
    names: Vec<(Vec<String>, &'static str, String)>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer::new::<&str>(&[], &[])
    }
}

impl Normalizer {
    pub fn new<S: AsRef<str>>(app_names: &[S], user_names: &[S]) -> Self {
        let mut n = Normalizer {
            url: Regex::new(URL_PATTERN).expect("URL pattern compiles"),
            email: Regex::new(EMAIL_PATTERN).expect("email pattern compiles"),
            names: Vec::new(),
        };
        let mut names = Vec::new();
        for (list, symbol) in [(app_names, APP), (user_names, USER)] {
            for name in list {
                let name = name.as_ref().trim();
                let (tokens, _) = n.tokenize(name);
                let usable = !tokens.is_empty()
                    && tokens
                        .iter()
                        .any(|t| t.chars().any(char::is_alphanumeric) && !is_placeholder(t))
                    && !tokens.iter().any(|t| t == APP || t == USER);
                if usable {
                    names.push((tokens, symbol, name.to_string()));
                }
            }
        }
        // Longest first; app names before user names at equal length.
        names.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then((a.1 == USER).cmp(&(b.1 == USER))));
        n.names = names;
        n
    }

    /// Normalized tokens of `text`.
    pub fn normalize(&self, text: &str) -> Vec<String> {
        self.normalize_logged(text).0
    }

    /// Normalized tokens plus the concrete values replaced by `<url>`,
    /// `<email>` and `<app>`, in order of appearance.
    pub fn normalize_logged(&self, text: &str) -> (Vec<String>, Vec<Substitution>) {
        let (tokens, mut subs) = self.tokenize(text);
        if self.names.is_empty() {
            return (tokens, subs);
        }
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let hit = self
                .names
                .iter()
                .find(|(seq, _, _)| tokens.len() - i >= seq.len() && tokens[i..i + seq.len()] == seq[..]);
            match hit {
                Some((seq, symbol, name)) => {
                    out.push(symbol.to_string());
                    if *symbol == APP {
                        subs.push(Substitution {
                            placeholder: Placeholder::App,
                            value: name.clone(),
                        });
                    }
                    i += seq.len();
                }
                None => {
                    out.push(tokens[i].clone());
                    i += 1;
                }
            }
        }
        (out, subs)
    }

    fn tokenize(&self, text: &str) -> (Vec<String>, Vec<Substitution>) {
        let mut tokens = Vec::new();
        let mut subs = Vec::new();
        let mut pos = 0;
        while pos <= text.len() {
            let url = self.url.find(&text[pos..]);
            let email = self.email.find(&text[pos..]);
            let next = match (url, email) {
                (Some(u), Some(e)) if e.start() < u.start() => Some((e, Placeholder::Email)),
                (Some(u), _) => Some((u, Placeholder::Url)),
                (None, Some(e)) => Some((e, Placeholder::Email)),
                (None, None) => None,
            };
            let Some((m, kind)) = next else {
                tokenize_plain(&text[pos..], &mut tokens);
                break;
            };
            let (start, end) = (pos + m.start(), pos + m.end());
            tokenize_plain(&text[pos..start], &mut tokens);
            tokens.push(kind.symbol().to_string());
            subs.push(Substitution {
                placeholder: kind,
                value: text[start..end].to_string(),
            });
            pos = end;
        }
        (tokens, subs)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn tokenize_plain(segment: &str, out: &mut Vec<String>) {
    if segment.is_empty() {
        return;
    }
    let lower = segment.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(DIGIT.to_string());
        } else if c.is_alphabetic() {
            let start = i;
            i += 1;
            while i < chars.len() {
                if chars[i].is_alphabetic() {
                    i += 1;
                } else if is_apostrophe(chars[i]) && chars.get(i + 1).is_some_and(|c| c.is_alphabetic()) {
                    i += 2;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i]
                .iter()
                .map(|&c| if is_apostrophe(c) { '\'' } else { c })
                .collect();
            out.push(lemmatize(&squeeze(&word)));
        } else if c == '<' {
            let rest: String = chars[i..chars.len().min(i + 7)].iter().collect();
            match PLACEHOLDERS.iter().find(|p| rest.starts_with(*p)) {
                Some(p) => {
                    out.push(p.to_string());
                    i += p.chars().count();
                }
                None => {
                    out.push(c.to_string());
                    i += 1;
                }
            }
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
}

/// Collapses every run of three or more identical characters to two.
pub fn squeeze(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut prev = None;
    let mut run = 0;
    for c in word.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 {
            out.push(c);
        }
    }
    out
}

const MIN_STEM: usize = 3;

// Frequent words the suffix rules would mangle.
const LEMMA_EXCEPTIONS: &[&str] = &[
    "always",
    "anything",
    "bonus",
    "bring",
    "during",
    "everything",
    "gas",
    "its",
    "morning",
    "news",
    "nothing",
    "series",
    "something",
    "spring",
    "status",
    "string",
    "thing",
    "this",
    "thus",
    "virus",
    "yes",
    "does",
    "was",
    "has",
    "his",
    "is",
    "us",
    "plus",
    "ios",
];

fn strip_suffix(word: &str) -> Option<&str> {
    if LEMMA_EXCEPTIONS.contains(&word) {
        return None;
    }
    let n = word.chars().count();
    if n >= MIN_STEM + 3 && word.ends_with("ing") {
        return Some(&word[..word.len() - 3]);
    }
    if n >= MIN_STEM + 2 && word.ends_with("ed") && !word.ends_with("eed") {
        return Some(&word[..word.len() - 2]);
    }
    if n >= MIN_STEM + 2 && word.ends_with("es") {
        let stem = &word[..word.len() - 2];
        if ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
            return Some(stem);
        }
    }
    if n > MIN_STEM && word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        return Some(&word[..word.len() - 1]);
    }
    None
}

/// Rule-based lemmatizer for purely alphabetic tokens; other tokens pass
/// through. Rules repeat until none applies, so the result is stable.
pub fn lemmatize(word: &str) -> String {
    if word.is_empty() || !word.chars().all(char::is_alphabetic) {
        return word.to_string();
    }
    let mut current = word;
    while let Some(stem) = strip_suffix(current) {
        current = stem;
    }
    current.to_string()
}
