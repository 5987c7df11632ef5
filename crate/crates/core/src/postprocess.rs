//! Placeholder substitution and the "requires further check" filter for
//! generated responses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::{is_placeholder, Placeholder, Substitution};

/// Overlap below this always requires a check.
pub const OVERLAP_THRESHOLD: f64 = 0.05;
/// Responses shorter than this to low-rated reviews require a check.
pub const SHORT_RESPONSE_LEN: usize = 38;
/// Ratings at or below this count as low.
pub const LOW_RATING: u8 = 2;

/// Per-app map from placeholder to its most frequent original value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlaceholderDictionary {
    entries: BTreeMap<String, BTreeMap<Placeholder, String>>,
}

impl PlaceholderDictionary {
    /// Builds the dictionary from the substitution logs of training
    /// responses, grouped by app. Ties go to the lexicographically smallest
    /// value.
    pub fn build<'a>(logs: impl IntoIterator<Item = (&'a str, &'a [Substitution])>) -> Self {
        let mut counts: BTreeMap<String, BTreeMap<Placeholder, BTreeMap<&'a str, usize>>> = BTreeMap::new();
        for (app, subs) in logs {
            let per_app = counts.entry(app.to_string()).or_default();
            for s in subs {
                *per_app
                    .entry(s.placeholder)
                    .or_default()
                    .entry(s.value.as_str())
                    .or_insert(0) += 1;
            }
        }
        let entries = counts
            .into_iter()
            .map(|(app, per)| {
                let best = per
                    .into_iter()
                    .filter_map(|(ph, values)| {
                        // BTreeMap iterates values in ascending order, so the
                        // first maximum is the smallest tied value.
                        let mut top: Option<(&str, usize)> = None;
                        for (v, c) in values {
                            if top.is_none_or(|(_, tc)| c > tc) {
                                top = Some((v, c));
                            }
                        }
                        top.map(|(v, _)| (ph, v.to_string()))
                    })
                    .collect();
                (app, best)
            })
            .collect();
        PlaceholderDictionary { entries }
    }

    pub fn insert(&mut self, app: &str, placeholder: Placeholder, value: &str) {
        self.entries
            .entry(app.to_string())
            .or_default()
            .insert(placeholder, value.to_string());
    }

    pub fn get(&self, app: &str, placeholder: Placeholder) -> Option<&str> {
        self.entries.get(app)?.get(&placeholder).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeMap<Placeholder, String>> {
        &self.entries
    }
}

/// A response after placeholder substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substituted {
    pub text: String,
    /// Placeholders left in the text for lack of a dictionary entry.
    pub unresolved: Vec<String>,
}

impl Substituted {
    pub fn requires_check(&self) -> bool {
        !self.unresolved.is_empty()
    }
}

/// Replaces placeholders that have a dictionary entry for `app` and joins
/// the tokens with single spaces.
pub fn substitute<S: AsRef<str>>(tokens: &[S], app: &str, dict: &PlaceholderDictionary) -> Substituted {
    let mut unresolved = Vec::new();
    let words: Vec<&str> = tokens
        .iter()
        .map(|t| {
            let t = t.as_ref();
            if !is_placeholder(t) {
                return t;
            }
            match Placeholder::from_symbol(t).and_then(|p| dict.get(app, p)) {
                Some(v) => v,
                None => {
                    unresolved.push(t.to_string());
                    t
                }
            }
        })
        .collect();
    Substituted {
        text: words.join(" "),
        unresolved,
    }
}

/// Outcome of the quality filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDecision {
    pub requires_check: bool,
    /// Content-token overlap of the response with the review, in `[0, 1]`.
    pub overlap: f64,
    /// Response length in tokens.
    pub length: usize,
    pub rating: u8,
}

impl FilterDecision {
    /// `ω < 0.05 ∨ (l < 38 ∧ r ≤ 2)`.
    pub fn decide(overlap: f64, length: usize, rating: u8) -> Self {
        let requires_check = overlap < OVERLAP_THRESHOLD || (length < SHORT_RESPONSE_LEN && rating <= LOW_RATING);
        FilterDecision {
            requires_check,
            overlap,
            length,
            rating,
        }
    }
}

/// Stopword set for the overlap ratio.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// One word per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| crate::text::lemmatize(&l.to_lowercase()))
                .collect(),
        )
    }

    pub fn builtin() -> Self {
        Self::parse(include_str!("../data/stopwords.txt"))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Tokens that carry content: not stopwords, not placeholders, and
/// containing at least one letter or digit.
pub fn content_tokens<'a, S: AsRef<str>>(tokens: &'a [S], stopwords: &Stopwords) -> BTreeSet<&'a str> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !is_placeholder(t) && !stopwords.contains(t) && t.chars().any(char::is_alphanumeric))
        .collect()
}

/// `|C(response) ∩ C(review)| / |C(response)|`, or 0 when the response has
/// no content tokens.
pub fn overlap_ratio<S: AsRef<str>, R: AsRef<str>>(response: &[S], review: &[R], stopwords: &Stopwords) -> f64 {
    let resp = content_tokens(response, stopwords);
    if resp.is_empty() {
        return 0.0;
    }
    let rev = content_tokens(review, stopwords);
    resp.intersection(&rev).count() as f64 / resp.len() as f64
}

pub fn quality_filter<S: AsRef<str>, R: AsRef<str>>(
    response: &[S],
    review: &[R],
    rating: u8,
    stopwords: &Stopwords,
) -> FilterDecision {
    FilterDecision::decide(overlap_ratio(response, review, stopwords), response.len(), rating)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sub(p: Placeholder, v: &str) -> Substitution {
        Substitution {
            placeholder: p,
            value: v.into(),
        }
    }

    #[test]
    fn dictionary_mode_and_ties() {
        let a = [sub(Placeholder::Url, "u2"), sub(Placeholder::Url, "u1")];
        let b = [
            sub(Placeholder::Url, "u1"),
            sub(Placeholder::App, "zeta"),
            sub(Placeholder::App, "alpha"),
        ];
        let d = PlaceholderDictionary::build([("x", &a[..]), ("x", &b[..])]);
        assert_eq!(d.get("x", Placeholder::Url), Some("u1"));
        assert_eq!(d.get("x", Placeholder::App), Some("alpha"));
        assert_eq!(d.get("x", Placeholder::Email), None);
        assert_eq!(d.get("y", Placeholder::Url), None);
    }

    #[test]
    fn substitution() {
        let mut d = PlaceholderDictionary::default();
        d.insert("x", Placeholder::Url, "https://example.org/help");
        let s = substitute(&["visit", "<url>"], "x", &d);
        assert_eq!(s.text, "visit https://example.org/help");
        assert!(!s.requires_check());
        let s = substitute(&["email", "<email>"], "x", &d);
        assert_eq!(s.text, "email <email>");
        assert_eq!(s.unresolved, vec!["<email>"]);
        let s = substitute(&["we", "have", "<digit>", "fix"], "x", &d);
        assert!(s.requires_check());
        assert_eq!(substitute(&["thank", "you"], "x", &d).text, "thank you");
    }

    #[test]
    fn filter_rule() {
        assert!(!FilterDecision::decide(0.3, 40, 1).requires_check);
        assert!(FilterDecision::decide(0.3, 37, 2).requires_check);
        assert!(FilterDecision::decide(0.0, 100, 5).requires_check);
    }

    #[test]
    fn overlap() {
        let sw = Stopwords::builtin();
        assert!(sw.len() >= 100);
        let resp = ["thank", "you", "for", "the", "crash", "report", "<url>"];
        let rev = ["app", "crash", "every", "time"];
        assert!((overlap_ratio(&resp, &rev, &sw) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(overlap_ratio(&["the", "<url>", "!"], &rev, &sw), 0.0);
    }
}
