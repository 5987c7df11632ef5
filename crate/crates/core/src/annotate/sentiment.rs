//! Lexicon-based dual-polarity sentence scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::text::{lemmatize, squeeze};

/// Weight applied to the magnitude of the negative score when deciding which
/// polarity dominates a sentence.
const NEGATIVE_WEIGHT: f64 = 1.5;

const SENTENCE_END: [&str; 3] = [".", "!", "?"];

/// Word strengths in `-5..=-1 ∪ 1..=5`, booster modifiers and negation words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    words: BTreeMap<String, i8>,
    boosters: BTreeMap<String, i8>,
    negations: BTreeSet<String>,
}

fn key(word: &str) -> String {
    lemmatize(&squeeze(&word.trim().to_lowercase()))
}

impl SentimentLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a sentiment word; the key is used verbatim.
    pub fn insert(&mut self, word: &str, strength: i8) -> Result<()> {
        if strength == 0 || !(-5..=5).contains(&strength) {
            return Err(contract(format!("strength {strength} for `{word}` outside ±1..5")));
        }
        self.words.insert(word.to_string(), strength);
        Ok(())
    }

    pub fn insert_booster(&mut self, word: &str, delta: i8) {
        self.boosters.insert(word.to_string(), delta);
    }

    pub fn insert_negation(&mut self, word: &str) {
        self.negations.insert(word.to_string());
    }

    pub fn strength(&self, token: &str) -> Option<i8> {
        self.words.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Parses the tab-separated lexicon format.
    ///
    /// ```text
    /// # comment
    /// great<TAB>3        sentiment word, strength ±1..5
    /// very<TAB>B+1       booster, additive magnitude modifier
    /// not<TAB>NEG        negation word
    /// ```
    ///
    /// Words are lowercased, squeezed and lemmatized so they match
    /// normalized review tokens.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = SentimentLexicon::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: n + 1, message };
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| err("expected word<TAB>strength".into()))?;
            let word = key(word);
            let value = value.trim();
            if value.eq_ignore_ascii_case("NEG") {
                lex.insert_negation(&word);
            } else if let Some(delta) = value.strip_prefix('B') {
                let delta = delta
                    .parse::<i8>()
                    .map_err(|_| err(format!("bad booster modifier `{value}`")))?;
                lex.insert_booster(&word, delta);
            } else {
                let s = value
                    .parse::<i8>()
                    .map_err(|_| err(format!("bad strength `{value}`")))?;
                lex.insert(&word, s).map_err(|e| err(e.to_string()))?;
            }
        }
        Ok(lex)
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../data/sentiment_lexicon.tsv")).expect("builtin lexicon parses")
    }
}

/// Positive (`1..=5`) and negative (`-5..=-1`) strength of one sentence.
///
/// Each score is the extreme over the sentence's lexicon hits, defaulting to
/// ±1. A booster directly before a sentiment word adjusts its magnitude; a
/// negation directly before it (or before its booster) flips its sign.
pub fn score_sentence<S: AsRef<str>>(tokens: &[S], lexicon: &SentimentLexicon) -> (i8, i8) {
    let mut pos = 1i8;
    let mut neg = -1i8;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(mut s) = lexicon.strength(tok.as_ref()) else {
            continue;
        };
        let mut before = i.checked_sub(1).map(|j| tokens[j].as_ref());
        if let Some(delta) = before.and_then(|b| lexicon.boosters.get(b)) {
            let mag = (s.abs() + delta).clamp(1, 5);
            s = mag * s.signum();
            before = i.checked_sub(2).map(|j| tokens[j].as_ref());
        }
        if before.is_some_and(|b| lexicon.negations.contains(b)) {
            s = -s;
        }
        if s > 0 {
            pos = pos.max(s);
        } else {
            neg = neg.min(s);
        }
    }
    (pos, neg)
}

/// Collapses a sentence's dual scores into one value in `-5..=5`.
///
/// `(+1, -1)` is neutral (0). Otherwise the positive score wins when the
/// weighted negative magnitude stays below it, else the negative score.
pub fn sentence_sentiment(pos: i8, neg: i8) -> Result<i8> {
    if !(1..=5).contains(&pos) || !(-5..=-1).contains(&neg) {
        return Err(contract(format!("sentence scores ({pos}, {neg}) out of range")));
    }
    if pos == 1 && neg == -1 {
        return Ok(0);
    }
    if f64::from(-neg) * NEGATIVE_WEIGHT < f64::from(pos) {
        Ok(pos)
    } else {
        Ok(neg)
    }
}

/// Mean of sentence scores, rounded half away from zero, clamped to `-5..=5`.
pub fn review_sentiment(sentences: &[i8]) -> Result<i8> {
    if sentences.is_empty() {
        return Err(contract("review sentiment needs at least one sentence"));
    }
    let sum: i64 = sentences.iter().map(|&s| i64::from(s)).sum();
    let mean = sum as f64 / sentences.len() as f64;
    Ok(libm::round(mean).clamp(-5.0, 5.0) as i8)
}

/// Splits tokens into sentences after runs of `.`, `!` or `?`.
/// Always yields at least one (possibly empty) sentence.
pub fn split_sentences<S: AsRef<str>>(tokens: &[S]) -> Vec<&[S]> {
    let is_end = |t: &S| SENTENCE_END.contains(&t.as_ref());
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < tokens.len() {
        if is_end(&tokens[i]) {
            while i < tokens.len() && is_end(&tokens[i]) {
                i += 1;
            }
            out.push(&tokens[start..i]);
            start = i;
        } else {
            i += 1;
        }
    }
    if start < tokens.len() {
        out.push(&tokens[start..]);
    }
    if out.is_empty() {
        out.push(tokens);
    }
    out
}

/// Review-level sentiment `s` of normalized tokens.
pub fn review_score<S: AsRef<str>>(tokens: &[S], lexicon: &SentimentLexicon) -> i8 {
    let scores: Vec<i8> = split_sentences(tokens)
        .into_iter()
        .map(|s| {
            let (p, n) = score_sentence(s, lexicon);
            sentence_sentiment(p, n).expect("score_sentence stays in range")
        })
        .collect();
    review_sentiment(&scores).expect("at least one sentence")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(entries: &[(&str, i8)]) -> SentimentLexicon {
        let mut l = SentimentLexicon::new();
        for (w, s) in entries {
            l.insert(w, *s).unwrap();
        }
        l
    }

    #[test]
    fn sentence_scores() {
        assert_eq!(score_sentence(&["great", "app"], &lex(&[("great", 3)])), (3, -1));
        assert_eq!(
            score_sentence(&["horrible", "and", "slow"], &lex(&[("horrible", -4), ("slow", -2)])),
            (1, -4)
        );
        assert_eq!(score_sentence(&["open", "the", "menu"], &lex(&[])), (1, -1));
    }

    #[test]
    fn negation_and_boosters() {
        let mut l = lex(&[("good", 3)]);
        l.insert_negation("not");
        l.insert_booster("very", 1);
        assert_eq!(score_sentence(&["not", "good"], &l), (1, -3));
        assert_eq!(score_sentence(&["very", "good"], &l), (4, -1));
        assert_eq!(score_sentence(&["not", "very", "good"], &l), (1, -4));
        assert_eq!(score_sentence(&["not", "the", "good"], &l), (3, -1));
    }

    #[test]
    fn dominance_rule() {
        assert_eq!(sentence_sentiment(3, -1), Ok(3));
        assert_eq!(sentence_sentiment(1, -4), Ok(-4));
        assert_eq!(sentence_sentiment(1, -1), Ok(0));
        assert_eq!(sentence_sentiment(3, -2), Ok(-2));
        assert!(sentence_sentiment(0, -1).is_err());
        assert!(sentence_sentiment(1, 0).is_err());
    }

    #[test]
    fn review_rounding() {
        assert_eq!(review_sentiment(&[3, -4]), Ok(-1));
        assert_eq!(review_sentiment(&[0, 0, 0]), Ok(0));
        assert_eq!(review_sentiment(&[2]), Ok(2));
        assert_eq!(review_sentiment(&[3, -2]), Ok(1));
        assert!(review_sentiment(&[]).is_err());
    }

    #[test]
    fn sentence_splitting() {
        let toks = ["good", "!", "!", "bad", ".", "meh"];
        let s = split_sentences(&toks);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], &["good", "!", "!"]);
        assert_eq!(split_sentences::<&str>(&[]).len(), 1);
    }

    #[test]
    fn parse_format() {
        let l = SentimentLexicon::parse("# c\nLoved\t4\nvery\tB+1\nnot\tNEG\n").unwrap();
        assert_eq!(l.strength("lov"), Some(4));
        assert!(matches!(
            SentimentLexicon::parse("bad\t0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(SentimentLexicon::parse("bad 3\n").is_err());
    }

    #[test]
    fn builtin_lexicon_loads() {
        let l = SentimentLexicon::builtin();
        assert!(l.len() >= 150);
        assert_eq!(review_score(&["great", "app", "!", "but", "slow", "."], &l), 1);
    }
}
