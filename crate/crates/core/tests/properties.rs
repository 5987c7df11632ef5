use proptest::prelude::*;
use rrgen_core::annotate::{review_score, KeywordDictionary, SentimentLexicon};
use rrgen_core::postprocess::{substitute, FilterDecision, PlaceholderDictionary};
use rrgen_core::tape::softmax_slice;
use rrgen_core::text::normalize::{EMAIL_PATTERN, URL_PATTERN};
use rrgen_core::text::{is_placeholder, split_dataset, split_indices, Normalizer, ReviewRecord, Vocabulary, UNK_ID};

fn review_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[A-Za-z]{1,10}",
        "[0-9]{1,6}",
        "[a-z]{2,6}@[a-z]{2,6}\\.(com|org)",
        "(https?://|www\\.)[a-z]{2,8}\\.[a-z]{2,3}(/[a-z0-9]{1,5})?",
        "[.,!?'()-]",
        "(Sooo+|Greeeat|ADS|ads|crashes|updated|loving)",
        "(Acme Notes|John)",
    ];
    prop::collection::vec(piece, 0..12).prop_map(|v| v.join(" "))
}

fn normalizer() -> Normalizer {
    Normalizer::new(&["Acme Notes"], &["John"])
}

proptest! {
    #[test]
    fn normalization_is_idempotent(text in review_text()) {
        let n = normalizer();
        let once = n.normalize(&text);
        prop_assert_eq!(n.normalize(&once.join(" ")), once);
    }

    #[test]
    fn no_digits_emails_or_urls_survive(text in review_text()) {
        let url = regex::Regex::new(URL_PATTERN).unwrap();
        let email = regex::Regex::new(EMAIL_PATTERN).unwrap();
        let tokens = normalizer().normalize(&text);
        for t in &tokens {
            prop_assert!(is_placeholder(t) || !t.chars().any(|c| c.is_ascii_digit()), "{}", t);
        }
        let joined = tokens.join(" ");
        prop_assert!(!url.is_match(&joined), "{}", joined);
        prop_assert!(!email.is_match(&joined), "{}", joined);
    }

    #[test]
    fn vocabulary_round_trips(words in prop::collection::vec("[a-z]{1,4}", 1..40), probe in "[a-z]{1,4}") {
        let record = ReviewRecord { review_tokens: words.clone(), ..Default::default() };
        let vocab = Vocabulary::build(&[record], 15).unwrap();
        for w in &words {
            let id = vocab.encode(w);
            if vocab.contains(w) {
                prop_assert_eq!(vocab.decode(id).unwrap(), w.as_str());
            } else {
                prop_assert_eq!(id, UNK_ID);
            }
        }
        prop_assert_eq!(vocab.contains(&probe), vocab.encode(&probe) != UNK_ID);
    }

    #[test]
    fn split_is_a_partition(n in 10usize..300, seed in any::<u64>()) {
        let idx = split_indices(n, seed).unwrap();
        let mut all: Vec<usize> = idx.train.iter().chain(&idx.valid).chain(&idx.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(idx.train.len(), n * 8 / 10);
        prop_assert_eq!(idx.valid.len(), n / 10);
        let items: Vec<u32> = (0..n as u32).map(|i| i % 7).collect();
        let (a, b, c) = split_dataset(&items, seed).unwrap();
        let mut joined: Vec<u32> = a.into_iter().chain(b).chain(c).collect();
        let mut expected = items.clone();
        joined.sort_unstable();
        expected.sort_unstable();
        prop_assert_eq!(joined, expected);
    }

    #[test]
    fn softmax_is_a_distribution(xs in prop::collection::vec(-50.0f64..50.0, 1..30)) {
        let p = softmax_slice(&xs);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn tagging_preserves_length(tokens in prop::collection::vec("[a-z]{1,8}|screen|ad|price", 0..30)) {
        let d = KeywordDictionary::builtin();
        let tags = d.tag(&tokens);
        prop_assert_eq!(tags.len(), tokens.len());
        for (t, k) in tokens.iter().zip(&tags) {
            prop_assert_eq!(*k, d.tag(std::slice::from_ref(t))[0]);
        }
    }

    #[test]
    fn sentiment_ignores_sentence_order(
        sentences in prop::collection::vec(
            prop::collection::vec("good|bad|great|terrible|slow|love|app|not|very|it", 1..6), 1..5),
        rotate in 0usize..5,
    ) {
        let lex = SentimentLexicon::builtin();
        let flatten = |ss: &[Vec<String>]| -> Vec<String> {
            ss.iter().flat_map(|s| s.iter().cloned().chain(std::iter::once(".".to_string()))).collect()
        };
        let mut rotated = sentences.clone();
        let k = rotate % rotated.len();
        rotated.rotate_left(k);
        prop_assert_eq!(review_score(&flatten(&sentences), &lex), review_score(&flatten(&rotated), &lex));
    }

    #[test]
    fn filter_is_monotone_in_overlap(a in 0.0f64..=1.0, b in 0.0f64..=1.0, len in 0usize..80, rating in 1u8..=5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let low = FilterDecision::decide(lo, len, rating);
        let high = FilterDecision::decide(hi, len, rating);
        prop_assert!(!(high.requires_check && !low.requires_check));
    }

    #[test]
    fn substitution_only_touches_placeholders(
        tokens in prop::collection::vec("[a-z]{1,6}|<url>|<email>|<app>|<digit>", 0..15),
    ) {
        let mut dict = PlaceholderDictionary::default();
        dict.insert("x", rrgen_core::text::Placeholder::Url, "https://example.org");
        let out = substitute(&tokens, "x", &dict);
        let words: Vec<&str> = out.text.split(' ').filter(|w| !w.is_empty()).collect();
        prop_assert_eq!(words.len(), tokens.len());
        for (w, t) in words.iter().zip(&tokens) {
            if t == "<url>" {
                prop_assert_eq!(*w, "https://example.org");
            } else {
                prop_assert_eq!(*w, t.as_str());
            }
        }
    }
}

#[test]
fn split_is_seed_deterministic() {
    let a = split_indices(57, 3).unwrap();
    assert_eq!(a, split_indices(57, 3).unwrap());
    assert_ne!(a, split_indices(57, 4).unwrap());
}
