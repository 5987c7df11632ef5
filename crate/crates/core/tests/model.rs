mod common;

use common::{micro_config, random_examples};
use rrgen_core::adam::AdamState;
use rrgen_core::annotate::{KEYWORD_SYMBOLS, RATING_VALUES, SENTIMENT_VALUES};
use rrgen_core::model::{
    argmax, check_params, evaluate_loss, generate, init_params, loss_and_grads, train, Example, ModelConfig, Network,
    NoObserver, Toggles, TrainConfig,
};
use rrgen_core::{Error, Tape};

fn gru_count(d_in: usize, d_h: usize) -> usize {
    3 * (d_h * d_in + d_h * d_h + d_h)
}

/// Parameter count written out from the layer list, independent of the
/// library's own bookkeeping.
fn expected_count(c: &ModelConfig) -> usize {
    let (dw, dh, da, v) = (c.word_dim, c.hidden_dim, c.attr_dim, c.vocab_size);
    let t = c.toggles;
    let tables = [
        (t.category, c.categories),
        (t.length, c.length_buckets),
        (t.rating, RATING_VALUES),
        (t.sentiment, SENTIMENT_VALUES),
    ];
    let enabled = tables.iter().filter(|(on, _)| *on).count();
    let attrs: usize = tables.iter().filter(|(on, _)| *on).map(|(_, n)| n * da + da * da).sum();
    let keywords = if t.keywords {
        KEYWORD_SYMBOLS * da + da * da + dw * (da + dw)
    } else {
        0
    };
    let fuse = if enabled > 0 { dh * (dh + enabled * da) } else { 0 };
    v * dw
        + attrs
        + keywords
        + 2 * gru_count(dw, dh)
        + 2 * dh * dh
        + fuse
        + gru_count(dw + 2 * dh, dh)
        + dh * dh
        + 2 * dh * dh
        + dh
        + v * 3 * dh
}

#[test]
fn parameter_counts_match_layer_list() {
    let configs = [
        Toggles::ALL,
        Toggles::NONE,
        Toggles {
            rating: true,
            ..Toggles::NONE
        },
        Toggles {
            keywords: true,
            ..Toggles::NONE
        },
        Toggles {
            keywords: false,
            ..Toggles::ALL
        },
    ];
    for toggles in configs {
        let c = micro_config(toggles);
        let p = init_params(&c).unwrap();
        assert_eq!(p.num_scalars(), expected_count(&c), "{toggles:?}");
        assert_eq!(c.parameter_count(), expected_count(&c));
    }
    let full = ModelConfig::default();
    let plain = ModelConfig {
        toggles: Toggles::NONE,
        ..ModelConfig::default()
    };
    assert!(plain.parameter_count() < full.parameter_count());
}

#[test]
fn disabled_components_have_no_parameters() {
    let p = init_params(&micro_config(Toggles::NONE)).unwrap();
    for (name, _) in p.iter() {
        assert!(
            !name.starts_with("attr.") && !name.starts_with("keyword.") && name != "context.fuse",
            "{name}"
        );
    }
}

#[test]
fn no_gradient_reaches_disabled_tables() {
    let full = micro_config(Toggles::ALL);
    let params = init_params(&full).unwrap();
    let plain = micro_config(Toggles::NONE);
    let batch = random_examples(&full, 3, 5);
    let mut tape = Tape::with_params(&params);
    let net = Network::bind(&mut tape, &plain, &params).unwrap();
    let loss = net.batch_loss(&mut tape, &batch).unwrap();
    tape.backward(loss).unwrap();
    let grads = tape.into_param_grads();
    for id in params.ids() {
        let name = params.name(id);
        let disabled = name.starts_with("attr.") || name.starts_with("keyword.") || name == "context.fuse";
        if disabled {
            assert!(!grads.reached(id), "{name} received gradient");
        }
    }
    assert!(grads.reached(params.require("encoder.bridge").unwrap()));
}

#[test]
fn strict_parameter_check() {
    let c = micro_config(Toggles::ALL);
    let p = init_params(&c).unwrap();
    assert!(check_params(&c, &p).is_ok());
    let other = micro_config(Toggles::NONE);
    assert!(check_params(&other, &p).is_err());
    let wider = ModelConfig {
        hidden_dim: 9,
        ..c.clone()
    };
    assert!(check_params(&wider, &p).is_err());
}

#[test]
fn single_token_review_has_one_state() {
    let c = micro_config(Toggles::ALL);
    let p = init_params(&c).unwrap();
    let mut ex = random_examples(&c, 1, 1).remove(0);
    ex.source.truncate(1);
    ex.keywords.truncate(1);
    let mut tape = Tape::with_params(&p);
    let net = Network::bind(&mut tape, &c, &p).unwrap();
    let enc = net.encode(&mut tape, &ex).unwrap();
    assert_eq!(enc.states.len(), 1);
    assert_eq!(tape.shape(enc.states[0]), &[2 * c.hidden_dim]);
    assert_eq!(tape.shape(enc.context), &[c.hidden_dim]);
}

#[test]
fn empty_review_and_bad_attribute_are_rejected() {
    let c = micro_config(Toggles::ALL);
    let p = init_params(&c).unwrap();
    let mut ex = random_examples(&c, 1, 1).remove(0);
    let mut tape = Tape::with_params(&p);
    let net = Network::bind(&mut tape, &c, &p).unwrap();
    let mut empty = ex.clone();
    empty.source.clear();
    empty.keywords.clear();
    assert!(matches!(net.encode(&mut tape, &empty), Err(Error::Contract(_))));
    ex.rating = 6;
    assert!(matches!(net.embed_attributes(&mut tape, &ex), Err(Error::Index { .. })));
}

#[test]
fn attention_over_one_and_two_identical_states() {
    let c = micro_config(Toggles::NONE);
    let p = init_params(&c).unwrap();
    let mut tape = Tape::with_params(&p);
    let net = Network::bind(&mut tape, &c, &p).unwrap();
    let h: Vec<f64> = (0..2 * c.hidden_dim).map(|i| (i as f64 * 0.37).sin()).collect();
    let state = tape.constant(vec![c.hidden_dim], vec![0.2; c.hidden_dim]).unwrap();
    let h1 = tape.constant(vec![h.len()], h.clone()).unwrap();

    let (matrix, keys) = net.attention_memory(&mut tape, &[h1]).unwrap();
    let enc = rrgen_core::model::EncoderOutput {
        states: vec![h1],
        matrix,
        keys,
        raw_context: state,
        context: state,
    };
    let (a, alpha) = net.attention_step(&mut tape, state, &enc).unwrap();
    assert_eq!(tape.value(alpha), &[1.0]);
    assert_eq!(tape.value(a), &h[..]);

    let h2 = tape.constant(vec![h.len()], h.clone()).unwrap();
    let (matrix, keys) = net.attention_memory(&mut tape, &[h1, h2]).unwrap();
    let enc = rrgen_core::model::EncoderOutput {
        states: vec![h1, h2],
        matrix,
        keys,
        raw_context: state,
        context: state,
    };
    let (_, alpha) = net.attention_step(&mut tape, state, &enc).unwrap();
    assert_eq!(tape.value(alpha), &[0.5, 0.5]);
}

#[test]
fn identical_attributes_embed_identically() {
    let c = micro_config(Toggles::ALL);
    let mut p = init_params(&c).unwrap();
    let ex = random_examples(&c, 1, 3).remove(0);
    let mut other = random_examples(&c, 1, 4).remove(0);
    other.category = ex.category;
    other.length_bucket = ex.length_bucket;
    other.rating = ex.rating;
    other.sentiment = ex.sentiment;
    {
        let mut tape = Tape::with_params(&p);
        let net = Network::bind(&mut tape, &c, &p).unwrap();
        let a = net.embed_attributes(&mut tape, &ex).unwrap();
        let b = net.embed_attributes(&mut tape, &other).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(tape.value(*x), tape.value(*y));
        }
    }
    for name in [
        "attr.category.proj",
        "attr.length.proj",
        "attr.rating.proj",
        "attr.sentiment.proj",
    ] {
        let id = p.require(name).unwrap();
        p.get_mut(id).data_mut().fill(0.0);
    }
    let mut tape = Tape::with_params(&p);
    let net = Network::bind(&mut tape, &c, &p).unwrap();
    for v in net.embed_attributes(&mut tape, &ex).unwrap() {
        assert!(tape.value(v).iter().all(|&x| x == 0.0));
    }
}

#[test]
fn argmax_prefers_lowest_index() {
    assert_eq!(argmax(&[0.0; 7]), 0);
    assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
}

#[test]
fn generation_respects_length_cap_and_attention_shape() {
    for max_len in [1, 3, 12] {
        let c = ModelConfig {
            max_len,
            ..micro_config(Toggles::ALL)
        };
        let p = init_params(&c).unwrap();
        for ex in random_examples(&c, 5, 9) {
            let g = generate(&c, &p, &ex).unwrap();
            assert!(g.tokens.len() <= max_len);
            assert_eq!(g.attention.len(), g.tokens.len());
            assert_eq!(g.log_probs.len(), g.tokens.len());
            for row in &g.attention {
                assert_eq!(row.len(), ex.source.len());
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            assert!(g.log_probs.iter().all(|&l| l <= 0.0));
            assert_eq!(g, generate(&c, &p, &ex).unwrap());
        }
    }
}

#[test]
fn loss_decreases_over_ten_adam_steps() {
    let c = micro_config(Toggles::ALL);
    let mut p = init_params(&c).unwrap();
    let pair = random_examples(&c, 1, 21);
    let mut adam = AdamState::new(&p, 1e-2);
    let mut losses = Vec::new();
    for _ in 0..10 {
        losses.push(loss_and_grads(&c, &mut p, &pair).unwrap());
        adam.step(&mut p).unwrap();
    }
    losses.push(evaluate_loss(&c, &p, &pair).unwrap());
    for w in losses.windows(2) {
        assert!(w[1] < w[0], "{losses:?}");
    }
}

#[test]
fn single_batch_order_does_not_matter() {
    let c = micro_config(Toggles::ALL);
    let corpus = random_examples(&c, 6, 31);
    let mut reversed = corpus.clone();
    reversed.reverse();
    let cfg = TrainConfig {
        batch_size: 6,
        epochs: 3,
        learning_rate: 1e-2,
        shuffle: false,
        ..Default::default()
    };
    let mut a = init_params(&c).unwrap();
    let mut b = a.clone();
    let la = train(&c, &cfg, &mut a, &corpus, &[], &mut NoObserver).unwrap();
    let lb = train(&c, &cfg, &mut b, &reversed, &[], &mut NoObserver).unwrap();
    for (x, y) in la.batches.iter().zip(&lb.batches) {
        assert!((x.loss - y.loss).abs() < 1e-9);
    }
    for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
        for (u, v) in x.data().iter().zip(y.data()) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn seeded_training_is_reproducible() {
    let c = micro_config(Toggles::ALL);
    let corpus = random_examples(&c, 10, 41);
    let valid = random_examples(&c, 2, 42);
    let cfg = TrainConfig {
        batch_size: 3,
        epochs: 2,
        checkpoint_every: 3,
        seed: 5,
        ..Default::default()
    };
    let run = || {
        let mut p = init_params(&c).unwrap();
        let log = train(&c, &cfg, &mut p, &corpus, &valid, &mut NoObserver).unwrap();
        (p, log)
    };
    let (p1, l1) = run();
    let (p2, l2) = run();
    assert_eq!(l1, l2);
    assert_eq!(p1, p2);
    // 4 batches per epoch, 8 in total: saves at 3 and 6, then a final one at 8.
    assert_eq!(l1.batches.len(), 8);
    let steps: Vec<usize> = l1.checkpoints.iter().map(|c| c.step).collect();
    assert_eq!(steps, vec![3, 6, 8]);
    assert!(l1.checkpoints[0].is_best);
    assert!(l1.best.is_some());
}

#[test]
fn training_contract_errors() {
    let c = micro_config(Toggles::ALL);
    let mut p = init_params(&c).unwrap();
    let cfg = TrainConfig::default();
    assert!(matches!(
        train(&c, &cfg, &mut p, &[], &[], &mut NoObserver),
        Err(Error::Contract(_))
    ));
    let corpus: Vec<Example> = random_examples(&c, 4, 2);
    let id = p.require("output.proj").unwrap();
    p.get_mut(id).data_mut()[0] = f64::NAN;
    assert!(matches!(
        train(&c, &cfg, &mut p, &corpus, &[], &mut NoObserver),
        Err(Error::NonFiniteLoss { epoch: 0, batch: 0 })
    ));
}
