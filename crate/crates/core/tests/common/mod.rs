#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrgen_core::annotate::KeywordSymbol;
use rrgen_core::model::{Example, ModelConfig, Toggles};
use rrgen_core::{ParamGrads, ParamSet, Result};

pub const STEP: f64 = 1e-5;

pub fn rel_err(a: f64, f: f64) -> f64 {
    (a - f).abs() / a.abs().max(f.abs()).max(1e-8)
}

pub fn micro_config(toggles: Toggles) -> ModelConfig {
    ModelConfig {
        word_dim: 8,
        hidden_dim: 8,
        attr_dim: 4,
        vocab_size: 20,
        max_len: 12,
        categories: 3,
        length_buckets: 3,
        toggles,
        seed: 7,
    }
}

/// Random examples with sources of 1..=5 tokens and targets of 1..=4 tokens.
pub fn random_examples(config: &ModelConfig, n: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let tx = rng.gen_range(1..=5);
            let ty = rng.gen_range(1..=4);
            let v = config.vocab_size as u32;
            Example {
                source: (0..tx).map(|_| rng.gen_range(3..v)).collect(),
                keywords: (0..tx)
                    .map(|_| KeywordSymbol::from_index(rng.gen_range(0..13)).unwrap())
                    .collect(),
                category: rng.gen_range(1..=config.categories),
                length_bucket: rng.gen_range(1..=config.length_buckets),
                rating: rng.gen_range(1..=5),
                sentiment: rng.gen_range(1..=11),
                target: (0..ty).map(|_| rng.gen_range(4..v)).collect(),
            }
        })
        .collect()
}

/// One scalar's analytic and central-difference derivative.
#[derive(Debug, Clone)]
pub struct GradSample {
    pub label: String,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradSample {
    pub fn rel_err(&self) -> f64 {
        rel_err(self.analytic, self.numeric)
    }
}

/// Analytic gradients and central differences for every scalar of every parameter.
pub fn gradient_samples(
    params: &ParamSet,
    analytic: impl Fn(&ParamSet) -> Result<ParamGrads>,
    loss: impl Fn(&ParamSet) -> Result<f64>,
) -> Vec<GradSample> {
    let grads = analytic(params).unwrap();
    let mut out = Vec::new();
    let mut probe = params.clone();
    for id in params.ids() {
        for i in 0..params.get(id).len() {
            let orig = params.get(id).data()[i];
            probe.get_mut(id).data_mut()[i] = orig + STEP;
            let up = loss(&probe).unwrap();
            probe.get_mut(id).data_mut()[i] = orig - STEP;
            let down = loss(&probe).unwrap();
            probe.get_mut(id).data_mut()[i] = orig;
            out.push(GradSample {
                label: format!("{}[{}]", params.name(id), i),
                analytic: grads.get(id).map_or(0.0, |g| g[i]),
                numeric: (up - down) / (2.0 * STEP),
            });
        }
    }
    out
}

/// Largest relative error and where it occurs. Components whose absolute
/// discrepancy is below `abs_floor` are skipped.
pub fn worst(samples: &[GradSample], abs_floor: f64) -> (f64, String) {
    samples
        .iter()
        .filter(|s| (s.analytic - s.numeric).abs() >= abs_floor)
        .map(|s| {
            (
                s.rel_err(),
                format!("{} analytic {:e} numeric {:e}", s.label, s.analytic, s.numeric),
            )
        })
        .fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a })
}

pub fn check_gradients(
    params: &ParamSet,
    analytic: impl Fn(&ParamSet) -> Result<ParamGrads>,
    loss: impl Fn(&ParamSet) -> Result<f64>,
) -> (f64, String) {
    worst(&gradient_samples(params, analytic, loss), 0.0)
}

/// Replaces every parameter value with a uniform draw from `[-1, 1)`.
pub fn randomize(params: &mut ParamSet, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for id in params.ids().collect::<Vec<_>>() {
        for x in params.get_mut(id).data_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
}
