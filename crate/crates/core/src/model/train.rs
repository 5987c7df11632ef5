//! Minibatch Adam training with periodic validation and checkpoint hooks.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::AdamState;
use crate::error::{contract, Error, Result};
use crate::metrics::corpus_bleu_owned;
use crate::model::config::ModelConfig;
use crate::model::network::{generate, Example, Network};
use crate::tape::Tape;
use crate::tensor::ParamSet;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Save and validate every this many batches.
    pub checkpoint_every: usize,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    /// Keep the corpus order instead of shuffling.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            learning_rate: 1e-3,
            epochs: 2,
            checkpoint_every: 200,
            seed: 0,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchRecord {
    pub epoch: usize,
    pub batch: usize,
    /// Global batch counter, starting at 1.
    pub step: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointEvent {
    pub step: usize,
    pub epoch: usize,
    /// Validation corpus BLEU-4, or `None` without a validation set.
    pub valid_bleu: Option<f64>,
    /// Whether this checkpoint is the best so far.
    pub is_best: bool,
}

/// Receives per-batch losses and checkpoint parameters during training.
pub trait TrainObserver {
    fn on_batch(&mut self, _record: &BatchRecord) {}

    /// Called at each save point with the current parameters.
    fn on_checkpoint(&mut self, _event: &CheckpointEvent, _params: &ParamSet) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl TrainObserver for NoObserver {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub batches: Vec<BatchRecord>,
    pub checkpoints: Vec<CheckpointEvent>,
    /// Parameters of the best checkpoint, if any save point was reached.
    pub best: Option<ParamSet>,
}

impl TrainLog {
    /// Mean loss over the batches of `epoch`.
    pub fn epoch_loss(&self, epoch: usize) -> Option<f64> {
        let losses: Vec<f64> = self
            .batches
            .iter()
            .filter(|b| b.epoch == epoch)
            .map(|b| b.loss)
            .collect();
        (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64)
    }
}

/// Computes the batch loss and leaves its gradients in `params`.
pub fn loss_and_grads(config: &ModelConfig, params: &mut ParamSet, batch: &[Example]) -> Result<f64> {
    let (loss, grads) = {
        let mut tape = Tape::with_params(params);
        let net = Network::bind(&mut tape, config, params)?;
        let loss = net.batch_loss(&mut tape, batch)?;
        let value = tape.scalar(loss);
        if !value.is_finite() {
            return Ok(value);
        }
        tape.backward(loss)?;
        (value, tape.into_param_grads())
    };
    params.zero_grads();
    params.accumulate(&grads)?;
    Ok(loss)
}

/// Teacher-forced loss without gradients.
pub fn evaluate_loss(config: &ModelConfig, params: &ParamSet, batch: &[Example]) -> Result<f64> {
    let mut tape = Tape::with_params(params);
    let net = Network::bind(&mut tape, config, params)?;
    let loss = net.batch_loss(&mut tape, batch)?;
    Ok(tape.scalar(loss))
}

/// Greedy-decodes `examples` and scores them against their targets.
pub fn validation_bleu(config: &ModelConfig, params: &ParamSet, examples: &[Example]) -> Result<f64> {
    let mut hyps = Vec::with_capacity(examples.len());
    let mut refs = Vec::with_capacity(examples.len());
    for ex in examples {
        hyps.push(generate(config, params, ex)?.tokens);
        refs.push(ex.target.clone());
    }
    Ok(corpus_bleu_owned(&hyps, &refs)?.bleu4)
}

/// Trains `params` in place.
///
/// Each epoch shuffles the corpus (seeded by `train.seed` and the epoch),
/// then runs one Adam step per batch. Every `checkpoint_every` batches, and
/// after the final batch, the model is validated and the observer is given
/// the parameters. With no validation examples every save point counts as
/// the best.
pub fn train(
    config: &ModelConfig,
    train: &TrainConfig,
    params: &mut ParamSet,
    corpus: &[Example],
    valid: &[Example],
    observer: &mut dyn TrainObserver,
) -> Result<TrainLog> {
    if corpus.is_empty() {
        return Err(contract("training corpus is empty"));
    }
    if train.batch_size == 0 || train.checkpoint_every == 0 {
        return Err(contract("batch_size and checkpoint_every must be at least 1"));
    }
    config.validate()?;
    let mut adam = AdamState::new(params, train.learning_rate);
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut best_bleu = f64::NEG_INFINITY;
    let mut step = 0;
    let mut last_saved = 0;
    let mut batch_buf = Vec::with_capacity(train.batch_size);
    for epoch in 0..train.epochs {
        if train.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
            rng.set_stream(epoch as u64);
            order.shuffle(&mut rng);
        }
        for (batch, chunk) in order.chunks(train.batch_size).enumerate() {
            batch_buf.clear();
            batch_buf.extend(chunk.iter().map(|&i| corpus[i].clone()));
            let loss = loss_and_grads(config, params, &batch_buf)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            adam.step(params)?;
            step += 1;
            let record = BatchRecord {
                epoch,
                batch,
                step,
                loss,
            };
            log::debug!("epoch {epoch} batch {batch} loss {loss:.6}");
            observer.on_batch(&record);
            log.batches.push(record);
            if step % train.checkpoint_every == 0 {
                save_point(config, params, valid, step, epoch, &mut best_bleu, &mut log, observer)?;
                last_saved = step;
            }
        }
    }
    if step > last_saved {
        let epoch = train.epochs.saturating_sub(1);
        save_point(config, params, valid, step, epoch, &mut best_bleu, &mut log, observer)?;
    }
    Ok(log)
}

#[allow(clippy::too_many_arguments)]
fn save_point(
    config: &ModelConfig,
    params: &ParamSet,
    valid: &[Example],
    step: usize,
    epoch: usize,
    best_bleu: &mut f64,
    log: &mut TrainLog,
    observer: &mut dyn TrainObserver,
) -> Result<()> {
    let valid_bleu = if valid.is_empty() {
        None
    } else {
        Some(validation_bleu(config, params, valid)?)
    };
    let is_best = match valid_bleu {
        None => true,
        Some(b) if b > *best_bleu => {
            *best_bleu = b;
            true
        }
        Some(_) => false,
    };
    let event = CheckpointEvent {
        step,
        epoch,
        valid_bleu,
        is_best,
    };
    log::info!("checkpoint at step {step}: valid BLEU {valid_bleu:?}, best {is_best}");
    observer.on_checkpoint(&event, params)?;
    if is_best {
        log.best = Some(params.clone());
    }
    log.checkpoints.push(event);
    Ok(())
}
