//! The response generation network: configuration, forward pass, training
//! and greedy decoding.

pub mod config;
pub mod network;
pub mod train;

pub use config::{ModelConfig, Toggles};
pub use network::{
    argmax, check_params, generate, init_params, DecodeStep, EncoderOutput, Example, GenerationResult, Network,
    ATTRIBUTES,
};
pub use train::{
    evaluate_loss, loss_and_grads, train, validation_bleu, BatchRecord, CheckpointEvent, NoObserver, TrainConfig,
    TrainLog, TrainObserver,
};
