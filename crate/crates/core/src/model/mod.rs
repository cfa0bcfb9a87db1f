//! The encoder–decoder forecaster.
//!
//! The encoder embeds the `T_x × F` window, applies self-attention and a
//! position-wise feed-forward block per layer (each wrapped in a residual
//! connection and layer norm) and halves the sequence by max pooling after
//! every layer when distilling is on. The decoder embeds the last `T_label`
//! known prices followed by `T_y` zero placeholders, runs causal
//! self-attention, cross-attention over the encoder output and a
//! feed-forward block per layer, and projects every position to one value;
//! the last `T_y` positions are the forecast, produced in one pass.
//!
//! Rows are time steps throughout: a `L × d` activation times a `d × d'`
//! weight gives `L × d'`.

mod attention;
mod checkpoint;
mod config;
mod informer;

pub use attention::{
    active_queries, attention_weights, causal_mask, log_budget, probsparse_attention, probsparse_weights,
    scaled_dot_attention, select_queries, sparsity_scores,
};
pub use checkpoint::{Checkpoint, LearnedModel, ModelSpec, CHECKPOINT_FORMAT};
pub use config::{AttentionKind, ModelConfig};
pub use informer::{
    build_decoder_input, decode, decode_positions, distill, embed, encode, feed_forward, forward_graph, init_params,
    multi_head_attention, positional_encoding, DecoderInput, Prediction,
};

use crate::data::{NormalizationParams, WindowSample};
use crate::error::Result;
use crate::nn::{ForwardCtx, Leaves, ParamSet, SequenceModel};
use crate::tensor::{Tensor, TensorResult};

/// Parameters of the default configuration, frozen as a regression value.
pub const DEFAULT_PARAM_COUNT: usize = 21_689;

#[derive(Debug, Clone, PartialEq)]
pub struct Informer {
    pub config: ModelConfig,
    pub params: ParamSet,
}

impl Informer {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, params: init_params(&config, seed) })
    }

    /// Inference forecast in normalised and price units.
    pub fn forward(&self, sample: &WindowSample, norm: &NormalizationParams) -> TensorResult<Prediction> {
        Ok(Prediction::new(self.predict(sample)?, norm))
    }
}

impl SequenceModel for Informer {
    fn label(&self) -> &'static str {
        "Informer"
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward(&self, p: &Leaves, sample: &WindowSample, ctx: &mut ForwardCtx) -> TensorResult<Tensor> {
        forward_graph(p, sample, &self.config, ctx)
    }
}
