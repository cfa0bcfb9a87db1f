use serde::{Deserialize, Serialize};

use crate::data::N_FEATURES;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AttentionKind {
    #[default]
    Full,
    ProbSparse,
}

impl std::str::FromStr for AttentionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "probsparse" => Ok(Self::ProbSparse),
            other => Err(Error::invalid(format!("unknown attention kind `{other}` (full|probsparse)"))),
        }
    }
}

impl std::fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::ProbSparse => "probsparse",
        })
    }
}

/// Architecture of the encoder–decoder forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub t_x: usize,
    pub t_y: usize,
    pub t_label: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_encoder_layers: usize,
    pub n_decoder_layers: usize,
    pub d_ff: usize,
    pub dropout: f64,
    pub attention_kind: AttentionKind,
    pub factor: usize,
    pub n_features: usize,
    pub distilling: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            t_x: 30,
            t_y: 30,
            t_label: 5,
            d_model: 32,
            n_heads: 3,
            n_encoder_layers: 1,
            n_decoder_layers: 2,
            d_ff: 8,
            dropout: 0.06,
            attention_kind: AttentionKind::Full,
            factor: 3,
            n_features: N_FEATURES,
            distilling: true,
        }
    }
}

impl ModelConfig {
    /// Per-head width; heads need not tile `d_model` exactly.
    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Encoder output length after distilling.
    pub fn encoder_len(&self) -> usize {
        if self.distilling {
            (0..self.n_encoder_layers).fold(self.t_x, |l, _| l.div_ceil(2))
        } else {
            self.t_x
        }
    }

    pub fn decoder_len(&self) -> usize {
        self.t_label + self.t_y
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.t_x,
            self.t_y,
            self.d_model,
            self.n_heads,
            self.n_encoder_layers,
            self.n_decoder_layers,
            self.d_ff,
            self.factor,
            self.n_features,
        ];
        if dims.contains(&0) {
            return Err(Error::invalid(format!("model dimensions must be positive: {self:?}")));
        }
        if self.n_heads > self.d_model {
            return Err(Error::invalid("n_heads may not exceed d_model"));
        }
        if self.t_label > self.t_x {
            return Err(Error::invalid("t_label may not exceed t_x"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!("dropout must lie in [0, 1), got {}", self.dropout)));
        }
        Ok(())
    }
}
