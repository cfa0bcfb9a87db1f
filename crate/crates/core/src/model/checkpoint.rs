//! JSON checkpoint container.
//!
//! ```text
//! {
//!   "format": "informer-options-checkpoint",
//!   "version": 1,
//!   "model": {"kind": "informer", "config": {...}}   or {"kind": "lstm", ...},
//!   "normalizer": {"x_min": [...], "x_max": [...]},
//!   "params": [{"name": "...", "shape": [r, c], "data": [...]}, ...],
//!   "best_val_loss": 0.0123
//! }
//! ```
//!
//! Floats are written with shortest round-trip formatting, so a reloaded
//! model reproduces its forecasts bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Informer, ModelConfig};
use crate::baselines::{Lstm, LstmConfig};
use crate::data::{NormalizationParams, WindowSample};
use crate::error::{Error, Result};
use crate::nn::{ForwardCtx, Leaves, ParamSet, SequenceModel};
use crate::tensor::{Tensor, TensorResult};

pub const CHECKPOINT_FORMAT: &str = "informer-options-checkpoint";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "lowercase")]
pub enum ModelSpec {
    Informer(ModelConfig),
    Lstm(LstmConfig),
}

/// Either learned model behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnedModel {
    Informer(Informer),
    Lstm(Lstm),
}

impl LearnedModel {
    pub fn spec(&self) -> ModelSpec {
        match self {
            Self::Informer(m) => ModelSpec::Informer(m.config),
            Self::Lstm(m) => ModelSpec::Lstm(m.config),
        }
    }

    fn inner(&self) -> &dyn SequenceModel {
        match self {
            Self::Informer(m) => m,
            Self::Lstm(m) => m,
        }
    }
}

impl SequenceModel for LearnedModel {
    fn label(&self) -> &'static str {
        self.inner().label()
    }

    fn params(&self) -> &ParamSet {
        self.inner().params()
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        match self {
            Self::Informer(m) => &mut m.params,
            Self::Lstm(m) => &mut m.params,
        }
    }

    fn forward(&self, p: &Leaves, sample: &WindowSample, ctx: &mut ForwardCtx) -> TensorResult<Tensor> {
        self.inner().forward(p, sample, ctx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub model: ModelSpec,
    pub normalizer: NormalizationParams,
    pub params: ParamSet,
    pub best_val_loss: Option<f64>,
}

impl Checkpoint {
    pub fn new(model: &LearnedModel, normalizer: NormalizationParams, best_val_loss: Option<f64>) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: 1,
            model: model.spec(),
            normalizer,
            params: model.params().clone(),
            best_val_loss,
        }
    }

    /// Rebuild the model, checking the stored layout against a fresh one.
    pub fn model(&self) -> Result<LearnedModel> {
        let fresh = match self.model {
            ModelSpec::Informer(cfg) => LearnedModel::Informer(Informer::new(cfg, 0)?),
            ModelSpec::Lstm(cfg) => LearnedModel::Lstm(crate::baselines::lstm_forecast_model(cfg, 0)),
        };
        if !fresh.params().same_layout(&self.params) {
            return Err(Error::Checkpoint("parameter layout does not match the stored configuration".into()));
        }
        if !self.params.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter values".into()));
        }
        let mut model = fresh;
        *model.params_mut() = self.params.clone();
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: Self = serde_json::from_str(&text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != 1 {
            return Err(Error::Checkpoint(format!(
                "{}: unsupported format {} v{}",
                path.display(),
                ck.format,
                ck.version
            )));
        }
        ck.normalizer.validate()?;
        Ok(ck)
    }
}
