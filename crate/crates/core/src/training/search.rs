use log::info;
use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::{train, TrainConfig};
use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::model::{Informer, ModelConfig};
use crate::nn::SequenceModel;
use crate::rng::{derive_index, derive_seed, seeded};

/// Candidate values per tuned hyperparameter; each trial draws one value
/// from every list uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_encoder_layers: Vec<usize>,
    pub n_decoder_layers: Vec<usize>,
    pub n_heads: Vec<usize>,
    pub d_model: Vec<usize>,
    pub lr: Vec<f64>,
    pub dropout: Vec<f64>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            n_encoder_layers: vec![1, 2],
            n_decoder_layers: vec![1, 2],
            n_heads: vec![2, 3, 4],
            d_model: vec![16, 32],
            lr: vec![1e-4, 3e-4, 1e-3],
            dropout: vec![0.0, 0.06, 0.1],
        }
    }
}

impl SearchSpace {
    fn is_empty(&self) -> bool {
        self.n_encoder_layers.is_empty()
            || self.n_decoder_layers.is_empty()
            || self.n_heads.is_empty()
            || self.d_model.is_empty()
            || self.lr.is_empty()
            || self.dropout.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub best_val_loss: f64,
    pub n_params: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: Trial,
    /// Every trial in draw order.
    pub trials: Vec<Trial>,
}

/// Draw `n_trials` configurations around `base_model`/`base_train`, train
/// each for at most `budget_epochs`, and keep the lowest validation loss
/// (fewer parameters break ties).
pub fn random_search(
    space: &SearchSpace,
    base_model: &ModelConfig,
    base_train: &TrainConfig,
    split: &DatasetSplit,
    n_trials: usize,
    seed: u64,
    budget_epochs: usize,
) -> Result<SearchOutcome> {
    if space.is_empty() || n_trials == 0 {
        return Err(Error::invalid("random search needs a non-empty space and at least one trial"));
    }
    let mut rng = seeded(derive_seed(seed, "draws"));
    let mut trials = Vec::with_capacity(n_trials);
    for t in 0..n_trials {
        let pick = |v: &[usize], rng: &mut _| *v.choose(rng).expect("non-empty");
        let model = ModelConfig {
            n_encoder_layers: pick(&space.n_encoder_layers, &mut rng),
            n_decoder_layers: pick(&space.n_decoder_layers, &mut rng),
            n_heads: pick(&space.n_heads, &mut rng),
            d_model: pick(&space.d_model, &mut rng),
            dropout: *space.dropout.choose(&mut rng).expect("non-empty"),
            ..*base_model
        };
        let train_cfg = TrainConfig {
            lr: *space.lr.choose(&mut rng).expect("non-empty"),
            max_epochs: budget_epochs.min(base_train.max_epochs),
            seed: derive_index(seed, t as u64),
            ..base_train.clone()
        };
        let mut informer = Informer::new(model, derive_seed(train_cfg.seed, "init"))?;
        let history = train(&mut informer, split, &train_cfg)?;
        info!("trial {} val {:.6e} {model:?}", t + 1, history.best_val_loss);
        trials.push(Trial {
            model,
            train: train_cfg,
            best_val_loss: history.best_val_loss,
            n_params: informer.params().count(),
        });
    }
    let best = trials
        .iter()
        .min_by(|a, b| a.best_val_loss.total_cmp(&b.best_val_loss).then(a.n_params.cmp(&b.n_params)))
        .expect("at least one trial")
        .clone();
    Ok(SearchOutcome { best, trials })
}
