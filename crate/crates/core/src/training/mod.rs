//! Loss, optimiser, training loop and random hyperparameter search.
//!
//! Training runs one graph per sample and lets the leaves accumulate
//! gradients across a mini-batch. Samples inside a batch are processed in
//! ascending index order and every dropout mask is keyed on
//! `(epoch, sample index)`, so results do not depend on how the shuffle
//! arranged a batch internally.

mod search;

pub use search::{random_search, SearchOutcome, SearchSpace, Trial};

use log::info;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{DatasetSplit, WindowSample};
use crate::error::{Error, Result};
use crate::nn::{ForwardCtx, ParamSet, SequenceModel};
use crate::rng::{derive_index, seeded, SubSeeds};
use crate::tensor::{Tensor, TensorError, TensorResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub lr: f64,
    pub patience: usize,
    pub seed: u64,
    /// Per-horizon loss weights; `None` is uniform.
    pub loss_weights: Option<Vec<f64>>,
    /// Halve the learning rate after this many epochs without improvement.
    pub lr_halving_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_epochs: 300,
            lr: 1e-4,
            patience: 30,
            seed: 0,
            loss_weights: None,
            lr_halving_patience: None,
        }
    }
}

/// Minimum validation improvement that resets patience.
pub const MIN_IMPROVEMENT: f64 = 1e-8;

impl TrainConfig {
    pub fn weights(&self, horizon: usize) -> Result<Vec<f64>> {
        let w = self.loss_weights.clone().unwrap_or_else(|| vec![1.0; horizon]);
        check_weights(&w, horizon)?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.patience == 0 || !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("batch_size and patience must be ≥ 1 and lr > 0: {self:?}")));
        }
        Ok(())
    }
}

fn check_weights(w: &[f64], horizon: usize) -> Result<()> {
    if w.len() != horizon {
        return Err(Error::invalid(format!("{} loss weights for horizon {horizon}", w.len())));
    }
    if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
        return Err(Error::invalid("loss weights must be non-negative with a positive sum"));
    }
    Ok(())
}

/// `Σ w_h (ŷ_h − y_h)² / Σ w_h`.
pub fn weighted_mse(pred: &Tensor, target: &[f64], weights: &[f64]) -> TensorResult<Tensor> {
    if pred.numel() != target.len() || weights.len() != target.len() {
        return Err(TensorError::Shape {
            op: "weighted_mse",
            detail: format!("pred {}, target {}, weights {}", pred.numel(), target.len(), weights.len()),
        });
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(TensorError::Invalid { op: "weighted_mse", detail: "weights sum to zero".into() });
    }
    let y = Tensor::constant(pred.shape().to_vec(), target.to_vec())?;
    let err = pred.sub(&y)?;
    let w: Vec<f64> = weights.iter().map(|v| v / total).collect();
    err.mul(&err)?.weighted_sum(&w)
}

/// Bias-corrected Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| vec![0.0; p.data.len()]).collect();
        Self { m: zeros.clone(), v: zeros, t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

pub fn adam_step(params: &mut ParamSet, grads: &[Vec<f64>], state: &mut AdamState, lr: f64) -> Result<()> {
    let shapes_ok = grads.len() == params.len()
        && state.m.len() == params.len()
        && params.iter().zip(grads).zip(&state.m).all(|((p, g), m)| p.data.len() == g.len() && m.len() == g.len());
    if !shapes_ok {
        return Err(Error::invalid("adam_step: gradient/state shapes do not match the parameters"));
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for i in 0..g.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p.data[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// Zero-based index of the epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stop_reason: StopReason,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    /// One `epoch train val` line per epoch.
    pub fn to_log(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tval_loss\n");
        for (e, (t, v)) in self.train_loss.iter().zip(&self.val_loss).enumerate() {
            out.push_str(&format!("{}\t{t}\t{v}\n", e + 1));
        }
        out
    }
}

fn training_error(sample: &WindowSample, e: TensorError) -> Error {
    match e {
        TensorError::NonFinite { op } => {
            Error::Training(format!("non-finite value in `{op}` on sample {}", sample.id()))
        }
        other => Error::Training(format!("sample {}: {other}", sample.id())),
    }
}

/// Mean eval-mode loss over `samples`.
pub fn evaluate_loss<M: SequenceModel + ?Sized>(model: &M, samples: &[WindowSample], weights: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot evaluate the loss of an empty set"));
    }
    let leaves = model.params().leaves(false);
    let mut total = 0.0;
    for s in samples {
        let mut ctx = ForwardCtx::eval(0);
        let pred = model.forward(&leaves, s, &mut ctx).map_err(|e| training_error(s, e))?;
        total += weighted_mse(&pred, &s.target, weights).map_err(|e| training_error(s, e))?.data()[0];
    }
    Ok(total / samples.len() as f64)
}

/// One pass over `order` in mini-batches; returns the mean training loss.
#[allow(clippy::too_many_arguments)]
fn run_epoch<M: SequenceModel + ?Sized>(
    model: &mut M,
    train: &[WindowSample],
    order: &[usize],
    cfg: &TrainConfig,
    weights: &[f64],
    adam: &mut AdamState,
    lr: f64,
    dropout_seed: u64,
) -> Result<f64> {
    let mut total = 0.0;
    for chunk in order.chunks(cfg.batch_size) {
        let mut batch = chunk.to_vec();
        batch.sort_unstable();
        let grads = {
            let leaves = model.params().leaves(true);
            let scale = 1.0 / batch.len() as f64;
            for &i in &batch {
                let s = &train[i];
                let mut ctx = ForwardCtx::train(derive_index(dropout_seed, i as u64));
                let loss = model
                    .forward(&leaves, s, &mut ctx)
                    .and_then(|p| weighted_mse(&p, &s.target, weights))
                    .map_err(|e| training_error(s, e))?;
                total += loss.data()[0];
                loss.scale(scale)?.backward()?;
            }
            leaves.grads()
        };
        adam_step(model.params_mut(), &grads, adam, lr)?;
        if !model.params().is_finite() {
            return Err(Error::Training("parameters became non-finite".into()));
        }
    }
    Ok(total / order.len() as f64)
}

/// Train `model` in place and leave it holding the parameters of the best
/// validation epoch.
pub fn train<M: SequenceModel + ?Sized>(
    model: &mut M,
    split: &DatasetSplit,
    cfg: &TrainConfig,
) -> Result<TrainHistory> {
    cfg.validate()?;
    if split.train.is_empty() || split.validation.is_empty() {
        return Err(Error::invalid("training needs non-empty train and validation sets"));
    }
    let horizon = split.train[0].horizon();
    let weights = cfg.weights(horizon)?;
    let seeds = SubSeeds::from_root(cfg.seed);
    let mut rng = seeded(seeds.shuffle);
    let mut order: Vec<usize> = (0..split.train.len()).collect();
    let mut adam = AdamState::new(model.params());
    let mut lr = cfg.lr;

    let mut history = TrainHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        best_val_loss: f64::INFINITY,
        stop_reason: StopReason::MaxEpochs,
    };
    let mut best_params = model.params().clone();
    let mut stale = 0;
    let mut stale_lr = 0;
    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let dropout_seed = derive_index(seeds.dropout, epoch as u64);
        let train_loss = run_epoch(model, &split.train, &order, cfg, &weights, &mut adam, lr, dropout_seed)?;
        let val_loss = evaluate_loss(model, &split.validation, &weights)?;
        info!("epoch {} train {train_loss:.6e} val {val_loss:.6e}", epoch + 1);
        history.train_loss.push(train_loss);
        history.val_loss.push(val_loss);
        if val_loss < history.best_val_loss - MIN_IMPROVEMENT {
            history.best_val_loss = val_loss;
            history.best_epoch = epoch;
            best_params = model.params().clone();
            stale = 0;
            stale_lr = 0;
        } else {
            stale += 1;
            stale_lr += 1;
            if stale >= cfg.patience {
                history.stop_reason = StopReason::Patience;
                break;
            }
            if cfg.lr_halving_patience.is_some_and(|p| stale_lr >= p) {
                lr *= 0.5;
                stale_lr = 0;
            }
        }
    }
    *model.params_mut() = best_params;
    Ok(history)
}
