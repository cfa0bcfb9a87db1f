//! Parameter storage and per-pass context shared by the learned models.
//!
//! A model keeps its weights in a [`ParamSet`] of plain arrays. Each forward
//! pass turns the set into [`Leaves`] (fresh graph leaves, trainable or
//! constant), so gradients never outlive the pass that produced them.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::WindowSample;
use crate::rng::derive_index;
use crate::tensor::{Tensor, TensorError, TensorResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Named parameter arrays in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Param>", into = "Vec<Param>")]
pub struct ParamSet {
    params: Vec<Param>,
    index: HashMap<String, usize>,
}

impl From<Vec<Param>> for ParamSet {
    fn from(params: Vec<Param>) -> Self {
        let index = params.iter().enumerate().map(|(i, p)| (p.name.clone(), i)).collect();
        Self { params, index }
    }
}

impl From<ParamSet> for Vec<Param> {
    fn from(set: ParamSet) -> Self {
        set.params
    }
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) {
        let name = name.into();
        assert_eq!(shape.iter().product::<usize>(), data.len(), "{name}: shape/data mismatch");
        assert!(!self.index.contains_key(&name), "duplicate parameter {name}");
        self.index.insert(name.clone(), self.params.len());
        self.params.push(Param { name, shape, data });
    }

    /// Weight matrix drawn from `U(−1/√fan_in, 1/√fan_in)`, fan-in being the
    /// first dimension.
    pub fn push_uniform(&mut self, name: impl Into<String>, shape: Vec<usize>, rng: &mut impl Rng) {
        let bound = 1.0 / (shape[0] as f64).sqrt();
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        self.push(name, shape, data);
    }

    pub fn push_fill(&mut self, name: impl Into<String>, shape: Vec<usize>, value: f64) {
        let n = shape.iter().product();
        self.push(name, shape, vec![value; n]);
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.index.get(name).map(|&i| &self.params[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.index.get(name).map(|&i| &mut self.params[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Param> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.params.iter_mut()
    }

    /// Number of parameter tensors.
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.data.iter().all(|v| v.is_finite()))
    }

    /// Same names and shapes, in the same order.
    pub fn same_layout(&self, other: &ParamSet) -> bool {
        self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.name == b.name && a.shape == b.shape)
    }

    /// Graph leaves for one pass. Constant leaves skip graph recording.
    pub fn leaves(&self, trainable: bool) -> Leaves<'_> {
        let tensors = self
            .params
            .iter()
            .map(|p| {
                let t = if trainable {
                    Tensor::param(p.shape.clone(), p.data.clone())
                } else {
                    Tensor::constant(p.shape.clone(), p.data.clone())
                };
                t.expect("stored parameters are finite and well-shaped")
            })
            .collect();
        Leaves { set: self, tensors }
    }

    /// Leaves built from externally supplied tensors (gradient checks).
    pub fn leaves_from(&self, tensors: Vec<Tensor>) -> Leaves<'_> {
        assert_eq!(tensors.len(), self.params.len());
        Leaves { set: self, tensors }
    }
}

/// The leaves of one forward pass, addressable by parameter name.
pub struct Leaves<'a> {
    set: &'a ParamSet,
    tensors: Vec<Tensor>,
}

impl Leaves<'_> {
    pub fn get(&self, name: &str) -> TensorResult<&Tensor> {
        self.set
            .index
            .get(name)
            .map(|&i| &self.tensors[i])
            .ok_or_else(|| TensorError::Invalid { op: "parameter", detail: format!("no parameter named {name}") })
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    /// Accumulated gradients, zero where backward did not reach.
    pub fn grads(&self) -> Vec<Vec<f64>> {
        self.tensors.iter().map(|t| t.grad().unwrap_or_else(|| vec![0.0; t.numel()])).collect()
    }
}

/// `x·W + b` for a row-major batch `x`.
pub fn linear(x: &Tensor, w: &Tensor, b: &Tensor) -> TensorResult<Tensor> {
    x.matmul(w)?.add_row(b)
}

/// Row-normalised attention weights captured during a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTrace {
    pub site: String,
    pub head: usize,
    pub masked: bool,
    pub weights: Vec<Vec<f64>>,
}

/// Mode, randomness and optional instrumentation of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCtx {
    training: bool,
    seed: u64,
    draws: u64,
    pub trace: Option<Vec<AttentionTrace>>,
}

impl ForwardCtx {
    /// Training pass: dropout active, masks derived from `seed`.
    pub fn train(seed: u64) -> Self {
        Self { training: true, seed, draws: 0, trace: None }
    }

    /// Inference pass. `seed` only drives ProbSparse key sampling.
    pub fn eval(seed: u64) -> Self {
        Self { training: false, seed, draws: 0, trace: None }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn training(&self) -> bool {
        self.training
    }

    /// A fresh seed for the next stochastic op of this pass.
    pub fn next_seed(&mut self) -> u64 {
        self.draws += 1;
        derive_index(self.seed, self.draws)
    }

    pub fn record(&mut self, site: &str, head: usize, masked: bool, weights: impl FnOnce() -> Vec<Vec<f64>>) {
        if let Some(t) = self.trace.as_mut() {
            t.push(AttentionTrace { site: site.to_string(), head, masked, weights: weights() });
        }
    }
}

/// A learned forecaster trained by [`crate::training`].
pub trait SequenceModel {
    /// Short label used in reports.
    fn label(&self) -> &'static str;
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    /// Normalised `T_y` forecast for a normalised sample, recorded on `p`.
    fn forward(&self, p: &Leaves, sample: &WindowSample, ctx: &mut ForwardCtx) -> TensorResult<Tensor>;

    /// Inference-mode forecast without graph recording.
    fn predict(&self, sample: &WindowSample) -> TensorResult<Vec<f64>> {
        let leaves = self.params().leaves(false);
        let mut ctx = ForwardCtx::eval(0);
        Ok(self.forward(&leaves, sample, &mut ctx)?.data().to_vec())
    }
}
