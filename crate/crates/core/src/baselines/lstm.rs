use serde::{Deserialize, Serialize};

use crate::data::{WindowSample, N_FEATURES};
use crate::nn::{linear, ForwardCtx, Leaves, ParamSet, SequenceModel};
use crate::rng::seeded;
use crate::tensor::{Tensor, TensorError, TensorResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub hidden: usize,
    pub n_features: usize,
    pub t_y: usize,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self { hidden: 32, n_features: N_FEATURES, t_y: 30 }
    }
}

/// Single-layer LSTM read over the encoder span, with a linear head from
/// the final hidden state to all `T_y` outputs.
///
/// Gates are packed as `[input, forget, candidate, output]` in `lstm.wx`
/// (`F × 4H`), `lstm.wh` (`H × 4H`) and `lstm.b` (`4H`).
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    pub config: LstmConfig,
    pub params: ParamSet,
}

pub fn lstm_forecast_model(config: LstmConfig, seed: u64) -> Lstm {
    let (f, h) = (config.n_features, config.hidden);
    let mut rng = seeded(seed);
    let mut params = ParamSet::new();
    params.push_uniform("lstm.wx", vec![f, 4 * h], &mut rng);
    params.push_uniform("lstm.wh", vec![h, 4 * h], &mut rng);
    params.push_fill("lstm.b", vec![4 * h], 0.0);
    params.push_uniform("head.w", vec![h, config.t_y], &mut rng);
    params.push_fill("head.b", vec![config.t_y], 0.0);
    Lstm { config, params }
}

/// One cell update from pre-projected input gates `xw` (`1 × 4H`).
pub fn lstm_cell_step(
    p: &Leaves,
    xw: &Tensor,
    h: &Tensor,
    c: &Tensor,
    hidden: usize,
) -> TensorResult<(Tensor, Tensor)> {
    let z = xw.add(&h.matmul(p.get("lstm.wh")?)?)?.add_row(p.get("lstm.b")?)?;
    let gate = |k: usize| z.slice_cols(k * hidden, (k + 1) * hidden);
    let i = gate(0)?.sigmoid()?;
    let f = gate(1)?.sigmoid()?;
    let g = gate(2)?.tanh()?;
    let o = gate(3)?.sigmoid()?;
    let c = f.mul(c)?.add(&i.mul(&g)?)?;
    let h = o.mul(&c.tanh()?)?;
    Ok((h, c))
}

impl Lstm {
    /// Forecast from a `T × F` normalised input matrix.
    pub fn forward_inputs(&self, p: &Leaves, inputs: &Tensor) -> TensorResult<Tensor> {
        let (t, f) = inputs.dims2("lstm")?;
        if f != self.config.n_features {
            return Err(TensorError::Shape {
                op: "lstm",
                detail: format!("{f} features, expected {}", self.config.n_features),
            });
        }
        let hidden = self.config.hidden;
        let xw = inputs.matmul(p.get("lstm.wx")?)?;
        let mut h = Tensor::zeros(vec![1, hidden])?;
        let mut c = Tensor::zeros(vec![1, hidden])?;
        for step in 0..t {
            (h, c) = lstm_cell_step(p, &xw.slice_rows(step, step + 1)?, &h, &c, hidden)?;
        }
        linear(&h, p.get("head.w")?, p.get("head.b")?)?.reshape(vec![self.config.t_y])
    }
}

impl SequenceModel for Lstm {
    fn label(&self) -> &'static str {
        "LSTM"
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward(&self, p: &Leaves, sample: &WindowSample, _ctx: &mut ForwardCtx) -> TensorResult<Tensor> {
        if !sample.is_normalized() || sample.target.len() != self.config.t_y {
            return Err(TensorError::Invalid {
                op: "lstm",
                detail: format!("sample {} is unnormalised or has the wrong horizon", sample.id()),
            });
        }
        let data: Vec<f64> = sample.encoder_input.iter().flatten().copied().collect();
        let inputs = Tensor::constant(vec![sample.encoder_input.len(), N_FEATURES], data)?;
        self.forward_inputs(p, &inputs)
    }
}
