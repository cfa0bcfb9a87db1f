//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Keys are grouped by a dotted
//! prefix (`scenario.`, `filter.`, `window.`, `model.`, `train.`, `lstm.`,
//! `baseline.`); see `config/example.conf` for every key with its default.
//! Values given on the command line override the file, which overrides the
//! defaults.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::baselines::{HestonForecastParams, LstmConfig};
use crate::data::{PrepareConfig, WindowConfig};
use crate::error::{Error, Result};
use crate::market::Scenario;
use crate::model::ModelConfig;
use crate::training::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Chain CSV; defaults to `<out>/chain.csv`.
    pub chain: Option<PathBuf>,
    /// Prepared dataset; defaults to `<out>/prepared.json`.
    pub prepared: Option<PathBuf>,
    pub scenario: Scenario,
    pub prepare: PrepareConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub lstm_hidden: usize,
    /// Risk-free rate of the pricing baselines; `None` uses `scenario.r`.
    pub baseline_rate: Option<f64>,
    pub heston_forecast: HestonForecastParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            chain: None,
            prepared: None,
            scenario: Scenario::default(),
            prepare: PrepareConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig { max_epochs: 60, patience: 10, ..TrainConfig::default() },
            lstm_hidden: LstmConfig::default().hidden,
            baseline_rate: None,
            heston_forecast: HestonForecastParams::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::invalid(format!("`{key}`: cannot parse `{value}`: {e}")))
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match value {
        "" | "none" | "auto" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn list(key: &str, value: &str) -> Result<Option<Vec<f64>>> {
    match value {
        "" | "none" | "uniform" => Ok(None),
        v => v.split(',').map(|x| parse(key, x.trim())).collect::<Result<Vec<f64>>>().map(Some),
    }
}

impl RunConfig {
    /// Defaults overridden by `path`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| Error::invalid(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Set one key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let s = &mut self.scenario;
        let h = &mut s.heston;
        let f = &mut self.prepare.filter;
        let m = &mut self.model;
        let t = &mut self.train;
        let hf = &mut self.heston_forecast;
        match key {
            "seed" => self.seed = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "chain" => self.chain = optional(key, v)?,
            "prepared" => self.prepared = optional(key, v)?,

            "scenario.days" => s.n_days = parse(key, v)?,
            "scenario.start_date" => s.start_date = parse::<NaiveDate>(key, v)?,
            "scenario.dt" => s.dt = parse(key, v)?,
            "scenario.drift" => s.drift = optional(key, v)?,
            "scenario.s0" => h.s0 = parse(key, v)?,
            "scenario.v0" => h.v0 = parse(key, v)?,
            "scenario.kappa" => h.kappa = parse(key, v)?,
            "scenario.theta" => h.theta = parse(key, v)?,
            "scenario.xi" => h.xi = parse(key, v)?,
            "scenario.rho" => h.rho = parse(key, v)?,
            "scenario.r" => h.r = parse(key, v)?,
            "scenario.expiry_spacing_days" => s.layout.expiry_spacing_days = parse(key, v)?,
            "scenario.listing_days" => s.layout.listing_days = parse(key, v)?,
            "scenario.strike_multiples" => {
                s.layout.strike_multiples =
                    list(key, v)?.ok_or_else(|| Error::invalid("`scenario.strike_multiples` is empty"))?
            }
            "scenario.strike_tick" => s.layout.strike_tick = parse(key, v)?,
            "scenario.zero_volume_prob" => s.layout.zero_volume_prob = parse(key, v)?,
            "scenario.mean_volume" => s.layout.mean_volume = parse(key, v)?,

            "filter.min_ttm_days" => f.min_ttm_days = parse(key, v)?,
            "filter.moneyness_lo" => f.moneyness_lo = parse(key, v)?,
            "filter.moneyness_hi" => f.moneyness_hi = parse(key, v)?,
            "filter.min_volume" => f.min_volume = parse(key, v)?,
            "filter.min_mid_price" => f.min_mid_price = parse(key, v)?,
            "filter.min_observations" => f.min_observations = parse(key, v)?,
            "window.stride" => self.prepare.window.stride = parse(key, v)?,
            "split.train" => self.prepare.fractions.train = parse(key, v)?,
            "split.validation" => self.prepare.fractions.validation = parse(key, v)?,
            "split.test" => self.prepare.fractions.test = parse(key, v)?,

            "model.t_x" => m.t_x = parse(key, v)?,
            "model.t_y" => m.t_y = parse(key, v)?,
            "model.t_label" => m.t_label = parse(key, v)?,
            "model.d_model" => m.d_model = parse(key, v)?,
            "model.n_heads" => m.n_heads = parse(key, v)?,
            "model.n_encoder_layers" => m.n_encoder_layers = parse(key, v)?,
            "model.n_decoder_layers" => m.n_decoder_layers = parse(key, v)?,
            "model.d_ff" => m.d_ff = parse(key, v)?,
            "model.dropout" => m.dropout = parse(key, v)?,
            "model.attention" => m.attention_kind = parse(key, v)?,
            "model.factor" => m.factor = parse(key, v)?,
            "model.distilling" => m.distilling = parse(key, v)?,

            "train.batch_size" => t.batch_size = parse(key, v)?,
            "train.epochs" => t.max_epochs = parse(key, v)?,
            "train.lr" => t.lr = parse(key, v)?,
            "train.patience" => t.patience = parse(key, v)?,
            "train.lr_halving_patience" => t.lr_halving_patience = optional(key, v)?,
            "train.loss_weights" => t.loss_weights = list(key, v)?,
            "lstm.hidden" => self.lstm_hidden = parse(key, v)?,

            "baseline.rate" => self.baseline_rate = optional(key, v)?,
            "baseline.heston_kappa" => hf.kappa = parse(key, v)?,
            "baseline.heston_theta" => hf.theta = optional(key, v)?,
            "baseline.heston_xi" => hf.xi = parse(key, v)?,
            "baseline.heston_rho" => hf.rho = parse(key, v)?,
            other => return Err(Error::invalid(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// The prepare settings with the window taken from the model lengths.
    pub fn prepare_config(&self) -> PrepareConfig {
        PrepareConfig {
            window: WindowConfig {
                t_x: self.model.t_x,
                t_y: self.model.t_y,
                t_label: self.model.t_label,
                stride: self.prepare.window.stride,
            },
            ..self.prepare
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn lstm_config(&self) -> LstmConfig {
        LstmConfig { hidden: self.lstm_hidden, n_features: self.model.n_features, t_y: self.model.t_y }
    }

    pub fn rate(&self) -> f64 {
        self.baseline_rate.unwrap_or(self.scenario.heston.r)
    }

    pub fn chain_path(&self) -> PathBuf {
        self.chain.clone().unwrap_or_else(|| self.out.join("chain.csv"))
    }

    pub fn prepared_path(&self) -> PathBuf {
        self.prepared.clone().unwrap_or_else(|| self.out.join("prepared.json"))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train_config().validate()?;
        self.scenario.heston.validate()?;
        if self.lstm_hidden == 0 || self.prepare.window.stride == 0 || self.scenario.n_days == 0 {
            return Err(Error::invalid("lstm.hidden, window.stride and scenario.days must be positive"));
        }
        Ok(())
    }
}
